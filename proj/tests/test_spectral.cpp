#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracgrad/errors.hpp"
#include "fracgrad/spectral.hpp"

using namespace fracgrad;
namespace {
constexpr double pi = std::numbers::pi;

ScalarField phi(const EigenMode& m) {
    return [m](const Point& p) { return eval_eigfun(m, p); };
}
ScalarField dphi(const EigenMode& m, int d) {
    return [m, d](const Point& p) { return eval_eigfun_grad(m, p)[d - 1]; };
}
}  // namespace

TEST_CASE("eigenpairs ordering") {
    auto m1 = eigenpairs(SpatialDomain::interval(), 3);
    REQUIRE(m1.size() == 3);
    CHECK(m1[0].lambda == doctest::Approx(pi * pi));
    CHECK(m1[1].lambda == doctest::Approx(4 * pi * pi));
    CHECK(m1[2].lambda == doctest::Approx(9 * pi * pi));

    auto m2 = eigenpairs(SpatialDomain::square(), 4);
    const double expect[] = {2, 5, 5, 8};
    const std::array<int, 2> idx[] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    for (int i = 0; i < 4; ++i) {
        CHECK(m2[i].lambda == doctest::Approx(expect[i] * pi * pi));
        CHECK(m2[i].index == idx[i]);
    }
    auto one = eigenpairs(SpatialDomain::square(), 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].lambda == doctest::Approx(19.7392088).epsilon(1e-8));
    CHECK_THROWS_AS(eigenpairs(SpatialDomain::interval(), 0), InputError);

    // The truncated 2D list is a prefix of the full sorted enumeration.
    auto big = eigenpairs(SpatialDomain::square(), 60);
    for (std::size_t i = 1; i < big.size(); ++i) {
        CHECK(big[i - 1].lambda_key() <= big[i].lambda_key());
        if (big[i - 1].lambda_key() == big[i].lambda_key()) CHECK(big[i - 1].index < big[i].index);
    }
    int below = 0;
    for (int i = 1; i < 20; ++i)
        for (int j = 1; j < 20; ++j)
            if (i * i + j * j < big.back().lambda_key()) ++below;
    int listed_below = 0;
    for (auto& m : big)
        if (m.lambda_key() < big.back().lambda_key()) ++listed_below;
    CHECK(below == listed_below);
}

TEST_CASE("eigenfunction evaluation") {
    auto m2 = eigenpairs(SpatialDomain::square(), 4);
    CHECK(eval_eigfun(m2[0], {0.5, 0.5}) == doctest::Approx(2.0));
    CHECK(eval_eigfun(m2[3], {0.0, 0.3}) == doctest::Approx(0.0));
    CHECK(eval_eigfun(m2[3], {0.3, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
    auto m1 = eigenpairs(SpatialDomain::interval(), 2);
    CHECK(eval_eigfun(m1[1], {0.25, 0.0}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(eval_eigfun(m1[1], {1.0, 0.0})) < 1e-15);
    CHECK_THROWS_AS(eval_eigfun(m1[0], {1.5, 0.0}), DomainError);
    CHECK_THROWS_AS(eval_eigfun(m2[0], {0.5, -0.1}), DomainError);
    CHECK_THROWS_AS(eval_eigfun_grad(m1[0], {-0.01, 0.0}), DomainError);
}

TEST_CASE("eigenfunction gradients") {
    auto m2 = eigenpairs(SpatialDomain::square(), 4);
    auto g = eval_eigfun_grad(m2[0], {0.5, 0.5});
    CHECK(std::abs(g[0]) < 1e-15);
    CHECK(std::abs(g[1]) < 1e-15);
    auto m1 = eigenpairs(SpatialDomain::interval(), 1);
    CHECK(eval_eigfun_grad(m1[0], {0.0, 0.0})[0] == doctest::Approx(std::sqrt(2.0) * pi));
    CHECK(std::abs(eval_eigfun_grad(m2[1], {0.5, 0.25})[1]) < 1e-14);
    // Finite-difference check.
    const Point p{0.31, 0.77};
    const double h = 1e-6;
    for (auto& m : m2) {
        auto gr = eval_eigfun_grad(m, p);
        CHECK(gr[0] == doctest::Approx((eval_eigfun(m, {p[0] + h, p[1]}) - eval_eigfun(m, {p[0] - h, p[1]})) / (2 * h)).epsilon(1e-7));
        CHECK(gr[1] == doctest::Approx((eval_eigfun(m, {p[0], p[1] + h}) - eval_eigfun(m, {p[0], p[1] - h})) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("region inner products") {
    const auto omega = Region::whole(SpatialDomain::interval());
    const auto quad = SpatialQuadrature::over(omega);
    auto m = eigenpairs(SpatialDomain::interval(), 2);
    CHECK(region_inner_product(phi(m[0]), phi(m[0]), omega, quad) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(region_inner_product(phi(m[0]), phi(m[1]), omega, quad)) < 1e-12);
    // Oracle: dense trapezoid of 2 pi cos(pi y) sin(2 pi y).
    const int n = 200000;
    double trap = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double y = static_cast<double>(i) / n;
        const double f = 2 * pi * std::cos(pi * y) * std::sin(2 * pi * y);
        trap += (i == 0 || i == n ? 0.5 : 1.0) * f / n;
    }
    CHECK(trap == doctest::Approx(8.0 / 3.0).epsilon(1e-9));
    CHECK(region_inner_product(dphi(m[0], 1), phi(m[1]), omega, quad) == doctest::Approx(trap).epsilon(1e-9));
}

TEST_CASE("grad coupling closed form") {
    auto m = eigenpairs(SpatialDomain::interval(), 3);
    CHECK(grad_coupling(m[0], 1, m[1]) == doctest::Approx(8.0 / 3.0));
    CHECK(grad_coupling(m[0], 1, m[2]) == 0.0);
    CHECK(grad_coupling(m[1], 1, m[1]) == 0.0);
}

TEST_CASE("spectral invariants up to M = 25") {
    for (auto domain : {SpatialDomain::interval(), SpatialDomain::square()}) {
        const auto modes = eigenpairs(domain, 25);
        int kmax = 0;
        for (auto& m : modes) kmax = std::max(kmax, m.max_index());
        const auto omega = Region::whole(domain);
        const auto quad = SpatialQuadrature::for_modes(omega, kmax);
        double worst_orth = 0, worst_anti = 0, worst_eig = 0, worst_closed = 0;
        for (auto& q : modes) {
            for (auto& k : modes) {
                const double ip = region_inner_product(phi(q), phi(k), omega, quad);
                worst_orth = std::max(worst_orth, std::abs(ip - (&q == &k ? 1.0 : 0.0)));
                double grad_ip = 0.0;
                for (int d = 1; d <= domain.dim; ++d) {
                    const double closed = grad_coupling(q, d, k);
                    CHECK(closed == -grad_coupling(k, d, q));
                    const double a = region_inner_product(dphi(q, d), phi(k), omega, quad);
                    const double b = region_inner_product(dphi(k, d), phi(q), omega, quad);
                    worst_anti = std::max(worst_anti, std::abs(a + b));
                    worst_closed = std::max(worst_closed, std::abs(a - closed));
                    grad_ip += region_inner_product(dphi(q, d), dphi(k, d), omega, quad);
                }
                worst_eig = std::max(worst_eig, std::abs(grad_ip - (&q == &k ? q.lambda : 0.0)));
            }
        }
        INFO("dim=" << domain.dim);
        CHECK(worst_orth < 1e-10);
        CHECK(worst_anti < 1e-10);
        CHECK(worst_closed < 1e-10);
        CHECK(worst_eig < 1e-8);
    }
}

TEST_CASE("box-restricted closed forms match quadrature") {
    for (auto domain : {SpatialDomain::interval(), SpatialDomain::square()}) {
        const auto modes = eigenpairs(domain, 12);
        const Region r = domain.dim == 1 ? Region::interval(0.35, 0.65) : Region::box(0.0, 1.0, 0.125, 0.625);
        const auto quad = SpatialQuadrature::for_modes(r, 12);
        for (auto& q : modes) {
            for (auto& k : modes) {
                CHECK(mass_on(q, k, r) == doctest::Approx(region_inner_product(phi(q), phi(k), r, quad)).epsilon(1e-12).scale(1.0));
                for (int d = 1; d <= domain.dim; ++d)
                    CHECK(grad_coupling_on(q, d, k, r) ==
                          doctest::Approx(region_inner_product(dphi(q, d), phi(k), r, quad)).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("regions") {
    CHECK_THROWS_AS(Region::interval(0.5, 0.5), InputError);
    CHECK_THROWS_AS(Region::interval(-0.1, 0.5), InputError);
    CHECK_THROWS_AS(Region::box(0, 1, 0.3, 1.2), InputError);
    CHECK(Region::box(0, 0.5, 0.2, 0.6).volume() == doctest::Approx(0.2));
    CHECK(Region::interval(0.2, 0.4).contains({0.3, 0.9}));
}
