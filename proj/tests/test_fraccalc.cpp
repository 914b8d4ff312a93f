#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "fracgrad/fraccalc.hpp"

using namespace fracgrad;
using Big = boost::multiprecision::cpp_bin_float_100;

namespace {

// Power series in 100-digit arithmetic. Cancellation costs about
// |z|^(1/alpha)/ln(10) digits, so callers keep that below ~60.
bool big_series_ok(double alpha, double z) { return std::pow(std::abs(z), 1.0 / alpha) < 130.0; }

double big_series(double alpha, double z) {
    Big sum = 0, zz = z, za = std::abs(z);
    for (int k = 0; k < 100000; ++k) {
        Big term = boost::multiprecision::pow(zz, k) / boost::multiprecision::tgamma(Big(alpha) * k + 1);
        sum += term;
        if (alpha * k > 2.0 * std::pow(std::abs(z), 1.0 / alpha) + 10 && abs(term) < Big("1e-60")) break;
    }
    return static_cast<double>(sum);
}

double erfcx(double x) { return std::exp(x * x) * std::erfc(x); }

std::vector<double> sample(const TimeGrid& g, double (*f)(double)) {
    std::vector<double> v;
    for (double t : g.nodes) v.push_back(f(t));
    return v;
}

}  // namespace

TEST_CASE("mlf spec examples") {
    CHECK(mlf(0.7, 0.0).value == 1.0);
    CHECK(mlf(1.0, -1.0).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    const double oracle = erfcx(1.0);
    CHECK(oracle == doctest::Approx(0.42758357).epsilon(1e-8));
    CHECK(mlf(0.5, -1.0).value == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(big_series(0.5, -1.0) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("mlf rejects alpha outside (0,1]") {
    CHECK_THROWS_AS(mlf(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(mlf(1.2, -1.0), DomainError);
    CHECK_THROWS_AS(mlf(-0.5, 0.0), DomainError);
}

TEST_CASE("mlf regimes") {
    CHECK(mlf(0.5, -0.5).regime == MlfRegime::series);
    CHECK(mlf(0.5, 2.0).regime == MlfRegime::series);
    CHECK(mlf(0.5, -1e4).regime == MlfRegime::asymptotic);
    const auto mid = mlf(0.84, -3.0);
    CHECK(mid.regime == MlfRegime::integral);
    CHECK(mid.est_error <= 1e-12 * mid.value);
    for (double z : {-0.3, -2.0, -7.0, -40.0, -500.0}) {
        auto r = mlf(0.6, z);
        if (r.regime == MlfRegime::asymptotic) CHECK(std::abs(z) > kMlfSeriesRadius);
        CHECK(std::isfinite(r.est_error));
    }
}

TEST_CASE("mlf matches extended-precision series") {
    for (double alpha : {0.3, 0.5, 0.7, 0.84, 0.95, 0.999}) {
        for (double x : {0.1, 0.9, 1.5, 3.0, 6.0, 10.0}) {
            if (!big_series_ok(alpha, -x)) continue;
            INFO("alpha=" << alpha << " x=" << x);
            CHECK(mlf(alpha, -x).value == doctest::Approx(big_series(alpha, -x)).epsilon(1e-12));
        }
    }
    CHECK(mlf(0.84, 2.5).value == doctest::Approx(big_series(0.84, 2.5)).epsilon(1e-13));
}

TEST_CASE("mlf at alpha = 1/2 equals the scaled complementary error function") {
    for (double x = 0.0; x <= 25.0; x += 0.05) {
        INFO("x=" << x);
        CHECK(mlf(0.5, -x).value == doctest::Approx(erfcx(x)).epsilon(1e-12));
    }
}

TEST_CASE("mlf regime boundaries are continuous") {
    for (double alpha : {0.3, 0.5, 0.84, 0.999}) {
        const double a = mlf(alpha, -kMlfSeriesRadius).value;
        const double b = mlf(alpha, std::nextafter(-kMlfSeriesRadius, -2.0)).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    // The asymptotic branch against independent oracles.
    auto r = mlf(0.84, -30.0);
    CHECK(r.regime == MlfRegime::asymptotic);
    CHECK(r.value == doctest::Approx(big_series(0.84, -30.0)).epsilon(1e-12));
    r = mlf(0.5, -20.0);
    CHECK(r.regime == MlfRegime::asymptotic);
    CHECK(r.value == doctest::Approx(erfcx(20.0)).epsilon(1e-12));
}

TEST_CASE("mlf decay is monotone, positive and algebraically bounded") {
    for (double alpha : {0.3, 0.5, 0.84, 1.0}) {
        double prev = mlf(alpha, 0.0).value;
        double C = 0.0;
        // exp(-x) underflows double precision beyond x ~ 708.
        const double xmax = alpha == 1.0 ? 700.0 : 1e4;
        for (int i = 1; i <= 3000; ++i) {
            const double x = std::pow(10.0, -3.0 + (3.0 + std::log10(xmax)) * i / 3000.0);
            const double v = mlf(alpha, -x).value;
            INFO("alpha=" << alpha << " x=" << x);
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
            C = std::max(C, v * (1.0 + x));
        }
        if (alpha == 0.5 || alpha == 0.84) CHECK(C <= 10.0);
    }
}

TEST_CASE("mlf with alpha = 1 is the exponential") {
    for (double z = -50.0; z <= 5.0; z += 0.01)
        CHECK(mlf(1.0, z).value == doctest::Approx(std::exp(z)).epsilon(1e-10));
}

TEST_CASE("caputo derivative examples") {
    const TimeGrid g = TimeGrid::uniform(1.0, 2001);
    std::vector<double> c(g.size(), 3.0);
    CHECK(caputo_derivative(g, c, 0.4, 0.5) == doctest::Approx(0.0).epsilon(1e-15));

    auto lin = sample(g, [](double t) { return t; });
    CHECK(caputo_derivative(g, lin, 0.5, 1.0) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-12));

    // Near the classical limit the value is 2 t^(2-a)/Gamma(3-a), not exactly 2t.
    const TimeGrid fine = TimeGrid::uniform(1.0, 20001);
    auto sq = sample(fine, [](double t) { return t * t; });
    const double a = 0.999;
    const double exact = 2.0 * std::pow(0.5, 2.0 - a) / std::tgamma(3.0 - a);
    CHECK(caputo_derivative(fine, sq, a, 0.5) == doctest::Approx(exact).epsilon(1e-4));
    CHECK(std::abs(exact - 1.0) < 1.2e-3);
    // alpha = 1 reduces to the backward difference.
    const double h = fine.nodes[1];
    CHECK(caputo_derivative(fine, sq, 1.0, 0.5) == doctest::Approx(1.0 - h).epsilon(1e-12));
}

TEST_CASE("caputo derivative errors") {
    const TimeGrid g = TimeGrid::uniform(1.0, 11);
    std::vector<double> u(g.size(), 1.0);
    CHECK_THROWS_AS(caputo_derivative(g, u, 0.5, 0.0), DomainError);
    TimeGrid bad = g;
    std::swap(bad.nodes[3], bad.nodes[4]);
    CHECK_THROWS_AS(caputo_derivative(bad, u, 0.5, 0.5), InputError);
}

TEST_CASE("right Riemann-Liouville integral") {
    const TimeGrid g = TimeGrid::uniform(1.0, 1001);
    std::vector<double> zero(g.size(), 0.0), one(g.size(), 1.0);
    CHECK(rl_integral_right(g, zero, 0.5, 0.0) == 0.0);
    CHECK(rl_integral_right(g, one, 0.5, 0.0) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    auto lin = sample(g, [](double t) { return t; });
    CHECK(rl_integral_right(g, lin, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rl_integral_right(g, one, 0.5, 1.0) == 0.0);

    // alpha = 1 is the plain trapezoid integral over [t, T].
    auto s = sample(g, [](double t) { return std::sin(3.0 * t); });
    const std::size_t m = 300;
    double trap = 0.0;
    for (std::size_t j = m; j + 1 < g.size(); ++j) trap += 0.5 * (g.nodes[j + 1] - g.nodes[j]) * (s[j] + s[j + 1]);
    CHECK(rl_integral_right(g, s, 1.0, g.nodes[m]) == doctest::Approx(trap).epsilon(1e-10));

    // Power-law closed form for a linear integrand.
    const double t = g.nodes[m], a = 0.3, L = 1.0 - t;
    const double exact = (t * std::pow(L, a) / a + std::pow(L, a + 1.0) / (a + 1.0)) / std::tgamma(a);
    CHECK(rl_integral_right(g, lin, a, t) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("right Riemann-Liouville derivative") {
    const TimeGrid g = TimeGrid::uniform(1.0, 2001);
    std::vector<double> c(g.size(), 2.5), zero(g.size(), 0.0);
    // -d/ds of c (T-s)^(1-a)/Gamma(2-a) is c (T-s)^(-a)/Gamma(1-a).
    const double expect = 2.5 * std::pow(0.5, -0.5) / std::tgamma(0.5);
    CHECK(rl_derivative_right(g, c, 0.5, 0.5) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(expect == doctest::Approx(2.5 * 0.7978845608).epsilon(1e-9));
    CHECK(rl_derivative_right(g, zero, 0.5, 0.5) == 0.0);

    auto sq = sample(g, [](double t) { return t * t; });
    CHECK(rl_derivative_right(g, sq, 1.0, 0.5) == doctest::Approx(-1.0).epsilon(1e-9));
    // r = e^2 near the classical limit: r(T)(T-t)^(-a)/G(1-a) - (1/G(1-a)) int (e-t)^(-a) 2e de.
    const double a = 0.999, t = 0.5, L = 0.5;
    const double ig = 1.0 / std::tgamma(1.0 - a);
    const double integ = 2.0 * std::pow(L, 2.0 - a) / (2.0 - a) + 2.0 * t * std::pow(L, 1.0 - a) / (1.0 - a);
    const double exact = ig * (std::pow(L, -a) - integ);
    CHECK(rl_derivative_right(g, sq, a, t) == doctest::Approx(exact).epsilon(1e-5));
    CHECK(std::abs(exact + 1.0) < 1.2e-3);

    CHECK_THROWS_AS(rl_derivative_right(g, c, 0.5, 1.0), AccuracyError);
    CHECK_THROWS_AS(rl_derivative_right(g, c, 0.5, g.nodes[g.size() - 2]), AccuracyError);
}

TEST_CASE("fractional integration by parts") {
    auto residual = [](std::size_t n, double alpha, double (*u)(double), double (*v)(double)) {
        const TimeGrid g = TimeGrid::uniform(1.0, n);
        return check_fractional_ibp(g, sample(g, u), sample(g, v), alpha);
    };
    auto zero = [](double) { return 0.0; };
    auto sq = [](double t) { return t * t; };
    auto rev = [](double t) { return 1.0 - t; };
    auto lin = [](double t) { return t; };
    auto sn = [](double t) { return std::sin(t); };
    auto one = [](double) { return 1.0; };

    CHECK(residual(257, 0.5, zero, rev) == 0.0);
    CHECK(residual(2048, 0.5, sq, rev) <= 1e-5);
    CHECK(residual(2048, 0.5, lin, lin) <= 1e-5);
    CHECK(residual(2048, 0.84, sn, one) <= 1e-5);
    CHECK(residual(513, 1.0, lin, lin) <= 1e-10);

    const double r1 = residual(512, 0.5, sq, rev), r2 = residual(1024, 0.5, sq, rev);
    CHECK(r1 / r2 >= 2.0);
    const double s1 = residual(512, 0.5, lin, lin), s2 = residual(1024, 0.5, lin, lin);
    CHECK(s1 / s2 >= 2.0);
}

TEST_CASE("time grids") {
    const auto g = TimeGrid::graded_lobatto(2.0, 8, 6, 0.5);
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 2.0);
    CHECK_NOTHROW(g.validate());
    // Polynomial exactness on each panel: integral of t^3 over [0,2].
    std::vector<double> c;
    for (double t : g.nodes) c.push_back(t * t * t);
    CHECK(g.integrate(c) == doctest::Approx(4.0).epsilon(1e-13));

    const auto u = TimeGrid::uniform(1.0, 11, 0.5);
    std::vector<double> f;
    for (double t : u.nodes) f.push_back(std::sqrt(t));
    // Exact for sqrt on the first interval; trapezoid beyond.
    CHECK(u.integrate(f) == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 1), InputError);

    const auto gl = gauss_legendre(32);
    double s = 0.0;
    for (int i = 0; i < 32; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 62);
    CHECK(s == doctest::Approx(2.0 / 63.0).epsilon(1e-13));
}
