#include "fracgrad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracgrad/errors.hpp"

namespace fracgrad {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double phi1(int i, double x) { return kSqrt2 * std::sin(i * kPi * x); }
double dphi1(int i, double x) { return kSqrt2 * i * kPi * std::cos(i * kPi * x); }

// int_a^b cos(m pi x) dx and int_a^b sin(m pi x) dx.
double int_cos(int m, double a, double b) {
    if (m == 0) return b - a;
    return (std::sin(m * kPi * b) - std::sin(m * kPi * a)) / (m * kPi);
}
double int_sin(int m, double a, double b) {
    if (m == 0) return 0.0;
    return (std::cos(m * kPi * a) - std::cos(m * kPi * b)) / (m * kPi);
}

// int_a^b phi1_i phi1_k and int_a^b phi1_i' phi1_k.
double mass1(int i, int k, double a, double b) { return int_cos(i - k, a, b) - int_cos(i + k, a, b); }
double coup1(int i, int k, double a, double b) { return i * kPi * (int_sin(k + i, a, b) + int_sin(k - i, a, b)); }

}  // namespace

bool SpatialDomain::contains(const Point& p) const {
    for (int a = 0; a < dim; ++a)
        if (!(p[a] >= 0.0 && p[a] <= 1.0)) return false;
    return true;
}

Region Region::interval(double a, double b) {
    Region r;
    r.dim = 1;
    r.lo = {a, 0.0};
    r.hi = {b, 1.0};
    if (!(a < b) || a < 0.0 || b > 1.0) throw InputError("region must satisfy 0 <= a < b <= 1");
    return r;
}

Region Region::box(double a1, double b1, double a2, double b2) {
    Region r;
    r.dim = 2;
    r.lo = {a1, a2};
    r.hi = {b1, b2};
    for (int k = 0; k < 2; ++k)
        if (!(r.lo[k] < r.hi[k]) || r.lo[k] < 0.0 || r.hi[k] > 1.0)
            throw InputError("region must satisfy 0 <= a < b <= 1 on each axis");
    return r;
}

Region Region::whole(const SpatialDomain& d) { return d.dim == 1 ? interval(0.0, 1.0) : box(0.0, 1.0, 0.0, 1.0); }

bool Region::contains(const Point& p) const {
    for (int a = 0; a < dim; ++a)
        if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
}

double Region::volume() const { return dim == 1 ? width(0) : width(0) * width(1); }

std::string Region::describe() const {
    std::ostringstream os;
    os << "[" << lo[0] << "," << hi[0] << "]";
    if (dim == 2) os << "x[" << lo[1] << "," << hi[1] << "]";
    return os.str();
}

std::vector<EigenMode> eigenpairs(const SpatialDomain& domain, int M) {
    if (M < 1) throw InputError("eigenpairs: M must be at least 1");
    std::vector<EigenMode> modes;
    if (domain.dim == 1) {
        for (int i = 1; i <= M; ++i) modes.push_back({1, {i, 0}, i * i * kPi * kPi});
        return modes;
    }
    // Every pair with i^2 + j^2 <= K, for K large enough to hold M modes;
    // all modes below the cut are then present, so the sorted prefix is exact.
    int K = 2;
    for (;;) {
        modes.clear();
        const int imax = static_cast<int>(std::sqrt(static_cast<double>(K)));
        for (int i = 1; i <= imax; ++i)
            for (int j = 1; i * i + j * j <= K; ++j) modes.push_back({2, {i, j}, (i * i + j * j) * kPi * kPi});
        if (static_cast<int>(modes.size()) >= M) break;
        K *= 2;
    }
    std::sort(modes.begin(), modes.end(), [](const EigenMode& a, const EigenMode& b) {
        if (a.lambda_key() != b.lambda_key()) return a.lambda_key() < b.lambda_key();
        return a.index < b.index;
    });
    modes.resize(M);
    return modes;
}

namespace {
void check_point(const EigenMode& mode, const Point& p) {
    if (!SpatialDomain{mode.dim}.contains(p)) throw DomainError("point outside the closed domain");
}
}  // namespace

double eval_eigfun(const EigenMode& mode, const Point& p) {
    check_point(mode, p);
    if (mode.dim == 1) return phi1(mode.index[0], p[0]);
    return phi1(mode.index[0], p[0]) * phi1(mode.index[1], p[1]);
}

Vec2 eval_eigfun_grad(const EigenMode& mode, const Point& p) {
    check_point(mode, p);
    if (mode.dim == 1) return {dphi1(mode.index[0], p[0]), 0.0};
    const int i = mode.index[0], j = mode.index[1];
    return {dphi1(i, p[0]) * phi1(j, p[1]), phi1(i, p[0]) * dphi1(j, p[1])};
}

SpatialQuadrature SpatialQuadrature::over(const Region& region, int order, int panels) {
    SpatialQuadrature q;
    q.dim = region.dim;
    for (int a = 0; a < region.dim; ++a) q.axis[a] = composite_gauss_legendre(region.lo[a], region.hi[a], order, panels);
    return q;
}

SpatialQuadrature SpatialQuadrature::for_modes(const Region& region, int max_index, int order) {
    SpatialQuadrature q;
    q.dim = region.dim;
    for (int a = 0; a < region.dim; ++a) {
        const int panels = std::max(1, static_cast<int>(std::ceil(kPi * max_index * region.width(a) / 12.0)));
        q.axis[a] = composite_gauss_legendre(region.lo[a], region.hi[a], order, panels);
    }
    return q;
}

std::size_t SpatialQuadrature::size() const {
    return dim == 1 ? axis[0].nodes.size() : axis[0].nodes.size() * axis[1].nodes.size();
}

double region_inner_product(const ScalarField& f, const ScalarField& g, const Region& region,
                            const SpatialQuadrature& quad) {
    (void)region;
    double s = 0.0;
    quad.for_each([&](const Point& p, double w) { s += w * f(p) * g(p); });
    return s;
}

double grad_coupling(const EigenMode& q, int d, const EigenMode& k) {
    auto c1 = [](int a, int b) -> double {
        if ((a + b) % 2 == 0) return 0.0;
        return 4.0 * a * b / static_cast<double>(b * b - a * a);
    };
    if (q.dim == 1) return d == 1 ? c1(q.index[0], k.index[0]) : 0.0;
    if (d == 1) return q.index[1] == k.index[1] ? c1(q.index[0], k.index[0]) : 0.0;
    return q.index[0] == k.index[0] ? c1(q.index[1], k.index[1]) : 0.0;
}

double grad_coupling_on(const EigenMode& q, int d, const EigenMode& k, const Region& r) {
    if (q.dim == 1) return d == 1 ? coup1(q.index[0], k.index[0], r.lo[0], r.hi[0]) : 0.0;
    if (d == 1)
        return coup1(q.index[0], k.index[0], r.lo[0], r.hi[0]) * mass1(q.index[1], k.index[1], r.lo[1], r.hi[1]);
    return mass1(q.index[0], k.index[0], r.lo[0], r.hi[0]) * coup1(q.index[1], k.index[1], r.lo[1], r.hi[1]);
}

double mass_on(const EigenMode& q, const EigenMode& k, const Region& r) {
    const double m = mass1(q.index[0], k.index[0], r.lo[0], r.hi[0]);
    if (q.dim == 1) return m;
    return m * mass1(q.index[1], k.index[1], r.lo[1], r.hi[1]);
}

}  // namespace fracgrad
