// Boost 1.74 tanh_sinh asserts on a branch it then overwrites; the value is
// unaffected, so keep the assert out of debug builds too.
#define BOOST_DISABLE_ASSERTS
#include "fracgrad/fraccalc.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace fracgrad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "alpha must lie in (0,1], got " << alpha;
        throw DomainError(os.str());
    }
}

bool is_pole(double x) {
    return x <= 0.0 && std::abs(x - std::round(x)) < 1e-12;
}

// log|1/Gamma(x)| and its sign; sign 0 at a pole.
double log_rgamma(double x, int& sign) {
    if (is_pole(x)) {
        sign = 0;
        return -std::numeric_limits<double>::infinity();
    }
    int s = 1;
    const double lg = boost::math::lgamma(x, &s);
    sign = s;
    return -lg;
}

MlfEvalReport mlf_series(double alpha, double z) {
    MlfEvalReport r;
    r.regime = MlfRegime::series;
    if (z == 0.0) {
        r.value = 1.0;
        r.terms_used = 1;
        return r;
    }
    const double lz = std::log(std::abs(z));
    double sum = 1.0, abs_sum = 1.0, last = 1.0;
    int k = 1;
    for (; k < 20000; ++k) {
        const double mag = std::exp(k * lz - std::lgamma(alpha * k + 1.0));
        const double term = (z < 0.0 && (k % 2)) ? -mag : mag;
        sum += term;
        abs_sum += mag;
        last = mag;
        const bool past_peak = std::lgamma(alpha * (k + 1) + 1.0) - std::lgamma(alpha * k + 1.0) > lz;
        if (past_peak && mag <= 1e-17 * std::abs(sum)) break;
        if (!std::isfinite(sum)) break;
    }
    r.value = sum;
    r.terms_used = k + 1;
    r.est_error = last + 4.0 * kEps * abs_sum;
    return r;
}

// Optimally truncated algebraic expansion for z = -x, x large.
MlfEvalReport mlf_asymptotic(double alpha, double x) {
    MlfEvalReport r;
    r.regime = MlfRegime::asymptotic;
    const double lx = std::log(x);
    double sum = 0.0, prev = std::numeric_limits<double>::infinity();
    double omitted = std::numeric_limits<double>::infinity();
    int used = 0;
    for (int k = 1; k < 400; ++k) {
        int sign = 0;
        const double lc = log_rgamma(1.0 - alpha * k, sign);
        if (sign == 0) continue;
        const double mag = std::exp(lc - k * lx);
        if (mag > prev) {
            omitted = mag;
            break;
        }
        const double term = ((k % 2) ? 1.0 : -1.0) * sign * mag;
        if (used > 0 && mag <= 1e-18 * std::abs(sum)) {
            omitted = mag;
            break;
        }
        sum += term;
        prev = mag;
        used = k;
    }
    r.value = sum;
    r.terms_used = used;
    r.est_error = omitted + 4.0 * kEps * std::abs(sum);
    return r;
}

// E_alpha(-x) from its Laplace-type integral representation, rescaled so the
// integrand decays like exp(-s^(1/alpha)).
MlfEvalReport mlf_integral(double alpha, double x) {
    MlfEvalReport r;
    r.regime = MlfRegime::integral;
    const double c = std::cos(alpha * std::numbers::pi);
    const double sn = std::sin(alpha * std::numbers::pi);
    const double pref = sn / (alpha * std::numbers::pi) * x;
    const double ia = 1.0 / alpha;
    const double smax = std::pow(60.0, alpha);
    const double peak = -x * c;
    const double width = x * sn;
    auto g = [&](double s) { return std::exp(-std::pow(s, ia)); };

    // For alpha > 1/2 the denominator is (s - peak)^2 + width^2. The first two
    // Taylor terms of g about the peak are integrated in closed form so the
    // numerical remainder stays bounded as alpha -> 1.
    const bool subtract = peak > 0.0 && peak < smax;
    double g0 = 0.0, g1 = 0.0, analytic = 0.0;
    if (subtract) {
        g0 = g(peak);
        g1 = -ia * std::pow(peak, ia - 1.0) * g0;
        const double lo = -peak, hi = smax - peak;
        analytic = g0 / width * (std::atan(hi / width) - std::atan(lo / width)) +
                   0.5 * g1 * std::log((hi * hi + width * width) / (lo * lo + width * width));
    }
    int evals = 0;
    auto f = [&](double s) {
        ++evals;
        const double den = s * s + 2.0 * s * x * c + x * x;
        if (!subtract) return g(s) / den;
        const double d = s - peak;
        return (g(s) - g0 - g1 * d) / den;
    };

    std::vector<double> cuts{0.0, smax};
    if (subtract) {
        for (double k : {0.0, 1.0, 8.0, 64.0}) {
            for (double sgn : {-1.0, 1.0}) {
                const double p = peak + sgn * k * width;
                if (p > 1e-12 * smax && p < smax * (1.0 - 1e-12)) cuts.push_back(p);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    double total = analytic, err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] <= 1e-13 * smax) continue;
        double e = 0.0, l1 = 0.0;
        total += ts.integrate(f, cuts[i], cuts[i + 1], 1e-15, &e, &l1);
        err += e;
    }
    r.value = pref * total;
    r.est_error = pref * err + 16.0 * kEps * std::abs(r.value);
    r.terms_used = evals;
    return r;
}

}  // namespace

const char* to_string(MlfRegime r) {
    switch (r) {
        case MlfRegime::series: return "series";
        case MlfRegime::integral: return "integral";
        case MlfRegime::asymptotic: return "asymptotic";
    }
    return "?";
}

MlfAccuracyError::MlfAccuracyError(const MlfEvalReport& r)
    : AccuracyError("Mittag-Leffler evaluation did not reach tolerance (" + std::string(to_string(r.regime)) +
                    ", est_error " + std::to_string(r.est_error) + ")"),
      report_(r) {}

double rgamma(double x) {
    int sign = 0;
    const double l = log_rgamma(x, sign);
    return sign == 0 ? 0.0 : sign * std::exp(l);
}

MlfEvalReport mlf(double alpha, double z) {
    check_alpha(alpha);
    if (!std::isfinite(z)) throw DomainError("mlf: argument must be finite");
    MlfEvalReport r;
    if (alpha == 1.0) {
        r.value = std::exp(z);
        r.regime = MlfRegime::series;
        r.est_error = kEps * r.value;
        return r;
    }
    if (z >= -kMlfSeriesRadius) {
        r = mlf_series(alpha, z);
    } else {
        const double x = -z;
        r = mlf_asymptotic(alpha, x);
        if (!(r.est_error <= 1e-14 * std::abs(r.value))) r = mlf_integral(alpha, x);
    }
    if (!std::isfinite(r.value) || !(r.est_error <= kMlfTolerance * std::abs(r.value)))
        throw MlfAccuracyError(r);
    return r;
}

namespace {

void check_samples(const TimeGrid& grid, std::size_t n) {
    if (n != grid.size()) throw InputError("sample count does not match the time grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid.nodes[i] > grid.nodes[i - 1])) throw InputError("time grid is not strictly increasing");
}

// (1/Gamma(a)) int_{t_m}^{T} (e - t_m)^{a-1} r(e) de for piecewise-linear r.
// Also covers a = 1 (plain trapezoid).
double right_integral_at(const TimeGrid& grid, std::span<const double> r, double a, std::size_t m) {
    const std::size_t n = grid.size();
    if (m + 1 >= n) return 0.0;
    const double base = grid.nodes[m];
    double s = 0.0;
    for (std::size_t j = m; j + 1 < n; ++j) {
        const double A = grid.nodes[j] - base;
        const double B = grid.nodes[j + 1] - base;
        const double h = B - A;
        const double i0 = (std::pow(B, a) - std::pow(A, a)) / a;
        const double i1 = (std::pow(B, a + 1.0) - std::pow(A, a + 1.0)) / (a + 1.0);
        const double wl = (B * i0 - i1) / h;
        const double wr = (i1 - A * i0) / h;
        s += wl * r[j] + wr * r[j + 1];
    }
    return s / std::tgamma(a);
}

}  // namespace

double caputo_derivative(const TimeGrid& grid, std::span<const double> u, double alpha, double t) {
    check_alpha(alpha);
    check_samples(grid, u.size());
    if (t <= 0.0) throw DomainError("caputo_derivative: t must be positive");
    const std::size_t n = grid.locate(t);
    const double tn = grid.nodes[n];
    if (alpha == 1.0) return (u[n] - u[n - 1]) / (tn - grid.nodes[n - 1]);
    const double b = 1.0 - alpha;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = grid.nodes[j + 1] - grid.nodes[j];
        const double k = std::pow(tn - grid.nodes[j], b) - std::pow(tn - grid.nodes[j + 1], b);
        s += (u[j + 1] - u[j]) / h * k;
    }
    return s / std::tgamma(2.0 - alpha);
}

double rl_integral_right(const TimeGrid& grid, std::span<const double> r, double alpha, double t) {
    check_alpha(alpha);
    check_samples(grid, r.size());
    return right_integral_at(grid, r, alpha, grid.locate(t));
}

namespace {

// I^{1-alpha}_{T-} r on every node; the value at T is r(T) when alpha = 1.
std::vector<double> complementary_integral(const TimeGrid& grid, std::span<const double> r, double alpha) {
    std::vector<double> F(grid.size());
    const double a = 1.0 - alpha;
    for (std::size_t m = 0; m < grid.size(); ++m)
        F[m] = a == 0.0 ? r[m] : right_integral_at(grid, r, a, m);
    return F;
}

}  // namespace

double rl_derivative_right(const TimeGrid& grid, std::span<const double> r, double alpha, double t) {
    check_alpha(alpha);
    check_samples(grid, r.size());
    const std::size_t m = grid.locate(t);
    const std::size_t last = grid.size() - 1;
    if (m + 1 >= last)
        throw AccuracyError("rl_derivative_right: t within one grid step of T, stencil leaves the domain");
    const double a = 1.0 - alpha;
    auto F = [&](std::size_t i) { return a == 0.0 ? r[i] : right_integral_at(grid, r, a, i); };
    if (m == 0) {
        // One-sided three-point difference at the left end.
        const double h1 = grid.nodes[1] - grid.nodes[0];
        const double h2 = grid.nodes[2] - grid.nodes[1];
        const double f0 = F(0), f1 = F(1), f2 = F(2);
        const double d = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f0 + (h1 + h2) / (h1 * h2) * f1 -
                         h1 / (h2 * (h1 + h2)) * f2;
        return -d;
    }
    const double hl = grid.nodes[m] - grid.nodes[m - 1];
    const double hr = grid.nodes[m + 1] - grid.nodes[m];
    const double fl = F(m - 1), f0 = F(m), fr = F(m + 1);
    const double d = (-hr / (hl * (hl + hr))) * fl + ((hr - hl) / (hl * hr)) * f0 + (hl / (hr * (hl + hr))) * fr;
    return -d;
}

double check_fractional_ibp(const TimeGrid& grid, std::span<const double> u, std::span<const double> v,
                            double alpha) {
    check_alpha(alpha);
    check_samples(grid, u.size());
    check_samples(grid, v.size());
    const std::size_t n = grid.size();

    // Left side: Caputo derivative of u (zero at t = 0) against v, trapezoid rule.
    double left = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double h = grid.nodes[j] - grid.nodes[j - 1];
        const double dl = j == 1 ? 0.0 : caputo_derivative(grid, u, alpha, grid.nodes[j - 1]);
        const double dr = caputo_derivative(grid, u, alpha, grid.nodes[j]);
        left += 0.5 * h * (dl * v[j - 1] + dr * v[j]);
    }

    // Right side: the derivative term is the Stieltjes sum of u against -dF,
    // which keeps the (T - t)^(-alpha) endpoint singularity integrable.
    const std::vector<double> F = complementary_integral(grid, v, alpha);
    double right = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) right -= (F[j + 1] - F[j]) * 0.5 * (u[j] + u[j + 1]);
    right += u[n - 1] * F[n - 1] - u[0] * F[0];
    return std::abs(left - right);
}

}  // namespace fracgrad
