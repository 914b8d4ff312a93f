#pragma once

#include <span>

#include "fracgrad/errors.hpp"
#include "fracgrad/quadrature.hpp"

namespace fracgrad {

enum class MlfRegime { series, integral, asymptotic };

const char* to_string(MlfRegime r);

struct MlfEvalReport {
    double value = 0.0;
    MlfRegime regime = MlfRegime::series;
    int terms_used = 0;  // series/asymptotic terms, or integrand evaluations
    double est_error = 0.0;
};

class MlfAccuracyError : public AccuracyError {
public:
    explicit MlfAccuracyError(const MlfEvalReport& r);
    const MlfEvalReport& report() const { return report_; }

private:
    MlfEvalReport report_;
};

// Arguments with |z| <= this are summed by the power series.
inline constexpr double kMlfSeriesRadius = 1.0;
// Relative error accepted from every branch.
inline constexpr double kMlfTolerance = 1e-12;

// One-parameter Mittag-Leffler function E_alpha(z) for real z.
MlfEvalReport mlf(double alpha, double z);

inline double mlf_value(double alpha, double z) { return mlf(alpha, z).value; }

// 1 / Gamma(x), zero at the poles.
double rgamma(double x);

// Caputo derivative of the sampled u at grid node t by the L1 product rule.
double caputo_derivative(const TimeGrid& grid, std::span<const double> u, double alpha, double t);

// Right-sided Riemann-Liouville integral of order alpha at node t, exact for
// piecewise-linear r. Returns 0 at t = T.
double rl_integral_right(const TimeGrid& grid, std::span<const double> r, double alpha, double t);

// Right-sided Riemann-Liouville derivative -d/ds I^{1-alpha}_{T-} r at node t,
// by differencing the integral on the grid.
double rl_derivative_right(const TimeGrid& grid, std::span<const double> r, double alpha, double t);

// |left - right| of the fractional integration-by-parts identity on the grid.
double check_fractional_ibp(const TimeGrid& grid, std::span<const double> u, std::span<const double> v,
                            double alpha);

}  // namespace fracgrad
