#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracgrad/hum.hpp"

namespace fracgrad {

enum class StrategicVerdict { strategic, non_strategic, inconclusive };
std::string to_string(StrategicVerdict v);

// Modes with equal eigenvalue, in ascending order.
struct ModeGroup {
    double lambda = 0.0;
    std::vector<EigenMode> modes;
    int size() const { return static_cast<int>(modes.size()); }
};

// Groups the first M modes; the last group is completed so no multiplicity
// is cut in half.
std::vector<ModeGroup> mode_groups(const SpatialDomain& domain, int M);
std::vector<ModeGroup> group_modes(const std::vector<EigenMode>& modes);

struct GroupDiagnostic {
    int group = 0;  // 1-based
    double lambda = 0.0;
    int multiplicity = 0;
    double sigma_min = 0.0;  // of the stacked p x (n r_j) block, 0 when p < n r_j
    double sigma_max = 0.0;
    bool offending = false;
};

struct StrategicReport {
    StrategicVerdict verdict = StrategicVerdict::inconclusive;
    std::vector<GroupDiagnostic> groups;
    std::vector<int> offending;
    double threshold = 0.0;  // absolute singular value threshold
    // n >= 2 only: smallest and largest singular values of the truncated
    // kernel map on the first M restricted basis fields.
    double surrogate_sigma_min = 0.0;
    double surrogate_sigma_max = 0.0;

    // group,lambda,r,sigma_min,offending
    void write_csv(std::ostream& os) const;
};

// M_j^s for every group; entry (i, k) is the sensor i reading of d/dx_s phi_{j,k}.
std::vector<Eigen::MatrixXd> strategic_blocks(const std::vector<Sensor>& sensors, const std::vector<ModeGroup>& groups,
                                              int slot);
std::vector<Eigen::MatrixXd> strategic_blocks(const std::vector<Sensor>& sensors, const SpatialDomain& domain, int M,
                                              int slot);

// Rank decisions use singular values against tolerance * (largest singular
// value); a value within 10x of that threshold gives inconclusive.
StrategicReport test_gradient_strategic(const std::vector<Sensor>& sensors, const SpatialDomain& domain, int M,
                                        double tolerance = 1e-10, const Region& omega = Region{});
StrategicReport test_gradient_strategic(const std::vector<Sensor>& sensors, const std::vector<EigenMode>& modes,
                                        double tolerance = 1e-10, const Region& omega = Region{});

struct GramDiagnostic {
    Eigen::MatrixXd gram;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool positive_definite = false;
    // Ratio lambda_min / lambda_max of the truncation. Closed range is not
    // decidable at finite M, so this is a heuristic indicator only.
    double spectral_gap = 0.0;
};

// Gram of the output map on the first M basis fields restricted to omega.
GramDiagnostic gram_Halpha(const Region& omega, const std::vector<Sensor>& sensors, const FractionalDiffusion& sys,
                           int M, const TimeGrid& grid, AdjointConvention adjoint = AdjointConvention::potential);

struct CounterexampleResult {
    std::vector<double> times;
    std::vector<double> global_values;
    std::vector<double> restricted_values;
    double restricted_coefficient = 0.0;  // restricted value divided by E_0.5(-5 pi^2 t^0.5)
};

// The two-dimensional gradient h that the line sensor {1/2} x (0,1) with
// f = sin(2 pi y2) cannot see over the whole square, but can see through the
// band omega = (0,1) x (1/8, 5/8). alpha = 0.5; the adjoint of the gradient
// is -div, as in that construction.
CounterexampleResult counterexample_check(const std::vector<double>& times, int modes_per_axis = 16);

}  // namespace fracgrad
