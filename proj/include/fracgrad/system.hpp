#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "fracgrad/quadrature.hpp"
#include "fracgrad/spectral.hpp"

namespace fracgrad {

struct FractionalDiffusion {
    double alpha = 1.0;
    SpatialDomain domain;
    double T = 1.0;
    std::vector<EigenMode> basis;

    static FractionalDiffusion make(double alpha, const SpatialDomain& domain, double T, int modes);
    void validate() const;
    int size() const { return static_cast<int>(basis.size()); }
};

struct Sensor {
    enum class Kind { zonal, pointwise };

    Kind kind = Kind::pointwise;
    int dim = 1;
    Region support;
    ScalarField weight;
    std::string weight_name;
    Point location{0.5, 0.5};

    static Sensor zonal(const Region& support, ScalarField weight, std::string weight_name = "custom");
    static Sensor pointwise(const Point& location, int dim = 1);

    void validate(const SpatialDomain& domain) const;
    // C phi for one mode.
    double mode_output(const EigenMode& mode) const;
    // <d/dx_s phi, f>_D (zonal) or d/dx_s phi(b) (pointwise); slot s is 1-based.
    double mode_gradient_output(const EigenMode& mode, int s) const;
    std::string describe() const;
};

struct ModalState {
    Eigen::VectorXd coefficients;
};

struct MeasurementRecord {
    TimeGrid grid;
    Eigen::MatrixXd samples;  // one row per node, one column per sensor
    double noise_sigma = 0.0;
    std::string provenance = "synthetic";

    int channels() const { return static_cast<int>(samples.cols()); }
    void validate() const;

    void write_csv(std::ostream& os) const;
    // Weights follow TimeGrid::from_nodes with the given alpha.
    static MeasurementRecord read_csv(std::istream& is, double alpha);
};

ModalState project_initial_state(const FractionalDiffusion& sys, const ScalarField& u0);

ModalState mild_solution(const FractionalDiffusion& sys, const ModalState& state, double t);

double apply_output(const Sensor& sensor, const ModalState& state, const std::vector<EigenMode>& basis);

// p x K matrix of C phi_k.
Eigen::MatrixXd output_matrix(const std::vector<Sensor>& sensors, const std::vector<EigenMode>& basis);

// N x K matrix of E_alpha(-lambda_k t^alpha) on the grid nodes.
Eigen::MatrixXd decay_matrix(const FractionalDiffusion& sys, const TimeGrid& grid);

MeasurementRecord generate_measurements(const FractionalDiffusion& sys, const ModalState& truth,
                                        const std::vector<Sensor>& sensors, const TimeGrid& grid,
                                        double noise_sigma, std::mt19937_64& rng);

MeasurementRecord generate_measurements(const FractionalDiffusion& sys, const ScalarField& true_u0,
                                        const std::vector<Sensor>& sensors, const TimeGrid& grid,
                                        double noise_sigma, std::mt19937_64& rng);

// Coefficient k: sum over channels of int_0^T E(-lambda_k t^alpha) (C phi_k) z(t) dt.
ModalState kalpha_adjoint_modal(const FractionalDiffusion& sys, const MeasurementRecord& record,
                                const std::vector<Sensor>& sensors);

}  // namespace fracgrad
