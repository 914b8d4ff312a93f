#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fracgrad/hum.hpp"

namespace fracgrad {

struct SensorSpec {
    Sensor::Kind kind = Sensor::Kind::pointwise;
    Point location{0.5, 0.5};
    Region support;
    std::string weight = "constant";  // constant | product_trig
    double weight_scale = 1.0;
    std::array<double, 2> weight_freq{1.7320508075688772, 1.4142135623730951};
};

// Flat key = value configuration with dotted section keys. Blank lines and
// text after '#' are ignored. The schema is listed in README.md.
struct RunConfig {
    int dim = 1;
    double alpha = 0.5;
    double T = 1.0;
    int M = 20;
    int state_modes = 64;
    Region omega;
    std::vector<SensorSpec> sensors;
    std::string initial_state = "poly_sq";  // poly_sq | trig_sq | custom | zero
    std::vector<double> coefficients;       // modal coefficients for custom
    int time_nodes = 512;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
    Regularization regularization;
    double epsilon = 1e-6;
    EscalationPolicy policy;
    AdjointConvention adjoint = AdjointConvention::potential;
    AssemblyMode assembly = AssemblyMode::global;
    double strategic_tolerance = 1e-10;
    std::string output_dir = ".";

    static RunConfig parse(std::istream& is, const std::string& source = "<config>");
    static RunConfig load(const std::string& path);
    void validate() const;

    SpatialDomain domain() const { return {dim}; }
    FractionalDiffusion system() const;
    std::vector<Sensor> build_sensors() const;
    TimeGrid time_grid() const;
    HumProblem problem() const;
    ScalarField initial_state_field() const;
    ModalState initial_modal_state() const;
    VectorField truth_gradient() const;

    // Sorted key = value form of every experiment setting (output_dir is
    // excluded); equal configs give equal text.
    std::string canonical() const;
    std::string fingerprint() const;
};

ScalarField weight_function(const SensorSpec& spec, int dim);

}  // namespace fracgrad
