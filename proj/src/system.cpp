#include "fracgrad/system.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "fracgrad/errors.hpp"
#include "fracgrad/fraccalc.hpp"

namespace fracgrad {

FractionalDiffusion FractionalDiffusion::make(double alpha, const SpatialDomain& domain, double T, int modes) {
    FractionalDiffusion s{alpha, domain, T, eigenpairs(domain, modes)};
    s.validate();
    return s;
}

void FractionalDiffusion::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
    if (!(T > 0.0)) throw InputError("horizon T must be positive");
    if (basis.empty()) throw InputError("basis must not be empty");
    for (std::size_t i = 1; i < basis.size(); ++i)
        if (basis[i].lambda < basis[i - 1].lambda) throw InputError("basis eigenvalues must ascend");
}

Sensor Sensor::zonal(const Region& support, ScalarField weight, std::string weight_name) {
    Sensor s;
    s.kind = Kind::zonal;
    s.support = support;
    s.weight = std::move(weight);
    s.weight_name = std::move(weight_name);
    s.dim = support.dim;
    return s;
}

Sensor Sensor::pointwise(const Point& location, int dim) {
    Sensor s;
    s.kind = Kind::pointwise;
    s.location = location;
    s.dim = dim;
    return s;
}

void Sensor::validate(const SpatialDomain& domain) const {
    if (dim != domain.dim) throw InputError("sensor dimension does not match the domain");
    if (kind == Kind::zonal) {
        if (support.dim != domain.dim) throw InputError("sensor support dimension does not match the domain");
        if (!(support.volume() > 0.0)) throw InputError("zonal sensor support must have positive volume");
        if (!weight) throw InputError("zonal sensor needs a weight function");
        return;
    }
    for (int a = 0; a < domain.dim; ++a)
        if (!(location[a] > 0.0 && location[a] < 1.0))
            throw InputError("pointwise sensor location must be strictly interior");
}

namespace {
SpatialQuadrature sensor_quadrature(const Region& support, const EigenMode& mode) {
    return SpatialQuadrature::for_modes(support, mode.max_index() + 8);
}
}  // namespace

double Sensor::mode_output(const EigenMode& mode) const {
    if (kind == Kind::pointwise) return eval_eigfun(mode, location);
    double s = 0.0;
    sensor_quadrature(support, mode).for_each([&](const Point& p, double w) { s += w * eval_eigfun(mode, p) * weight(p); });
    return s;
}

double Sensor::mode_gradient_output(const EigenMode& mode, int slot) const {
    if (kind == Kind::pointwise) return eval_eigfun_grad(mode, location)[slot - 1];
    double s = 0.0;
    sensor_quadrature(support, mode).for_each(
        [&](const Point& p, double w) { s += w * eval_eigfun_grad(mode, p)[slot - 1] * weight(p); });
    return s;
}

std::string Sensor::describe() const {
    std::ostringstream os;
    if (kind == Kind::pointwise) {
        os << "pointwise(" << location[0];
        if (dim == 2) os << "," << location[1];
        os << ")";
    } else {
        os << "zonal(" << support.describe() << "," << weight_name << ")";
    }
    return os.str();
}

void MeasurementRecord::validate() const {
    grid.validate();
    if (static_cast<std::size_t>(samples.rows()) != grid.size())
        throw InputError("measurement samples do not match the time grid");
    if (samples.cols() < 1) throw InputError("measurement record needs at least one channel");
    if (!(noise_sigma >= 0.0)) throw InputError("noise_sigma must be non-negative");
}

void MeasurementRecord::write_csv(std::ostream& os) const {
    os << "t";
    for (int c = 0; c < channels(); ++c) os << ",z" << (c + 1);
    os << "\n" << std::setprecision(17);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << grid.nodes[i];
        for (int c = 0; c < channels(); ++c) os << "," << samples(static_cast<Eigen::Index>(i), c);
        os << "\n";
    }
}

MeasurementRecord MeasurementRecord::read_csv(std::istream& is, double alpha) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("measurement file is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "t") throw InputError("measurement header must be t,z1,...,zp");
    const std::size_t p = header.size() - 1;
    for (std::size_t c = 0; c < p; ++c)
        if (header[c + 1] != "z" + std::to_string(c + 1)) throw InputError("measurement header must be t,z1,...,zp");
    std::vector<double> nodes;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw InputError("measurement line " + std::to_string(lineno) + ": not a number");
            }
        }
        if (vals.size() != p + 1) throw InputError("measurement line " + std::to_string(lineno) + ": wrong column count");
        nodes.push_back(vals[0]);
        rows.emplace_back(vals.begin() + 1, vals.end());
    }
    MeasurementRecord r;
    r.grid = TimeGrid::from_nodes(std::move(nodes), alpha);
    r.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < p; ++c) r.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    r.provenance = "loaded";
    r.validate();
    return r;
}

ModalState project_initial_state(const FractionalDiffusion& sys, const ScalarField& u0) {
    int kmax = 0;
    for (auto& m : sys.basis) kmax = std::max(kmax, m.max_index());
    const Region whole = Region::whole(sys.domain);
    const auto quad = SpatialQuadrature::for_modes(whole, kmax + 8);
    ModalState s;
    s.coefficients = Eigen::VectorXd::Zero(sys.size());
    quad.for_each([&](const Point& p, double w) {
        const double u = u0(p);
        if (u == 0.0) return;
        for (int k = 0; k < sys.size(); ++k) s.coefficients[k] += w * u * eval_eigfun(sys.basis[k], p);
    });
    return s;
}

ModalState mild_solution(const FractionalDiffusion& sys, const ModalState& state, double t) {
    if (!(t >= 0.0 && t <= sys.T)) throw DomainError("mild_solution: t outside [0,T]");
    if (state.coefficients.size() != sys.size()) throw InputError("state does not match the basis");
    ModalState out = state;
    if (t == 0.0) return out;
    const double ta = std::pow(t, sys.alpha);
    for (int k = 0; k < sys.size(); ++k) out.coefficients[k] *= mlf_value(sys.alpha, -sys.basis[k].lambda * ta);
    return out;
}

double apply_output(const Sensor& sensor, const ModalState& state, const std::vector<EigenMode>& basis) {
    if (static_cast<std::size_t>(state.coefficients.size()) != basis.size())
        throw InputError("state does not match the basis");
    double s = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double c = state.coefficients[static_cast<Eigen::Index>(k)];
        if (c != 0.0) s += c * sensor.mode_output(basis[k]);
    }
    return s;
}

Eigen::MatrixXd output_matrix(const std::vector<Sensor>& sensors, const std::vector<EigenMode>& basis) {
    Eigen::MatrixXd C(static_cast<Eigen::Index>(sensors.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < sensors.size(); ++i)
        for (std::size_t k = 0; k < basis.size(); ++k)
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sensors[i].mode_output(basis[k]);
    return C;
}

Eigen::MatrixXd decay_matrix(const FractionalDiffusion& sys, const TimeGrid& grid) {
    Eigen::MatrixXd E(static_cast<Eigen::Index>(grid.size()), sys.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ta = std::pow(grid.nodes[i], sys.alpha);
        for (int k = 0; k < sys.size(); ++k)
            E(static_cast<Eigen::Index>(i), k) = mlf_value(sys.alpha, -sys.basis[k].lambda * ta);
    }
    return E;
}

namespace {
void check_grid(const FractionalDiffusion& sys, const TimeGrid& grid) {
    grid.validate();
    if (std::abs(grid.horizon() - sys.T) > 1e-12 * sys.T) throw InputError("time grid horizon does not match T");
}
}  // namespace

MeasurementRecord generate_measurements(const FractionalDiffusion& sys, const ModalState& truth,
                                        const std::vector<Sensor>& sensors, const TimeGrid& grid,
                                        double noise_sigma, std::mt19937_64& rng) {
    if (!(noise_sigma >= 0.0)) throw InputError("noise_sigma must be non-negative");
    if (sensors.empty()) throw InputError("at least one sensor is required");
    check_grid(sys, grid);
    for (auto& s : sensors) s.validate(sys.domain);
    const Eigen::MatrixXd C = output_matrix(sensors, sys.basis);
    const Eigen::MatrixXd E = decay_matrix(sys, grid);
    MeasurementRecord r;
    r.grid = grid;
    r.noise_sigma = noise_sigma;
    r.provenance = "synthetic";
    r.samples = E * truth.coefficients.asDiagonal() * C.transpose();
    if (noise_sigma > 0.0) {
        std::normal_distribution<double> n(0.0, noise_sigma);
        for (Eigen::Index i = 0; i < r.samples.rows(); ++i)
            for (Eigen::Index c = 0; c < r.samples.cols(); ++c) r.samples(i, c) += n(rng);
    }
    return r;
}

MeasurementRecord generate_measurements(const FractionalDiffusion& sys, const ScalarField& true_u0,
                                        const std::vector<Sensor>& sensors, const TimeGrid& grid,
                                        double noise_sigma, std::mt19937_64& rng) {
    return generate_measurements(sys, project_initial_state(sys, true_u0), sensors, grid, noise_sigma, rng);
}

ModalState kalpha_adjoint_modal(const FractionalDiffusion& sys, const MeasurementRecord& record,
                                const std::vector<Sensor>& sensors) {
    record.validate();
    if (record.channels() != static_cast<int>(sensors.size()))
        throw InputError("record channels do not match the sensors");
    check_grid(sys, record.grid);
    const Eigen::MatrixXd C = output_matrix(sensors, sys.basis);
    const Eigen::MatrixXd E = decay_matrix(sys, record.grid);
    const Eigen::Map<const Eigen::VectorXd> w(record.grid.weights.data(), static_cast<Eigen::Index>(record.grid.size()));
    // sum_t w_t E(t,k) sum_c C(c,k) z(t,c)
    const Eigen::MatrixXd wz = w.asDiagonal() * record.samples;  // N x p
    ModalState s;
    s.coefficients = (E.transpose() * wz).cwiseProduct(C.transpose()).rowwise().sum();
    return s;
}

}  // namespace fracgrad
