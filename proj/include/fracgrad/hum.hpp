#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracgrad/errors.hpp"
#include "fracgrad/system.hpp"

namespace fracgrad {

enum class RegularizationKind { none, tikhonov, truncated_svd };

struct Regularization {
    RegularizationKind kind = RegularizationKind::tikhonov;
    // mu for tikhonov, rcond for truncated_svd. A tikhonov value <= 0 selects
    // the default mu = 1e-10 trace(Lambda) / (nM).
    double value = 0.0;

    static Regularization none() { return {RegularizationKind::none, 0.0}; }
    static Regularization tikhonov(double mu = 0.0) { return {RegularizationKind::tikhonov, mu}; }
    static Regularization truncated_svd(double rcond) { return {RegularizationKind::truncated_svd, rcond}; }
    std::string describe() const;
};

// How <grad* phibar_i, phi_k> is formed.
//  global:     over the whole domain (closed form).
//  restricted: the basis field is first restricted to omega.
enum class AssemblyMode { global, restricted };

// Which adjoint of the gradient maps a candidate field to an initial state.
//  potential:  adjoint of grad on H^1_0, i.e. (-Laplacian)^{-1} (-div). A field
//              G = grad u0 maps back to u0 itself.
//  divergence: -div, the L^2 formal adjoint.
enum class AdjointConvention { potential, divergence };

struct TimeQuadratureSettings {
    int panels = 64;
    int order = 16;
    double grading = 0.0;  // <= 0: automatic
};

// Escalation rule of the reconstruction loop: raise M by m_step while M < m_max,
// then multiply the regularization parameter by relax_factor.
struct EscalationPolicy {
    int max_iterations = 12;
    int m_step = 0;
    int m_max = 0;
    double relax_factor = 1e-2;
};

struct HumProblem {
    FractionalDiffusion sys;  // its basis is the state truncation
    int M = 1;                // gradient modes per component
    Region omega;
    std::vector<Sensor> sensors;
    TimeQuadratureSettings time;
    Regularization regularization;
    double epsilon = 1e-6;
    AssemblyMode assembly = AssemblyMode::global;
    AdjointConvention adjoint = AdjointConvention::potential;
    EscalationPolicy policy;

    int n() const { return sys.domain.dim; }
    int unknowns() const { return n() * M; }
    void validate() const;
};

struct BasisSlot {
    int mode;  // q, 1-based
    int slot;  // d, 1-based
};

// g(q, d) = n (q - 1) + d and its inverse.
int encode_index(int q, int d, int n);
BasisSlot decode_index(int i, int n);

struct GradientField {
    SpatialDomain domain;
    int M = 0;
    std::vector<EigenMode> modes;
    Eigen::VectorXd coefficients;  // length n M, indexed by g(q, d) - 1

    static GradientField zero(const SpatialDomain& domain, int M);
    int n() const { return domain.dim; }
    Vec2 evaluate(const Point& p) const;
};

GradientField vector_basis_field(int i, int M, const SpatialDomain& domain);

double ml_product_integral(double lambda_k, double lambda_l, double alpha, double T, const TimeGrid& quad);

// Graded composite Gauss-Lobatto grid from the problem's time settings.
TimeGrid gram_time_grid(const HumProblem& problem);

// K x nM matrix of <grad* phibar_i, phi_k> over the state basis.
Eigen::MatrixXd adjoint_coupling(const HumProblem& problem);

// Lambda_ij = sum_{k,l} int E_k E_l <grad* phibar_i, phi_k> <grad* phibar_j, phi_l> sum_c C phi_k C phi_l.
Eigen::MatrixXd assemble_gram(const HumProblem& problem);
Eigen::MatrixXd assemble_gram(const HumProblem& problem, const TimeGrid& grid);

// Outputs of every basis field at every node: row t * p + c, column i.
Eigen::MatrixXd sampled_outputs(const HumProblem& problem, const TimeGrid& grid);

Eigen::VectorXd assemble_rhs(const HumProblem& problem, const MeasurementRecord& record);

Eigen::VectorXd solve_reconstruction(const HumProblem& problem, const Eigen::MatrixXd& gram,
                                     const Eigen::VectorXd& rhs);

struct IterationLog {
    int M = 0;
    Regularization regularization;
    double residual = 0.0;
};

struct ReconstructionResult {
    GradientField field;
    double residual = 0.0;
    double condition_estimate = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int iterations = 0;
    std::optional<double> error;
    Regularization regularization;  // as used by the returned iterate
    std::vector<IterationLog> history;
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(ReconstructionResult best);
    const ReconstructionResult& best() const { return best_; }

private:
    ReconstructionResult best_;
};

// Reconstruction loop. The Gram is formed on the record's own time grid so
// that it and the right-hand side share one quadrature, and the regularized
// normal equations are solved through an SVD of the weighted output matrix.
ReconstructionResult reconstruct(const HumProblem& problem, const MeasurementRecord& record,
                                 const VectorField& truth = {});

// Squared L^2(omega)^n distance.
double omega_error(const GradientField& field, const VectorField& truth, const Region& omega);

// x[,y],d1_true,d1_rec[,d2_true,d2_rec] on a uniform reporting grid.
void write_field_csv(std::ostream& os, const GradientField& field, const VectorField& truth, int points_per_axis);

}  // namespace fracgrad
