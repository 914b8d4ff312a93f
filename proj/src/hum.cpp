#include "fracgrad/hum.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "fracgrad/fraccalc.hpp"

namespace fracgrad {

std::string Regularization::describe() const {
    std::ostringstream os;
    os << std::setprecision(6);
    switch (kind) {
        case RegularizationKind::none: return "none";
        case RegularizationKind::tikhonov:
            if (value > 0.0)
                os << "tikhonov(mu=" << value << ")";
            else
                os << "tikhonov(mu=auto)";
            break;
        case RegularizationKind::truncated_svd: os << "truncated_svd(rcond=" << value << ")"; break;
    }
    return os.str();
}

void HumProblem::validate() const {
    sys.validate();
    if (M < 1) throw InputError("M must be at least 1");
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (omega.dim != n()) throw InputError("omega dimension does not match the domain");
    if (!(omega.volume() > 0.0)) throw InputError("omega must have positive volume");
    if (regularization.kind == RegularizationKind::truncated_svd && !(regularization.value > 0.0))
        throw InputError("truncated_svd needs rcond > 0");
    if (regularization.kind == RegularizationKind::tikhonov && regularization.value < 0.0)
        throw InputError("tikhonov mu must be positive");
    if (time.panels < 1 || time.order < 2) throw InputError("time quadrature needs panels >= 1 and order >= 2");
    if (policy.max_iterations < 1) throw InputError("iteration cap must be at least 1");
    if (policy.m_step < 0) throw InputError("m_step must be non-negative");
    if (!(policy.relax_factor > 0.0)) throw InputError("relax factor must be positive");
    for (const auto& s : sensors) s.validate(sys.domain);
}

int encode_index(int q, int d, int n) { return n * (q - 1) + d; }

BasisSlot decode_index(int i, int n) { return {(i - 1) / n + 1, (i - 1) % n + 1}; }

GradientField GradientField::zero(const SpatialDomain& domain, int M) {
    if (M < 1) throw InputError("M must be at least 1");
    GradientField g;
    g.domain = domain;
    g.M = M;
    g.modes = eigenpairs(domain, M);
    g.coefficients = Eigen::VectorXd::Zero(domain.dim * M);
    return g;
}

Vec2 GradientField::evaluate(const Point& p) const {
    Vec2 v{0.0, 0.0};
    const int nn = n();
    for (int q = 1; q <= M; ++q) {
        bool any = false;
        for (int d = 1; d <= nn; ++d) any = any || coefficients[encode_index(q, d, nn) - 1] != 0.0;
        if (!any) continue;
        const double phi = eval_eigfun(modes[q - 1], p);
        for (int d = 1; d <= nn; ++d) v[d - 1] += coefficients[encode_index(q, d, nn) - 1] * phi;
    }
    return v;
}

GradientField vector_basis_field(int i, int M, const SpatialDomain& domain) {
    if (i < 1 || i > domain.dim * M) throw InputError("vector basis index out of range");
    GradientField g = GradientField::zero(domain, M);
    g.coefficients[i - 1] = 1.0;
    return g;
}

double ml_product_integral(double lambda_k, double lambda_l, double alpha, double T, const TimeGrid& quad) {
    if (!(lambda_k > 0.0 && lambda_l > 0.0)) throw DomainError("eigenvalues must be positive");
    if (std::abs(quad.horizon() - T) > 1e-12 * T) throw InputError("quadrature horizon does not match T");
    double s = 0.0;
    for (std::size_t j = 0; j < quad.size(); ++j) {
        const double ta = std::pow(quad.nodes[j], alpha);
        s += quad.weights[j] * mlf_value(alpha, -lambda_k * ta) * mlf_value(alpha, -lambda_l * ta);
    }
    return s;
}

TimeGrid gram_time_grid(const HumProblem& problem) {
    return TimeGrid::graded_lobatto(problem.sys.T, problem.time.panels, problem.time.order, problem.sys.alpha,
                                    problem.time.grading);
}

Eigen::MatrixXd adjoint_coupling(const HumProblem& problem) {
    const int nn = problem.n();
    const auto gmodes = eigenpairs(problem.sys.domain, problem.M);
    const auto& basis = problem.sys.basis;
    Eigen::MatrixXd P(basis.size(), nn * problem.M);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double scale = problem.adjoint == AdjointConvention::potential ? 1.0 / basis[k].lambda : 1.0;
        for (int q = 1; q <= problem.M; ++q)
            for (int d = 1; d <= nn; ++d) {
                // <phi_q e_d, grad phi_k>, over omega when restricted.
                const double c = problem.assembly == AssemblyMode::global
                                     ? -grad_coupling(gmodes[q - 1], d, basis[k])
                                     : grad_coupling_on(basis[k], d, gmodes[q - 1], problem.omega);
                P(k, encode_index(q, d, nn) - 1) = scale * c;
            }
    }
    return P;
}

Eigen::MatrixXd assemble_gram(const HumProblem& problem, const TimeGrid& grid) {
    problem.validate();
    const int nM = problem.unknowns();
    if (problem.sensors.empty()) return Eigen::MatrixXd::Zero(nM, nM);
    if (std::abs(grid.horizon() - problem.sys.T) > 1e-12 * problem.sys.T)
        throw InputError("time grid horizon does not match T");
    const Eigen::MatrixXd E = decay_matrix(problem.sys, grid);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(grid.weights.data(), grid.weights.size());
    // I_kl = int E_k E_l dt, the ml_product_integral table on this grid.
    const Eigen::MatrixXd I = E.transpose() * w.asDiagonal() * E;
    const Eigen::MatrixXd C = output_matrix(problem.sensors, problem.sys.basis);
    const Eigen::MatrixXd kernel = I.cwiseProduct(C.transpose() * C);
    const Eigen::MatrixXd P = adjoint_coupling(problem);
    Eigen::MatrixXd L = P.transpose() * kernel * P;
    return 0.5 * (L + L.transpose());
}

Eigen::MatrixXd assemble_gram(const HumProblem& problem) { return assemble_gram(problem, gram_time_grid(problem)); }

namespace {

// Y_c = E diag(C_c) P for each channel, stacked as row t * p + c.
Eigen::MatrixXd stacked_outputs(const Eigen::MatrixXd& E, const Eigen::MatrixXd& C, const Eigen::MatrixXd& P) {
    const Eigen::Index N = E.rows(), p = C.rows();
    Eigen::MatrixXd Y(N * p, P.cols());
    for (Eigen::Index c = 0; c < p; ++c) {
        const Eigen::MatrixXd Yc = E * C.row(c).transpose().asDiagonal() * P;
        for (Eigen::Index t = 0; t < N; ++t) Y.row(t * p + c) = Yc.row(t);
    }
    return Y;
}

void check_record(const HumProblem& problem, const MeasurementRecord& record) {
    record.validate();
    if (record.channels() != static_cast<int>(problem.sensors.size()))
        throw InputError("record has " + std::to_string(record.channels()) + " channels but " +
                         std::to_string(problem.sensors.size()) + " sensors are configured");
    if (std::abs(record.grid.horizon() - problem.sys.T) > 1e-9 * problem.sys.T)
        throw InputError("record horizon does not match T");
}

}  // namespace

Eigen::MatrixXd sampled_outputs(const HumProblem& problem, const TimeGrid& grid) {
    problem.validate();
    return stacked_outputs(decay_matrix(problem.sys, grid), output_matrix(problem.sensors, problem.sys.basis),
                           adjoint_coupling(problem));
}

Eigen::VectorXd assemble_rhs(const HumProblem& problem, const MeasurementRecord& record) {
    problem.validate();
    check_record(problem, record);
    const Eigen::MatrixXd Y = sampled_outputs(problem, record.grid);
    const Eigen::Index N = record.samples.rows(), p = record.samples.cols();
    Eigen::VectorXd wz(N * p);
    for (Eigen::Index t = 0; t < N; ++t)
        for (Eigen::Index c = 0; c < p; ++c) wz[t * p + c] = record.grid.weights[t] * record.samples(t, c);
    return Y.transpose() * wz;
}

namespace {

double default_mu(double trace, int nM) { return 1e-10 * trace / nM; }

// Smallest eigenvalue must clear this fraction of the largest for an
// unregularized solve.
constexpr double kDefiniteTol = 1e-10;

}  // namespace

Eigen::VectorXd solve_reconstruction(const HumProblem& problem, const Eigen::MatrixXd& gram,
                                     const Eigen::VectorXd& rhs) {
    const Eigen::Index n = gram.rows();
    if (gram.cols() != n || rhs.size() != n) throw InputError("gram and rhs sizes disagree");
    const double scale = std::max(gram.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("gram must be symmetric");
    const auto& reg = problem.regularization;
    switch (reg.kind) {
        case RegularizationKind::tikhonov: {
            const double mu = reg.value > 0.0 ? reg.value : default_mu(gram.trace(), static_cast<int>(n));
            if (!(mu > 0.0)) return Eigen::VectorXd::Zero(n);  // zero gram
            Eigen::MatrixXd A = gram;
            A.diagonal().array() += mu;
            return A.ldlt().solve(rhs);
        }
        case RegularizationKind::truncated_svd: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
            const Eigen::VectorXd ev = es.eigenvalues();
            const double smax = ev.cwiseAbs().maxCoeff();
            Eigen::VectorXd proj = es.eigenvectors().transpose() * rhs;
            for (Eigen::Index i = 0; i < n; ++i) proj[i] = std::abs(ev[i]) > reg.value * smax ? proj[i] / ev[i] : 0.0;
            return es.eigenvectors() * proj;
        }
        case RegularizationKind::none: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues()[0], lmax = es.eigenvalues()[n - 1];
            if (!(lmin > kDefiniteTol * lmax)) {
                std::ostringstream os;
                os << "gram is not positive definite (smallest eigenvalue " << std::setprecision(6) << lmin
                   << ", largest " << lmax << "); the sensors may not be strategic";
                throw SolvabilityError(os.str(), lmin);
            }
            return gram.llt().solve(rhs);
        }
    }
    return Eigen::VectorXd::Zero(n);
}

ConvergenceError::ConvergenceError(ReconstructionResult best)
    : Error([&] {
          std::ostringstream os;
          os << "reconstruction did not reach the residual tolerance after " << best.iterations
             << " iterations (best residual " << std::setprecision(6) << best.residual << ")";
          return os.str();
      }()),
      best_(std::move(best)) {}

ReconstructionResult reconstruct(const HumProblem& problem, const MeasurementRecord& record,
                                 const VectorField& truth) {
    problem.validate();
    if (problem.sensors.empty()) throw InputError("at least one sensor is required");
    check_record(problem, record);

    const Eigen::MatrixXd E = decay_matrix(problem.sys, record.grid);
    const Eigen::MatrixXd C = output_matrix(problem.sensors, problem.sys.basis);
    const Eigen::Index N = record.samples.rows(), p = record.samples.cols();

    // Weighted least squares form: A = sqrt(W) Y, b = sqrt(W) z. Then
    // Lambda = A^T A, rhs = A^T b and |b - A c| is the output residual.
    Eigen::VectorXd sw(N * p), b(N * p);
    for (Eigen::Index t = 0; t < N; ++t)
        for (Eigen::Index c = 0; c < p; ++c) {
            sw[t * p + c] = std::sqrt(record.grid.weights[t]);
            b[t * p + c] = sw[t * p + c] * record.samples(t, c);
        }

    HumProblem cur = problem;
    std::vector<IterationLog> history;
    std::optional<ReconstructionResult> best;

    for (int it = 1; it <= problem.policy.max_iterations; ++it) {
        const Eigen::MatrixXd P = adjoint_coupling(cur);
        const Eigen::MatrixXd A = sw.asDiagonal() * stacked_outputs(E, C, P);
        const int nM = cur.unknowns();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd s = svd.singularValues();
        const double smax = s.size() ? s[0] : 0.0;
        const double smin = s.size() ? s[s.size() - 1] : 0.0;
        const Eigen::VectorXd utb = svd.matrixU().transpose() * b;

        Regularization used = cur.regularization;
        Eigen::VectorXd filt(s.size());
        switch (used.kind) {
            case RegularizationKind::tikhonov: {
                if (!(used.value > 0.0)) used.value = default_mu(A.squaredNorm(), nM);
                for (Eigen::Index i = 0; i < s.size(); ++i)
                    filt[i] = used.value > 0.0 ? s[i] / (s[i] * s[i] + used.value) : 0.0;
                break;
            }
            case RegularizationKind::truncated_svd:
                for (Eigen::Index i = 0; i < s.size(); ++i) filt[i] = s[i] > used.value * smax ? 1.0 / s[i] : 0.0;
                break;
            case RegularizationKind::none:
                if (!(smin * smin > kDefiniteTol * smax * smax)) {
                    std::ostringstream os;
                    os << "gram is not positive definite at M=" << cur.M << " (smallest eigenvalue "
                       << std::setprecision(6) << smin * smin << ", largest " << smax * smax
                       << "); the sensors may not be strategic";
                    throw SolvabilityError(os.str(), smin * smin);
                }
                for (Eigen::Index i = 0; i < s.size(); ++i) filt[i] = 1.0 / s[i];
                break;
        }
        const Eigen::VectorXd coef = svd.matrixV() * filt.cwiseProduct(utb);

        ReconstructionResult r;
        r.field = GradientField::zero(problem.sys.domain, cur.M);
        r.field.coefficients = coef;
        r.residual = (b - A * coef).norm();
        r.lambda_max = smax * smax;
        r.lambda_min = smin * smin;
        r.condition_estimate =
            r.lambda_min > 0.0 ? r.lambda_max / r.lambda_min : std::numeric_limits<double>::infinity();
        r.iterations = it;
        r.regularization = used;
        if (truth) r.error = omega_error(r.field, truth, problem.omega);
        history.push_back({cur.M, used, r.residual});

        if (!best || r.residual < best->residual) best = r;
        if (r.residual <= problem.epsilon) {
            r.history = history;
            return r;
        }

        // Escalate: more modes first, then a weaker regularization.
        const auto& pol = problem.policy;
        if (pol.m_step > 0 && cur.M + pol.m_step <= pol.m_max) {
            cur.M += pol.m_step;
        } else if (used.kind != RegularizationKind::none) {
            cur.regularization = used;
            cur.regularization.value *= pol.relax_factor;
        } else {
            break;
        }
    }
    best->history = history;
    best->iterations = static_cast<int>(history.size());
    throw ConvergenceError(*best);
}

double omega_error(const GradientField& field, const VectorField& truth, const Region& omega) {
    if (omega.dim != field.n()) throw InputError("omega dimension does not match the field");
    int top = 1;
    for (const auto& m : field.modes) top = std::max(top, m.max_index());
    double s = 0.0;
    SpatialQuadrature::for_modes(omega, top + 8).for_each([&](const Point& p, double w) {
        const Vec2 a = field.evaluate(p), g = truth(p);
        for (int d = 0; d < field.n(); ++d) s += w * (a[d] - g[d]) * (a[d] - g[d]);
    });
    return s;
}

void write_field_csv(std::ostream& os, const GradientField& field, const VectorField& truth, int points_per_axis) {
    if (points_per_axis < 2) throw InputError("reporting grid needs at least 2 points per axis");
    const int n = field.n();
    os << (n == 1 ? "x" : "x,y");
    for (int d = 1; d <= n; ++d) os << ",d" << d << "_true,d" << d << "_rec";
    os << '\n' << std::setprecision(12);
    const int ny = n == 1 ? 1 : points_per_axis;
    for (int i = 0; i < points_per_axis; ++i)
        for (int j = 0; j < ny; ++j) {
            const Point p{static_cast<double>(i) / (points_per_axis - 1),
                          n == 1 ? 0.0 : static_cast<double>(j) / (points_per_axis - 1)};
            const Vec2 rec = field.evaluate(p);
            const Vec2 tru = truth ? truth(p) : Vec2{0.0, 0.0};
            os << p[0];
            if (n == 2) os << ',' << p[1];
            for (int d = 0; d < n; ++d) os << ',' << tru[d] << ',' << rec[d];
            os << '\n';
        }
}

}  // namespace fracgrad
