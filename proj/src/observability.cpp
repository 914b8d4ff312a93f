#include "fracgrad/observability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "fracgrad/fraccalc.hpp"

namespace fracgrad {

std::string to_string(StrategicVerdict v) {
    switch (v) {
        case StrategicVerdict::strategic: return "strategic";
        case StrategicVerdict::non_strategic: return "non_strategic";
        case StrategicVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::vector<ModeGroup> group_modes(const std::vector<EigenMode>& modes) {
    std::vector<ModeGroup> out;
    for (const auto& m : modes) {
        if (!out.empty() && std::abs(m.lambda - out.back().lambda) <= 1e-12 * m.lambda)
            out.back().modes.push_back(m);
        else
            out.push_back({m.lambda, {m}});
    }
    return out;
}

std::vector<ModeGroup> mode_groups(const SpatialDomain& domain, int M) {
    if (M < 1) throw InputError("M must be at least 1");
    // Multiplicities in the square never exceed a handful, so a short
    // over-fetch is enough to finish the last group.
    auto modes = eigenpairs(domain, M + 16);
    const double last = modes[M - 1].lambda;
    int keep = M;
    while (keep < static_cast<int>(modes.size()) && std::abs(modes[keep].lambda - last) <= 1e-12 * last) ++keep;
    modes.resize(keep);
    return group_modes(modes);
}

void StrategicReport::write_csv(std::ostream& os) const {
    os << "group,lambda,r,sigma_min,offending\n" << std::setprecision(12);
    for (const auto& g : groups)
        os << g.group << ',' << g.lambda << ',' << g.multiplicity << ',' << g.sigma_min << ','
           << (g.offending ? 1 : 0) << '\n';
}

std::vector<Eigen::MatrixXd> strategic_blocks(const std::vector<Sensor>& sensors, const std::vector<ModeGroup>& groups,
                                              int slot) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        Eigen::MatrixXd B(sensors.size(), g.size());
        for (std::size_t i = 0; i < sensors.size(); ++i)
            for (int k = 0; k < g.size(); ++k) B(i, k) = sensors[i].mode_gradient_output(g.modes[k], slot);
        out.push_back(std::move(B));
    }
    return out;
}

std::vector<Eigen::MatrixXd> strategic_blocks(const std::vector<Sensor>& sensors, const SpatialDomain& domain, int M,
                                              int slot) {
    return strategic_blocks(sensors, mode_groups(domain, M), slot);
}

namespace {

StrategicVerdict decide(double sigma, double threshold) {
    if (sigma <= 0.1 * threshold) return StrategicVerdict::non_strategic;
    if (sigma < 10.0 * threshold) return StrategicVerdict::inconclusive;
    return StrategicVerdict::strategic;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return Eigen::VectorXd();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
}

StrategicReport strategic_report(const std::vector<Sensor>& sensors, const std::vector<ModeGroup>& groups, int n,
                                 double tolerance, const Region& omega) {
    if (sensors.empty()) throw InputError("at least one sensor is required");
    if (!(tolerance > 0.0)) throw InputError("tolerance must be positive");
    const int p = static_cast<int>(sensors.size());

    std::vector<std::vector<Eigen::MatrixXd>> blocks;
    for (int s = 1; s <= n; ++s) blocks.push_back(strategic_blocks(sensors, groups, s));

    StrategicReport rep;
    double top = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const int r = groups[j].size();
        Eigen::MatrixXd S(p, n * r);
        for (int s = 0; s < n; ++s) S.middleCols(s * r, r) = blocks[s][j];
        const Eigen::VectorXd sv = singular_values(S);
        GroupDiagnostic g;
        g.group = static_cast<int>(j) + 1;
        g.lambda = groups[j].lambda;
        g.multiplicity = r;
        g.sigma_max = sv.size() ? sv[0] : 0.0;
        g.sigma_min = p < n * r ? 0.0 : sv[sv.size() - 1];
        top = std::max(top, g.sigma_max);
        rep.groups.push_back(g);
    }
    rep.threshold = tolerance * top;

    if (n == 1) {
        // p >= sup r_j and rank M_j = r_j for every group.
        rep.verdict = StrategicVerdict::strategic;
        for (auto& g : rep.groups) {
            const auto v = decide(g.sigma_min, rep.threshold);
            g.offending = v == StrategicVerdict::non_strategic;
            if (g.offending) rep.offending.push_back(g.group);
            if (v == StrategicVerdict::non_strategic)
                rep.verdict = StrategicVerdict::non_strategic;
            else if (v == StrategicVerdict::inconclusive && rep.verdict == StrategicVerdict::strategic)
                rep.verdict = StrategicVerdict::inconclusive;
        }
        return rep;
    }

    // Groups the sensors cannot see at all are reported as offending.
    for (auto& g : rep.groups) {
        g.offending = g.sigma_max <= rep.threshold;
        if (g.offending) rep.offending.push_back(g.group);
    }

    // Kernel condition on y = sum_q c_{q,s} chi_omega phi_q e_s, q <= M, with
    // the groups as listed supplying the equations.
    std::vector<EigenMode> gradient_modes;
    for (const auto& g : groups)
        for (const auto& m : g.modes) gradient_modes.push_back(m);
    const int M = static_cast<int>(gradient_modes.size());
    const SpatialDomain domain{n};
    const auto eq_groups = mode_groups(domain, std::max(4 * n * M, 64));
    std::vector<std::vector<Eigen::MatrixXd>> eq_blocks;
    for (int s = 1; s <= n; ++s) eq_blocks.push_back(strategic_blocks(sensors, eq_groups, s));
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p * eq_groups.size(), n * M);
    for (std::size_t j = 0; j < eq_groups.size(); ++j)
        for (int s = 0; s < n; ++s)
            for (int q = 0; q < M; ++q) {
                Eigen::VectorXd proj(eq_groups[j].size());
                for (int k = 0; k < eq_groups[j].size(); ++k)
                    proj[k] = mass_on(gradient_modes[q], eq_groups[j].modes[k], omega);
                K.block(j * p, encode_index(q + 1, s + 1, n) - 1, p, 1) = eq_blocks[s][j] * proj;
            }
    const Eigen::VectorXd ksv = singular_values(K);
    rep.surrogate_sigma_max = ksv[0];
    rep.surrogate_sigma_min = K.rows() < K.cols() ? 0.0 : ksv[ksv.size() - 1];
    rep.verdict = decide(rep.surrogate_sigma_min, tolerance * rep.surrogate_sigma_max);
    return rep;
}

}  // namespace

StrategicReport test_gradient_strategic(const std::vector<Sensor>& sensors, const std::vector<EigenMode>& modes,
                                        double tolerance, const Region& omega) {
    if (modes.empty()) throw InputError("at least one mode is required");
    const int n = modes.front().dim;
    const Region w = omega.dim == n ? omega : Region::whole(SpatialDomain{n});
    return strategic_report(sensors, group_modes(modes), n, tolerance, w);
}

StrategicReport test_gradient_strategic(const std::vector<Sensor>& sensors, const SpatialDomain& domain, int M,
                                        double tolerance, const Region& omega) {
    const Region w = omega.dim == domain.dim ? omega : Region::whole(domain);
    return strategic_report(sensors, mode_groups(domain, M), domain.dim, tolerance, w);
}

GramDiagnostic gram_Halpha(const Region& omega, const std::vector<Sensor>& sensors, const FractionalDiffusion& sys,
                           int M, const TimeGrid& grid, AdjointConvention adjoint) {
    HumProblem pr;
    pr.sys = sys;
    pr.M = M;
    pr.omega = omega;
    pr.sensors = sensors;
    pr.assembly = AssemblyMode::restricted;
    pr.adjoint = adjoint;
    GramDiagnostic d;
    d.gram = assemble_gram(pr, grid);
    if (sensors.empty()) return d;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.gram, Eigen::EigenvaluesOnly);
    d.lambda_min = es.eigenvalues()[0];
    d.lambda_max = es.eigenvalues()[es.eigenvalues().size() - 1];
    d.positive_definite = d.lambda_max > 0.0 && d.lambda_min > 1e-10 * d.lambda_max;
    d.spectral_gap = d.lambda_max > 0.0 ? d.lambda_min / d.lambda_max : 0.0;
    return d;
}

CounterexampleResult counterexample_check(const std::vector<double>& times, int modes_per_axis) {
    constexpr double pi = 3.14159265358979323846;
    const double alpha = 0.5;
    auto h = [&](const Point& y) {
        return Vec2{std::cos(pi * y[0]) * std::sin(4 * pi * y[1]) / (4 * pi),
                    std::sin(pi * y[0]) * std::cos(4 * pi * y[1]) / (16 * pi)};
    };
    const Region whole = Region::whole(SpatialDomain::square());
    const Region band = Region::box(0.0, 1.0, 0.125, 0.625);

    std::vector<EigenMode> modes;
    for (int i = 1; i <= modes_per_axis; ++i)
        for (int j = 1; j <= modes_per_axis; ++j) modes.push_back({2, {i, j}, (i * i + j * j) * pi * pi});

    // C phi: integral of phi(1/2, y2) sin(2 pi y2) along the line.
    const auto line = composite_gauss_legendre(0.0, 1.0, 32, std::max(1, modes_per_axis / 8));
    std::vector<double> out(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        double s = 0.0;
        for (std::size_t q = 0; q < line.nodes.size(); ++q)
            s += line.weights[q] * eval_eigfun(modes[k], {0.5, line.nodes[q]}) * std::sin(2 * pi * line.nodes[q]);
        out[k] = s;
    }

    // <-div(chi h), phi_k> = <chi h, grad phi_k>.
    auto coupling = [&](const Region& w) {
        std::vector<double> c(modes.size(), 0.0);
        const auto quad = SpatialQuadrature::for_modes(w, modes_per_axis + 8);
        quad.for_each([&](const Point& p, double wt) {
            const Vec2 hv = h(p);
            for (std::size_t k = 0; k < modes.size(); ++k) {
                const Vec2 g = eval_eigfun_grad(modes[k], p);
                c[k] += wt * (hv[0] * g[0] + hv[1] * g[1]);
            }
        });
        return c;
    };
    const auto cg = coupling(whole), cr = coupling(band);

    CounterexampleResult res;
    res.times = times;
    for (double t : times) {
        if (!(t >= 0.0 && t <= 2.0)) throw DomainError("counterexample times must lie in [0,2]");
        double g = 0.0, r = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const double e = mlf_value(alpha, -modes[k].lambda * std::pow(t, alpha));
            g += e * cg[k] * out[k];
            r += e * cr[k] * out[k];
        }
        res.global_values.push_back(g);
        res.restricted_values.push_back(r);
    }
    for (std::size_t k = 0; k < modes.size(); ++k) res.restricted_coefficient += cr[k] * out[k];
    return res;
}

}  // namespace fracgrad
