#include "fracgrad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracgrad/errors.hpp"

namespace fracgrad {

namespace {

// P_m(x) and P_{m-1}(x) by the three-term recurrence.
void legendre(int m, double x, double& pm, double& pm1) {
    double p0 = 1.0, p1 = x;
    if (m == 0) {
        pm = 1.0;
        pm1 = 0.0;
        return;
    }
    for (int k = 1; k < m; ++k) {
        double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
    }
    pm = p1;
    pm1 = p0;
}

}  // namespace

Rule1D gauss_legendre(int n) {
    if (n < 1) throw InputError("gauss_legendre: order must be positive");
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p, pm1;
            legendre(n, x, p, pm1);
            dp = n * (x * p - pm1) / (x * x - 1.0);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p, pm1;
        legendre(n, x, p, pm1);
        dp = n * (x * p - pm1) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

Rule1D gauss_lobatto(int n) {
    if (n < 2) throw InputError("gauss_lobatto: need at least two points");
    const int m = n - 1;
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    r.nodes[0] = -1.0;
    r.nodes[m] = 1.0;
    r.weights[0] = r.weights[m] = 2.0 / (m * (m + 1.0));
    for (int j = 1; j <= m / 2; ++j) {
        double x = std::cos(std::numbers::pi * j / m);
        for (int it = 0; it < 100; ++it) {
            double p, pm1;
            legendre(m, x, p, pm1);
            double d1 = m * (x * p - pm1) / (x * x - 1.0);
            double d2 = (2.0 * x * d1 - m * (m + 1.0) * p) / (1.0 - x * x);
            double dx = d1 / d2;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p, pm1;
        legendre(m, x, p, pm1);
        double w = 2.0 / (m * (m + 1.0) * p * p);
        r.nodes[j] = x;
        r.nodes[m - j] = -x;
        r.weights[j] = r.weights[m - j] = w;
    }
    if (m % 2 == 0) {
        double p, pm1;
        legendre(m, 0.0, p, pm1);
        r.nodes[m / 2] = 0.0;
        r.weights[m / 2] = 2.0 / (m * (m + 1.0) * p * p);
    }
    std::sort(r.nodes.begin(), r.nodes.end());
    return r;
}

Rule1D composite_gauss_legendre(double a, double b, int order, int panels) {
    if (panels < 1) throw InputError("composite_gauss_legendre: panels must be positive");
    const Rule1D base = gauss_legendre(order);
    Rule1D r;
    r.nodes.reserve(static_cast<std::size_t>(order) * panels);
    r.weights.reserve(r.nodes.capacity());
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < order; ++i) {
            r.nodes.push_back(lo + 0.5 * h * (base.nodes[i] + 1.0));
            r.weights.push_back(0.5 * h * base.weights[i]);
        }
    }
    return r;
}

void TimeGrid::validate() const {
    if (nodes.size() < 2) throw InputError("time grid needs at least two nodes");
    if (weights.size() != nodes.size()) throw InputError("time grid weights do not match nodes");
    if (nodes.front() != 0.0) throw InputError("time grid must start at 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1])) throw InputError("time grid nodes must be strictly increasing");
    for (double w : weights)
        if (!(w > 0.0)) throw InputError("time grid weights must be positive");
}

std::size_t TimeGrid::locate(double t) const {
    const double tol = 1e-12 * std::max(1.0, horizon());
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t - tol);
    if (it == nodes.end() || std::abs(*it - t) > tol)
        throw InputError("time is not a grid node");
    return static_cast<std::size_t>(it - nodes.begin());
}

double TimeGrid::integrate(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * values[i];
    return s;
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes, double alpha) {
    TimeGrid g;
    g.nodes = std::move(nodes);
    g.weights.assign(g.nodes.size(), 0.0);
    if (g.nodes.size() < 2) throw InputError("time grid needs at least two nodes");
    for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i) {
        const double h = g.nodes[i + 1] - g.nodes[i];
        if (i == 0) {
            g.weights[0] += h * alpha / (1.0 + alpha);
            g.weights[1] += h / (1.0 + alpha);
        } else {
            g.weights[i] += 0.5 * h;
            g.weights[i + 1] += 0.5 * h;
        }
    }
    g.validate();
    return g;
}

TimeGrid TimeGrid::uniform(double T, std::size_t n, double alpha) {
    if (n < 2) throw InputError("time grid needs at least two nodes");
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = T * static_cast<double>(i) / static_cast<double>(n - 1);
    nodes.back() = T;
    return from_nodes(std::move(nodes), alpha);
}

TimeGrid TimeGrid::graded_lobatto(double T, int panels, int order, double alpha, double grading) {
    if (panels < 1 || order < 2) throw InputError("graded_lobatto: bad panel settings");
    if (grading <= 0.0) grading = std::min(4.0, 2.0 / alpha);
    const Rule1D base = gauss_lobatto(order);
    TimeGrid g;
    g.nodes.push_back(0.0);
    g.weights.push_back(0.0);
    for (int p = 0; p < panels; ++p) {
        const double lo = T * std::pow(static_cast<double>(p) / panels, grading);
        const double hi = p + 1 == panels ? T : T * std::pow(static_cast<double>(p + 1) / panels, grading);
        const double half = 0.5 * (hi - lo);
        g.weights.back() += half * base.weights[0];
        for (int i = 1; i < order; ++i) {
            g.nodes.push_back(lo + half * (base.nodes[i] + 1.0));
            g.weights.push_back(half * base.weights[i]);
        }
        g.nodes.back() = hi;
    }
    g.validate();
    return g;
}

}  // namespace fracgrad
