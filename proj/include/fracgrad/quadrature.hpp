#pragma once

#include <cstddef>
#include <vector>

namespace fracgrad {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(int n);

// n-point Gauss-Lobatto rule on [-1, 1] (endpoints included, n >= 2).
Rule1D gauss_lobatto(int n);

// Composite Gauss-Legendre rule on [a, b] with equal panels.
Rule1D composite_gauss_legendre(double a, double b, int order, int panels);

// Quadrature nodes on [0, T]. Nodes strictly increase from 0 to T and all
// weights are positive.
struct TimeGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double horizon() const { return nodes.back(); }

    // Throws InputError when the invariants do not hold.
    void validate() const;

    // Index of the node equal to t (relative tolerance 1e-12 of T).
    std::size_t locate(double t) const;

    double integrate(const std::vector<double>& values) const;

    // n uniform nodes; trapezoid weights except on the first interval, where
    // the weights integrate a + b t^alpha exactly.
    static TimeGrid uniform(double T, std::size_t n, double alpha = 1.0);

    // Arbitrary increasing nodes with the same weight rule as uniform().
    static TimeGrid from_nodes(std::vector<double> nodes, double alpha = 1.0);

    // Composite Gauss-Lobatto panels with breakpoints T (k/panels)^grading.
    // grading <= 0 selects 2/alpha, capped at 4.
    static TimeGrid graded_lobatto(double T, int panels, int order, double alpha,
                                   double grading = 0.0);
};

}  // namespace fracgrad
