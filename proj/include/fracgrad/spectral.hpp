#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fracgrad/quadrature.hpp"

namespace fracgrad {

// Points and gradients carry two slots; only the first is used in 1D.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;

struct SpatialDomain {
    int dim = 1;

    static SpatialDomain interval() { return {1}; }
    static SpatialDomain square() { return {2}; }

    bool contains(const Point& p) const;
};

// Axis-aligned box [lo, hi] inside the closed unit interval or square.
struct Region {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};

    static Region interval(double a, double b);
    static Region box(double a1, double b1, double a2, double b2);
    static Region whole(const SpatialDomain& d);

    bool contains(const Point& p) const;
    double volume() const;
    double width(int axis) const { return hi[axis] - lo[axis]; }
    std::string describe() const;
};

struct EigenMode {
    int dim = 1;
    std::array<int, 2> index{1, 1};
    double lambda = 0.0;

    // i^2 (+ j^2): integer key used to group equal eigenvalues exactly.
    int lambda_key() const { return dim == 1 ? index[0] * index[0] : index[0] * index[0] + index[1] * index[1]; }
    int max_index() const { return dim == 1 ? index[0] : std::max(index[0], index[1]); }
};

std::vector<EigenMode> eigenpairs(const SpatialDomain& domain, int M);

// Orthonormal Dirichlet eigenfunction: sqrt(2) sin(i pi x) or 2 sin(i pi x) sin(j pi y).
double eval_eigfun(const EigenMode& mode, const Point& p);
Vec2 eval_eigfun_grad(const EigenMode& mode, const Point& p);

// Tensor Gauss-Legendre rule over a Region, composite along each axis.
struct SpatialQuadrature {
    int dim = 1;
    Rule1D axis[2];

    // Exact for polynomials of degree 2*order-1 on each panel.
    static SpatialQuadrature over(const Region& region, int order = 32, int panels = 1);
    // Panels sized so trigonometric integrands up to the given mode index are
    // resolved to near machine precision.
    static SpatialQuadrature for_modes(const Region& region, int max_index, int order = 32);

    template <class F>
    void for_each(F&& f) const {
        if (dim == 1) {
            for (std::size_t i = 0; i < axis[0].nodes.size(); ++i) f(Point{axis[0].nodes[i], 0.0}, axis[0].weights[i]);
            return;
        }
        for (std::size_t i = 0; i < axis[0].nodes.size(); ++i)
            for (std::size_t j = 0; j < axis[1].nodes.size(); ++j)
                f(Point{axis[0].nodes[i], axis[1].nodes[j]}, axis[0].weights[i] * axis[1].weights[j]);
    }
    std::size_t size() const;
};

double region_inner_product(const ScalarField& f, const ScalarField& g, const Region& region,
                            const SpatialQuadrature& quad);

// <d/dx_d phi_q, phi_k> over the whole domain, closed form. Slot d is 1-based.
double grad_coupling(const EigenMode& q, int d, const EigenMode& k);

// <d/dx_d phi_q, phi_k> over a box, closed form per axis.
double grad_coupling_on(const EigenMode& q, int d, const EigenMode& k, const Region& region);

// <phi_q, phi_k> over a box, closed form per axis.
double mass_on(const EigenMode& q, const EigenMode& k, const Region& region);

}  // namespace fracgrad
