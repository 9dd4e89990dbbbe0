#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nlheat {

enum class DomainKind { Interval, Ball, TruncatedLine };

/// Geometric description of the domain. Boundary condition is homogeneous
/// Dirichlet throughout. TruncatedLine(A) is the interval (-A, A) tagged as a
/// whole-space approximation; Ball(R, d) is radially symmetric with d >= 2
/// (a one-dimensional ball is rejected in favor of Interval).
struct DomainSpec {
    DomainKind kind = DomainKind::Interval;
    double extent = 1.0;   // L for Interval, R for Ball, A for TruncatedLine
    int dim = 1;
    bool whole_space = false;   // true for TruncatedLine, optional tag for Ball

    static DomainSpec interval(double length) {
        validate_extent(length, "interval length");
        return {DomainKind::Interval, length, 1, false};
    }
    static DomainSpec ball(double radius, int d, bool whole_space_surrogate = false) {
        validate_extent(radius, "ball radius");
        if (d < 1) throw config_error("ball dimension must be >= 1");
        if (d == 1) throw config_error("ball with d = 1 is rejected; use an interval");
        return {DomainKind::Ball, radius, d, whole_space_surrogate};
    }
    static DomainSpec truncated_line(double halfwidth) {
        validate_extent(halfwidth, "halfwidth");
        return {DomainKind::TruncatedLine, halfwidth, 1, true};
    }

    // left endpoint of the 1-d coordinate range; balls start at r = 0
    double coord_min() const {
        return kind == DomainKind::TruncatedLine ? -extent : 0.0;
    }
    double coord_max() const { return extent; }

    bool operator==(const DomainSpec&) const = default;

private:
    static void validate_extent(double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw config_error(std::string(name) + " must be finite and > 0");
    }
};

/// Surface measure of the unit (d-1)-sphere, 2 pi^{d/2} / Gamma(d/2).
inline double unit_sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Immutable discrete domain: n interior nodes, uniform spacing h, trapezoid
/// quadrature weights carrying the radial measure, and the tridiagonal
/// Dirichlet Laplacian in flux form.
///
/// Node j (0-based) sits at coord_min + (j+1) h, h = range/(n+1); boundary
/// nodes are implicit with value 0. Edge j connects node j-1 to node j
/// (j = 0 and j = n are the boundary edges). On a ball the edge through the
/// center face r = h/2 gets weight 0: the symmetry condition u'(0) = 0 is
/// realized by reflecting the ghost value across that face (u_ghost = u_0),
/// which zeroes the center flux and keeps the stencil exactly self-adjoint
/// in the volume-weighted inner product.
struct Grid {
    DomainSpec domain;
    int n = 0;
    double h = 0.0;
    std::vector<double> nodes;            // length n
    std::vector<double> volume_weights;   // length n, all > 0
    std::vector<double> edge_weights;     // length n+1, edge j between nodes j-1, j

    // Laplacian stencil rows: (L u)_j = lower[j] u_{j-1} + diag[j] u_j + upper[j] u_{j+1}
    std::vector<double> lap_lower, lap_diag, lap_upper;

    bool same_discretization(const Grid& other) const {
        return domain == other.domain && n == other.n;
    }
};

inline std::shared_ptr<const Grid> build_grid(const DomainSpec& domain, int n) {
    if (n < 3) throw config_error("grid needs at least 3 interior nodes");
    auto g = std::make_shared<Grid>();
    g->domain = domain;
    g->n = n;
    const double range = domain.coord_max() - domain.coord_min();
    const double h = range / (n + 1);
    g->h = h;
    g->nodes.resize(n);
    g->volume_weights.resize(n);
    g->edge_weights.resize(n + 1);

    if (domain.kind == DomainKind::Ball) {
        const int d = domain.dim;
        const double omega = unit_sphere_area(d);
        for (int j = 0; j < n; ++j) {
            const double r = (j + 1) * h;
            g->nodes[j] = r;
            g->volume_weights[j] = omega * std::pow(r, d - 1) * h;
        }
        g->edge_weights[0] = 0.0;   // center face, zero flux
        for (int j = 1; j <= n; ++j) {
            const double rmid = (j + 0.5) * h;
            g->edge_weights[j] = omega * std::pow(rmid, d - 1) * h;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            g->nodes[j] = domain.coord_min() + (j + 1) * h;
            g->volume_weights[j] = h;
        }
        for (int j = 0; j <= n; ++j) g->edge_weights[j] = h;
    }

    // flux form: (L u)_j = [w_e[j+1](u_{j+1}-u_j) - w_e[j](u_j-u_{j-1})] / (w_v[j] h^2)
    g->lap_lower.resize(n);
    g->lap_diag.resize(n);
    g->lap_upper.resize(n);
    for (int j = 0; j < n; ++j) {
        const double inv = 1.0 / (g->volume_weights[j] * h * h);
        const double wl = g->edge_weights[j];
        const double wr = g->edge_weights[j + 1];
        g->lap_lower[j] = j > 0 ? wl * inv : 0.0;
        g->lap_upper[j] = j < n - 1 ? wr * inv : 0.0;
        g->lap_diag[j] = -(wl + wr) * inv;
    }
    return g;
}

/// Nodal values of u on a grid.
struct Field {
    std::shared_ptr<const Grid> grid;
    std::vector<double> values;

    Field() = default;
    Field(std::shared_ptr<const Grid> g, std::vector<double> v)
        : grid(std::move(g)), values(std::move(v)) {
        if (!grid) throw config_error("field requires a grid");
        if (static_cast<int>(values.size()) != grid->n)
            throw config_error("field length does not match grid");
    }
    explicit Field(std::shared_ptr<const Grid> g) : grid(std::move(g)) {
        if (!grid) throw config_error("field requires a grid");
        values.assign(grid->n, 0.0);
    }

    int size() const { return grid->n; }
    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Field make_field(std::shared_ptr<const Grid> grid, std::vector<double> values) {
    if (static_cast<int>(values.size()) != grid->n)
        throw config_error("field length does not match grid");
    return Field{std::move(grid), std::move(values)};
}

template <class F>
Field sample_function(std::shared_ptr<const Grid> grid, F&& f) {
    std::vector<double> v(grid->n);
    for (int j = 0; j < grid->n; ++j) v[j] = f(grid->nodes[j]);
    return Field{std::move(grid), std::move(v)};
}

/// Trapezoid quadrature with the domain's volume measure: sum_j w_j nodal_j.
inline double integrate(const Grid& grid, const std::vector<double>& nodal) {
    if (nodal.size() != grid.volume_weights.size())
        throw config_error("integrate: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < nodal.size(); ++j) s += grid.volume_weights[j] * nodal[j];
    return s;
}

inline double inner_product(const Field& u, const Field& v) {
    if (!u.grid->same_discretization(*v.grid))
        throw config_error("inner_product: grids differ");
    double s = 0.0;
    for (int j = 0; j < u.size(); ++j)
        s += u.grid->volume_weights[j] * u.values[j] * v.values[j];
    return s;
}

/// Discrete Dirichlet Laplacian. Interval: standard second difference with
/// zero ghost values. Ball: conservative radial stencil
///   (L u)_j = [r_{j+1/2}^{d-1}(u_{j+1}-u_j) - r_{j-1/2}^{d-1}(u_j-u_{j-1})] / (r_j^{d-1} h^2)
/// with zero flux through the center face (see Grid).
inline Field apply_laplacian(const Field& u) {
    const Grid& g = *u.grid;
    std::vector<double> out(g.n);
    for (int j = 0; j < g.n; ++j) {
        double s = g.lap_diag[j] * u.values[j];
        if (j > 0) s += g.lap_lower[j] * u.values[j - 1];
        if (j < g.n - 1) s += g.lap_upper[j] * u.values[j + 1];
        out[j] = s;
    }
    return Field{u.grid, std::move(out)};
}

/// Discrete Dirichlet form: sum over edges of (difference/h)^2 times the edge
/// volume weight, boundary edges included (u = 0 outside). Satisfies the
/// summation-by-parts identity gradient_sq_norm(u) = -<u, L u> exactly.
inline double gradient_sq_norm(const Field& u) {
    const Grid& g = *u.grid;
    double s = 0.0;
    double prev = 0.0;
    for (int j = 0; j < g.n; ++j) {
        const double d = u.values[j] - prev;
        s += g.edge_weights[j] * d * d;
        prev = u.values[j];
    }
    s += g.edge_weights[g.n] * prev * prev;
    return s / (g.h * g.h);
}

/// Magnitude of u at the nodes nearest the Dirichlet boundary; reported by
/// diagnostics so domain-truncation error stays observable.
inline double boundary_value(const Field& u) {
    const Grid& g = *u.grid;
    double b = std::abs(u.values[g.n - 1]);
    if (g.domain.kind == DomainKind::TruncatedLine)
        b = std::max(b, std::abs(u.values[0]));
    return b;
}

} // namespace nlheat
