#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "flow.hpp"

namespace nlheat {

/// Residuals certifying a stationary profile. pohozaev2 and energy_relation
/// apply to whole-space surrogates only (Dirichlet boundary terms would
/// pollute them on a genuinely bounded domain) and stay empty otherwise.
struct StationaryResiduals {
    double pde_sup = 0.0;      // sup |Lap Q + g|Q|^{2s}Q + mu Q|
    double pohozaev1 = 0.0;    // |mu |Q|^2 - |grad Q|^2 + g |Q|_{2s+2}^{2s+2}|
    std::optional<double> pohozaev2;
    std::optional<double> energy_relation;
};

struct GroundState {
    Field profile;
    double mu_value = 0.0;
    double mass_target = 0.0;
    StationaryResiduals residuals;
};

/// Non-convergence of an iterative solver; carries the trace so callers can
/// inspect how the run died.
struct not_converged_error : numerical_error {
    RunResult run;
    not_converged_error(const std::string& what, RunResult r)
        : numerical_error(what), run(std::move(r)) {}
};

inline StationaryResiduals pohozaev_residuals(const Field& Q, const FlowParams& p) {
    const double m2 = mass_norm(Q);
    if (m2 == 0.0) throw degenerate_field_error("pohozaev_residuals: zero field");
    const double grad2 = gradient_sq_norm(Q);
    const double pot = potential_integral(Q, p.sigma);
    const double muq = (grad2 - p.g * pot) / (m2 * m2);

    StationaryResiduals res;
    res.pohozaev1 = std::abs(muq * m2 * m2 - grad2 + p.g * pot);

    const Field lap = apply_laplacian(Q);
    double sup = 0.0;
    for (int j = 0; j < Q.size(); ++j) {
        const double a = std::abs(Q.values[j]);
        const double nl = a > 0.0 ? p.g * std::pow(a, 2.0 * p.sigma) * Q.values[j] : 0.0;
        sup = std::max(sup, std::abs(lap.values[j] + nl + muq * Q.values[j]));
    }
    res.pde_sup = sup;

    if (Q.grid->domain.whole_space) {
        const double d = p.d;
        const double e = 0.5 * grad2 - p.g / (2.0 * p.sigma + 2.0) * pot;
        res.pohozaev2 = std::abs((d - 2.0) / 2.0 * grad2 - muq * d / 2.0 * m2 * m2 -
                                 d * p.g / (2.0 * p.sigma + 2.0) * pot);
        const double ds = d * p.sigma;
        res.energy_relation = std::abs(e - (ds - 2.0) / (2.0 * ds) * grad2);
    }
    return res;
}

namespace detail {

// k-th positive zero of the Bessel function J_nu, by scan + bisection
inline double bessel_j_zero(double nu, int k = 1) {
    const double step = 0.05 * std::max(1.0, nu);
    double z = std::max(nu, 1e-3);
    double fz = std::cyl_bessel_j(nu, z);
    int found = 0;
    for (int i = 0; i < 4000; ++i) {
        const double znext = z + step;
        const double fnext = std::cyl_bessel_j(nu, znext);
        if ((fz > 0.0) != (fnext > 0.0)) {
            double a = z, b = znext;
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (a + b);
                ((std::cyl_bessel_j(nu, m) > 0.0) == (fz > 0.0) ? a : b) = m;
            }
            if (++found == k) return 0.5 * (a + b);
        }
        z = znext;
        fz = fnext;
    }
    throw numerical_error("bessel_j_zero: not enough sign changes found");
}

} // namespace detail

/// Positive first Dirichlet eigenfunction of the domain, scaled to the given
/// mass. Interval/TruncatedLine: sine arch. Ball in d dimensions: the radial
/// profile r^{-(d/2-1)} J_{d/2-1}(j_1 r/R).
inline Field first_eigenfunction_seed(std::shared_ptr<const Grid> grid, double mass_target) {
    const DomainSpec& dom = grid->domain;
    Field seed(grid);
    if (dom.kind == DomainKind::Ball) {
        const double nu = 0.5 * dom.dim - 1.0;
        const double z1 = detail::bessel_j_zero(nu, 1);
        for (int j = 0; j < grid->n; ++j) {
            const double s = grid->nodes[j] / dom.extent;
            seed.values[j] = std::cyl_bessel_j(nu, z1 * s) / std::pow(s, nu);
        }
    } else {
        const double span = dom.coord_max() - dom.coord_min();
        for (int j = 0; j < grid->n; ++j)
            seed.values[j] =
                std::sin(std::numbers::pi * (grid->nodes[j] - dom.coord_min()) / span);
    }
    const double m = mass_norm(seed);
    for (double& v : seed.values) v *= mass_target / m;
    return seed;
}

/// Compute the fixed-mass ground state by running the projected flow to
/// stationarity from a positive seed (the first Dirichlet eigenfunction
/// unless one is supplied). Deterministic given inputs.
inline GroundState ground_state_flow(const DomainSpec& domain, const FlowParams& params,
                                     double mass_target, const FlowConfig& numerics, int n,
                                     std::optional<Field> seed = std::nullopt) {
    params.validate();
    if (!(mass_target > 0.0)) throw config_error("mass_target must be > 0");
    const auto crit = criticality(params);
    // convergence hypotheses: g <= 0 below the energy-critical power, or
    // g > 0 below the mass-critical power
    if (params.g > 0.0 && params.sigma >= crit.sigma_mass_critical)
        throw regime_error("ground_state_flow: g > 0 requires sigma < 2/d");
    if (params.g <= 0.0 && params.sigma >= crit.sigma_energy_critical)
        throw regime_error("ground_state_flow: requires sigma < 2/(d-2)");

    auto grid = build_grid(domain, n);
    Field u0 = seed ? std::move(*seed) : first_eigenfunction_seed(grid, mass_target);
    if (!u0.grid->same_discretization(*grid))
        throw config_error("ground_state_flow: seed grid mismatch");
    {
        const double m = mass_norm(u0);
        if (m == 0.0) throw degenerate_field_error("ground_state_flow: zero seed");
        for (double& v : u0.values) v *= mass_target / m;
    }

    FlowConfig c = numerics;
    c.scheme = Scheme::ProjectedSemiImplicit;
    RunResult run = evolve(u0, params, c);
    if (run.termination != Termination::Stationary)
        throw not_converged_error(
            std::string("ground_state_flow did not reach stationarity (") +
                termination_name(run.termination) + ")",
            std::move(run));

    GroundState gs;
    gs.profile = std::move(run.final);
    gs.mu_value = mu(gs.profile, params);
    gs.mass_target = mass_target;
    gs.residuals = pohozaev_residuals(gs.profile, params);
    return gs;
}

struct ShootConfig {
    double r_max = 15.0;
    double bracket_lo = 1.01;
    double bracket_hi = 8.0;
    double tol = 1e-15;       // bisection target for the bracket width
    int n_grid = 16383;       // nodes of the sampled output grid
};

namespace detail {

// dense output of one RK4 pass: Q and Q' at every ode step
struct ShootPath {
    double h = 0.0;
    std::vector<double> q, dq;
    bool crossed = false;     // Q hit zero before R_max
};

// Q'' + (d-1)/r Q' - Q + Q^{2 sigma + 1} = 0, started at r = h with the even
// series Q(r) = a + r^2/(2d) (a - a^{2s+1}); the series start removes the
// coordinate singularity of the damping term.
inline ShootPath integrate_profile(double a, const FlowParams& p, double r_max,
                                   bool record) {
    const int n_steps = 100'000;
    const double h = r_max / n_steps;
    const double s21 = 2.0 * p.sigma + 1.0;
    auto f = [&](double r, double q, double v, double& dq, double& dv) {
        dq = v;
        const double aq = std::abs(q);
        const double nl = aq > 0.0 ? std::pow(aq, s21) * (q > 0.0 ? 1.0 : -1.0) : 0.0;
        dv = q - nl - (p.d - 1.0) / r * v;
    };

    ShootPath path;
    path.h = h;
    if (record) {
        path.q.reserve(n_steps + 1);
        path.dq.reserve(n_steps + 1);
        path.q.push_back(a);
        path.dq.push_back(0.0);
    }
    const double b = (a - std::pow(a, s21)) / (2.0 * p.d);
    double q = a + b * h * h;
    double v = 2.0 * b * h;
    if (record) {
        path.q.push_back(q);
        path.dq.push_back(v);
    }
    for (int k = 1; k < n_steps; ++k) {
        const double r = k * h;
        double k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v;
        f(r, q, v, k1q, k1v);
        f(r + 0.5 * h, q + 0.5 * h * k1q, v + 0.5 * h * k1v, k2q, k2v);
        f(r + 0.5 * h, q + 0.5 * h * k2q, v + 0.5 * h * k2v, k3q, k3v);
        f(r + h, q + h * k3q, v + h * k3v, k4q, k4v);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (record) {
            path.q.push_back(q);
            path.dq.push_back(v);
        }
        if (q <= 0.0 || !std::isfinite(q)) {
            path.crossed = true;
            break;
        }
        if (q > 10.0 * a) {   // ran away upward; treat like the non-decaying side
            break;
        }
    }
    return path;
}

inline bool amplitude_crosses(double a, const FlowParams& p, double r_max) {
    return integrate_profile(a, p, r_max, false).crossed;
}

// cubic Hermite interpolation of the dense path at radius r
inline double sample_path(const ShootPath& path, double r) {
    const double s = r / path.h;
    std::size_t k = static_cast<std::size_t>(s);
    if (k + 1 >= path.q.size()) return path.q.back();
    const double t = s - k;
    const double q0 = path.q[k], q1 = path.q[k + 1];
    const double m0 = path.dq[k] * path.h, m1 = path.dq[k + 1] * path.h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * q0 + (t3 - 2 * t2 + t) * m0 +
           (-2 * t3 + 3 * t2) * q1 + (t3 - t2) * m1;
}

} // namespace detail

/// Locate the decaying solution of the normalized free equation
/// Q'' + (d-1)/r Q' - Q + Q^{2 sigma + 1} = 0, Q'(0) = 0, by bisection on
/// Q(0): amplitudes below the critical one stay positive without decaying,
/// amplitudes above it cross zero. Returns the even profile sampled onto a
/// TruncatedLine grid (d = 1) or a whole-space-surrogate Ball grid (d >= 2).
inline Field shoot_radial(const FlowParams& params, const ShootConfig& sc) {
    params.validate();
    if (!(sc.r_max > 0.0)) throw config_error("shoot_radial: r_max must be > 0");
    if (!(sc.bracket_lo > 0.0) || !(sc.bracket_hi > sc.bracket_lo))
        throw config_error("shoot_radial: bad amplitude bracket order");

    double lo = sc.bracket_lo, hi = sc.bracket_hi;
    if (detail::amplitude_crosses(lo, params, sc.r_max))
        throw bad_bracket_error(
            "shoot_radial: lower amplitude already crosses zero; lower the bracket");
    if (!detail::amplitude_crosses(hi, params, sc.r_max))
        throw bad_bracket_error(
            "shoot_radial: upper amplitude never crosses zero before R_max; raise the "
            "bracket or raise R_max if the amplitude is believed correct");

    while (hi - lo > sc.tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;   // bracket at rounding width
        (detail::amplitude_crosses(mid, params, sc.r_max) ? hi : lo) = mid;
    }
    // integrate the non-crossing endpoint: its path is full-length by
    // construction, and it sits within the bracket width of the true amplitude
    const double a = lo;
    const detail::ShootPath path = detail::integrate_profile(a, params, sc.r_max, true);

    Field out = [&] {
        if (params.d == 1) {
            auto grid = build_grid(DomainSpec::truncated_line(sc.r_max), sc.n_grid);
            Field q(grid);
            for (int j = 0; j < grid->n; ++j)
                q.values[j] = detail::sample_path(path, std::abs(grid->nodes[j]));
            return q;
        }
        auto grid = build_grid(DomainSpec::ball(sc.r_max, params.d, true), sc.n_grid);
        Field q(grid);
        for (int j = 0; j < grid->n; ++j)
            q.values[j] = detail::sample_path(path, grid->nodes[j]);
        return q;
    }();

    // Bisection tunes the amplitude so the zero crossing lands near R_max,
    // which pins the very last value close to 0 regardless of R_max. Judge
    // decay over the final 5% of the path instead, where the profile still
    // follows its genuine tail.
    double tail = 0.0;
    for (std::size_t k = path.q.size() - path.q.size() / 20; k < path.q.size(); ++k)
        tail = std::max(tail, std::abs(path.q[k]));
    if (path.q.size() < std::size_t(100'000) || !(tail < 1e-6 * a))
        throw numerical_error("shoot_radial: tail did not decay below 1e-6 of the "
                              "amplitude; raise R_max or tighten tol");
    return out;
}

/// Both evaluations of the Gagliardo-Nirenberg constant from one shot
/// profile: the Weinstein quotient W(Q) and the Pohozaev closed form
/// ((2 sigma + 2)/(d sigma)) (|grad Q| |Q|^alpha)^{-(d sigma - 2)}.
struct GnConstant {
    double from_quotient = 0.0;
    double from_pohozaev = 0.0;
    Field profile;
    double value() const { return from_quotient; }
};

inline GnConstant gn_constant_detail(const FlowParams& params, const ShootConfig& sc) {
    const auto crit = criticality(params);
    if (!(params.sigma > crit.sigma_mass_critical) ||
        !(params.sigma < crit.sigma_energy_critical))
        throw regime_error("gn_constant: requires 2/d < sigma < 2/(d-2)");
    GnConstant r;
    r.profile = shoot_radial(params, sc);
    FlowParams free = params;
    free.g = 1.0;   // normalized free equation has unit coupling
    r.from_quotient = gn_quotient(r.profile, free);
    const double alpha = *crit.alpha;
    const double ds = params.d * params.sigma;
    const double x1 = std::sqrt(gradient_sq_norm(r.profile)) *
                      std::pow(mass_norm(r.profile), alpha);
    r.from_pohozaev = (2.0 * params.sigma + 2.0) / ds * std::pow(x1, -(ds - 2.0));
    return r;
}

inline double gn_constant(const FlowParams& params, const ShootConfig& sc) {
    const GnConstant r = gn_constant_detail(params, sc);
    const double rel = std::abs(r.from_quotient - r.from_pohozaev) /
                       std::max(std::abs(r.from_quotient), 1e-300);
    if (!(rel <= 1e-3))
        throw numerical_error("gn_constant: quotient and Pohozaev forms disagree; "
                              "raise R_max or the grid resolution");
    return r.value();
}

} // namespace nlheat
