#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "functionals.hpp"
#include "tridiagonal.hpp"

namespace nlheat {

enum class Scheme { MultiplierSemiImplicit, ProjectedSemiImplicit, MuAlphaSemiImplicit };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::MultiplierSemiImplicit: return "multiplier";
        case Scheme::ProjectedSemiImplicit: return "projected";
        default: return "mu_alpha";
    }
}

enum class Termination { HorizonReached, Stationary, GrowUpTriggered, Diverged };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::HorizonReached: return "HorizonReached";
        case Termination::Stationary: return "Stationary";
        case Termination::GrowUpTriggered: return "GrowUpTriggered";
        default: return "Diverged";
    }
}

struct FlowConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    Scheme scheme = Scheme::MultiplierSemiImplicit;
    double alpha = 0.0;              // denominator for MuAlphaSemiImplicit
    double stationarity_tol = 1e-12;   // 0 disables the stationary stop
    double growup_factor = 1e6;
    std::int64_t max_steps = 10'000'000;
    int snapshot_every = 1;
    bool store_snapshots = false;    // retain the Field at every recorded time

    void validate() const {
        if (!(dt > 0.0)) throw config_error("dt must be > 0");
        if (!(t_final > 0.0)) throw config_error("t_final must be > 0");
        if (!(dt < t_final)) throw config_error("dt must be < t_final");
        if (!(stationarity_tol >= 0.0)) throw config_error("stationarity_tol must be >= 0");
        if (!(growup_factor > 1.0)) throw config_error("growup_factor must be > 1");
        if (max_steps < 1) throw config_error("max_steps must be >= 1");
        if (snapshot_every < 1) throw config_error("snapshot_every must be >= 1");
        if (scheme == Scheme::MuAlphaSemiImplicit && !(alpha > 0.0))
            throw config_error("mu_alpha scheme requires alpha > 0");
    }
};

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double mu = 0.0;
    double grad_l2 = 0.0;
    double nehari = 0.0;
    double linf = 0.0;
    double step_residual = 0.0;   // |u^{n+1} - u^n|_2 / dt for the step ending at t

    bool finite() const {
        return std::isfinite(mass) && std::isfinite(energy) && std::isfinite(mu) &&
               std::isfinite(grad_l2) && std::isfinite(nehari) && std::isfinite(linf) &&
               std::isfinite(step_residual);
    }
};

struct RunResult {
    Field final;
    std::vector<DiagnosticsRecord> trace;
    Termination termination = Termination::HorizonReached;
    Scheme scheme = Scheme::MultiplierSemiImplicit;
    double dt = 0.0;
    double alpha = 0.0;
    std::vector<Field> snapshots;   // filled when config.store_snapshots
};

namespace detail {

// One semi-implicit step: (I - dt L) u^{n+1} = u^n + dt (g|u^n|^{2s} u^n + m u^n),
// with m the multiplier value chosen by the scheme. The system is strictly
// diagonally dominant for every dt > 0, so the Thomas solve cannot break.
inline Field semi_implicit_solve(const Field& u, const FlowParams& p, double dt,
                                 double multiplier) {
    const Grid& g = *u.grid;
    const int n = g.n;
    std::vector<double> rhs(n), lower(n), diag(n), upper(n);
    for (int j = 0; j < n; ++j) {
        const double uj = u.values[j];
        const double a = std::abs(uj);
        const double nl = a > 0.0 ? p.g * std::pow(a, 2.0 * p.sigma) * uj : 0.0;
        rhs[j] = uj + dt * (nl + multiplier * uj);
        lower[j] = -dt * g.lap_lower[j];
        diag[j] = 1.0 - dt * g.lap_diag[j];
        upper[j] = -dt * g.lap_upper[j];
    }
    return Field{u.grid, solve_tridiagonal(lower, diag, upper, std::move(rhs))};
}

inline double scheme_multiplier(const Field& u, const FlowParams& p, const FlowConfig& c) {
    if (c.scheme == Scheme::MuAlphaSemiImplicit) return mu_alpha(u, p, c.alpha);
    return mu(u, p);   // throws degenerate_field_error on the zero field
}

} // namespace detail

/// Advance one time step. The projected variant rescales the result back to
/// the mass of its input, which over a run pins the initial mass to rounding.
inline Field step(const Field& u, const FlowParams& p, const FlowConfig& c) {
    c.validate();
    p.validate();
    const double m = detail::scheme_multiplier(u, p, c);
    Field next = detail::semi_implicit_solve(u, p, c.dt, m);
    if (c.scheme == Scheme::ProjectedSemiImplicit) {
        const double m0 = mass_norm(u);
        const double m1 = mass_norm(next);
        if (m1 == 0.0) throw numerical_error("projection hit a zero field");
        const double scale = m0 / m1;
        for (double& v : next.values) v *= scale;
    }
    return next;
}

inline DiagnosticsRecord diagnose(const Field& u, const FlowParams& p, double t,
                                  double step_residual) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = mass_norm(u);
    r.grad_l2 = std::sqrt(gradient_sq_norm(u));
    const double pot = potential_integral(u, p.sigma);
    r.energy = 0.5 * r.grad_l2 * r.grad_l2 - p.g / (2.0 * p.sigma + 2.0) * pot;
    r.nehari = r.grad_l2 * r.grad_l2 - p.g * pot;
    r.mu = r.mass > 0.0 ? r.nehari / (r.mass * r.mass)
                        : std::numeric_limits<double>::quiet_NaN();
    r.linf = linf_norm(u);
    r.step_residual = step_residual;
    return r;
}

/// Iterate step() to the horizon, recording diagnostics every snapshot_every
/// steps (and always at step 0 and at termination). Termination reasons:
/// Stationary when step_residual < stationarity_tol, GrowUpTriggered when
/// grad_l2 exceeds growup_factor times its initial value, Diverged on any
/// non-finite value, else HorizonReached.
inline RunResult evolve(const Field& u0, const FlowParams& p, const FlowConfig& c) {
    c.validate();
    p.validate();
    if (!u0.finite()) throw regime_error("evolve requires finite initial data");
    if (mass_norm(u0) == 0.0)
        throw degenerate_field_error("evolve requires nonzero initial data");

    RunResult run;
    run.scheme = c.scheme;
    run.dt = c.dt;
    run.alpha = c.alpha;
    run.trace.push_back(diagnose(u0, p, 0.0, 0.0));
    if (c.store_snapshots) run.snapshots.push_back(u0);
    const double grad0 = run.trace.front().grad_l2;

    Field u = u0;
    const auto n_steps =
        std::min<std::int64_t>(c.max_steps,
                               static_cast<std::int64_t>(std::ceil(c.t_final / c.dt - 0.5)));
    Termination why = Termination::HorizonReached;
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        Field next = step(u, p, c);
        const double t = k * c.dt;

        double diff2 = 0.0;
        for (int j = 0; j < u.size(); ++j) {
            const double d = next.values[j] - u.values[j];
            diff2 += u.grid->volume_weights[j] * d * d;
        }
        const double residual = std::sqrt(diff2) / c.dt;

        if (!next.finite() || !std::isfinite(residual)) {
            why = Termination::Diverged;
            break;
        }
        DiagnosticsRecord rec = diagnose(next, p, t, residual);
        if (!rec.finite()) {
            why = Termination::Diverged;
            break;
        }

        u = std::move(next);
        const bool stationary = residual < c.stationarity_tol;
        const bool growup = rec.grad_l2 > c.growup_factor * grad0;
        const bool last = stationary || growup || k == n_steps;
        if (last || k % c.snapshot_every == 0) {
            run.trace.push_back(rec);
            if (c.store_snapshots) run.snapshots.push_back(u);
        }
        if (growup) {
            why = Termination::GrowUpTriggered;
            break;
        }
        if (stationary) {
            why = Termination::Stationary;
            break;
        }
    }
    run.final = std::move(u);
    run.termination = why;
    return run;
}

/// Max over the trace of |E(t) - E(0) + sum_{s<=t} dt step_residual(s)^2|,
/// the discrete residual of the dissipation identity. Requires a dt-dense
/// trace (snapshot_every = 1), checked against the run's own step size.
inline double check_dissipation(const RunResult& run, double u0_energy) {
    const auto& trace = run.trace;
    if (trace.empty()) throw config_error("check_dissipation: empty trace");
    double dissipated = 0.0;
    double worst = std::abs(trace.front().energy - u0_energy);
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const double gap = trace[k].t - trace[k - 1].t;
        if (std::abs(gap - run.dt) > 1e-9 * std::max(1.0, std::abs(trace[k].t)))
            throw config_error("check_dissipation: trace too sparse (snapshot_every != 1)");
        dissipated += gap * trace[k].step_residual * trace[k].step_residual;
        worst = std::max(worst, std::abs(trace[k].energy - u0_energy + dissipated));
    }
    return worst;
}

/// Residual of the mass evolution formula
///   mass(t)^2 = (mass(0)^2 - alpha) exp((2/alpha) int_0^t I) + alpha
/// against the recorded nehari series (left Riemann sum). Only meaningful for
/// traces produced by the mu_alpha scheme.
inline double mass_formula_check(const RunResult& run, double alpha) {
    if (run.scheme != Scheme::MuAlphaSemiImplicit)
        throw regime_error("mass_formula_check: trace is not from a mu_alpha run");
    if (!(alpha > 0.0)) throw config_error("mass_formula_check: alpha must be > 0");
    const auto& trace = run.trace;
    if (trace.empty()) throw config_error("mass_formula_check: empty trace");
    const double m0sq = trace.front().mass * trace.front().mass;
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (k > 0) integral += (trace[k].t - trace[k - 1].t) * trace[k - 1].nehari;
        const double predicted = (m0sq - alpha) * std::exp(2.0 / alpha * integral) + alpha;
        worst = std::max(worst, std::abs(trace[k].mass * trace[k].mass - predicted));
    }
    return worst;
}

} // namespace nlheat
