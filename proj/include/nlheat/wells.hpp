#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flow.hpp"
#include "stationary.hpp"

namespace nlheat {

/// Best Sobolev constant Lambda = inf |grad u| / |u|_{2s+2} over the discrete
/// space of a bounded domain, and the well depth p it induces.
struct WellConstants {
    double lambda = 0.0;
    double lambda_extrapolated = 0.0;   // two-grid Richardson value, informational
    double p = 0.0;                     // (sigma/(2 sigma + 2)) lambda^{(2 sigma + 2)/sigma}
    DomainSpec domain;
    double sigma = 0.0;
    int n = 0;
    double residual = 0.0;              // constrained-gradient norm at the minimizer
};

struct SobolevConfig {
    int n = 511;
    double tau = 0.5;          // descent step
    double gamma = 1.0;        // Sobolev preconditioner (I - gamma Lap)^{-1}
    double tol = 1e-10;        // stationarity: projected-gradient norm
    long max_iters = 500'000;
};

namespace detail {

// minimize |grad v|^2 subject to integrate(|v|^{2s+2}) = 1 by preconditioned
// projected gradient descent; the limit solves -Lap v = kappa |v|^{2s} v, and
// Lambda = sqrt(|grad v|^2) at the constrained minimizer
inline std::pair<double, double> sobolev_minimize(std::shared_ptr<const Grid> grid,
                                                  double sigma, const SobolevConfig& sc) {
    const int n = grid->n;
    Field v = first_eigenfunction_seed(grid, 1.0);
    const double pexp = 2.0 * sigma + 2.0;
    auto renorm = [&](Field& w) {
        const double p = potential_integral(w, sigma);
        if (!(p > 0.0)) throw numerical_error("sobolev_constant: degenerate iterate");
        const double s = std::pow(p, -1.0 / pexp);
        for (double& x : w.values) x *= s;
    };
    renorm(v);

    std::vector<double> lower(n), diag(n), upper(n), phi(n), d(n);
    for (int j = 0; j < n; ++j) {
        lower[j] = -sc.gamma * grid->lap_lower[j];
        diag[j] = 1.0 - sc.gamma * grid->lap_diag[j];
        upper[j] = -sc.gamma * grid->lap_upper[j];
    }

    double res = 0.0;
    for (long it = 0; it < sc.max_iters; ++it) {
        const Field lap = apply_laplacian(v);
        double num = 0.0, den = 0.0;
        for (int j = 0; j < n; ++j) {
            const double a = std::abs(v.values[j]);
            phi[j] = a > 0.0 ? std::pow(a, 2.0 * sigma) * v.values[j] : 0.0;
            num += grid->volume_weights[j] * (-lap.values[j]) * phi[j];
            den += grid->volume_weights[j] * phi[j] * phi[j];
        }
        const double beta = num / den;
        double res2 = 0.0;
        for (int j = 0; j < n; ++j) {
            d[j] = -lap.values[j] - beta * phi[j];
            res2 += grid->volume_weights[j] * d[j] * d[j];
        }
        res = std::sqrt(res2);
        if (res < sc.tol) return {std::sqrt(gradient_sq_norm(v)), res};
        const std::vector<double> pd = solve_tridiagonal(lower, diag, upper, d);
        for (int j = 0; j < n; ++j) v.values[j] -= sc.tau * pd[j];
        renorm(v);
    }
    throw numerical_error("sobolev_constant: descent did not reach tolerance");
}

} // namespace detail

/// Minimize the Sobolev quotient on the requested grid; also computed at
/// double resolution for a Richardson-extrapolated continuum estimate. The
/// well depth p is derived from the same-grid lambda so that classification
/// stays consistent with simulation on that grid.
inline WellConstants sobolev_constant(const DomainSpec& domain, double sigma,
                                      const SobolevConfig& sc) {
    if (domain.whole_space)
        throw regime_error("sobolev_constant: bounded domains only (p = 0 on the whole "
                           "space and the well is empty)");
    if (!(sigma > 0.0)) throw regime_error("sobolev_constant: sigma must be > 0");
    const int d = domain.kind == DomainKind::Ball ? domain.dim : 1;
    if (d > 2 && !(sigma < 2.0 / (d - 2)))
        throw regime_error("sobolev_constant: sigma must be below 2/(d-2)");

    const auto [lam, res] = detail::sobolev_minimize(build_grid(domain, sc.n), sigma, sc);
    const auto [lam_fine, res_fine] =
        detail::sobolev_minimize(build_grid(domain, 2 * sc.n + 1), sigma, sc);

    WellConstants wc;
    wc.lambda = lam;
    wc.lambda_extrapolated = lam_fine + (lam_fine - lam) / 3.0;
    wc.p = sigma / (2.0 * sigma + 2.0) * std::pow(lam, (2.0 * sigma + 2.0) / sigma);
    wc.domain = domain;
    wc.sigma = sigma;
    wc.n = sc.n;
    wc.residual = res;
    (void)res_fine;
    return wc;
}

enum class SetLabel { W, Z, Boundary, Outside, KMember, KNonMember, NotApplicable };

inline const char* set_label_name(SetLabel s) {
    switch (s) {
        case SetLabel::W: return "W";
        case SetLabel::Z: return "Z";
        case SetLabel::Boundary: return "Boundary";
        case SetLabel::Outside: return "Outside";
        case SetLabel::KMember: return "K";
        case SetLabel::KNonMember: return "not-K";
        default: return "NotApplicable";
    }
}

/// Bounded-domain classification. The well is defined at unit coupling; all
/// stored quantities are for the rescaled field v = g^{1/(2 sigma)} u, which
/// multiplies E and I by g^{1/sigma} and leaves the labels' meaning intact.
struct WellClassification {
    SetLabel label = SetLabel::Outside;
    double energy = 0.0;    // E[v] in the g = 1 frame
    double nehari = 0.0;    // I[v] in the g = 1 frame
    double margin = 0.0;    // min(|E - p|, |I|)
    bool smallness_implies_w = false;   // |grad v| < sqrt(2p)
};

namespace detail {

inline WellClassification classify_bounded_scalars(double energy_g, double nehari_g,
                                                   double grad2_g, double mass,
                                                   const FlowParams& params,
                                                   const WellConstants& wc, double tol) {
    if (!(params.g > 0.0))
        throw regime_error("classify_bounded: the potential well requires g > 0");
    const double scale = std::pow(params.g, 1.0 / params.sigma);
    const double e = scale * energy_g;
    const double i = scale * nehari_g;
    WellClassification r;
    r.energy = e;
    r.nehari = i;
    r.margin = std::min(std::abs(e - wc.p), std::abs(i));
    r.smallness_implies_w = scale * grad2_g < 2.0 * wc.p;
    if (mass == 0.0) {
        r.label = SetLabel::W;   // the well contains 0 by convention
        return r;
    }
    const double near = tol * (1.0 + std::abs(e));
    if (std::abs(i) < near || std::abs(e - wc.p) < near) r.label = SetLabel::Boundary;
    else if (e < wc.p && i > 0.0) r.label = SetLabel::W;
    else if (e < wc.p && i < 0.0) r.label = SetLabel::Z;
    else r.label = SetLabel::Outside;
    return r;
}

} // namespace detail

inline WellClassification classify_bounded(const Field& u, const FlowParams& params,
                                           const WellConstants& wc, double tol = 1e-8) {
    if (u.grid->domain.whole_space)
        throw regime_error("classify_bounded: whole-space domains have p = 0 and an "
                           "empty well; use the K classifier");
    return detail::classify_bounded_scalars(energy(u, params), nehari(u, params),
                                            gradient_sq_norm(u), mass_norm(u), params,
                                            wc, tol);
}

/// Whole-space membership products and thresholds, all at unit coupling.
struct KClassification {
    bool member = false;
    double energy_product = 0.0;    // E[v] |v|_2^{2 alpha}
    double grad_product = 0.0;      // |grad v|^2 |v|_2^{2 alpha}
    double threshold_energy = 0.0;  // E[Q] |Q|_2^{2 alpha}
    double threshold_grad = 0.0;    // |grad Q|^2 |Q|_2^{2 alpha}
};

struct KThresholds {
    double energy_product = 0.0;
    double grad_product = 0.0;
    double alpha = 0.0;
};

inline KThresholds k_thresholds(const GroundState& Qref, const FlowParams& params) {
    const auto crit = criticality(params);
    if (!crit.alpha || !(params.sigma < crit.sigma_energy_critical) ||
        !(params.sigma > crit.sigma_mass_critical))
        throw regime_error("k_thresholds: requires 2/d < sigma < 2/(d-2)");
    FlowParams unit = params;
    unit.g = 1.0;
    const double m = mass_norm(Qref.profile);
    const double pow2a = std::pow(m, 2.0 * *crit.alpha);
    KThresholds t;
    t.alpha = *crit.alpha;
    t.energy_product = energy(Qref.profile, unit) * pow2a;
    t.grad_product = gradient_sq_norm(Qref.profile) * pow2a;
    return t;
}

namespace detail {

inline KClassification classify_whole_space_scalars(double energy_g, double grad2_g,
                                                    double mass, const FlowParams& params,
                                                    const KThresholds& t) {
    if (!(params.g > 0.0))
        throw regime_error("classify_whole_space: requires g > 0");
    const double scale = std::pow(params.g, 1.0 / params.sigma);
    const double m1 = std::pow(params.g, 1.0 / (2.0 * params.sigma)) * mass;
    const double pow2a = std::pow(m1, 2.0 * t.alpha);
    KClassification r;
    r.energy_product = scale * energy_g * pow2a;
    r.grad_product = scale * grad2_g * pow2a;
    r.threshold_energy = t.energy_product;
    r.threshold_grad = t.grad_product;
    r.member = r.energy_product < t.energy_product && r.grad_product < t.grad_product;
    return r;
}

} // namespace detail

inline KClassification classify_whole_space(const Field& u, const FlowParams& params,
                                            const GroundState& Qref) {
    const KThresholds t = k_thresholds(Qref, params);
    return detail::classify_whole_space_scalars(energy(u, params), gradient_sq_norm(u),
                                                mass_norm(u), params, t);
}

/// Barrier function of the K-invariance argument, f(x) = x^2/2 - C_GN/(2s+2) x^{ds}.
inline double k_barrier(double x, const FlowParams& params, double c_gn) {
    if (!(params.d * params.sigma > 2.0)) throw regime_error("k_barrier: requires d sigma > 2");
    if (!(x >= 0.0)) throw config_error("k_barrier: x must be >= 0");
    const double ds = params.d * params.sigma;
    return 0.5 * x * x - c_gn / (2.0 * params.sigma + 2.0) * std::pow(x, ds);
}

/// Location x1 of the barrier's local maximum, ((2s+2)/(ds C_GN))^{1/(ds-2)}.
inline double k_barrier_peak(const FlowParams& params, double c_gn) {
    if (!(params.d * params.sigma > 2.0)) throw regime_error("k_barrier_peak: requires d sigma > 2");
    const double ds = params.d * params.sigma;
    return std::pow((2.0 * params.sigma + 2.0) / (ds * c_gn), 1.0 / (ds - 2.0));
}

struct InvarianceReport {
    bool applicable = true;
    SetLabel initial = SetLabel::NotApplicable;
    int n_checked = 0;
    int n_violations = 0;
    std::optional<double> first_violation_time;
};

using RecordClassifier = std::function<SetLabel(const DiagnosticsRecord&)>;

/// Record-level bounded classifier for monitoring; NotApplicable when g <= 0.
inline RecordClassifier bounded_record_classifier(const FlowParams& params,
                                                  const WellConstants& wc,
                                                  double tol = 1e-8) {
    return [params, wc, tol](const DiagnosticsRecord& rec) {
        if (!(params.g > 0.0)) return SetLabel::NotApplicable;
        const double grad2 = rec.grad_l2 * rec.grad_l2;
        return detail::classify_bounded_scalars(rec.energy, rec.nehari, grad2, rec.mass,
                                                params, wc, tol)
            .label;
    };
}

inline RecordClassifier whole_space_record_classifier(const FlowParams& params,
                                                      const KThresholds& t) {
    return [params, t](const DiagnosticsRecord& rec) {
        if (!(params.g > 0.0)) return SetLabel::NotApplicable;
        const double grad2 = rec.grad_l2 * rec.grad_l2;
        const auto r =
            detail::classify_whole_space_scalars(rec.energy, grad2, rec.mass, params, t);
        return r.member ? SetLabel::KMember : SetLabel::KNonMember;
    };
}

/// Classify every recorded snapshot of a run and report departures from the
/// initial label. Boundary labels are never violations; a NotApplicable
/// classifier yields an inapplicable report rather than an error.
inline InvarianceReport monitor_invariance(const RunResult& run,
                                           const RecordClassifier& classify) {
    InvarianceReport rep;
    if (run.trace.empty()) throw config_error("monitor_invariance: empty trace");
    rep.initial = classify(run.trace.front());
    if (rep.initial == SetLabel::NotApplicable) {
        rep.applicable = false;
        return rep;
    }
    SetLabel baseline = rep.initial;
    for (const auto& rec : run.trace) {
        const SetLabel s = classify(rec);
        ++rep.n_checked;
        if (baseline == SetLabel::Boundary && s != SetLabel::Boundary) baseline = s;
        if (s != baseline && s != SetLabel::Boundary && baseline != SetLabel::Boundary) {
            ++rep.n_violations;
            if (!rep.first_violation_time) rep.first_violation_time = rec.t;
        }
    }
    return rep;
}

} // namespace nlheat
