#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "grid.hpp"

namespace nlheat {

/// Physics of the flow du/dt = Lap u + g|u|^{2 sigma} u + mu[u] u.
struct FlowParams {
    double g = 0.0;
    double sigma = 1.0;
    int d = 1;

    void validate() const {
        if (!(sigma > 0.0)) throw config_error("sigma must be > 0");
        if (d < 1) throw config_error("dimension must be >= 1");
        if (!std::isfinite(g)) throw config_error("coupling g must be finite");
    }
};

enum class Regime { Subcritical, MassCritical, SupercriticalSubenergy, EnergyCriticalOrWorse };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::MassCritical: return "mass-critical";
        case Regime::SupercriticalSubenergy: return "supercritical-subenergy";
        default: return "energy-critical-or-worse";
    }
}

struct CriticalityReport {
    double sigma_mass_critical = 0.0;    // 2/d
    double sigma_energy_critical = 0.0;  // 2/(d-2)+, infinity for d <= 2
    Regime regime = Regime::Subcritical;
    std::optional<double> alpha;         // (2-(d-2)sigma)/(d sigma-2), defined when d sigma > 2
    bool wellposedness_covered = true;   // sigma < 1/(d-2)+ or 1/2 <= sigma < 2/(d-2)+
};

inline CriticalityReport criticality(const FlowParams& p) {
    p.validate();
    CriticalityReport r;
    const double inf = std::numeric_limits<double>::infinity();
    r.sigma_mass_critical = 2.0 / p.d;
    r.sigma_energy_critical = p.d <= 2 ? inf : 2.0 / (p.d - 2);
    if (p.sigma < r.sigma_mass_critical) r.regime = Regime::Subcritical;
    else if (p.sigma == r.sigma_mass_critical) r.regime = Regime::MassCritical;
    else if (p.sigma < r.sigma_energy_critical) r.regime = Regime::SupercriticalSubenergy;
    else r.regime = Regime::EnergyCriticalOrWorse;
    if (p.d * p.sigma > 2.0)
        r.alpha = (2.0 - (p.d - 2) * p.sigma) / (p.d * p.sigma - 2.0);
    const double half_crit = p.d <= 2 ? inf : 1.0 / (p.d - 2);
    r.wellposedness_covered =
        p.sigma < half_crit || (p.sigma >= 0.5 && p.sigma < r.sigma_energy_critical);
    return r;
}

inline double mass_norm(const Field& u) {
    double s = 0.0;
    for (int j = 0; j < u.size(); ++j)
        s += u.grid->volume_weights[j] * u.values[j] * u.values[j];
    return std::sqrt(s);
}

inline double lp_norm(const Field& u, double p) {
    if (!(p >= 1.0)) throw config_error("lp_norm requires p >= 1");
    double s = 0.0;
    for (int j = 0; j < u.size(); ++j)
        s += u.grid->volume_weights[j] * std::pow(std::abs(u.values[j]), p);
    return std::pow(s, 1.0 / p);
}

inline double linf_norm(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

// integrate(|u|^{2 sigma + 2}); the integrand at u = 0 is 0 for every sigma > 0
inline double potential_integral(const Field& u, double sigma) {
    const double p = 2.0 * sigma + 2.0;
    double s = 0.0;
    for (int j = 0; j < u.size(); ++j) {
        const double a = std::abs(u.values[j]);
        if (a > 0.0) s += u.grid->volume_weights[j] * std::pow(a, p);
    }
    return s;
}

/// E[u] = 1/2 |grad u|^2 - g/(2 sigma + 2) |u|^{2 sigma + 2}.
inline double energy(const Field& u, const FlowParams& p) {
    return 0.5 * gradient_sq_norm(u) -
           p.g / (2.0 * p.sigma + 2.0) * potential_integral(u, p.sigma);
}

/// I[u] = |grad u|^2 - g |u|^{2 sigma + 2}; also 2E - (sigma g/(sigma+1)) |u|^{2s+2}.
inline double nehari(const Field& u, const FlowParams& p) {
    return gradient_sq_norm(u) - p.g * potential_integral(u, p.sigma);
}

/// The mass-preserving multiplier mu[u] = I[u] / |u|_2^2.
inline double mu(const Field& u, const FlowParams& p) {
    const double m = mass_norm(u);
    if (m == 0.0) throw degenerate_field_error("mu is undefined for the zero field");
    return nehari(u, p) / (m * m);
}

/// Fixed-denominator variant mu_alpha[u] = I[u] / alpha.
inline double mu_alpha(const Field& u, const FlowParams& p, double alpha) {
    if (!(alpha > 0.0)) throw config_error("mu_alpha requires alpha > 0");
    return nehari(u, p) / alpha;
}

/// Weinstein quotient W(u) = |u|_{2s+2}^{2s+2} / (|grad u|^{d sigma} |u|_2^{2+2s-d sigma}).
inline double gn_quotient(const Field& u, const FlowParams& p) {
    const double m2 = mass_norm(u);
    if (m2 == 0.0) throw degenerate_field_error("gn_quotient is undefined for the zero field");
    const double gr = std::sqrt(gradient_sq_norm(u));
    const double num = potential_integral(u, p.sigma);
    const double ds = p.d * p.sigma;
    return num / (std::pow(gr, ds) * std::pow(m2, 2.0 + 2.0 * p.sigma - ds));
}

} // namespace nlheat
