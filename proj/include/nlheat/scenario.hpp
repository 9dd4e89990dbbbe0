#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wells.hpp"

namespace nlheat {

/// Fixed decimal formatting for every real emitted to an artifact:
/// 17 significant digits, enough to round-trip a double bit-exactly.
inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string checksum_hex(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

enum class Task { Evolve, GroundState, Classify, Sobolev, GnConstant, Shoot };

inline const char* task_name(Task t) {
    switch (t) {
        case Task::Evolve: return "evolve";
        case Task::GroundState: return "ground_state";
        case Task::Classify: return "classify";
        case Task::Sobolev: return "sobolev";
        case Task::GnConstant: return "gn_constant";
        default: return "shoot";
    }
}

enum class InitialKind { Eigenfunction, Gaussian, Soliton, File };

/// One scenario: a domain, physics, an initial datum, flow numerics, and the
/// set of tasks to execute. Mirrors the flat key = value config text.
struct ScenarioConfig {
    DomainSpec domain;
    int grid_n = 0;
    FlowParams params;
    FlowConfig flow;
    std::vector<Task> tasks;
    std::string output_dir = "out";

    InitialKind initial = InitialKind::Eigenfunction;
    int initial_k = 1;
    double initial_mass = 1.0;
    double initial_center = 0.0;
    bool initial_center_set = false;
    double initial_width = 1.0;
    std::string initial_path;
    bool initial_set = false;

    double mass_target = 0.0;
    ShootConfig shoot;
    double classify_tol = 1e-8;
    SobolevConfig sobolev;

    std::vector<std::pair<std::string, std::string>> echo;   // canonical key order

    bool has_task(Task t) const {
        return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
    }
};

namespace detail {

struct KvLine {
    std::string key, value;
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<KvLine> parse_kv_text(const std::string& text,
                                         std::vector<std::string>& errors) {
    std::vector<KvLine> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        out.push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
    }
    return out;
}

inline bool is_reserved_key(const std::string& k) {
    return k.rfind("result.", 0) == 0 || k.rfind("artifact.", 0) == 0 ||
           k.rfind("caveat.", 0) == 0;
}

} // namespace detail

/// Parse and validate the flat config format. Reports every problem at once:
/// unknown keys, duplicates, type mismatches, and missing task requirements.
/// Keys under the reserved manifest prefixes (result., artifact., caveat.)
/// are ignored so a run manifest replays as a config.
inline ScenarioConfig parse_config(const std::string& text) {
    std::vector<std::string> errors;
    const auto lines = detail::parse_kv_text(text, errors);

    std::map<std::string, std::string> kv;
    for (const auto& l : lines) {
        if (detail::is_reserved_key(l.key)) continue;
        if (!kv.emplace(l.key, l.value).second)
            errors.push_back("duplicate key: " + l.key);
    }

    static const std::set<std::string> known = {
        "domain", "length", "radius", "dimension", "halfwidth", "ball_whole_space",
        "grid_n", "g", "sigma", "initial", "initial_k", "initial_mass",
        "initial_center", "initial_width", "initial_path", "tasks", "output_dir",
        "dt", "t_final", "scheme", "alpha", "stationarity_tol", "growup_factor",
        "max_steps", "snapshot_every", "mass_target", "shoot_r_max",
        "shoot_bracket_lo", "shoot_bracket_hi", "shoot_tol", "shoot_n",
        "classify_tol", "sobolev_n", "sobolev_tol"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) errors.push_back("unknown key: " + k);

    auto have = [&](const char* k) { return kv.count(k) != 0; };
    auto real_of = [&](const char* k, double fallback) {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            errors.push_back(std::string(k) + ": not a real number: " + it->second);
            return fallback;
        }
    };
    auto int_of = [&](const char* k, long long fallback) {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing text");
            return v;
        } catch (const std::exception&) {
            errors.push_back(std::string(k) + ": not an integer: " + it->second);
            return fallback;
        }
    };
    auto bool_of = [&](const char* k, bool fallback) {
        auto it = kv.find(k);
        if (it == kv.end()) return fallback;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        errors.push_back(std::string(k) + ": expected true or false");
        return fallback;
    };

    ScenarioConfig c;

    // domain
    const std::string dom = have("domain") ? kv["domain"] : "";
    if (dom.empty()) {
        errors.push_back("missing required key: domain");
    } else if (dom == "interval") {
        if (!have("length")) errors.push_back("interval domain requires: length");
        const double L = real_of("length", 1.0);
        if (L > 0 && errors.empty()) c.domain = DomainSpec::interval(L);
        else if (L <= 0) errors.push_back("length: must be > 0");
        else c.domain = DomainSpec{DomainKind::Interval, std::max(L, 1.0), 1, false};
    } else if (dom == "ball") {
        if (!have("radius")) errors.push_back("ball domain requires: radius");
        if (!have("dimension")) errors.push_back("ball domain requires: dimension");
        const double R = real_of("radius", 1.0);
        const long long d = int_of("dimension", 3);
        const bool ws = bool_of("ball_whole_space", false);
        if (R <= 0) errors.push_back("radius: must be > 0");
        else if (d < 2) errors.push_back("dimension: ball requires an integer >= 2");
        else c.domain = DomainSpec::ball(R, static_cast<int>(d), ws);
    } else if (dom == "truncated_line") {
        if (!have("halfwidth")) errors.push_back("truncated_line domain requires: halfwidth");
        const double A = real_of("halfwidth", 1.0);
        if (A > 0) c.domain = DomainSpec::truncated_line(A);
        else errors.push_back("halfwidth: must be > 0");
    } else {
        errors.push_back("domain: unknown kind '" + dom +
                         "' (interval, ball, truncated_line)");
    }

    c.grid_n = static_cast<int>(int_of("grid_n", 0));
    if (!have("grid_n")) errors.push_back("missing required key: grid_n");
    else if (c.grid_n < 3) errors.push_back("grid_n: must be >= 3");

    if (!have("g")) errors.push_back("missing required key: g");
    if (!have("sigma")) errors.push_back("missing required key: sigma");
    c.params.g = real_of("g", 0.0);
    c.params.sigma = real_of("sigma", 1.0);
    if (have("sigma") && !(c.params.sigma > 0.0)) errors.push_back("sigma: must be > 0");
    c.params.d = c.domain.kind == DomainKind::Ball ? c.domain.dim : 1;

    // tasks
    if (!have("tasks")) {
        errors.push_back("missing required key: tasks");
    } else {
        std::stringstream ss(kv["tasks"]);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = detail::trim(item);
            if (t == "evolve") c.tasks.push_back(Task::Evolve);
            else if (t == "ground_state") c.tasks.push_back(Task::GroundState);
            else if (t == "classify") c.tasks.push_back(Task::Classify);
            else if (t == "sobolev") c.tasks.push_back(Task::Sobolev);
            else if (t == "gn_constant") c.tasks.push_back(Task::GnConstant);
            else if (t == "shoot") c.tasks.push_back(Task::Shoot);
            else errors.push_back("tasks: unknown task '" + t + "'");
        }
        if (c.tasks.empty()) errors.push_back("tasks: at least one task required");
    }

    // initial datum
    if (have("initial")) {
        c.initial_set = true;
        const std::string ik = kv["initial"];
        if (ik == "eigenfunction") c.initial = InitialKind::Eigenfunction;
        else if (ik == "gaussian") c.initial = InitialKind::Gaussian;
        else if (ik == "soliton") c.initial = InitialKind::Soliton;
        else if (ik == "file") c.initial = InitialKind::File;
        else errors.push_back("initial: unknown kind '" + ik + "'");
    }
    c.initial_k = static_cast<int>(int_of("initial_k", 1));
    if (c.initial_k < 1) errors.push_back("initial_k: must be >= 1");
    c.initial_mass = real_of("initial_mass", 1.0);
    c.initial_center_set = have("initial_center");
    c.initial_center = real_of("initial_center", 0.0);
    c.initial_width = real_of("initial_width", 1.0);
    if (have("initial_path")) c.initial_path = kv["initial_path"];
    if (c.initial_set) {
        if (c.initial == InitialKind::File) {
            if (c.initial_path.empty())
                errors.push_back("initial = file requires: initial_path");
        } else {
            if (!have("initial_mass"))
                errors.push_back("initial requires: initial_mass");
            else if (!(c.initial_mass > 0.0))
                errors.push_back("initial_mass: must be > 0");
        }
        if (c.initial == InitialKind::Gaussian && !(c.initial_width > 0.0))
            errors.push_back("initial_width: must be > 0");
    }

    // flow numerics
    c.flow.dt = real_of("dt", 1e-3);
    c.flow.t_final = real_of("t_final", 1.0);
    const std::string sch = have("scheme") ? kv["scheme"] : "multiplier";
    if (sch == "multiplier") c.flow.scheme = Scheme::MultiplierSemiImplicit;
    else if (sch == "projected") c.flow.scheme = Scheme::ProjectedSemiImplicit;
    else if (sch == "mu_alpha") c.flow.scheme = Scheme::MuAlphaSemiImplicit;
    else errors.push_back("scheme: unknown scheme '" + sch + "'");
    c.flow.alpha = real_of("alpha", 0.0);
    c.flow.stationarity_tol = real_of("stationarity_tol", 1e-12);
    c.flow.growup_factor = real_of("growup_factor", 1e6);
    c.flow.max_steps = int_of("max_steps", 10'000'000);
    c.flow.snapshot_every = static_cast<int>(int_of("snapshot_every", 1));
    if (c.flow.scheme == Scheme::MuAlphaSemiImplicit && !(c.flow.alpha > 0.0))
        errors.push_back("scheme = mu_alpha requires: alpha > 0");
    if (!(c.flow.dt > 0.0)) errors.push_back("dt: must be > 0");
    if (!(c.flow.t_final > c.flow.dt)) errors.push_back("t_final: must exceed dt");
    if (!(c.flow.stationarity_tol >= 0.0)) errors.push_back("stationarity_tol: must be >= 0");
    if (!(c.flow.growup_factor > 1.0)) errors.push_back("growup_factor: must be > 1");
    if (c.flow.max_steps < 1) errors.push_back("max_steps: must be >= 1");
    if (c.flow.snapshot_every < 1) errors.push_back("snapshot_every: must be >= 1");

    if (have("output_dir")) c.output_dir = kv["output_dir"];

    c.mass_target = real_of("mass_target", 0.0);
    c.shoot.r_max = real_of("shoot_r_max", 15.0);
    c.shoot.bracket_lo = real_of("shoot_bracket_lo", 1.01);
    c.shoot.bracket_hi = real_of("shoot_bracket_hi", 8.0);
    c.shoot.tol = real_of("shoot_tol", 1e-15);
    c.shoot.n_grid = static_cast<int>(int_of("shoot_n", 4095));
    c.classify_tol = real_of("classify_tol", 1e-8);
    c.sobolev.n = static_cast<int>(int_of("sobolev_n", c.grid_n > 0 ? c.grid_n : 511));
    c.sobolev.tol = real_of("sobolev_tol", 1e-10);

    // per-task requirements
    auto needs_initial = [&](Task t) {
        return t == Task::Evolve || t == Task::Classify;
    };
    for (Task t : c.tasks) {
        if (needs_initial(t) && !c.initial_set)
            errors.push_back(std::string(task_name(t)) + " task requires: initial");
        if (t == Task::Evolve) {
            if (!have("dt")) errors.push_back("evolve task requires: dt");
            if (!have("t_final")) errors.push_back("evolve task requires: t_final");
        }
        if (t == Task::GroundState) {
            if (!have("mass_target")) errors.push_back("ground_state task requires: mass_target");
            else if (!(c.mass_target > 0.0)) errors.push_back("mass_target: must be > 0");
            if (!have("dt")) errors.push_back("ground_state task requires: dt");
        }
    }

    if (!errors.empty()) {
        std::string msg = "invalid config (" + std::to_string(errors.size()) + " problems):";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw config_error(msg);
    }

    // canonical echo, in declaration order, for deterministic manifests
    static const char* order[] = {
        "domain", "length", "radius", "dimension", "halfwidth", "ball_whole_space",
        "grid_n", "g", "sigma", "initial", "initial_k", "initial_mass",
        "initial_center", "initial_width", "initial_path", "tasks", "output_dir",
        "dt", "t_final", "scheme", "alpha", "stationarity_tol", "growup_factor",
        "max_steps", "snapshot_every", "mass_target", "shoot_r_max",
        "shoot_bracket_lo", "shoot_bracket_hi", "shoot_tol", "shoot_n",
        "classify_tol", "sobolev_n", "sobolev_tol"};
    for (const char* k : order)
        if (kv.count(k)) c.echo.emplace_back(k, kv[k]);
    return c;
}

struct RunManifest {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
    void add(const std::string& k, double v) { entries.emplace_back(k, format_real(v)); }

    std::string text() const {
        std::string out;
        for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
        return out;
    }

    const std::string* find(const std::string& k) const {
        for (const auto& [key, v] : entries)
            if (key == k) return &v;
        return nullptr;
    }
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw config_error("cannot open for writing: " + p.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw config_error("write failed: " + p.string());
}

inline std::string trace_csv(const std::vector<DiagnosticsRecord>& trace) {
    std::string out = "t,mass,energy,mu,grad_l2,nehari,linf,step_residual\n";
    for (const auto& r : trace) {
        out += format_real(r.t) + ',' + format_real(r.mass) + ',' +
               format_real(r.energy) + ',' + format_real(r.mu) + ',' +
               format_real(r.grad_l2) + ',' + format_real(r.nehari) + ',' +
               format_real(r.linf) + ',' + format_real(r.step_residual) + '\n';
    }
    return out;
}

inline std::string field_csv(const Field& u) {
    std::string out = "coord,value\n";
    for (int j = 0; j < u.size(); ++j)
        out += format_real(u.grid->nodes[j]) + ',' + format_real(u.values[j]) + '\n';
    return out;
}

inline Field field_from_csv(std::shared_ptr<const Grid> grid, const std::string& text,
                            const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "coord,value")
        throw config_error(origin + ": expected header 'coord,value'");
    Field u(grid);
    int j = 0;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos)
            throw config_error(origin + ": malformed row: " + t);
        const double coord = std::stod(t.substr(0, comma));
        const double value = std::stod(t.substr(comma + 1));
        if (j >= grid->n) throw config_error(origin + ": more rows than grid nodes");
        if (std::abs(coord - grid->nodes[j]) >
            1e-9 * std::max(1.0, std::abs(grid->nodes[j])))
            throw config_error(origin + ": coordinate mismatch at row " +
                               std::to_string(j + 1));
        u.values[j++] = value;
    }
    if (j != grid->n) throw config_error(origin + ": fewer rows than grid nodes");
    if (!u.finite()) throw config_error(origin + ": non-finite values");
    return u;
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace detail

/// Construct the configured initial field on the given grid.
inline Field build_initial_field(const ScenarioConfig& c, std::shared_ptr<const Grid> grid) {
    switch (c.initial) {
        case InitialKind::Eigenfunction: {
            const DomainSpec& dom = grid->domain;
            Field u(grid);
            if (dom.kind == DomainKind::Ball) {
                const double nu = 0.5 * dom.dim - 1.0;
                const double zk = detail::bessel_j_zero(nu, c.initial_k);
                for (int j = 0; j < grid->n; ++j) {
                    const double s = grid->nodes[j] / dom.extent;
                    u.values[j] = std::cyl_bessel_j(nu, zk * s) / std::pow(s, nu);
                }
            } else {
                const double span = dom.coord_max() - dom.coord_min();
                for (int j = 0; j < grid->n; ++j)
                    u.values[j] = std::sin(c.initial_k * std::numbers::pi *
                                           (grid->nodes[j] - dom.coord_min()) / span);
            }
            const double m = mass_norm(u);
            for (double& v : u.values) v *= c.initial_mass / m;
            return u;
        }
        case InitialKind::Gaussian: {
            const DomainSpec& dom = grid->domain;
            double center = c.initial_center;
            if (!c.initial_center_set && dom.kind == DomainKind::Interval)
                center = 0.5 * (dom.coord_min() + dom.coord_max());
            if (dom.kind == DomainKind::Ball && center != 0.0)
                throw config_error("gaussian on a ball must be centered at r = 0");
            const double w = c.initial_width;
            Field u = sample_function(grid, [&](double x) {
                const double z = (x - center) / w;
                return std::exp(-0.5 * z * z);
            });
            const double m = mass_norm(u);
            for (double& v : u.values) v *= c.initial_mass / m;
            return u;
        }
        case InitialKind::Soliton: {
            if (c.params.d != 1)
                throw config_error("soliton initial data is one-dimensional");
            const double s = c.params.sigma;
            const double amp = std::pow(s + 1.0, 1.0 / (2.0 * s));
            const DomainSpec& dom = grid->domain;
            double center = c.initial_center;
            if (!c.initial_center_set && dom.kind == DomainKind::Interval)
                center = 0.5 * (dom.coord_min() + dom.coord_max());
            Field u = sample_function(grid, [&](double x) {
                return amp * std::pow(1.0 / std::cosh(s * (x - center)), 1.0 / s);
            });
            const double m = mass_norm(u);
            for (double& v : u.values) v *= c.initial_mass / m;
            return u;
        }
        case InitialKind::File:
            return detail::field_from_csv(grid, detail::slurp(c.initial_path),
                                          c.initial_path);
    }
    throw config_error("unreachable initial kind");
}

/// Execute the scenario's tasks in dependency order, writing CSV artifacts and
/// the manifest into output_dir. Deterministic: identical configs produce
/// byte-identical artifacts. On regime or numerical failure the manifest is
/// still written (with result.error) before the exception propagates.
inline RunManifest run_scenario(const ScenarioConfig& c) {
    namespace fs = std::filesystem;
    const fs::path outdir = c.output_dir;
    fs::create_directories(outdir);

    RunManifest m;
    for (const auto& [k, v] : c.echo) m.add(k, v);

    std::vector<std::pair<std::string, std::string>> artifacts;
    auto emit = [&](const std::string& name, const std::string& bytes) {
        const std::string fname = name + ".csv";
        detail::write_file(outdir / fname, bytes);
        artifacts.emplace_back(fname, checksum_hex(bytes));
    };
    int caveat_no = 0;
    auto caveat = [&](const std::string& text) {
        m.add("caveat." + std::to_string(caveat_no++), text);
    };

    const auto crit = criticality(c.params);
    if (crit.regime == Regime::EnergyCriticalOrWorse)
        caveat("sigma is at or above the energy-critical power 2/(d-2); "
               "global theory does not apply");
    if (!crit.wellposedness_covered)
        caveat("sigma is outside the covered well-posedness range "
               "(0, 1/(d-2)) union [1/2, 2/(d-2)); results are exploratory");

    // dependency order: constants first, then solvers, then the run, then
    // classification of the run
    std::vector<Task> order;
    auto enqueue = [&](Task t) {
        if (std::find(order.begin(), order.end(), t) == order.end())
            order.push_back(t);
    };
    const bool whole_space = c.domain.whole_space;
    if (c.has_task(Task::Classify)) {
        if (!whole_space && !c.has_task(Task::Sobolev)) {
            enqueue(Task::Sobolev);
            caveat("sobolev task auto-inserted: classify on a bounded domain needs "
                   "the well constants");
        }
        if (whole_space && !c.has_task(Task::Shoot)) {
            enqueue(Task::Shoot);
            caveat("shoot task auto-inserted: whole-space classify needs the free "
                   "ground state");
        }
    }
    for (Task t : {Task::Sobolev, Task::Shoot, Task::GnConstant, Task::GroundState,
                   Task::Evolve, Task::Classify})
        if (c.has_task(t)) enqueue(t);
    std::sort(order.begin(), order.end(), [](Task a, Task b) {
        auto rank = [](Task t) {
            switch (t) {
                case Task::Sobolev: return 0;
                case Task::Shoot: return 1;
                case Task::GnConstant: return 2;
                case Task::GroundState: return 3;
                case Task::Evolve: return 4;
                default: return 5;
            }
        };
        return rank(a) < rank(b);
    });

    std::optional<WellConstants> wc;
    std::optional<Field> shot;
    std::optional<RunResult> run;
    bool diverged = false;

    auto finalize = [&](const std::string& error_text) {
        if (!error_text.empty()) m.add("result.error", error_text);
        for (const auto& [f, sum] : artifacts) {
            m.add("artifact." + f + ".path", f);
            m.add("artifact." + f + ".checksum", sum);
        }
        detail::write_file(outdir / "manifest.txt", m.text());
    };

    try {
        for (Task t : order) {
            switch (t) {
                case Task::Sobolev: {
                    SobolevConfig sc = c.sobolev;
                    WellConstants w = sobolev_constant(c.domain, c.params.sigma, sc);
                    wc = w;
                    m.add("result.lambda", w.lambda);
                    m.add("result.lambda_extrapolated", w.lambda_extrapolated);
                    m.add("result.p", w.p);
                    m.add("result.sobolev_residual", w.residual);
                    break;
                }
                case Task::Shoot: {
                    Field q = shoot_radial(c.params, c.shoot);
                    m.add("result.shoot_amplitude", linf_norm(q));
                    FlowParams unit = c.params;
                    unit.g = 1.0;
                    const auto res = pohozaev_residuals(q, unit);
                    m.add("result.shoot_mu",
                          nehari(q, unit) / (mass_norm(q) * mass_norm(q)));
                    m.add("result.shoot_pohozaev1", res.pohozaev1);
                    if (res.pohozaev2) m.add("result.shoot_pohozaev2", *res.pohozaev2);
                    if (res.energy_relation)
                        m.add("result.shoot_energy_relation", *res.energy_relation);
                    m.add("result.shoot_boundary_value", boundary_value(q));
                    emit("shoot_profile", detail::field_csv(q));
                    shot = std::move(q);
                    break;
                }
                case Task::GnConstant: {
                    const GnConstant r = gn_constant_detail(c.params, c.shoot);
                    m.add("result.c_gn", r.from_quotient);
                    m.add("result.c_gn_pohozaev", r.from_pohozaev);
                    const double rel = std::abs(r.from_quotient - r.from_pohozaev) /
                                       std::abs(r.from_quotient);
                    m.add("result.c_gn_agreement", rel);
                    if (!(rel <= 1e-3))
                        throw numerical_error("gn_constant: dual formulas disagree");
                    if (!shot && c.has_task(Task::Classify) && whole_space)
                        shot = r.profile;
                    break;
                }
                case Task::GroundState: {
                    GroundState gs = ground_state_flow(c.domain, c.params, c.mass_target,
                                                       c.flow, c.grid_n);
                    m.add("result.gs_mu", gs.mu_value);
                    m.add("result.gs_mass", mass_norm(gs.profile));
                    m.add("result.gs_energy", energy(gs.profile, c.params));
                    m.add("result.gs_pde_sup", gs.residuals.pde_sup);
                    m.add("result.gs_pohozaev1", gs.residuals.pohozaev1);
                    m.add("result.gs_boundary_value", boundary_value(gs.profile));
                    if (c.domain.kind == DomainKind::TruncatedLine)
                        caveat("ground state on a truncated line: uniqueness of the "
                               "positive minimizer on the truncated box is assumed");
                    emit("ground_state", detail::field_csv(gs.profile));
                    break;
                }
                case Task::Evolve: {
                    auto grid = build_grid(c.domain, c.grid_n);
                    const Field u0 = build_initial_field(c, grid);
                    emit("initial_field", detail::field_csv(u0));
                    RunResult r = evolve(u0, c.params, c.flow);
                    m.add("result.termination", termination_name(r.termination));
                    const auto& last = r.trace.back();
                    m.add("result.final_t", last.t);
                    m.add("result.final_mass", last.mass);
                    m.add("result.final_energy", last.energy);
                    m.add("result.final_mu", last.mu);
                    m.add("result.final_grad_l2", last.grad_l2);
                    double drift = 0.0;
                    for (const auto& rec : r.trace)
                        drift = std::max(drift, std::abs(rec.mass - r.trace.front().mass));
                    m.add("result.mass_drift", drift);
                    m.add("result.boundary_value", boundary_value(r.final));
                    emit("trace", detail::trace_csv(r.trace));
                    emit("final_field", detail::field_csv(r.final));
                    diverged = r.termination == Termination::Diverged;
                    run = std::move(r);
                    break;
                }
                case Task::Classify: {
                    if (!whole_space) {
                        auto grid = build_grid(c.domain, c.grid_n);
                        const Field u0 = build_initial_field(c, grid);
                        const WellClassification cl =
                            classify_bounded(u0, c.params, *wc, c.classify_tol);
                        m.add("result.classification", set_label_name(cl.label));
                        m.add("result.class_energy", cl.energy);
                        m.add("result.class_nehari", cl.nehari);
                        m.add("result.class_margin", cl.margin);
                        m.add("result.smallness_implies_w",
                              cl.smallness_implies_w ? "true" : "false");
                        if (run) {
                            const auto rep = monitor_invariance(
                                *run, bounded_record_classifier(c.params, *wc,
                                                                c.classify_tol));
                            m.add("result.invariance_applicable",
                                  rep.applicable ? "true" : "false");
                            m.add("result.invariance_initial", set_label_name(rep.initial));
                            m.add("result.invariance_violations",
                                  std::to_string(rep.n_violations));
                            if (rep.first_violation_time)
                                m.add("result.invariance_first_violation",
                                      *rep.first_violation_time);
                        }
                    } else {
                        if (!(c.params.sigma > crit.sigma_mass_critical) ||
                            !(c.params.sigma < crit.sigma_energy_critical))
                            throw regime_error(
                                "whole-space classify requires 2/d < sigma < 2/(d-2)");
                        GroundState qref;
                        qref.profile = *shot;
                        qref.mu_value = -1.0;
                        qref.mass_target = mass_norm(*shot);
                        const KThresholds thr = k_thresholds(qref, c.params);
                        auto grid = build_grid(c.domain, c.grid_n);
                        const Field u0 = build_initial_field(c, grid);
                        const KClassification cl =
                            classify_whole_space(u0, c.params, qref);
                        m.add("result.k_member", cl.member ? "true" : "false");
                        m.add("result.k_energy_product", cl.energy_product);
                        m.add("result.k_grad_product", cl.grad_product);
                        m.add("result.k_threshold_energy", cl.threshold_energy);
                        m.add("result.k_threshold_grad", cl.threshold_grad);
                        if (run) {
                            const auto rep = monitor_invariance(
                                *run, whole_space_record_classifier(c.params, thr));
                            m.add("result.invariance_applicable",
                                  rep.applicable ? "true" : "false");
                            m.add("result.invariance_initial", set_label_name(rep.initial));
                            m.add("result.invariance_violations",
                                  std::to_string(rep.n_violations));
                            if (rep.first_violation_time)
                                m.add("result.invariance_first_violation",
                                      *rep.first_violation_time);
                        }
                    }
                    break;
                }
            }
        }
    } catch (const std::exception& e) {
        finalize(e.what());
        throw;
    }

    finalize("");
    if (diverged)
        throw numerical_error("task evolve: run diverged");
    return m;
}

/// Run the base scenario once per value of the swept key, each in its own
/// subdirectory, and write a one-row-per-value summary CSV.
inline std::string sweep(const ScenarioConfig& base, const std::string& key,
                         const std::vector<std::string>& values) {
    static const std::set<std::string> sweepable = {"dt", "grid_n", "g", "sigma", "mass"};
    if (!sweepable.count(key))
        throw config_error("sweep: key '" + key + "' is not sweepable "
                           "(dt, grid_n, g, sigma, mass)");
    if (values.empty()) throw config_error("sweep: empty value list");

    std::string csv = key +
        ",termination,final_mass,final_energy,final_mu,final_grad_l2,mass_drift,"
        "gs_pde_sup,lambda,p,c_gn\n";
    for (const auto& v : values) {
        ScenarioConfig c = base;
        if (key == "dt") c.flow.dt = std::stod(v);
        else if (key == "grid_n") c.grid_n = std::stoi(v);
        else if (key == "g") c.params.g = std::stod(v);
        else if (key == "sigma") c.params.sigma = std::stod(v);
        else {   // mass: both the initial datum and any ground-state target
            c.initial_mass = std::stod(v);
            if (c.mass_target > 0.0) c.mass_target = std::stod(v);
        }
        // keep the manifest echo replayable: the swept key must appear even
        // when the base config relied on a default
        std::vector<std::string> touched;
        if (key == "mass") {
            touched.push_back("initial_mass");
            if (c.mass_target > 0.0) touched.push_back("mass_target");
        } else {
            touched.push_back(key);
        }
        for (const std::string& ek : touched) {
            bool present = false;
            for (auto& [k2, v2] : c.echo)
                if (k2 == ek) {
                    v2 = v;
                    present = true;
                }
            if (!present) c.echo.emplace_back(ek, v);
        }
        c.output_dir = base.output_dir + "/" + key + "_" + v;
        const RunManifest m = run_scenario(c);
        auto cell = [&](const char* k) {
            const std::string* s = m.find(k);
            return s ? *s : std::string();
        };
        csv += v + ',' + cell("result.termination") + ',' + cell("result.final_mass") +
               ',' + cell("result.final_energy") + ',' + cell("result.final_mu") + ',' +
               cell("result.final_grad_l2") + ',' + cell("result.mass_drift") + ',' +
               cell("result.gs_pde_sup") + ',' + cell("result.lambda") + ',' +
               cell("result.p") + ',' + cell("result.c_gn") + '\n';
    }
    std::filesystem::create_directories(base.output_dir);
    detail::write_file(std::filesystem::path(base.output_dir) / "sweep.csv", csv);
    return csv;
}

} // namespace nlheat
