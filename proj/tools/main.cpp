// Batch front door: parse a scenario config, run the requested task, emit
// CSV artifacts and a manifest. Exit codes: 0 success, 1 usage/config error,
// 2 regime/precondition error, 3 numerical failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <nlheat/scenario.hpp>

namespace {

// Replace `key = ...` lines in flat config text (and append the new pair) so
// command-line flags override file values without tripping the duplicate-key
// check in the parser.
std::string override_key(const std::string& text, const std::string& key,
                         const std::string& value) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        std::string body = line;
        const auto hash = body.find('#');
        if (hash != std::string::npos) body.resize(hash);
        const auto eq = body.find('=');
        const std::string k =
            eq == std::string::npos ? "" : nlheat::detail::trim(body.substr(0, eq));
        if (k != key) out += line + "\n";
    }
    out += key + " = " + value + "\n";
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained nonlinear heat flow: simulation and analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seed_file;
    bool quiet = false;
    app.add_option("--config", config_path, "scenario config file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--seed-file", seed_file, "initial field from a coord,value CSV");
    app.add_flag("--quiet", quiet, "suppress the manifest echo on stdout");

    struct Sub {
        const char* name;
        const char* task;   // task-list override, empty for sweep
    };
    const Sub subs[] = {{"evolve", "evolve"},         {"ground-state", "ground_state"},
                        {"classify", "classify"},     {"sobolev", "sobolev"},
                        {"gn-constant", "gn_constant"}, {"shoot", "shoot"},
                        {"sweep", ""}};
    std::string sweep_key;
    std::vector<std::string> sweep_values;
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name);
        sc->fallthrough();   // let --config and friends appear after the subcommand
        if (*s.task == '\0') {
            sc->add_option("--param", sweep_key, "key to sweep (dt, grid_n, g, sigma, mass)")
                ->required();
            sc->add_option("--values", sweep_values, "swept values")
                ->required()
                ->delimiter(',');
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems all map to exit 1; --help itself stays 0
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::string text = nlheat::detail::slurp(config_path);
        const CLI::App* sub = app.get_subcommands().front();
        for (const Sub& s : subs)
            if (sub->get_name() == s.name && *s.task != '\0')
                text = override_key(text, "tasks", s.task);
        if (!out_dir.empty()) text = override_key(text, "output_dir", out_dir);
        if (!seed_file.empty()) {
            text = override_key(text, "initial", "file");
            text = override_key(text, "initial_path", seed_file);
        }

        const nlheat::ScenarioConfig cfg = nlheat::parse_config(text);
        if (sub->get_name() == "sweep") {
            const std::string csv = nlheat::sweep(cfg, sweep_key, sweep_values);
            if (!quiet) std::cout << csv;
        } else {
            const nlheat::RunManifest m = nlheat::run_scenario(cfg);
            if (!quiet) std::cout << m.text();
        }
        return 0;
    } catch (const nlheat::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlheat::regime_error& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 2;
    } catch (const nlheat::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
