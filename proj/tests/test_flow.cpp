#include <catch2/catch_amalgamated.hpp>

#include <nlheat/flow.hpp>

using namespace nlheat;

namespace {

Field normalized_bump(std::shared_ptr<const Grid> grid, double mass, double center,
                      double width) {
    Field u = sample_function(grid, [&](double x) {
        const double z = (x - center) / width;
        return std::exp(-0.5 * z * z);
    });
    const double m = mass_norm(u);
    for (double& v : u.values) v *= mass / m;
    return u;
}

double l2_distance(const Field& a, const Field& b) {
    double s = 0.0;
    for (int j = 0; j < a.size(); ++j) {
        const double d = a.values[j] - b.values[j];
        s += a.grid->volume_weights[j] * d * d;
    }
    return std::sqrt(s);
}

} // namespace

TEST_CASE("config validation rejects bad numerics") {
    FlowConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c = FlowConfig{};
    c.t_final = c.dt / 2;
    CHECK_THROWS_AS(c.validate(), config_error);
    c = FlowConfig{};
    c.scheme = Scheme::MuAlphaSemiImplicit;   // needs alpha > 0
    CHECK_THROWS_AS(c.validate(), config_error);
    c.alpha = 1.0;
    CHECK_NOTHROW(c.validate());
    c = FlowConfig{};
    c.growup_factor = 1.0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c = FlowConfig{};
    c.snapshot_every = 0;
    CHECK_THROWS_AS(c.validate(), config_error);
}

TEST_CASE("evolve rejects degenerate initial data") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 31);
    const FlowParams p{0.0, 1.0, 1};
    FlowConfig c;
    CHECK_THROWS_AS(evolve(Field(g), p, c), degenerate_field_error);
    Field bad(g);
    bad.values[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(evolve(bad, p, c), regime_error);
}

TEST_CASE("linear eigenmode is a fixed point of the multiplier scheme") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = sample_function(g, [](double x) { return std::sin(x); });
    const FlowParams p{0.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-3;
    c.t_final = 0.1;
    c.stationarity_tol = 0.0;   // the fixed point is bit-exact; disable the stationary stop
    c.store_snapshots = true;

    const RunResult run = evolve(u0, p, c);
    CHECK(run.termination == Termination::HorizonReached);

    const double s = std::sin(0.5 * g->h);
    const double lambda_h = 4.0 / (g->h * g->h) * s * s;
    for (const auto& rec : run.trace) CHECK(std::abs(rec.mu - lambda_h) <= 1e-12);
    for (const auto& snap : run.snapshots) CHECK(l2_distance(snap, u0) <= 1e-10);
}

TEST_CASE("projected scheme conserves mass to rounding") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 127);
    Field u0 = normalized_bump(g, 1.0, 1.2, 0.4);
    const FlowParams p{1.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-2;
    c.t_final = 2.0;
    c.scheme = Scheme::ProjectedSemiImplicit;
    c.stationarity_tol = 0.0;

    const RunResult run = evolve(u0, p, c);
    for (const auto& rec : run.trace) CHECK(std::abs(rec.mass - 1.0) <= 1e-10);
}

TEST_CASE("multiplier-scheme mass drift shrinks first order in dt") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.5);
    const FlowParams p{-1.0, 1.0, 1};
    auto drift_at = [&](double dt) {
        FlowConfig c;
        c.dt = dt;
        c.t_final = 1.0;
        c.stationarity_tol = 0.0;
        const RunResult run = evolve(u0, p, c);
        double worst = 0.0;
        for (const auto& rec : run.trace)
            worst = std::max(worst, std::abs(rec.mass - 1.0));
        return worst;
    };
    const double coarse = drift_at(1e-2);
    const double fine = drift_at(5e-3);
    CHECK(coarse / fine > 1.5);
    CHECK(coarse / fine < 2.5);
}

TEST_CASE("energy dissipates and satisfies the discrete balance") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 127);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.4);
    const FlowParams p{-1.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-3;
    c.t_final = 0.5;
    c.stationarity_tol = 0.0;

    const RunResult run = evolve(u0, p, c);
    const double e0 = energy(u0, p);
    CHECK(check_dissipation(run, e0) <= 5.0 * c.dt * (1.0 + std::abs(e0)));
    for (std::size_t k = 1; k < run.trace.size(); ++k)
        CHECK(run.trace[k].energy <= run.trace[k - 1].energy + 10.0 * c.dt * c.dt);
}

TEST_CASE("dissipation check requires a dt-dense trace") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 31);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.5);
    const FlowParams p{0.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-2;
    c.t_final = 0.2;
    c.snapshot_every = 5;
    c.stationarity_tol = 0.0;
    const RunResult run = evolve(u0, p, c);
    CHECK_THROWS_AS(check_dissipation(run, energy(u0, p)), config_error);
}

TEST_CASE("positive focusing data settles to a stationary profile") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = normalized_bump(g, 1.0, 1.8, 0.6);
    const FlowParams p{1.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-2;
    c.t_final = 100.0;
    c.scheme = Scheme::ProjectedSemiImplicit;
    c.stationarity_tol = 1e-9;

    const RunResult run = evolve(u0, p, c);
    CHECK(run.termination == Termination::Stationary);
    CHECK(std::abs(run.trace.back().mass - 1.0) <= 1e-10);
    // stationary profile of the projected flow: mu equals the Rayleigh-type
    // quotient and the residual is below tolerance
    CHECK(run.trace.back().step_residual < c.stationarity_tol);
}

TEST_CASE("gradient growth past the factor triggers grow-up") {
    auto g = build_grid(DomainSpec::truncated_line(10.0), 511);
    Field u0 = normalized_bump(g, 2.0, 0.0, 0.5);
    const FlowParams p{1.0, 2.0, 1};
    REQUIRE(energy(u0, p) < 0.0);
    FlowConfig c;
    c.dt = 1e-3;
    c.t_final = 20.0;
    c.scheme = Scheme::ProjectedSemiImplicit;
    c.growup_factor = 3.0;
    c.stationarity_tol = 0.0;

    const RunResult run = evolve(u0, p, c);
    CHECK(run.termination == Termination::GrowUpTriggered);
    CHECK(run.trace.back().grad_l2 > 3.0 * run.trace.front().grad_l2);
}

TEST_CASE("overdriven nonlinearity ends in Diverged, not an exception") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = normalized_bump(g, 40.0, 1.5, 0.3);
    const FlowParams p{1.0, 2.0, 1};
    FlowConfig c;
    c.dt = 0.5;
    c.t_final = 50.0;
    c.stationarity_tol = 0.0;
    c.growup_factor = 1e300;   // stay out of the way: overflow must win
    const RunResult run = evolve(u0, p, c);
    CHECK(run.termination == Termination::Diverged);
}

TEST_CASE("snapshot cadence and stored fields line up with the trace") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 31);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.5);
    const FlowParams p{0.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-2;
    c.t_final = 0.1;
    c.snapshot_every = 2;
    c.store_snapshots = true;
    c.stationarity_tol = 0.0;
    const RunResult run = evolve(u0, p, c);
    REQUIRE(run.snapshots.size() == run.trace.size());
    CHECK(run.trace.front().t == 0.0);
    CHECK(run.trace.back().t == Catch::Approx(0.1));
    for (std::size_t k = 1; k + 1 < run.trace.size(); ++k)
        CHECK(run.trace[k].t == Catch::Approx(2e-2 * k));
}

TEST_CASE("multiplier and projected schemes agree to first order") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.5);
    const FlowParams p{1.0, 1.0, 1};
    auto final_gap = [&](double dt) {
        FlowConfig c;
        c.dt = dt;
        c.t_final = 0.5;
        c.stationarity_tol = 0.0;
        FlowConfig cp = c;
        cp.scheme = Scheme::ProjectedSemiImplicit;
        return l2_distance(evolve(u0, p, c).final, evolve(u0, p, cp).final);
    };
    const double coarse = final_gap(2e-2);
    const double fine = final_gap(1e-2);
    CHECK(coarse / fine > 1.5);
    CHECK(coarse / fine < 2.5);
}

TEST_CASE("fixed-denominator scheme follows the mass evolution formula") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = normalized_bump(g, 1.0, 1.5, 0.5);
    const FlowParams p{1.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-3;
    c.t_final = 0.5;
    c.scheme = Scheme::MuAlphaSemiImplicit;
    c.alpha = 1.0;   // equals the initial squared mass: mass stays put
    c.stationarity_tol = 0.0;

    const RunResult run = evolve(u0, p, c);
    CHECK(mass_formula_check(run, c.alpha) <= 5.0 * c.dt);
    for (const auto& rec : run.trace) CHECK(std::abs(rec.mass - 1.0) <= 5.0 * c.dt);

    FlowConfig cm;
    cm.dt = 1e-3;
    cm.t_final = 0.05;
    const RunResult other = evolve(u0, p, cm);
    CHECK_THROWS_AS(mass_formula_check(other, 1.0), regime_error);
}

TEST_CASE("linear eigenmode under the fixed denominator follows the logistic law") {
    auto g = build_grid(DomainSpec::interval(std::numbers::pi), 63);
    Field u0 = sample_function(g, [](double x) { return std::sin(x); });
    const double m0sq = mass_norm(u0) * mass_norm(u0);
    const FlowParams p{0.0, 1.0, 1};
    FlowConfig c;
    c.dt = 1e-3;
    c.t_final = 1.0;
    c.scheme = Scheme::MuAlphaSemiImplicit;
    c.alpha = 2.0 * m0sq;
    c.stationarity_tol = 0.0;

    const double s = std::sin(0.5 * g->h);
    const double lambda_h = 4.0 / (g->h * g->h) * s * s;
    const RunResult run = evolve(u0, p, c);
    for (const auto& rec : run.trace) {
        const double predicted = 2.0 * m0sq / (std::exp(2.0 * lambda_h * rec.t) + 1.0);
        CHECK(std::abs(rec.mass * rec.mass - predicted) <= 5.0 * c.dt);
    }
}
