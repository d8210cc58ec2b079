#include "invpress/cli.hpp"

#include "invpress/control_set.hpp"
#include "invpress/oracle.hpp"
#include "invpress/potential.hpp"
#include "invpress/pressure.hpp"
#include "invpress/reachability.hpp"
#include "invpress/spectral.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace invpress {

namespace {

constexpr int kDefaultHorizon = 25;
constexpr double kDefaultConvergenceTol = 1e-3;

double center_tol(const Json& params) {
    const auto& t = params.at("tol");
    return t.is_null() ? kDefaultCenterTolerance : t.get<double>();
}

// Infinite bounds are not representable in JSON.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json sequence_to_json(const ControlSequence& seq) {
    Json out = Json::array();
    for (const Vector& u : seq) out.push_back(to_json(u));
    return out;
}

Json estimate_to_json(const OracleEstimate& e) {
    Json j;
    j["tau"] = e.tau;
    j["total_mode"] = e.total_mode;
    j[e.total_mode ? "a_tau_total" : "a_tau"] = finite_or_null(e.a_tau);
    j["log_a_tau"] = e.log_a_tau;
    j["rate"] = e.rate;
    j["cardinality"] = e.spanning_cardinality;
    j["cover_gap"] = e.cover_gap;
    j["exact"] = e.exact;
    j["candidates"] = e.candidates;
    j["admissible"] = e.admissible;
    j["control_points"] = e.control_points;
    j["grid_points"] = e.grid_points;
    j["violations"] = e.violations;
    return j;
}

Json spectral_json(const SpectralSplit& split) {
    Json eig = Json::array();
    for (const auto& ev : split.eigenvalues) {
        eig.push_back({{"re", ev.value.real()}, {"im", ev.value.imag()}, {"mult", ev.multiplicity}});
        if (ev.pair) eig.push_back({{"re", ev.value.real()}, {"im", -ev.value.imag()}, {"mult", ev.multiplicity}});
    }
    Json groups = Json::array();
    for (const auto& g : split.lyapunov_groups) groups.push_back({{"rho", g.rho}, {"dim", g.dim}});
    return {{"eigenvalues", eig},
            {"dims", {{"s", split.d_s()}, {"c", split.d_c()}, {"u", split.d_u()}}},
            {"lyapunov_groups", groups},
            {"log_unstable_det", split.log_unstable_det},
            {"hyperbolic", is_hyperbolic(split)}};
}

Json cmd_analyze(const LinearSystem& sys, const Json& params, Json& warnings) {
    const auto split = spectral_split(sys.A(), center_tol(params));
    const auto kalman = kalman_controllable(sys.A(), sys.B());
    Json r = spectral_json(split);
    r["kalman_rank"] = kalman.rank;
    r["controllable"] = kalman.controllable;
    r["class"] = to_string(classify_global_controllability(sys.A(), sys.B(), split));
    r["bounded_prediction"] = boundedness_classifier(split);
    if (!is_hyperbolic(split)) warnings.push_back("non-hyperbolic: eigenvalues on the unit circle");
    if (!kalman.controllable) warnings.push_back("not controllable");
    return r;
}

Json cmd_reach(const LinearSystem& sys, const Json& params) {
    const int k = params.at("steps").get<int>();
    const bool controllable = params.at("controllable").get<bool>();
    const ConvexPolytope p = controllable ? control_k(sys, k) : reach_k(sys, k);
    return {{"k", k}, {"set", controllable ? "controllable" : "reachable"}, {"vertices", to_json(Matrix(p.vertices().transpose()))}};
}

ControlSetApprox control_set_for(const LinearSystem& sys, const SpectralSplit& split, int horizon, double conv_tol) {
    return approximate_control_set(sys, split, horizon, conv_tol);
}

Json cmd_control_set(const LinearSystem& sys, const Json& params, Json& warnings) {
    const int horizon = params.at("horizon").get<int>();
    const auto& t = params.at("tol");
    const double conv_tol = t.is_null() ? kDefaultConvergenceTol : t.get<double>();
    const auto approx = control_set_for(sys, spectral_split(sys.A()), horizon, conv_tol);
    if (!approx.converged) warnings.push_back("not converged within the horizon");
    if (approx.unbounded_growth) warnings.push_back("inradius still growing: the control set looks unbounded");
    return {{"horizon", approx.horizon},
            {"first_horizon", approx.first_horizon},
            {"vertices", to_json(Matrix(approx.inner.vertices().transpose()))},
            {"bounded_prediction", approx.bounded_prediction},
            {"converged", approx.converged},
            {"last_delta", approx.last_delta},
            {"unbounded_growth", approx.unbounded_growth},
            {"deltas", approx.deltas},
            {"inradii", approx.inradii}};
}

Json cmd_entropy(const LinearSystem& sys, const Json& params) {
    const auto split = spectral_split(sys.A(), center_tol(params));
    const double h = invariance_entropy_formula(sys, split);
    return {{"entropy", h}, {"log_unstable_det", split.log_unstable_det}};
}

Json cmd_pressure(const LinearSystem& sys, const Json& params, Json& warnings) {
    const auto split = spectral_split(sys.A(), center_tol(params));
    const auto p = parse_potential(params.at("potential").get<std::string>(), sys.d(), sys.m());
    const auto r = invariance_pressure_formula(sys, split, p, params.at("grid").get<int>(), params.at("refine").get<int>());
    Json out = {{"potential", p.print()},
                {"log_unstable_det", r.log_unstable_det},
                {"min_potential", r.min_potential},
                {"pressure", r.pressure},
                {"entropy", r.entropy},
                {"argmin_control", to_json(r.argmin_control)},
                {"empty_grid", r.empty_grid}};
    if (r.empty_grid) warnings.push_back("no grid point inside U; minimum taken over vertices");
    const int tau_max = params.at("tau_max").get<int>();
    if (tau_max > 0) {
        const auto d = control_set_for(sys, split, kDefaultHorizon, kDefaultConvergenceTol).inner;
        const auto ub = upper_bound_via_periodic(sys, split, d, p, tau_max, params.at("samples").get<int>(),
                                                 params.at("seed").get<std::uint64_t>());
        out["periodic_bound"] = {{"found", ub.found},
                                 {"bound", finite_or_null(ub.bound)},
                                 {"tau", ub.tau},
                                 {"controls", sequence_to_json(ub.controls)},
                                 {"candidates", ub.candidates},
                                 {"admissible", ub.admissible}};
        if (!ub.found) warnings.push_back("no admissible periodic orbit found");
    }
    return out;
}

Json cmd_spanning(const LinearSystem& sys, const Json& params, Json& warnings) {
    const auto split = spectral_split(sys.A(), center_tol(params));
    const auto p = parse_potential(params.at("potential").get<std::string>(), sys.d(), sys.m());
    const auto d = control_set_for(sys, split, params.at("horizon").get<int>(), kDefaultConvergenceTol).inner;
    SpanningConstructionConfig cfg;
    cfg.tau0 = params.at("tau0").is_null() ? sys.d() : params.at("tau0").get<int>();
    cfg.m = params.at("m").get<int>();
    cfg.xi = params.at("xi").get<double>();
    cfg.delta = params.at("delta").get<double>();
    if (!params.at("b0").is_null()) cfg.b0 = params.at("b0").get<double>();
    cfg.validation_samples = params.at("validation_samples").get<int>();
    cfg.seed = params.at("seed").get<std::uint64_t>();
    const auto ss = spanning_construction(sys, split, d, cfg, p);
    if (ss.sample_violations > 0) warnings.push_back("sampled cube points violated confinement");
    if (!ss.returns_to_cube) warnings.push_back("some subcuboid corners do not return to the cube");

    const std::string path = params.at("controls_out").get<std::string>();
    if (!path.empty()) {
        Json dump = {{"tau", ss.tau}, {"log_weights", ss.log_weights}, {"controls", Json::array()}};
        for (const auto& seq : ss.controls) dump["controls"].push_back(sequence_to_json(seq));
        std::ofstream f(path);
        if (!f) throw SpecError("cannot write " + path, "/parameters/controls_out");
        f << dump.dump() << '\n';
    }
    return {{"tau", ss.tau},
            {"cardinality", ss.cardinality()},
            {"counts", ss.counts},
            {"rate", spanning_rate(ss)},
            {"b0", ss.b0},
            {"x0", to_json(ss.x0)},
            {"cube_basis", to_json(ss.cube_basis)},
            {"control_margin", ss.control_margin},
            {"returns_to_cube", ss.returns_to_cube},
            {"sample_violations", ss.sample_violations},
            {"samples_checked", ss.samples_checked}};
}

Json cmd_oracle(const LinearSystem& sys, const Json& params, Json& warnings) {
    const auto split = spectral_split(sys.A(), center_tol(params));
    const int tau = params.at("tau").get<int>();
    const int cg = params.at("control_grid").get<int>();
    const int sg = params.at("state_grid").get<int>();
    const Json& q = params.at("Q");
    const Json& k = params.at("K");
    // The defaults need the control-set sweep, so they are only built when a set is missing.
    OracleConfig cfg = q.is_null() || k.is_null()
                           ? default_oracle_config(sys, split, tau, cg, sg)
                           : OracleConfig(polytope_from_json(q, "/parameters/Q"), polytope_from_json(k, "/parameters/K"));
    if (!q.is_null()) cfg.q = polytope_from_json(q, "/parameters/Q");
    if (!k.is_null()) cfg.k = polytope_from_json(k, "/parameters/K");
    cfg.tau = tau;
    cfg.control_grid = cg;
    cfg.state_grid = sg;
    cfg.total_mode = params.at("total").get<bool>();
    cfg.budget = params.at("budget").get<double>();
    const auto p = parse_potential(params.at("potential").get<std::string>(), sys.d(), sys.m());

    const auto taus = params.at("taus").get<std::vector<int>>();
    Json out;
    if (taus.empty()) {
        const auto e = estimate_pressure(sys, cfg, p);
        if (!e.exact) warnings.push_back("greedy cover: a_tau is within a factor cover_gap of the optimum");
        out = estimate_to_json(e);
    } else {
        const auto sweep = discretization_sweep(sys, cfg, p, taus);
        out["sweep"] = Json::array();
        for (const auto& e : sweep.estimates) {
            out["sweep"].push_back(estimate_to_json(e));
            if (!e.exact) warnings.push_back("greedy cover at tau " + std::to_string(e.tau));
        }
        out["nonincreasing"] = sweep.nonincreasing;
        out["nondecreasing"] = sweep.nondecreasing;
        out["min_rate"] = sweep.min_rate;
        out["max_rate"] = sweep.max_rate;
    }
    out["Q"] = polytope_to_json(cfg.q);
    out["K"] = polytope_to_json(cfg.k);
    return out;
}

std::string csv_number(const Json& v) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
}

}  // namespace

Json run_command(const Json& params) {
    const std::string command = params.at("command").get<std::string>();
    const LinearSystem sys = system_from_json(params.at("system"));
    Json warnings = Json::array();
    Json results;
    if (command == "analyze") results = cmd_analyze(sys, params, warnings);
    else if (command == "reach") results = cmd_reach(sys, params);
    else if (command == "control-set") results = cmd_control_set(sys, params, warnings);
    else if (command == "entropy") results = cmd_entropy(sys, params);
    else if (command == "pressure") results = cmd_pressure(sys, params, warnings);
    else if (command == "spanning") results = cmd_spanning(sys, params, warnings);
    else if (command == "oracle") results = cmd_oracle(sys, params, warnings);
    else throw SpecError("unknown command '" + command + "'", "/parameters/command");
    return {{"schema", kReportSchema}, {"command", command}, {"parameters", params}, {"results", results}, {"warnings", warnings}};
}

std::string report_csv(const Json& report) {
    const Json& r = report.at("results");
    std::ostringstream out;
    const auto rows = [&](const Json& vertices) {
        for (const auto& row : vertices) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_number(row[i]);
            out << '\n';
        }
    };
    if (r.contains("vertices")) {
        const std::size_t d = r["vertices"].empty() ? 0 : r["vertices"][0].size();
        for (std::size_t i = 0; i < d; ++i) out << (i ? "," : "") << 'x' << i;
        out << '\n';
        rows(r["vertices"]);
    } else if (report.at("command") == "oracle") {
        out << "tau,rate\n";
        if (r.contains("sweep")) {
            for (const auto& e : r["sweep"]) out << e["tau"].get<int>() << ',' << csv_number(e["rate"]) << '\n';
        } else {
            out << r["tau"].get<int>() << ',' << csv_number(r["rate"]) << '\n';
        }
    } else {
        out << "key,value\n";
        for (const auto& [key, value] : r.items()) {
            if (value.is_number()) out << key << ',' << csv_number(value) << '\n';
            else if (value.is_boolean()) out << key << ',' << (value.get<bool>() ? "true" : "false") << '\n';
        }
    }
    return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Controllability, invariance entropy and invariance pressure of discrete-time linear systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string output = "json";
    std::uint64_t seed = 0;
    double tol = 0.0;
    bool timing = false;
    auto* tol_opt = app.add_option("--tol", tol, "Spectral center tolerance (control-set: convergence tolerance)")
                        ->check(CLI::PositiveNumber);
    app.add_option("--output", output, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", seed, "Seed for randomized searches");
    app.add_flag("--timing", timing, "Add wall time to the report");

    std::string system_arg;
    const auto add = [&](const char* name, const char* help) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("system", system_arg, "System JSON file or inline JSON")->required();
        return sc;
    };
    auto* analyze = add("analyze", "Spectral split, Kalman rank, controllability class, boundedness");
    auto* reach = add("reach", "Reachable set R_k(0) (or controllable set C_k(0))");
    auto* control_set = add("control-set", "Control-set approximation R_k(0) intersected with C_k(0)");
    auto* entropy = add("entropy", "Invariance entropy log|det A+|");
    auto* pressure = add("pressure", "Invariance pressure log|det A+| + min_U f");
    auto* spanning = add("spanning", "Constructive spanning set");
    auto* oracle = add("oracle", "Brute-force pressure estimate on grids");
    (void)analyze;
    (void)entropy;

    int steps = 1, horizon = kDefaultHorizon, grid = kDefaultMinimizeGrid, refine = kDefaultRefineRounds;
    int tau_max = 4, samples = 64, tau0 = 0, m = 1, validation_samples = 200;
    int tau = 4, control_grid = 3, state_grid = 5;
    bool controllable = false, total = false;
    double xi = 0.1, delta = 0.05, b0 = 0.0, budget = kDefaultOracleBudget;
    std::string potential = "0", controls_out, q_arg, k_arg;
    std::vector<int> taus;

    reach->add_option("--steps", steps, "Horizon k")->check(CLI::NonNegativeNumber);
    reach->add_flag("--controllable", controllable, "Compute C_k(0) instead of R_k(0)");
    control_set->add_option("--horizon", horizon, "Largest horizon")->check(CLI::PositiveNumber);
    for (auto* sc : {pressure, spanning, oracle}) sc->add_option("--potential", potential, "Potential expression");
    pressure->add_option("--grid", grid, "Minimizer grid points per axis")->check(CLI::PositiveNumber);
    pressure->add_option("--refine", refine, "Minimizer refinement rounds")->check(CLI::NonNegativeNumber);
    pressure->add_option("--tau-max", tau_max, "Periodic upper bound up to this period (0 skips)")->check(CLI::NonNegativeNumber);
    pressure->add_option("--samples", samples, "Random periodic candidates per period")->check(CLI::NonNegativeNumber);
    auto* tau0_opt = spanning->add_option("--tau0", tau0, "Base period (default: state dimension)")->check(CLI::PositiveNumber);
    spanning->add_option("--m", m, "Number of periods")->check(CLI::PositiveNumber);
    spanning->add_option("--xi", xi, "Growth slack xi")->check(CLI::PositiveNumber);
    spanning->add_option("--delta", delta, "delta in (0, xi)")->check(CLI::PositiveNumber);
    auto* b0_opt = spanning->add_option("--b0", b0, "Cube half-side (searched when absent)")->check(CLI::PositiveNumber);
    spanning->add_option("--horizon", horizon, "Horizon of the control-set approximation used as D")->check(CLI::PositiveNumber);
    spanning->add_option("--validation-samples", validation_samples, "Random cube points re-simulated")->check(CLI::NonNegativeNumber);
    spanning->add_option("--controls-out", controls_out, "Write the spanning controls to this JSON file");
    oracle->add_option("--tau", tau, "Horizon")->check(CLI::PositiveNumber);
    oracle->add_option("--control-grid", control_grid, "Control grid points per axis")->check(CLI::PositiveNumber);
    oracle->add_option("--state-grid", state_grid, "K grid points per axis")->check(CLI::PositiveNumber);
    oracle->add_flag("--total", total, "Total pressure (state-dependent potentials)");
    oracle->add_option("--taus", taus, "Sweep over these horizons")->delimiter(',');
    oracle->add_option("--budget", budget, "Trajectory-step budget")->check(CLI::PositiveNumber);
    oracle->add_option("--q", q_arg, "Confinement set Q (polytope JSON or file)");
    oracle->add_option("--k", k_arg, "Initial set K (polytope JSON or file)");

    const auto fail = [&](const Json& obj, int code) {
        Json e = obj;
        e["exit_code"] = code;
        err << e.dump() << '\n';
        return code;
    };

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        return fail({{"error", "UsageError"}, {"message", e.what()}}, static_cast<int>(ErrorFamily::Spec));
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        CLI::App* sc = app.get_subcommands().front();
        Json params = {{"command", sc->get_name()},
                       {"system", load_json_argument(system_arg)},
                       {"seed", seed},
                       {"tol", tol_opt->count() ? Json(tol) : Json(nullptr)}};
        if (sc == reach) {
            params["steps"] = steps;
            params["controllable"] = controllable;
        } else if (sc == control_set) {
            params["horizon"] = horizon;
        } else if (sc == pressure) {
            params["potential"] = potential;
            params["grid"] = grid;
            params["refine"] = refine;
            params["tau_max"] = tau_max;
            params["samples"] = samples;
        } else if (sc == spanning) {
            params["potential"] = potential;
            params["tau0"] = tau0_opt->count() ? Json(tau0) : Json(nullptr);
            params["m"] = m;
            params["xi"] = xi;
            params["delta"] = delta;
            params["b0"] = b0_opt->count() ? Json(b0) : Json(nullptr);
            params["horizon"] = horizon;
            params["validation_samples"] = validation_samples;
            params["controls_out"] = controls_out;
        } else if (sc == oracle) {
            params["potential"] = potential;
            params["tau"] = tau;
            params["control_grid"] = control_grid;
            params["state_grid"] = state_grid;
            params["total"] = total;
            params["taus"] = taus;
            params["budget"] = budget;
            params["Q"] = q_arg.empty() ? Json(nullptr) : load_json_argument(q_arg);
            params["K"] = k_arg.empty() ? Json(nullptr) : load_json_argument(k_arg);
        }
        Json report = run_command(params);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (timing) report["wall_time_s"] = seconds;
        if (output == "csv") out << report_csv(report);
        else out << report.dump(2) << '\n';
        for (const auto& w : report["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
        return 0;
    } catch (const SpecError& e) {
        return fail({{"error", e.kind()}, {"message", e.what()}, {"pointer", e.pointer()}}, static_cast<int>(e.family()));
    } catch (const ParseError& e) {
        return fail({{"error", e.kind()}, {"message", e.what()}, {"offset", e.offset()}, {"expected", e.expected()}},
                    static_cast<int>(e.family()));
    } catch (const UnknownIdentifier& e) {
        return fail({{"error", e.kind()}, {"message", e.what()}, {"offset", e.offset()}}, static_cast<int>(e.family()));
    } catch (const ArityError& e) {
        return fail({{"error", e.kind()}, {"message", e.what()}, {"offset", e.offset()}}, static_cast<int>(e.family()));
    } catch (const Error& e) {
        return fail({{"error", e.kind()}, {"message", e.what()}}, static_cast<int>(e.family()));
    } catch (const Json::exception& e) {
        return fail({{"error", "SpecError"}, {"message", e.what()}, {"pointer", ""}}, static_cast<int>(ErrorFamily::Spec));
    } catch (const std::exception& e) {
        return fail({{"error", "InternalError"}, {"message", e.what()}}, 4);
    }
}

}  // namespace invpress
