#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/experiments.hpp"
#include "nashlab/particles.hpp"
#include "nashlab/solution_io.hpp"

namespace {

using nashlab::Config;

struct CliArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed_value = 0;
    bool seed_set = false;
};

Config load_config(const CliArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    if (args.seed_set) cfg.set("experiment.seed", std::to_string(args.seed_value));
    return cfg;
}

void write_text(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nashlab::IoError("cannot write " + path);
    out << body;
}

void print_criteria(const nashlab::ExperimentReport& rep) {
    for (const auto& c : rep.criteria)
        std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("%s: %s (config %s, %.0f ms)\n", rep.kind.c_str(),
                rep.pass() ? "pass" : "FAIL", rep.config_hash.c_str(), rep.wall_time_ms);
}

int run_and_emit(const CliArgs& args, nashlab::ExperimentReport (*fn)(const Config&)) {
    const Config cfg = load_config(args);
    const nashlab::ExperimentReport rep = fn(cfg);
    nashlab::emit_report(rep, args.out_dir);
    print_criteria(rep);
    std::printf("artifacts: %s\n", args.out_dir.c_str());
    return nashlab::exit_code_for(rep);
}

nashlab::NashSolution solution_from_config(const Config& cfg) {
    const int players = cfg.integer("problem.players", 2);
    if (cfg.has("input.solution")) {
        nashlab::NashSolution sol = nashlab::load_solution(cfg.text("input.solution"));
        const nashlab::NashProblem problem = nashlab::problem_from_config(cfg, sol.players);
        if (std::abs(sol.T - problem.T) > 1e-12 || std::abs(sol.sigma - problem.sigma) > 1e-12 ||
            std::abs(sol.beta - problem.beta) > 1e-12)
            throw nashlab::InvalidArgument(
                "loaded solution disagrees with the configured problem (T, sigma, beta)");
        return sol;
    }
    return nashlab::solve_nash(nashlab::problem_from_config(cfg, players),
                               nashlab::grid_from_config(cfg, players),
                               nashlab::solver_from_config(cfg));
}

nashlab::SimConfig sim_from_config(const Config& cfg) {
    nashlab::SimConfig sim;
    sim.steps = cfg.integer("particles.steps", sim.steps);
    sim.paths = cfg.integer("particles.paths", sim.paths);
    sim.seed = cfg.counter("experiment.seed", 0);
    sim.beta_shared = cfg.flag("particles.shared_noise", false);
    return sim;
}

nashlab::DriftModel drift_from_config(const Config& cfg, int players) {
    const std::vector<double> slope(static_cast<std::size_t>(players),
                                    cfg.number("particles.slope", -1.0));
    const std::vector<double> offset(static_cast<std::size_t>(players),
                                     cfg.number("particles.offset", 0.0));
    return nashlab::linear_drift(players, slope, offset);
}

int cmd_solve_nash(const CliArgs& args) {
    const Config cfg = load_config(args);
    const int players = cfg.integer("problem.players", 2);
    const nashlab::NashProblem problem = nashlab::problem_from_config(cfg, players);
    const nashlab::NashSolution sol =
        nashlab::solve_nash(problem, nashlab::grid_from_config(cfg, players),
                            nashlab::solver_from_config(cfg));
    nashlab::save_solution(sol, args.out_dir);
    double residual = 0.0;
    for (const auto& s : sol.picard) residual = std::max(residual, s.residual);
    std::printf("solved: %d players, %zu nodes, %zu levels, max picard residual %.3e\n",
                sol.players, sol.grid.nodes(), sol.times.size(), residual);
    std::printf("solution: %s\n", args.out_dir.c_str());
    return 0;
}

int cmd_check_monotone(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::NashSolution sol = solution_from_config(cfg);
    const nashlab::NashProblem problem = nashlab::problem_from_config(cfg, sol.players);
    const nashlab::ScanMode mode =
        nashlab::parse_scan_mode(cfg.text("monotonicity.mode", "all"));
    const nashlab::SemimonotonicityReport report =
        nashlab::semimonotonicity_scan(sol, problem, nashlab::sampler_from_config(cfg), mode);
    write_text(args.out_dir, "monotone.json", nashlab::monotonicity_report_json(report));

    const double limit =
        cfg.number("monotonicity.min_margin",
                   -(nashlab::d_threshold_solution(sol.T) + cfg.number("thresholds.slack", 0.05)));
    double worst = std::numeric_limits<double>::infinity();
    for (const std::vector<double>* series :
         {&report.d_margin, &report.diag_margin, &report.block_margin})
        for (double v : *series)
            if (std::isfinite(v)) worst = std::min(worst, v);
    const bool pass = !(worst < limit);
    std::printf("[%s] margins: worst %.6g vs limit %.6g (mode %s)\n", pass ? "PASS" : "FAIL",
                worst, limit, nashlab::scan_mode_name(mode).c_str());
    std::printf("report: %s/monotone.json\n", args.out_dir.c_str());
    return pass ? 0 : 1;
}

int cmd_simulate_particles(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::SimConfig sim = sim_from_config(cfg);
    const std::string source = cfg.text("particles.drift", "solution");
    nashlab::Ensemble ens;
    if (source == "linear") {
        const int players = cfg.integer("problem.players", 1);
        const std::vector<double> x0(static_cast<std::size_t>(players),
                                     cfg.number("particles.x0", 0.0));
        ens = nashlab::simulate(drift_from_config(cfg, players), players,
                                cfg.number("problem.T", 1.0), cfg.number("problem.sigma", 1.0),
                                cfg.number("problem.beta", 0.0), x0, sim,
                                cfg.number("particles.box_half_width",
                                           std::numeric_limits<double>::infinity()));
    } else if (source == "solution") {
        const nashlab::NashSolution sol = solution_from_config(cfg);
        const std::vector<double> x0(static_cast<std::size_t>(sol.players),
                                     cfg.number("particles.x0", 0.0));
        ens = nashlab::simulate_closed_loop(sol, x0, sim);
    } else {
        throw nashlab::InvalidArgument("particles.drift must be 'solution' or 'linear'");
    }
    std::filesystem::create_directories(args.out_dir);
    nashlab::write_ensemble_csv(ens, args.out_dir + "/paths.csv");
    int exited = 0;
    for (std::uint8_t e : ens.exited) exited += e != 0;
    std::printf("simulated %d paths x %zu levels, %d exited the box\n", ens.paths,
                ens.times.size(), exited);
    std::printf("paths: %s/paths.csv\n", args.out_dir.c_str());
    return 0;
}

nlohmann::json coupling_json(const nashlab::CouplingReport& rep) {
    nlohmann::json j;
    j["m_hyp"] = rep.m_hyp;
    j["gronwall_ratio"] = rep.gronwall_ratio;
    j["se_ratio"] = rep.se_ratio;
    j["pass"] = rep.pass;
    j["interior_paths"] = rep.interior_paths;
    j["times"] = rep.times;
    j["mean_sq_gap"] = rep.mean_sq_gap;
    j["se_gap"] = rep.se_gap;
    j["bound"] = rep.bound;
    j["interior_mean_sq_gap"] = rep.interior_mean_sq_gap;
    return j;
}

int cmd_couple(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::SimConfig sim = sim_from_config(cfg);
    const std::string source = cfg.text("particles.drift", "solution");
    nashlab::CouplingReport rep;
    if (source == "linear") {
        const int players = cfg.integer("problem.players", 1);
        const double m_hyp =
            cfg.number("particles.m_hyp", cfg.number("particles.slope", -1.0));
        const std::vector<double> x0(static_cast<std::size_t>(players),
                                     cfg.number("particles.x0", 0.0));
        const std::vector<double> y0(static_cast<std::size_t>(players),
                                     cfg.number("particles.y0", 1.0));
        rep = nashlab::synchronous_coupling(
            drift_from_config(cfg, players), players, cfg.number("problem.T", 1.0),
            cfg.number("problem.sigma", 1.0), cfg.number("problem.beta", 0.0), x0, y0, m_hyp, sim,
            cfg.number("particles.box_half_width", std::numeric_limits<double>::infinity()));
    } else if (source == "solution") {
        const nashlab::NashSolution sol = solution_from_config(cfg);
        const double m_hyp = cfg.number("particles.m_hyp");
        const std::vector<double> x0(static_cast<std::size_t>(sol.players),
                                     cfg.number("particles.x0", 0.0));
        const std::vector<double> y0(static_cast<std::size_t>(sol.players),
                                     cfg.number("particles.y0", 1.0));
        rep = nashlab::synchronous_coupling(sol, x0, y0, m_hyp, sim);
    } else {
        throw nashlab::InvalidArgument("particles.drift must be 'solution' or 'linear'");
    }
    write_text(args.out_dir, "coupling.json", coupling_json(rep).dump(2) + "\n");
    std::printf("[%s] gronwall ratio %.6g vs 1 + 3se = %.6g (interior paths %d)\n",
                rep.pass ? "PASS" : "FAIL", rep.gronwall_ratio, 1.0 + 3.0 * rep.se_ratio,
                rep.interior_paths);
    std::printf("report: %s/coupling.json\n", args.out_dir.c_str());
    return rep.pass ? 0 : 1;
}

int cmd_chaos_gap(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::NashSolution nash = solution_from_config(cfg);
    nashlab::MFGSolution mfg;
    if (cfg.has("input.mfg")) {
        mfg = nashlab::load_mfg_solution(cfg.text("input.mfg"));
    } else {
        const nashlab::MFGProblem problem =
            nashlab::mfg_from_config(cfg, cfg.integer("mfg.n", 201));
        mfg = nashlab::picard_mfg(problem, nashlab::mfg_options_from_config(cfg));
    }
    const std::vector<double> m0 = nashlab::make_gaussian_density(
        mfg.grid, cfg.number("mfg.mean0", 0.0), cfg.number("mfg.var0", 0.5));
    const nashlab::ChaosGapReport rep = nashlab::chaos_gap(nash, mfg, m0, sim_from_config(cfg));
    nlohmann::json j;
    j["per_player"] = rep.per_player;
    j["gap"] = rep.gap;
    j["standard_error"] = rep.standard_error;
    write_text(args.out_dir, "chaos_gap.json", j.dump(2) + "\n");
    bool pass = true;
    if (cfg.has("particles.max_gap")) pass = rep.gap <= cfg.number("particles.max_gap");
    std::printf("[%s] chaos gap %.6g (se %.6g, %d players)\n", pass ? "PASS" : "FAIL", rep.gap,
                rep.standard_error, nash.players);
    std::printf("report: %s/chaos_gap.json\n", args.out_dir.c_str());
    return pass ? 0 : 1;
}

int cmd_solve_mfg(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::MFGProblem problem = nashlab::mfg_from_config(cfg, cfg.integer("mfg.n", 201));
    const nashlab::MFGSolution sol =
        nashlab::picard_mfg(problem, nashlab::mfg_options_from_config(cfg));
    nashlab::save_mfg_solution(sol, args.out_dir);
    std::printf("solved: %zu labels, %d fixed-point iterations, final residual %.3e\n",
                sol.u.size(), sol.iterations,
                sol.picard_history.empty() ? 0.0 : sol.picard_history.back());
    std::printf("solution: %s\n", args.out_dir.c_str());
    return 0;
}

int cmd_lq_validate(const CliArgs& args) {
    const Config cfg = load_config(args);
    const nashlab::ExperimentReport rep = nashlab::run_lq_validate(cfg);
    nashlab::emit_report(rep, args.out_dir);
    const int steps = cfg.integer("oracle.steps_factor", 10) *
                      nashlab::solver_from_config(cfg).time_steps *
                      std::max(2, cfg.integer("refine.factor", 2));
    nashlab::save_riccati_json(
        nashlab::solve_riccati_nash(nashlab::lq_spec_from_config(cfg), steps),
        args.out_dir + "/riccati.json");
    print_criteria(rep);
    std::printf("artifacts: %s\n", args.out_dir.c_str());
    return nashlab::exit_code_for(rep);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-player Nash PDE systems, their mean-field limits, and the harness "
                 "validating the bridge between them"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* desc;
        int (*fn)(const CliArgs&);
    };
    const std::vector<Entry> entries = {
        {"solve-nash", "solve the N-player value system and persist the fields", cmd_solve_nash},
        {"check-monotone", "scan semimonotonicity margins of a solution", cmd_check_monotone},
        {"simulate-particles", "closed-loop or injected-drift particle paths", cmd_simulate_particles},
        {"couple", "synchronous coupling contraction check", cmd_couple},
        {"chaos-gap", "N-player vs mean-field trajectory gap", cmd_chaos_gap},
        {"solve-mfg", "solve the label-mixture mean-field system and persist it", cmd_solve_mfg},
        {"converge", "finite-player to mean-field convergence experiment",
         [](const CliArgs& a) { return run_and_emit(a, nashlab::run_convergence); }},
        {"vanish", "vanishing-viscosity schedule experiment",
         [](const CliArgs& a) { return run_and_emit(a, nashlab::run_vanishing_viscosity); }},
        {"lq-validate", "linear-quadratic oracle validation", cmd_lq_validate},
        {"run", "run the experiment named by experiment.kind",
         [](const CliArgs& a) { return run_and_emit(a, nashlab::run_experiment); }},
    };

    std::vector<CliArgs> arg_store(entries.size());
    int result = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& entry = entries[i];
        CliArgs* args = &arg_store[i];
        CLI::App* sub = app.add_subcommand(entry.name, entry.desc);
        sub->add_option("--config", args->config_path, "run configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", args->out_dir, "artifact directory")->capture_default_str();
        CLI::Option* seed_opt =
            sub->add_option("--seed", args->seed_value, "override experiment.seed");
        sub->callback([&result, &entry, args, seed_opt] {
            args->seed_set = seed_opt->count() > 0;
            result = entry.fn(*args);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nashlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return result;
}
