#include "nematic/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "nematic/rng.hpp"

namespace nematic {

namespace {

namespace fs = std::filesystem;

class Artifact {
public:
    Artifact(const fs::path& dir, const std::string& name, const ExperimentConfig& cfg) : path_(dir / name) {
        os_.open(path_, std::ios::binary);
        if (!os_) throw std::runtime_error("cannot write " + path_.string());
        os_ << provenance_header(cfg) << '\n';
    }
    std::ostream& stream() { return os_; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream os_;
};

void require_ok(const Trajectory& t, const char* what) {
    if (!t.ok()) throw NumericalFailure(std::string(what) + " diverged (blow-up guard)");
}

int cmd_verify(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const auto results = run_verify(cfg, opt.threads);
    print_verify_table(log, results);
    Artifact a(opt.out_dir, "verify.csv", cfg);
    a.stream() << "group,invariant,pass,detail\n";
    bool all = true;
    for (const auto& r : results) {
        a.stream() << r.group << ',' << r.name << ',' << (r.pass ? "true" : "false") << ",\"" << r.detail << "\"\n";
        all = all && r.pass;
    }
    if (!all) throw NumericalFailure("verify: at least one invariant failed");
    return kExitOk;
}

int cmd_skeleton(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const SolverConfig sc = cfg.solver();
    const Trajectory t = solve_skeleton(cfg.initial_state(), cfg.control(), sc);
    require_ok(t, "skeleton");
    Artifact csv(opt.out_dir, "skeleton.csv", cfg);
    write_trajectory_csv(csv.stream(), t);
    Artifact ck(opt.out_dir, "skeleton_final.txt", cfg);
    write_checkpoint(ck.stream(), t.final_state());
    log << "skeleton: " << t.diagnostics.size() - 1 << " steps, wrote " << csv.path().string() << '\n';
    return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const SolverConfig sc = cfg.solver();
    const Trajectory t = solve_small_noise_sde(cfg.initial_state(), cfg.epsilon, cfg.control(), sc,
                                               derive_seed(*cfg.seed, Purpose::sde_path));
    require_ok(t, "simulation");
    Artifact csv(opt.out_dir, "simulate.csv", cfg);
    write_trajectory_csv(csv.stream(), t);
    log << "simulate: epsilon " << cfg.epsilon << ", wrote " << csv.path().string() << '\n';
    return kExitOk;
}

int cmd_convolution(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const SolverConfig sc = cfg.solver();
    const SpectralState init = cfg.initial_state();
    const Control phi = cfg.control();
    const ConvolutionPath path =
        solve_stochastic_convolution(init, cfg.epsilon, phi, sc, derive_seed(*cfg.seed, Purpose::convolution));
    if (path.status != SolveStatus::ok) throw NumericalFailure("convolution path diverged");
    Artifact csv(opt.out_dir, "convolution.csv", cfg);
    csv.stream() << "t,xi_l2\n";
    csv.stream().precision(12);
    for (std::size_t i = 0; i < path.times.size(); ++i) csv.stream() << path.times[i] << ',' << path.xi_l2[i] << '\n';

    const auto rows = convolution_study(init, cfg.epsilons, cfg.paths, phi, sc, *cfg.seed, opt.threads);
    Artifact study(opt.out_dir, "convolution_study.csv", cfg);
    study.stream() << "epsilon,mean_sup_squared,std_error,n_diverged\n";
    study.stream().precision(12);
    for (const auto& r : rows) {
        study.stream() << r.epsilon << ',' << r.mean_sup_squared << ',' << r.std_error << ',' << r.n_diverged << '\n';
        if (r.n_diverged > 0.01 * r.n_paths) throw NumericalFailure("convolution study: more than 1% of paths diverged");
    }
    log << "convolution: wrote " << csv.path().string() << " and " << study.path().string() << '\n';
    return kExitOk;
}

int cmd_rate(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const RateProblem prob = cfg.rate_problem(opt.threads);
    const RateSolution sol = optimize_control(prob);
    Artifact hist(opt.out_dir, "rate_history.csv", cfg);
    write_rate_history_csv(hist.stream(), sol);
    Artifact ctrl(opt.out_dir, "rate_control.csv", cfg);
    write_control_csv(ctrl.stream(), sol.g_star);
    Artifact sum(opt.out_dir, "rate_summary.csv", cfg);
    sum.stream() << "method,objective,cost,mismatch,converged\n";
    sum.stream().precision(15);
    sum.stream() << "optimize," << sol.objective << ',' << sol.cost << ',' << sol.mismatch << ','
                 << (sol.converged ? "true" : "false") << '\n';
    if (!cfg.brute_grid.empty()) {
        const RateSolution bf = brute_force_rate(prob, cfg.brute_grid);
        sum.stream() << "brute_force," << bf.objective << ',' << bf.cost << ',' << bf.mismatch << ",true\n";
    }
    if (!std::isfinite(sol.objective)) throw NumericalFailure("rate objective is not finite");
    log << "rate: objective " << sol.objective << " (cost " << sol.cost << ", mismatch " << sol.mismatch << ")"
        << (sol.converged ? "" : " [not converged]") << '\n';
    return kExitOk;
}

int cmd_mc_ldp(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const SmallNoiseStudy study =
        mc_small_noise_study(cfg.initial_state(), cfg.epsilons, cfg.paths, cfg.control(), cfg.solver(), *cfg.seed,
                             opt.threads);
    Artifact csv(opt.out_dir, "mc_ldp.csv", cfg);
    write_small_noise_csv(csv.stream(), study);
    if (!study.ok) throw NumericalFailure("small-noise study: more than 1% of paths diverged");
    log << "mc-ldp: wrote " << csv.path().string() << '\n';
    return kExitOk;
}

int cmd_importance(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    const NoiseModel noise = cfg.noise(cfg.grid());
    const int threshold = cfg.event_threshold;
    const PathEvent event = [threshold](const JumpSample& s) { return static_cast<int>(s.events.size()) >= threshold; };
    const Control tilt = cfg.tilt_control();
    const Control plain(cfg.horizon, 1, noise.marks.size(), 1.0);
    const std::uint64_t seed = derive_seed(*cfg.seed, Purpose::importance);
    const auto tilted =
        importance_weights(event, tilt, cfg.importance_epsilon, cfg.importance_paths, noise.marks, seed, opt.threads);
    const auto reference =
        importance_weights(event, plain, cfg.importance_epsilon, cfg.importance_paths, noise.marks, seed, opt.threads);
    Artifact csv(opt.out_dir, "importance.csv", cfg);
    csv.stream() << "method,estimate,std_error,mean_weight,n_paths\n";
    csv.stream().precision(12);
    csv.stream() << "tilted," << tilted.estimate << ',' << tilted.std_error << ',' << tilted.mean_weight << ','
                 << tilted.n_paths << '\n';
    csv.stream() << "plain," << reference.estimate << ',' << reference.std_error << ',' << reference.mean_weight << ','
                 << reference.n_paths << '\n';
    log << "importance: P(jumps >= " << threshold << ") ~ " << tilted.estimate << " +- " << tilted.std_error
        << " (plain " << reference.estimate << " +- " << reference.std_error << ")\n";
    return kExitOk;
}

}  // namespace

int run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
    cfg.validate();
    fs::create_directories(opt.out_dir);
    {
        Artifact echo(opt.out_dir, "config_echo.ini", cfg);
        echo.stream() << serialize_config(cfg);
    }
    if (name == "verify") return cmd_verify(cfg, opt, log);
    if (name == "skeleton") return cmd_skeleton(cfg, opt, log);
    if (name == "simulate") return cmd_simulate(cfg, opt, log);
    if (name == "convolution") return cmd_convolution(cfg, opt, log);
    if (name == "rate") return cmd_rate(cfg, opt, log);
    if (name == "mc-ldp") return cmd_mc_ldp(cfg, opt, log);
    if (name == "importance") return cmd_importance(cfg, opt, log);
    throw ConfigError("command line", 0, "unknown subcommand '" + name + "'");
}

std::string error_record(const std::string& kind, const std::string& message, int exit_code) {
    nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", exit_code}};
    return j.dump();
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic nematic liquid crystal simulator and rate-function tools"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = 1;
    app.add_option("--config", config_path, "Configuration file");
    app.add_option("--seed", seed, "Root seed (overrides the config)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    const char* descriptions[] = {"Run the invariant suite",
                                  "Solve the controlled skeleton equation",
                                  "Simulate the small-noise jump SDE",
                                  "Simulate the stochastic convolution and its epsilon study",
                                  "Optimize the penalized rate objective",
                                  "Small-noise Monte Carlo study",
                                  "Importance-sampled event probability"};
    for (std::size_t i = 0; i < std::size(kSubcommands); ++i) app.add_subcommand(kSubcommands[i], descriptions[i]);

    auto fail = [&](const std::string& kind, const std::string& msg, int code) {
        const std::string rec = error_record(kind, msg, code);
        err << rec << '\n';
        std::error_code ec;
        if (fs::is_directory(out_dir, ec)) std::ofstream(fs::path(out_dir) / "error.json") << rec << '\n';
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kExitValidation);
    }
    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const ExperimentConfig cfg = config_path.empty() ? parse_config_text("", "defaults", seed)
                                                         : parse_config(config_path, seed);
        return run_subcommand(name, cfg, RunOptions{out_dir, threads}, out);
    } catch (const ConfigError& e) {
        return fail("validation", e.what(), kExitValidation);
    } catch (const std::invalid_argument& e) {
        return fail("validation", e.what(), kExitValidation);
    } catch (const NumericalFailure& e) {
        return fail("numerical", e.what(), kExitNumerical);
    } catch (const std::exception& e) {
        return fail("numerical", e.what(), kExitNumerical);
    }
}

}  // namespace nematic
