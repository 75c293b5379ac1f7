#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noisyopt/verify.hpp"

namespace {

using namespace noisyopt;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalFlags {
    int jobs = default_jobs();
    std::string output_dir;  // overrides the config's output_dir when set
    std::optional<std::uint64_t> seed_override;
};

void apply_overrides(ExperimentConfig& cfg, const GlobalFlags& flags) {
    if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
    if (flags.seed_override) cfg.master_seed = *flags.seed_override;
}

void print_run_summary(const ExperimentResult& r) {
    std::cout << "horizon " << r.ensemble.grid.back() << ", trials "
              << r.ensemble.trials() << ", f_star "
              << format_double(r.reference.f_star) << "\n";
    std::cout << "final mean error (agent 0): "
              << format_double(r.curves[0].back().mean) << "\n";
    if (r.fits[0])
        std::cout << "tail slope (agent 0, [" << r.fit_lo << "," << r.fit_hi
                  << "]): " << format_double(r.fits[0]->slope) << "\n";
    std::cout << "gap-bound violations: " << r.gap_bound_violations << "\n";
}

int cmd_run(const std::string& config_path, const GlobalFlags& flags) {
    ExperimentConfig cfg = parse_config_file(config_path);
    apply_overrides(cfg, flags);
    validate_config(cfg);
    ExperimentResult r = run_experiment(build_setup(cfg), flags.jobs);
    write_artifacts(r, cfg.output_dir, cfg.plot);
    print_run_summary(r);
    std::cout << "artifacts written to " << cfg.output_dir << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& target, bool list, const GlobalFlags& flags) {
    if (list) {
        for (const std::string& name : verification_names())
            std::cout << name << "\n";
        return kExitOk;
    }
    std::vector<CheckOutcome> outcomes;
    if (target == "all" || is_verification_name(target)) {
        VerifyContext ctx(flags.jobs);
        if (target == "all") {
            for (const std::string& name : verification_names())
                outcomes.push_back(run_verification(name, ctx));
        } else {
            outcomes.push_back(run_verification(target, ctx));
        }
    } else {
        ExperimentConfig cfg = parse_config_file(target);
        apply_overrides(cfg, flags);
        outcomes = verify_config_run(cfg, flags.jobs);
    }
    bool all_pass = true;
    for (const CheckOutcome& o : outcomes) {
        all_pass = all_pass && o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << o.name << ": "
                  << o.measured << " (expected: " << o.expected << ")\n";
    }
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED")
              << "\n";
    return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, const GlobalFlags& flags) {
    if (values.empty()) {
        std::cerr << "sweep: --values must list at least one value\n";
        return kExitConfig;
    }
    ExperimentConfig base = parse_config_file(config_path);
    apply_overrides(base, flags);
    const std::string root = base.output_dir;

    struct Row {
        std::string token;
        bool ok = false;
        std::string error;
        double final_err = 0.0;
        std::optional<double> slope;
        BoundConstants constants{};
    };
    std::vector<Row> rows;
    bool any_failed = false;
    for (double v : values) {
        Row row;
        row.token = format_double(v);
        ExperimentConfig cfg = base;
        try {
            if (axis == "kappa1") {
                cfg.kappa1 = v;
            } else if (axis == "kappa2") {
                cfg.noise_kappa2 = v;
            } else if (axis == "nu") {
                cfg.noise_nu = v;
            } else {  // N
                if (v != static_cast<double>(static_cast<int>(v)))
                    throw ConfigError("sweep axis N needs integer values, got " +
                                      row.token);
                cfg.n_agents = static_cast<int>(v);
            }
            cfg.output_dir =
                (std::filesystem::path(root) / row.token).string();
            validate_config(cfg);
            ExperimentResult r = run_experiment(build_setup(cfg), flags.jobs);
            write_artifacts(r, cfg.output_dir, cfg.plot);
            row.ok = true;
            row.final_err = r.curves[0].back().mean;
            if (r.fits[0]) row.slope = r.fits[0]->slope;
            row.constants = r.constants;
            std::cout << axis << " = " << row.token << ": final mean error "
                      << format_double(row.final_err) << "\n";
        } catch (const std::exception& e) {
            row.error = e.what();
            any_failed = true;
            std::cerr << axis << " = " << row.token << " FAILED: " << e.what()
                      << "\n";
        }
        rows.push_back(std::move(row));
    }

    std::filesystem::create_directories(root);
    std::ofstream csv(std::filesystem::path(root) / "comparison.csv",
                      std::ios::binary);
    csv << "axis,value,status,final_mean_err,fit_slope,c1,c2,c3,c4,c5,c6\r\n";
    for (const Row& row : rows) {
        csv << axis << ',' << row.token << ','
            << (row.ok ? "ok" : "failed") << ',';
        if (row.ok) {
            csv << format_double(row.final_err) << ','
                << (row.slope ? format_double(*row.slope) : std::string())
                << ',' << format_double(row.constants.c1) << ','
                << format_double(row.constants.c2) << ','
                << format_double(row.constants.c3) << ','
                << format_double(row.constants.c4) << ','
                << format_double(row.constants.c5) << ','
                << format_double(row.constants.c6);
        } else {
            csv << ",,,,,,,";
        }
        csv << "\r\n";
    }
    std::cout << "comparison CSV written to "
              << (std::filesystem::path(root) / "comparison.csv").string()
              << "\n";
    return any_failed ? kExitRuntime : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Multi-agent stochastic optimization simulator over noisy "
        "time-varying networks"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--jobs", flags.jobs,
                   "Concurrent trial workers (default: NOISY_OPT_JOBS or "
                   "hardware threads)")
        ->check(CLI::Range(1, 64));
    app.add_option("--output-dir", flags.output_dir,
                   "Override the config's output directory");
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = app.add_option(
        "--seed-override", seed, "Override the config's master seed");

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("config", run_config, "JSON experiment config")->required();

    std::string verify_target;
    bool verify_list = false;
    CLI::App* verify =
        app.add_subcommand("verify", "Run acceptance checks or check a config");
    CLI::Option* verify_pos = verify->add_option(
        "target", verify_target, "Check name, 'all', or a config path");
    verify->add_flag("--list", verify_list, "List registered check names");

    std::string sweep_config, sweep_axis;
    std::vector<double> sweep_values;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Run one sub-experiment per axis value");
    sweep->add_option("config", sweep_config, "JSON experiment config")
        ->required();
    sweep->add_option("--axis", sweep_axis, "Config key to sweep")
        ->required()
        ->check(CLI::IsMember({"kappa1", "kappa2", "nu", "N"}));
    sweep->add_option("--values", sweep_values, "Comma-separated axis values")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    if (seed_opt->count() > 0) flags.seed_override = seed;

    try {
        if (run->parsed()) return cmd_run(run_config, flags);
        if (verify->parsed()) {
            if (!verify_list && verify_pos->count() == 0) {
                std::cerr << "verify: give a check name, 'all', a config "
                             "path, or --list\n";
                return kExitConfig;
            }
            return cmd_verify(verify_target, verify_list, flags);
        }
        return cmd_sweep(sweep_config, sweep_axis, sweep_values, flags);
    } catch (const ConfigMismatch& e) {
        std::cerr << "configuration mismatch: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
}
