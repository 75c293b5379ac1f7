#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "noisyopt/config.hpp"

using namespace noisyopt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/* Scratch directory fresh per test case, cleaned up on destruction. */
struct Scratch {
    fs::path root;
    Scratch() {
        root = fs::temp_directory_path() /
               ("noisyopt_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }
    static int counter() {
        static int n = 0;
        return n++;
    }
    fs::path operator/(const std::string& leaf) const { return root / leaf; }
};

int run_cli(const std::string& args, const fs::path& capture) {
    const std::string cmd = std::string(NOISYOPT_CLI_PATH) + " " + args + " >" +
                            capture.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

/* Small stochastic two-agent run that exercises noise, bounds, and artifacts. */
json fast_config(const std::string& out_dir) {
    json j;
    j["n_agents"] = 2;
    j["window_B"] = 1;
    j["topology_kind"] = "static_ring";
    j["noise_kappa2"] = 1.0;
    j["noise_nu"] = 0.5;
    j["noise_dist"] = "uniform_ball";
    j["mirror_map"] = "euclidean_half_sq_norm";
    j["regularizer_local"] = "l1";
    j["lambda1"] = 0.1;
    j["set_kind"] = "box";
    j["set_params"] = {-1.0, 1.0};
    j["problem_variant"] = "problem1";
    j["objective_kind"] = "abs_regression";
    j["dim"] = 1;
    j["grad_noise_sigma"] = 0.3;
    j["grad_bounded"] = true;
    j["method"] = "dscmd_n";
    j["horizon_T"] = 150;
    j["kappa1"] = 0.5;
    j["trials_M"] = 2;
    j["output_dir"] = out_dir;
    return j;
}

}  // namespace

TEST_CASE("a minimal document parses into documented defaults") {
    const ExperimentConfig cfg =
        parse_config_json(R"({"mirror_map": "euclidean_half_sq_norm"})");
    CHECK(cfg.n_agents == 1);
    CHECK(cfg.window_b == 1);
    CHECK(cfg.horizon_t == 1000);
    CHECK(cfg.trials_m == 20);
    CHECK(cfg.method == "dscmd_n");
    CHECK(cfg.noise_dist == "zero");
    CHECK(cfg.set_kind == "box");
    CHECK(cfg.kappa1 == 0.5);
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm", "bogus": 1})");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unknown config key") !=
              std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
}

TEST_CASE("range violations name the key and the admissible range") {
    try {
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm", "noise_kappa2": 1.5})");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("noise_kappa2") != std::string::npos);
        CHECK(msg.find("(0, 1]") != std::string::npos);
        CHECK(msg.find("1.5") != std::string::npos);
    }
}

TEST_CASE("schema range checks fire for every numeric field") {
    auto invalid = [](const std::string& body) {
        CHECK_THROWS_AS(parse_config_json(
                            R"({"mirror_map": "euclidean_half_sq_norm",)" +
                            body + "}"),
                        ConfigError);
    };
    invalid(R"("n_agents": 0)");
    invalid(R"("n_agents": 65)");
    invalid(R"("window_B": 0)");
    invalid(R"("theta": 0.9, "n_agents": 2)");
    invalid(R"("dim": 0)");
    invalid(R"("horizon_T": 0)");
    invalid(R"("kappa1": 1.0)");
    invalid(R"("trials_M": 0)");
    invalid(R"("noise_nu": -1.0)");
    invalid(R"("set_kind": "box", "set_params": [1.0])");
    invalid(R"("set_kind": "box", "set_params": [2.0, 1.0])");
    invalid(R"("set_kind": "euclidean_ball", "set_params": [-1.0])");
    invalid(R"("set_kind": "simplex", "set_params": [1.0])");
    invalid(R"("regularizer_local": "l1")");  // needs lambda1 > 0
}

TEST_CASE("cross-field pairings are mismatches, not schema errors") {
    CHECK_THROWS_AS(
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm",
                "proximal_psi": "euclidean_half_sq_norm"})"),
        ConfigMismatch);
    CHECK_THROWS_AS(
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm",
                "problem_variant": "problem2"})"),
        ConfigMismatch);
    CHECK_THROWS_AS(
        parse_config_json(
            R"({"mirror_map": "neg_entropy", "set_kind": "box",
                "set_params": [-1.0, 1.0]})"),
        ConfigMismatch);
    CHECK_THROWS_AS(
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm", "noise_dist": "zero",
                "noise_nu": 1.0})"),
        ConfigMismatch);
    CHECK_THROWS_AS(
        parse_config_json(
            R"({"mirror_map": "euclidean_half_sq_norm",
                "noise_dist": "uniform_ball", "noise_nu": 0.0})"),
        ConfigMismatch);
    CHECK_THROWS_AS(parse_config_json(R"({"proximal_psi":
        "euclidean_half_sq_norm", "problem_variant": "problem2",
        "method": "dscda_n", "regularizer_local": "l1", "lambda1": 0.1})"),
                    ConfigMismatch);
}

TEST_CASE("serialization round-trips to a fixed point") {
    Scratch tmp;
    const json cfg_json = fast_config((tmp / "out").string());
    const ExperimentConfig cfg = parse_config_json(cfg_json.dump());
    const std::string once = config_to_json(cfg);
    const ExperimentConfig back = parse_config_json(once);
    CHECK(config_to_json(back) == once);
    // Unset weight floor resolves to the uniform 1/n value.
    CHECK(json::parse(once)["theta"].get<double>() ==
          doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("setup construction wires the resolved pieces together") {
    Scratch tmp;
    const ExperimentConfig cfg =
        parse_config_json(fast_config((tmp / "out").string()).dump());
    const ExperimentSetup setup = build_setup(cfg);
    CHECK(setup.method == Method::mirror_descent);
    CHECK(setup.problem.n_agents == 2);
    CHECK(setup.problem.dim == 1);
    CHECK(setup.checkpoints.front() == 1);
    CHECK(setup.checkpoints.back() == 150);
    CHECK(setup.steps.kappa1 == 0.5);
    CHECK(setup.decay.kappa2 == 1.0);
    // Per-trial streams are deterministic and trial-indexed.
    const Vector a = setup.noise_for_trial(0).sample(0, 1, 3, 1);
    const Vector b = setup.noise_for_trial(0).sample(0, 1, 3, 1);
    const Vector c = setup.noise_for_trial(1).sample(0, 1, 3, 1);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() > 0.0);
}

TEST_CASE("command line reports usage problems with the config exit code") {
    Scratch tmp;
    CHECK(run_cli("", tmp / "cap.txt") == 2);
    CHECK(run_cli("bogus_subcommand", tmp / "cap.txt") == 2);
    CHECK(run_cli("verify", tmp / "cap.txt") == 2);
    CHECK(run_cli("--help", tmp / "cap.txt") == 0);
}

TEST_CASE("verify --list names every registered check") {
    Scratch tmp;
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("verify --list", cap) == 0);
    const std::string out = slurp(cap);
    for (const char* name :
         {"mirror_descent_rate", "dual_averaging_regimes", "mixing_envelope",
          "bound_domination", "step_and_disagreement", "inner_solver_oracle",
          "high_prob_coverage", "single_agent_degeneracy", "rerun_determinism"})
        CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("run writes the full artifact set and reports success") {
    Scratch tmp;
    const fs::path cfg_path = tmp / "cfg.json";
    const fs::path out_dir = tmp / "out";
    spit(cfg_path, fast_config(out_dir.string()).dump(2));
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("run " + cfg_path.string(), cap) == 0);
    const std::string out = slurp(cap);
    CHECK(out.find("artifacts written to") != std::string::npos);
    CHECK(fs::exists(out_dir / "manifest.json"));
    CHECK(fs::exists(out_dir / "curve.csv"));
    CHECK(fs::exists(out_dir / "summary.json"));
    CHECK(fs::exists(out_dir / "trials" / "trial_000.csv"));
    CHECK(fs::exists(out_dir / "trials" / "trial_001.csv"));
    CHECK_FALSE(fs::exists(out_dir / "plot.svg"));  // plot defaults off
    // The manifest embeds the resolved configuration.
    const json manifest = json::parse(slurp(out_dir / "manifest.json"));
    CHECK(manifest["config"]["n_agents"].get<int>() == 2);
    CHECK(manifest.contains("derived"));
}

TEST_CASE("invalid configs and missing files exit with the config code") {
    Scratch tmp;
    const fs::path bad = tmp / "bad.json";
    json j = fast_config((tmp / "out").string());
    j["noise_kappa2"] = 1.5;
    spit(bad, j.dump());
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("run " + bad.string(), cap) == 2);
    CHECK(slurp(cap).find("configuration") != std::string::npos);
    CHECK(run_cli("run " + (tmp / "missing.json").string(), cap) == 2);
}

TEST_CASE("identical configurations rerun to byte-identical curves") {
    Scratch tmp;
    const fs::path cfg_path = tmp / "cfg.json";
    spit(cfg_path, fast_config((tmp / "base").string()).dump());
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("run " + cfg_path.string() + " --output-dir " +
                      (tmp / "a").string(),
                  cap) == 0);
    CHECK(run_cli("run " + cfg_path.string() + " --output-dir " +
                      (tmp / "b").string(),
                  cap) == 0);
    const std::string curve_a = slurp(tmp / "a" / "curve.csv");
    CHECK_FALSE(curve_a.empty());
    CHECK(curve_a == slurp(tmp / "b" / "curve.csv"));
    CHECK(slurp(tmp / "a" / "trials" / "trial_000.csv") ==
          slurp(tmp / "b" / "trials" / "trial_000.csv"));

    // A different master seed must change the sampled trajectories.
    CHECK(run_cli("run " + cfg_path.string() + " --output-dir " +
                      (tmp / "c").string() + " --seed-override 999",
                  cap) == 0);
    CHECK(curve_a != slurp(tmp / "c" / "curve.csv"));
}

TEST_CASE("sweep fans out sub-runs and aggregates a comparison table") {
    Scratch tmp;
    const fs::path cfg_path = tmp / "cfg.json";
    const fs::path root = tmp / "sweep";
    json j = fast_config(root.string());
    j["horizon_T"] = 100;
    spit(cfg_path, j.dump());
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("sweep " + cfg_path.string() +
                      " --axis kappa2 --values 0.75,1",
                  cap) == 0);
    CHECK(fs::exists(root / "0.75" / "curve.csv"));
    CHECK(fs::exists(root / "1" / "curve.csv"));
    const std::string table = slurp(root / "comparison.csv");
    CHECK(table.rfind("axis,value,status,final_mean_err,fit_slope,c1,c2,c3,c4,"
                      "c5,c6\r\n",
                      0) == 0);
    CHECK(table.find("kappa2,0.75,ok") != std::string::npos);
    CHECK(table.find("kappa2,1,ok") != std::string::npos);
}

TEST_CASE("sweep isolates per-value failures and flags them in the exit code") {
    Scratch tmp;
    const fs::path cfg_path = tmp / "cfg.json";
    const fs::path root = tmp / "sweep";
    json j = fast_config(root.string());
    j["horizon_T"] = 100;
    spit(cfg_path, j.dump());
    const fs::path cap = tmp / "cap.txt";
    CHECK(run_cli("sweep " + cfg_path.string() +
                      " --axis kappa2 --values 0.75,1.5",
                  cap) == 3);
    const std::string table = slurp(root / "comparison.csv");
    CHECK(table.find("kappa2,0.75,ok") != std::string::npos);
    CHECK(table.find("kappa2,1.5,failed") != std::string::npos);
    // An empty value list never launches anything.
    CHECK(run_cli("sweep " + cfg_path.string() + " --axis kappa2 --values ",
                  cap) == 2);
}
