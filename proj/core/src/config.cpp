#include "noisyopt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "noisyopt/rng.hpp"

namespace noisyopt {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& msg) { throw ConfigError(msg); }

double get_number(const json& j, const std::string& key, double fallback,
                  bool* present = nullptr) {
    if (!j.contains(key)) {
        if (present) *present = false;
        return fallback;
    }
    if (present) *present = true;
    if (!j[key].is_number())
        bad_key(key + " must be a number");
    return j[key].get<double>();
}

long get_integer(const json& j, const std::string& key, long fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        bad_key(key + " must be an integer");
    return j[key].get<long>();
}

std::uint64_t get_seed(const json& j, const std::string& key,
                       std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
        bad_key(key + " must be a non-negative integer");
    const auto v = j[key].get<std::int64_t>();
    if (v < 0) bad_key(key + " must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::string get_string(const json& j, const std::string& key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) bad_key(key + " must be a string");
    return j[key].get<std::string>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) bad_key(key + " must be a boolean");
    return j[key].get<bool>();
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "n_agents",         "window_B",
        "theta",            "topology_kind",
        "topology_seed",
        "noise_kappa2",     "noise_nu",
        "noise_dist",       "noise_zero_mean",
        "noise_seed",       "mirror_map",
        "proximal_psi",     "regularizer_local",
        "regularizer_global", "lambda1",
        "lambda2",          "set_kind",
        "set_params",       "problem_variant",
        "objective_kind",   "dim",
        "data_seed",        "grad_noise_sigma",
        "grad_bounded",     "method",
        "horizon_T",        "kappa1",
        "checkpoints",      "init_override",
        "master_seed",      "output_dir",
        "trials_M",         "plot"};
    return keys;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (known_keys().count(key) == 0)
            bad_key("unknown config key \"" + key + "\"");
    }

    ExperimentConfig cfg;
    cfg.n_agents = static_cast<int>(get_integer(j, "n_agents", cfg.n_agents));
    cfg.window_b = static_cast<int>(get_integer(j, "window_B", cfg.window_b));
    cfg.theta = get_number(j, "theta", cfg.theta);
    cfg.topology_kind = get_string(j, "topology_kind", cfg.topology_kind);
    cfg.topology_seed = get_seed(j, "topology_seed", cfg.topology_seed);

    cfg.noise_kappa2 = get_number(j, "noise_kappa2", cfg.noise_kappa2);
    cfg.noise_nu = get_number(j, "noise_nu", cfg.noise_nu);
    cfg.noise_dist = get_string(j, "noise_dist", cfg.noise_dist);
    cfg.noise_zero_mean = get_bool(j, "noise_zero_mean", cfg.noise_zero_mean);
    cfg.noise_seed = get_seed(j, "noise_seed", cfg.noise_seed);

    cfg.mirror_map = get_string(j, "mirror_map", cfg.mirror_map);
    cfg.proximal_psi = get_string(j, "proximal_psi", cfg.proximal_psi);
    cfg.regularizer_local =
        get_string(j, "regularizer_local", cfg.regularizer_local);
    cfg.regularizer_global =
        get_string(j, "regularizer_global", cfg.regularizer_global);
    cfg.lambda1 = get_number(j, "lambda1", cfg.lambda1);
    cfg.lambda2 = get_number(j, "lambda2", cfg.lambda2);
    cfg.set_kind = get_string(j, "set_kind", cfg.set_kind);
    if (j.contains("set_params")) {
        if (!j["set_params"].is_array())
            bad_key("set_params must be an array of numbers");
        cfg.set_params.clear();
        for (const auto& v : j["set_params"]) {
            if (!v.is_number()) bad_key("set_params must be an array of numbers");
            cfg.set_params.push_back(v.get<double>());
        }
    }

    cfg.problem_variant = get_string(j, "problem_variant", cfg.problem_variant);
    cfg.objective_kind = get_string(j, "objective_kind", cfg.objective_kind);
    cfg.dim = static_cast<int>(get_integer(j, "dim", cfg.dim));
    cfg.data_seed = get_seed(j, "data_seed", cfg.data_seed);
    cfg.grad_noise_sigma = get_number(j, "grad_noise_sigma", cfg.grad_noise_sigma);
    cfg.grad_bounded = get_bool(j, "grad_bounded", cfg.grad_bounded);

    cfg.method = get_string(j, "method", cfg.method);
    cfg.horizon_t = get_integer(j, "horizon_T", cfg.horizon_t);
    cfg.kappa1 = get_number(j, "kappa1", cfg.kappa1);
    if (j.contains("checkpoints")) {
        const auto& c = j["checkpoints"];
        if (!c.is_object()) bad_key("checkpoints must be an object");
        for (const auto& [key, value] : c.items()) {
            (void)value;
            if (key != "count" && key != "spacing")
                bad_key("unknown checkpoints key \"" + key + "\"");
        }
        cfg.checkpoint_count =
            static_cast<int>(get_integer(c, "count", cfg.checkpoint_count));
        cfg.checkpoint_spacing =
            get_string(c, "spacing", cfg.checkpoint_spacing);
    }
    if (j.contains("init_override") && !j["init_override"].is_null()) {
        if (!j["init_override"].is_array())
            bad_key("init_override must be an array of numbers or null");
        std::vector<double> init;
        for (const auto& v : j["init_override"]) {
            if (!v.is_number())
                bad_key("init_override must be an array of numbers or null");
            init.push_back(v.get<double>());
        }
        cfg.init_override = std::move(init);
    }
    cfg.master_seed = get_seed(j, "master_seed", cfg.master_seed);

    cfg.output_dir = get_string(j, "output_dir", cfg.output_dir);
    cfg.trials_m = static_cast<int>(get_integer(j, "trials_M", cfg.trials_m));
    cfg.plot = get_bool(j, "plot", cfg.plot);

    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    auto mismatch = [](const std::string& m) { throw ConfigMismatch(m); };

    if (cfg.n_agents < 1 || cfg.n_agents > 64)
        fail("n_agents must lie in [1, 64], got " + std::to_string(cfg.n_agents));
    if (cfg.window_b < 1 || cfg.window_b > 64)
        fail("window_B must lie in [1, 64], got " + std::to_string(cfg.window_b));
    const double theta_max = 1.0 / cfg.n_agents;
    if (cfg.theta != 0.0 && !(cfg.theta > 0.0 && cfg.theta <= theta_max))
        fail("theta must lie in (0, 1/n_agents] = (0, " +
             format_double(theta_max) + "], got " + format_double(cfg.theta));
    if (cfg.topology_kind != "static_ring" &&
        cfg.topology_kind != "periodic_partition" &&
        cfg.topology_kind != "random_b_connected")
        fail("topology_kind must be one of static_ring | periodic_partition | "
             "random_b_connected, got \"" +
             cfg.topology_kind + "\"");

    if (!(cfg.noise_kappa2 > 0.0 && cfg.noise_kappa2 <= 1.0))
        fail("noise_kappa2 must lie in (0, 1], got " +
             format_double(cfg.noise_kappa2));
    if (cfg.noise_nu < 0.0)
        fail("noise_nu must be >= 0, got " + format_double(cfg.noise_nu));
    if (cfg.noise_dist != "uniform_ball" &&
        cfg.noise_dist != "truncated_gaussian" && cfg.noise_dist != "zero")
        fail("noise_dist must be one of uniform_ball | truncated_gaussian | "
             "zero, got \"" +
             cfg.noise_dist + "\"");
    if (cfg.noise_dist == "zero" && cfg.noise_nu != 0.0)
        mismatch("noise_dist \"zero\" requires noise_nu = 0");
    if (cfg.noise_dist != "zero" && cfg.noise_nu == 0.0)
        mismatch("noise_nu = 0 requires noise_dist \"zero\"");

    if (cfg.method != "dscmd_n" && cfg.method != "dscda_n")
        fail("method must be one of dscmd_n | dscda_n, got \"" + cfg.method +
             "\"");
    const bool md = cfg.method == "dscmd_n";
    auto check_map = [&](const std::string& key, const std::string& v) {
        if (v != "euclidean_half_sq_norm" && v != "neg_entropy")
            fail(key + " must be one of euclidean_half_sq_norm | neg_entropy, "
                       "got \"" + v + "\"");
    };
    if (md) {
        if (cfg.mirror_map.empty())
            fail("method dscmd_n requires mirror_map");
        check_map("mirror_map", cfg.mirror_map);
        if (!cfg.proximal_psi.empty())
            mismatch("proximal_psi applies to method dscda_n only");
    } else {
        if (cfg.proximal_psi.empty())
            fail("method dscda_n requires proximal_psi");
        check_map("proximal_psi", cfg.proximal_psi);
        if (!cfg.mirror_map.empty())
            mismatch("mirror_map applies to method dscmd_n only");
    }

    auto check_reg = [&](const std::string& key, const std::string& v) {
        if (v != "zero" && v != "l1" && v != "half_l2_sq" && v != "linf" &&
            v != "entropy" && v != "mixed_l1_l2")
            fail(key + " must be one of zero | l1 | half_l2_sq | linf | entropy "
                       "| mixed_l1_l2, got \"" + v + "\"");
    };
    check_reg("regularizer_local", cfg.regularizer_local);
    check_reg("regularizer_global", cfg.regularizer_global);
    if (cfg.problem_variant != "problem1" && cfg.problem_variant != "problem2")
        fail("problem_variant must be one of problem1 | problem2, got \"" +
             cfg.problem_variant + "\"");
    const bool local = cfg.problem_variant == "problem1";
    if (local && cfg.regularizer_global != "zero")
        mismatch("problem1 carries per-agent regularizers; regularizer_global "
                 "must stay \"zero\"");
    if (!local && cfg.regularizer_local != "zero")
        mismatch("problem2 carries one shared regularizer; regularizer_local "
                 "must stay \"zero\"");
    if (md != local)
        mismatch(md ? "method dscmd_n pairs with problem_variant problem1"
                    : "method dscda_n pairs with problem_variant problem2");
    if (cfg.lambda1 < 0.0)
        fail("lambda1 must be >= 0, got " + format_double(cfg.lambda1));
    if (cfg.lambda2 < 0.0)
        fail("lambda2 must be >= 0, got " + format_double(cfg.lambda2));
    const std::string active_reg = local ? cfg.regularizer_local : cfg.regularizer_global;
    if (cfg.lambda2 != 0.0 && active_reg != "mixed_l1_l2")
        fail("lambda2 applies only to regularizer mixed_l1_l2");
    if (active_reg != "zero" && cfg.lambda1 == 0.0)
        fail("regularizer \"" + active_reg + "\" needs lambda1 > 0");

    if (cfg.set_kind == "box") {
        if (cfg.set_params.size() != 2)
            fail("set_kind box needs set_params [lo, hi]");
        if (!(cfg.set_params[0] < cfg.set_params[1]))
            fail("set_params box bounds need lo < hi");
    } else if (cfg.set_kind == "euclidean_ball") {
        if (cfg.set_params.size() != 1 || !(cfg.set_params[0] > 0.0))
            fail("set_kind euclidean_ball needs set_params [radius > 0]");
    } else if (cfg.set_kind == "simplex") {
        if (!cfg.set_params.empty())
            fail("set_kind simplex takes empty set_params");
    } else {
        fail("set_kind must be one of box | euclidean_ball | simplex, got \"" +
             cfg.set_kind + "\"");
    }
    const std::string map_token = md ? cfg.mirror_map : cfg.proximal_psi;
    if (map_token == "neg_entropy" && cfg.set_kind != "simplex")
        mismatch("neg_entropy map requires set_kind simplex");
    if ((cfg.regularizer_local == "entropy" ||
         cfg.regularizer_global == "entropy") &&
        cfg.set_kind == "box" && cfg.set_params[0] < 0.0)
        mismatch("entropy regularizer needs a nonnegative domain");

    if (cfg.objective_kind != "abs_regression" && cfg.objective_kind != "hinge" &&
        cfg.objective_kind != "quadratic" && cfg.objective_kind != "linear")
        fail("objective_kind must be one of abs_regression | hinge | quadratic "
             "| linear, got \"" +
             cfg.objective_kind + "\"");
    if (cfg.dim < 1 || cfg.dim > 256)
        fail("dim must lie in [1, 256], got " + std::to_string(cfg.dim));
    if (cfg.grad_noise_sigma < 0.0)
        fail("grad_noise_sigma must be >= 0, got " +
             format_double(cfg.grad_noise_sigma));

    if (cfg.horizon_t < 1 || cfg.horizon_t > 100000000L)
        fail("horizon_T must lie in [1, 1e8], got " +
             std::to_string(cfg.horizon_t));
    if (!(cfg.kappa1 > 0.0 && cfg.kappa1 < 1.0))
        fail("kappa1 must lie in (0, 1), got " + format_double(cfg.kappa1));
    if (cfg.checkpoint_count < 0 || cfg.checkpoint_count > 100000)
        fail("checkpoints.count must lie in [0, 1e5], got " +
             std::to_string(cfg.checkpoint_count));
    if (cfg.checkpoint_spacing != "log")
        fail("checkpoints.spacing supports \"log\" only, got \"" +
             cfg.checkpoint_spacing + "\"");
    if (cfg.init_override &&
        static_cast<int>(cfg.init_override->size()) != cfg.dim)
        fail("init_override length must equal dim");
    if (cfg.trials_m < 1 || cfg.trials_m > 10000)
        fail("trials_M must lie in [1, 1e4], got " + std::to_string(cfg.trials_m));
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["n_agents"] = cfg.n_agents;
    j["window_B"] = cfg.window_b;
    j["theta"] = cfg.theta == 0.0 ? 1.0 / cfg.n_agents : cfg.theta;
    j["topology_kind"] = cfg.topology_kind;
    j["topology_seed"] = cfg.topology_seed;
    j["noise_kappa2"] = cfg.noise_kappa2;
    j["noise_nu"] = cfg.noise_nu;
    j["noise_dist"] = cfg.noise_dist;
    j["noise_zero_mean"] = cfg.noise_zero_mean;
    j["noise_seed"] = cfg.noise_seed;
    if (!cfg.mirror_map.empty()) j["mirror_map"] = cfg.mirror_map;
    if (!cfg.proximal_psi.empty()) j["proximal_psi"] = cfg.proximal_psi;
    j["regularizer_local"] = cfg.regularizer_local;
    j["regularizer_global"] = cfg.regularizer_global;
    j["lambda1"] = cfg.lambda1;
    j["lambda2"] = cfg.lambda2;
    j["set_kind"] = cfg.set_kind;
    j["set_params"] = cfg.set_params;
    j["problem_variant"] = cfg.problem_variant;
    j["objective_kind"] = cfg.objective_kind;
    j["dim"] = cfg.dim;
    j["data_seed"] = cfg.data_seed;
    j["grad_noise_sigma"] = cfg.grad_noise_sigma;
    j["grad_bounded"] = cfg.grad_bounded;
    j["method"] = cfg.method;
    j["horizon_T"] = cfg.horizon_t;
    j["kappa1"] = cfg.kappa1;
    j["checkpoints"] = {{"count", cfg.checkpoint_count},
                        {"spacing", cfg.checkpoint_spacing}};
    if (cfg.init_override)
        j["init_override"] = *cfg.init_override;
    else
        j["init_override"] = nullptr;
    j["master_seed"] = cfg.master_seed;
    j["output_dir"] = cfg.output_dir;
    j["trials_M"] = cfg.trials_m;
    j["plot"] = cfg.plot;
    return j.dump(2);
}

namespace {

ConstraintSet build_set(const ExperimentConfig& cfg) {
    if (cfg.set_kind == "box") {
        return ConstraintSet::box(
            Vector::Constant(cfg.dim, cfg.set_params[0]),
            Vector::Constant(cfg.dim, cfg.set_params[1]));
    }
    if (cfg.set_kind == "euclidean_ball")
        return ConstraintSet::ball(Vector::Zero(cfg.dim), cfg.set_params[0]);
    return ConstraintSet::simplex(cfg.dim);
}

MirrorMap build_map(const ExperimentConfig& cfg) {
    const std::string& token =
        cfg.method == "dscmd_n" ? cfg.mirror_map : cfg.proximal_psi;
    if (token == "neg_entropy") return MirrorMap::negative_entropy();
    return MirrorMap::euclidean();
}

Regularizer build_reg(const std::string& kind, double l1, double l2) {
    if (kind == "zero") return Regularizer::zero();
    if (kind == "l1") return Regularizer::l1(l1);
    if (kind == "half_l2_sq") return Regularizer::half_l2_sq(l1);
    if (kind == "linf") return Regularizer::linf(l1);
    if (kind == "entropy") return Regularizer::entropy(l1);
    return Regularizer::mixed(l1, l2);
}

constexpr int kDataRows = 8;  // rows per agent for the regression objectives

/* Planted interior point the per-agent data is generated around. */
Vector planted_point(const ConstraintSet& set, std::uint64_t data_seed) {
    CounterRng rng = CounterRng::keyed(data_seed, 0xa0);
    const Vector center = set.center();
    return center + 0.8 * (set.sample(rng) - center);
}

std::vector<LocalObjective> build_objectives(const ExperimentConfig& cfg,
                                             const ConstraintSet& set) {
    std::vector<LocalObjective> objs;
    objs.reserve(cfg.n_agents);
    if (cfg.objective_kind == "linear") {
        // Shared direction plus zero-sum per-agent spread: the network-average
        // objective is exactly the shared direction.
        CounterRng shared = CounterRng::keyed(cfg.data_seed, 0xa2);
        const Vector cbar = shared.normal_vector(cfg.dim);
        std::vector<Vector> spread(cfg.n_agents);
        Vector mean = Vector::Zero(cfg.dim);
        for (int i = 0; i < cfg.n_agents; ++i) {
            CounterRng rng = CounterRng::keyed(cfg.data_seed, 0xa3, i + 1);
            spread[i] = rng.normal_vector(cfg.dim);
            mean += spread[i];
        }
        mean /= cfg.n_agents;
        for (int i = 0; i < cfg.n_agents; ++i) {
            LocalObjective o;
            o.kind = ObjectiveKind::linear;
            o.c = cbar + 0.2 * (spread[i] - mean);
            objs.push_back(std::move(o));
        }
        return objs;
    }

    const Vector x_nat = planted_point(set, cfg.data_seed);
    for (int i = 0; i < cfg.n_agents; ++i) {
        CounterRng rng = CounterRng::keyed(cfg.data_seed, 0xa1, i + 1);
        LocalObjective o;
        o.A = Matrix(kDataRows, cfg.dim);
        for (int r = 0; r < kDataRows; ++r)
            for (int k = 0; k < cfg.dim; ++k) o.A(r, k) = rng.next_normal();
        if (cfg.objective_kind == "hinge") {
            o.kind = ObjectiveKind::hinge;
            o.b = Vector(kDataRows);
            for (int r = 0; r < kDataRows; ++r) {
                const double margin =
                    o.A.row(r).dot(x_nat) + 0.2 * rng.next_normal();
                o.b[r] = margin >= 0.0 ? 1.0 : -1.0;
            }
        } else {
            o.kind = cfg.objective_kind == "quadratic"
                         ? ObjectiveKind::quadratic
                         : ObjectiveKind::abs_regression;
            o.b = o.A * x_nat + 0.3 * rng.normal_vector(kDataRows);
        }
        objs.push_back(std::move(o));
    }
    return objs;
}

CompositeProblem build_problem(const ExperimentConfig& cfg) {
    const ProblemVariant variant = cfg.problem_variant == "problem1"
                                       ? ProblemVariant::local_reg
                                       : ProblemVariant::global_reg;
    ConstraintSet set = build_set(cfg);
    std::vector<LocalObjective> objectives = build_objectives(cfg, set);
    std::vector<Regularizer> local_regs;
    Regularizer global = Regularizer::zero();
    if (variant == ProblemVariant::local_reg)
        local_regs.assign(cfg.n_agents, build_reg(cfg.regularizer_local,
                                                  cfg.lambda1, cfg.lambda2));
    else
        global = build_reg(cfg.regularizer_global, cfg.lambda1, cfg.lambda2);
    CompositeProblem p{variant,
                       cfg.n_agents,
                       cfg.dim,
                       std::move(objectives),
                       std::move(local_regs),
                       std::move(global),
                       std::move(set)};
    p.validate();
    return p;
}

NoiseDist noise_dist_from(const std::string& token) {
    if (token == "uniform_ball") return NoiseDist::uniform_ball;
    if (token == "truncated_gaussian") return NoiseDist::truncated_gaussian;
    return NoiseDist::zero;
}

TopologyKind topology_kind_from(const std::string& token) {
    if (token == "static_ring") return TopologyKind::static_ring;
    if (token == "periodic_partition") return TopologyKind::periodic_partition;
    return TopologyKind::random_b_connected;
}

}  // namespace

LinkNoiseSampler ExperimentSetup::noise_for_trial(int trial) const {
    const std::uint64_t seed =
        mix64(resolved.noise_seed ^ mix64(resolved.master_seed + 2 * trial + 1));
    return LinkNoiseSampler(resolved.noise_nu,
                            noise_dist_from(resolved.noise_dist),
                            resolved.noise_zero_mean, seed);
}

StochasticSubgradientOracle ExperimentSetup::oracle_for_trial(int trial) const {
    StochasticSubgradientOracle o;
    o.sigma = resolved.grad_noise_sigma;
    o.bounded = resolved.grad_bounded;
    o.seed = mix64(resolved.master_seed + 2 * trial);
    return o;
}

RunConfig ExperimentSetup::run_config() const {
    RunConfig rc;
    rc.method = method;
    rc.horizon = resolved.horizon_t;
    rc.steps = steps;
    rc.decay = decay;
    if (resolved.init_override) {
        Vector v(resolved.dim);
        for (int k = 0; k < resolved.dim; ++k) v[k] = (*resolved.init_override)[k];
        rc.init_override = std::move(v);
    }
    rc.checkpoints = checkpoints;
    return rc;
}

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentConfig resolved = cfg;
    if (resolved.theta == 0.0) resolved.theta = 1.0 / resolved.n_agents;
    TopologySchedule topology(resolved.n_agents, resolved.window_b,
                              resolved.theta,
                              topology_kind_from(resolved.topology_kind),
                              resolved.topology_seed);
    NoiseDecay decay{resolved.noise_kappa2};
    MirrorMap map = build_map(resolved);
    CompositeProblem problem = build_problem(resolved);
    const Method method =
        resolved.method == "dscmd_n" ? Method::mirror_descent
                                     : Method::dual_averaging;
    StepSchedule steps{resolved.kappa1};
    std::vector<long> grid =
        checkpoint_grid(resolved.horizon_t, resolved.checkpoint_count);
    return ExperimentSetup{std::move(resolved), std::move(topology),
                           decay,               map,
                           std::move(problem),  method,
                           steps,               std::move(grid)};
}

}  // namespace noisyopt
