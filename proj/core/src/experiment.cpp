#include "noisyopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "noisyopt/prox.hpp"

namespace noisyopt {

namespace {

using nlohmann::json;

/* RFC 4180 line ending. */
constexpr const char* kCrlf = "\r\n";

double psi_gap_at_optimum(const MirrorMap& map, const ConstraintSet& set,
                          const Vector& x_star) {
    // The dual-averaging update is invariant to additive constants in the
    // prox function, so report it anchored at its minimum over the set.
    Regularizer none = Regularizer::zero();
    Vector at_min = dual_averaging_projection(map, set, none,
                                              Vector::Zero(set.dim()), 1.0, 0.0);
    double gap = map.value(map.clamp_domain(x_star)) - map.value(at_min);
    return std::max(gap, 0.0);
}

Vector initial_iterate(const ExperimentSetup& setup) {
    const RunConfig cfg = setup.run_config();
    if (cfg.init_override) return *cfg.init_override;
    if (setup.method == Method::dual_averaging) {
        Regularizer none = Regularizer::zero();
        return dual_averaging_projection(setup.map, setup.problem.set, none,
                                         Vector::Zero(setup.problem.dim), 1.0,
                                         0.0);
    }
    return setup.problem.set.center();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error("failed writing " + path.string());
}

json constants_json(const BoundConstants& c) {
    json j;
    j["n_agents"] = c.n_agents;
    j["window"] = c.window;
    j["theta"] = c.theta;
    j["big_theta"] = c.big_theta;
    j["gamma"] = c.gamma;
    j["g_f"] = c.g_f;
    j["g_chi"] = c.g_chi;
    j["g_eta"] = c.g_eta;
    j["sigma_map"] = c.sigma_map;
    j["lips_map"] = c.lips_map;
    j["nu"] = c.nu;
    j["set_diam"] = c.set_diam;
    j["bregman_diam_sq"] = c.bregman_diam_sq;
    j["init_norm"] = c.init_norm;
    j["psi_star"] = c.psi_star;
    j["surely_bounded"] = c.surely_bounded;
    j["noise_zero_mean"] = c.noise_zero_mean;
    j["c1"] = c.c1;
    j["c2"] = c.c2;
    j["c3"] = c.c3;
    j["c4"] = c.c4;
    j["c5"] = c.c5;
    j["c6"] = c.c6;
    return j;
}

std::string svg_plot(const ExperimentResult& r) {
    // Log-log plot of the mean error for agent 0 with the gap bound overlay.
    const auto& curve = r.curves[0];
    const double width = 640.0, height = 480.0;
    const double ml = 70.0, mr = 20.0, mt = 20.0, mb = 50.0;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto note = [&](double x, double y) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    };
    auto logy = [](double v) { return std::log10(std::max(v, 1e-16)); };
    for (std::size_t k = 0; k < curve.size(); ++k) {
        double lx = std::log10(static_cast<double>(curve[k].t));
        note(lx, logy(curve[k].mean));
        note(lx, logy(r.gap_bound[k]));
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    auto px = [&](double lx) {
        return ml + (lx - xmin) / (xmax - xmin) * (width - ml - mr);
    };
    auto py = [&](double ly) {
        return height - mb - (ly - ymin) / (ymax - ymin) * (height - mt - mb);
    };
    auto polyline = [&](const std::function<double(std::size_t)>& val,
                        const char* color) {
        std::ostringstream s;
        s << "  <polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < curve.size(); ++k) {
            double lx = std::log10(static_cast<double>(curve[k].t));
            s << px(lx) << ',' << py(logy(val(k))) << ' ';
        }
        s << "\"/>\n";
        return s.str();
    };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
    s << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Decade grid lines and tick labels on both axes.
    for (int d = static_cast<int>(std::ceil(xmin));
         d <= static_cast<int>(std::floor(xmax)); ++d) {
        double x = px(d);
        s << "  <line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x
          << "\" y2=\"" << height - mb << "\" stroke=\"#dddddd\"/>\n";
        s << "  <text x=\"" << x << "\" y=\"" << height - mb + 18
          << "\" font-size=\"11\" text-anchor=\"middle\">1e" << d
          << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ymin));
         d <= static_cast<int>(std::floor(ymax)); ++d) {
        double y = py(d);
        s << "  <line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\""
          << width - mr << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
        s << "  <text x=\"" << ml - 6 << "\" y=\"" << y + 4
          << "\" font-size=\"11\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    s << "  <rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
      << width - ml - mr << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << polyline([&](std::size_t k) { return r.gap_bound[k]; }, "#d62728");
    s << polyline([&](std::size_t k) { return curve[k].mean; }, "#1f77b4");
    s << "  <text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">iteration T</text>\n";
    s << "  <text x=\"16\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + height - mb) / 2 << ")\">mean error</text>\n";
    s << "  <text x=\"" << width - mr - 8 << "\" y=\"" << mt + 16
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#1f77b4\">measured"
      << "</text>\n";
    s << "  <text x=\"" << width - mr - 8 << "\" y=\"" << mt + 32
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#d62728\">bound"
      << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace

int default_jobs() {
    if (const char* env = std::getenv("NOISY_OPT_JOBS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 64L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min<unsigned>(hw, 64));
}

ExperimentResult run_experiment(ExperimentSetup setup, int jobs) {
    jobs = std::clamp(jobs, 1, 64);

    if (setup.method == Method::mirror_descent &&
        setup.map.kind() != MirrorMapKind::euclidean_half_sq_norm) {
        int bad = separate_convexity_violations(setup.map, setup.problem.set,
                                                200, setup.resolved.master_seed);
        if (bad > 0)
            throw ConfigMismatch(
                "mirror map '" + setup.resolved.mirror_map +
                "' fails the randomized separate-convexity check on set '" +
                setup.resolved.set_kind + "' (" + std::to_string(bad) +
                " of 200 triples); choose euclidean_half_sq_norm or a "
                "compatible set");
    }

    ExperimentResult result{std::move(setup), {}, {}, {}, {}, {}, {}, {}, 0, 0, 0};
    const ExperimentSetup& s = result.setup;
    const int n = s.problem.n_agents;

    result.reference = solve_reference(s.problem);

    const Vector x0 = initial_iterate(s);
    const double psi_star =
        s.method == Method::dual_averaging
            ? psi_gap_at_optimum(s.map, s.problem.set, result.reference.x_star)
            : 0.0;
    // Trial index 0 stands in for every trial: the oracle bound and the
    // noise distribution's surety flags do not depend on the seed.
    const StochasticSubgradientOracle oracle0 = s.oracle_for_trial(0);
    const LinkNoiseSampler noise0 = s.noise_for_trial(0);
    result.constants = assemble_constants(
        s.problem, s.map, s.topology, s.resolved.noise_nu, noise0.bounded(),
        s.resolved.noise_zero_mean, oracle0, s.method, x0.norm(), psi_star);

    const int trials = s.resolved.trials_m;
    result.ensemble.traces.resize(static_cast<std::size_t>(trials));
    result.ensemble.f_star = result.reference.f_star;
    result.ensemble.surely_bounded = result.constants.surely_bounded;
    result.ensemble.noise_zero_mean = s.resolved.noise_zero_mean;

    const RunConfig run_cfg = s.run_config();
    std::atomic<int> next{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;
    auto worker = [&]() {
        for (;;) {
            int trial = next.fetch_add(1);
            if (trial >= trials) return;
            try {
                LinkNoiseSampler noise = s.noise_for_trial(trial);
                StochasticSubgradientOracle oracle = s.oracle_for_trial(trial);
                result.ensemble.traces[static_cast<std::size_t>(trial)] =
                    run_trial(s.problem, s.map, s.topology, noise, oracle,
                              run_cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    {
        std::vector<std::thread> pool;
        int spawn = std::min(jobs, trials);
        pool.reserve(static_cast<std::size_t>(spawn));
        for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (const CheckpointRecord& rec : result.ensemble.traces.front().records)
        result.ensemble.grid.push_back(rec.t);
    result.ensemble.validate();

    const std::vector<long>& grid = result.ensemble.grid;
    result.gap_bound =
        s.method == Method::mirror_descent
            ? md_gap_bound_curve(result.constants, s.steps, s.decay, grid)
            : da_gap_bound_curve(result.constants, s.steps, s.decay, grid);

    const long t_max = grid.back();
    result.fit_hi = t_max;
    result.fit_lo = std::max<long>(1, t_max / 100);
    result.curves.reserve(static_cast<std::size_t>(n));
    result.disagreement.reserve(static_cast<std::size_t>(n));
    result.fits.reserve(static_cast<std::size_t>(n));
    for (int agent = 0; agent < n; ++agent) {
        result.curves.push_back(expected_error_curve(result.ensemble, agent));
        result.disagreement.push_back(
            disagreement_report(result.ensemble, agent, result.constants,
                                s.steps, s.decay, s.method));
        try {
            result.fits.push_back(
                fit_rate(result.curves.back(), result.fit_lo, result.fit_hi));
        } catch (const DegenerateFit&) {
            result.fits.push_back(std::nullopt);
        }
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (result.curves.back()[k].mean > result.gap_bound[k])
                ++result.gap_bound_violations;
    }
    return result;
}

void write_artifacts(const ExperimentResult& result, const std::string& out_dir,
                     bool plot) {
    namespace fs = std::filesystem;
    const ExperimentSetup& s = result.setup;
    const int n = s.problem.n_agents;
    const std::vector<long>& grid = result.ensemble.grid;
    fs::path root(out_dir);
    fs::create_directories(root / "trials");

    json manifest;
    manifest["config"] = json::parse(config_to_json(s.resolved));
    json derived = constants_json(result.constants);
    derived["f_star"] = result.reference.f_star;
    derived["reference_method"] = result.reference.method;
    derived["reference_cross_checked"] = result.reference.cross_checked;
    derived["reference_restart_spread"] = result.reference.restart_spread;
    derived["checkpoints"] = grid;
    manifest["derived"] = derived;
    write_text_file(root / "manifest.json", manifest.dump(2) + "\n");

    std::ostringstream curve;
    curve << "T,agent,mean_err,stderr,bound,disagreement,disagreement_bound"
          << kCrlf;
    for (std::size_t k = 0; k < grid.size(); ++k)
        for (int agent = 0; agent < n; ++agent) {
            const CurvePoint& p = result.curves[static_cast<std::size_t>(agent)][k];
            const DisagreementReport& d =
                result.disagreement[static_cast<std::size_t>(agent)];
            curve << grid[k] << ',' << agent << ',' << format_double(p.mean)
                  << ',' << format_double(p.std_error) << ','
                  << format_double(result.gap_bound[k]) << ','
                  << format_double(d.measured[k]) << ','
                  << format_double(d.bound[k]) << kCrlf;
        }
    write_text_file(root / "curve.csv", curve.str());

    for (int trial = 0; trial < result.ensemble.trials(); ++trial) {
        const RunTrace& trace =
            result.ensemble.traces[static_cast<std::size_t>(trial)];
        std::ostringstream body;
        body << "T,agent,avg_err,inst_err,min_err,step_norm,disagreement,"
                "dual_deviation"
             << kCrlf;
        for (const CheckpointRecord& rec : trace.records)
            for (int agent = 0; agent < n; ++agent) {
                auto a = static_cast<std::size_t>(agent);
                body << rec.t << ',' << agent << ','
                     << format_double(rec.avg_value[a] - result.reference.f_star)
                     << ','
                     << format_double(rec.inst_value[a] - result.reference.f_star)
                     << ','
                     << format_double(rec.min_inst_value[a] -
                                      result.reference.f_star)
                     << ',' << format_double(rec.step_norm[a]) << ','
                     << format_double(rec.disagreement[a]) << ','
                     << format_double(rec.dual_deviation.empty()
                                          ? 0.0
                                          : rec.dual_deviation[a])
                     << kCrlf;
            }
        std::ostringstream name;
        name << "trial_" << std::setfill('0') << std::setw(3) << trial
             << ".csv";
        write_text_file(root / "trials" / name.str(), body.str());
    }

    json summary;
    summary["trials"] = result.ensemble.trials();
    summary["horizon"] = grid.back();
    summary["f_star"] = result.reference.f_star;
    summary["fit_window"] = {{"lo", result.fit_lo}, {"hi", result.fit_hi}};
    json fits = json::array();
    for (int agent = 0; agent < n; ++agent) {
        const auto& f = result.fits[static_cast<std::size_t>(agent)];
        if (f) {
            fits.push_back({{"agent", agent},
                            {"slope", f->slope},
                            {"intercept", f->intercept},
                            {"r_squared", f->r_squared},
                            {"points", f->points}});
        } else {
            fits.push_back({{"agent", agent}, {"slope", nullptr}});
        }
    }
    summary["fits"] = fits;
    int disagreement_violations = 0;
    for (const DisagreementReport& d : result.disagreement)
        disagreement_violations += d.violations;
    summary["checks"] = {
        {"gap_bound_violations", result.gap_bound_violations},
        {"disagreement_violations", disagreement_violations}};
    json final_err = json::array();
    for (int agent = 0; agent < n; ++agent)
        final_err.push_back(
            result.curves[static_cast<std::size_t>(agent)].back().mean);
    summary["final_mean_err"] = final_err;
    summary["constants"] = constants_json(result.constants);
    write_text_file(root / "summary.json", summary.dump(2) + "\n");

    if (plot) write_text_file(root / "plot.svg", svg_plot(result));
}

}  // namespace noisyopt
