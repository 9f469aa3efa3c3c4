#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oploss/errors.hpp"
#include "oploss/json_io.hpp"
#include "oploss/loss.hpp"
#include "oploss/mc.hpp"
#include "oploss/orx.hpp"
#include "oploss/version.hpp"

namespace fs = std::filesystem;
using oploss::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw oploss::ValidationError("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw oploss::ValidationError("bad JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        written_.push_back(name);
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw oploss::SimulationError("cannot write " + (dir_ / name).string());
        return out;
    }

    const fs::path& path() const { return dir_; }

    /// Every run drops a manifest next to its outputs: command, config echo,
    /// input checksums and the library version. No timestamps, so reruns are
    /// byte-identical.
    void write_manifest(const std::string& command, const Json& config,
                        const Json& inputs = Json::object(), bool partial = false) {
        Json m{{"tool", "oploss"},
               {"version", oploss::kVersion},
               {"command", command},
               {"config", config},
               {"inputs", inputs},
               {"outputs", written_}};
        if (partial) m["partial"] = true;
        auto out = open("manifest.json");
        out << m.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::string> written_;
};

struct ProtocolArgs {
    std::size_t realizations = 0;  // 0 = take from config
    double years = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double dt = 0.0;
    double tw = 0.0;
};

oploss::mc::SimConfig protocol_from_json(const Json& root, const ProtocolArgs& args,
                                         double model_dt) {
    oploss::mc::SimConfig cfg;
    cfg.dt = model_dt;
    if (root.contains("protocol")) {
        const Json& p = root["protocol"];
        if (p.contains("realizations")) cfg.realizations = p["realizations"].get<std::size_t>();
        if (p.contains("years")) cfg.years = p["years"].get<double>();
        if (p.contains("seed")) cfg.seed = p["seed"].get<std::uint64_t>();
        if (p.contains("burn_in_years")) cfg.burn_in_years = p["burn_in_years"].get<double>();
        if (p.contains("init")) {
            const auto mode = p["init"].get<std::string>();
            if (mode == "zero") {
                cfg.init = oploss::mc::InitMode::zero;
            } else if (mode == "stationary") {
                cfg.init = oploss::mc::InitMode::stationary_mean;
            } else {
                throw oploss::ValidationError("protocol.init must be 'stationary' or 'zero'");
            }
        }
        if (p.contains("negative_jump_stream")) {
            cfg.negative_jump_stream = p["negative_jump_stream"].get<int>();
        }
    } else {
        cfg.realizations = 0;
    }
    if (args.realizations) cfg.realizations = args.realizations;
    if (args.years > 0.0) cfg.years = args.years;
    if (args.seed_set) cfg.seed = args.seed;
    if (cfg.realizations == 0) {
        throw oploss::ValidationError("protocol: realizations must be at least 1");
    }
    return cfg;
}

std::vector<double> tw_list(const Json& root, const ProtocolArgs& args) {
    std::vector<double> tws;
    if (args.tw > 0.0) {
        tws.push_back(args.tw);
    } else if (root.contains("tw")) {
        for (const auto& v : root["tw"]) tws.push_back(v.get<double>());
    } else {
        tws.push_back(1.0);
    }
    return tws;
}

// ---------------------------------------------------------------------------

int cmd_analytic(const fs::path& config_path, const fs::path& out_dir, const ProtocolArgs& args) {
    const Json root = read_json_file(config_path);
    const double dt = args.dt > 0.0 ? args.dt : root.value("dt", 1e-3);
    const auto tws = tw_list(root, args);

    OutputDir out(out_dir);
    auto csv = out.open("stats.csv");
    csv << "label,tw,severity_mean,severity_variance,rate_mean,rate_variance,"
           "bin_mean,bin_variance,window_mean,window_variance,window_variance_is_approx\n";
    if (root.contains("cases")) {
        for (const auto& c : root["cases"]) {
            const std::string label = c.value("label", std::string("case"));
            oploss::LossModel m{oploss::frequency_from_json(c.at("freq")),
                                oploss::severity_from_json(c.at("severity")), dt};
            oploss::validate(m);
            const auto sm = oploss::moments(m.severity);
            double rate_mean = 0.0, rate_var = 0.0;
            if (const auto* fp = std::get_if<oploss::FreqParams>(&m.freq)) {
                const auto rm = oploss::rate_moments(*fp);
                rate_mean = rm.mean;
                rate_var = rm.variance;
            } else {
                rate_mean = std::get<oploss::HomogRate>(m.freq).nu_r;
            }
            for (double tw : tws) {
                const auto st = oploss::loss_stats(m, tw);
                csv << label << ',' << fmt(tw) << ',' << fmt(sm.mean) << ',' << fmt(sm.variance)
                    << ',' << fmt(rate_mean) << ',' << fmt(rate_var) << ',' << fmt(st.bin_mean)
                    << ',' << fmt(st.bin_variance) << ',' << fmt(st.window_mean) << ','
                    << fmt(st.window_variance) << ',' << (st.window_variance_is_approx ? 1 : 0)
                    << "\n";
            }
        }
    }
    csv.close();
    out.write_manifest("analytic", root);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const fs::path& config_path, const fs::path& out_dir, const ProtocolArgs& args,
                 double max_lag, std::size_t lag_stride, bool dump) {
    const Json root = read_json_file(config_path);
    const double dt = args.dt > 0.0 ? args.dt : root.value("dt", 1e-3);
    auto cfg = protocol_from_json(root, args, dt);
    const auto tws = tw_list(root, args);

    OutputDir out(out_dir);
    oploss::mc::PathEnsemble ensemble;
    if (root.contains("severity")) {
        oploss::LossModel m{oploss::frequency_from_json(root.at("freq")),
                            oploss::severity_from_json(root.at("severity")), dt};
        ensemble = oploss::mc::simulate_losses(m, cfg);
    } else {
        ensemble = oploss::mc::simulate_rate_paths(oploss::freq_from_json(root.at("freq")), cfg);
    }

    auto mom = out.open("moments.csv");
    mom << "scope,tw,mean,variance,se_mean,se_variance,samples\n";
    const auto bin = oploss::mc::estimate_moments(ensemble);
    mom << "bin,," << fmt(bin.mean) << ',' << fmt(bin.variance) << ',' << fmt(bin.se_mean) << ','
        << fmt(bin.se_variance) << ',' << bin.samples << "\n";
    for (double tw : tws) {
        if (tw > cfg.years) continue;
        const auto q = oploss::mc::window_aggregate(ensemble, tw);
        const auto west = oploss::mc::estimate_moments(q);
        mom << "window," << fmt(tw) << ',' << fmt(west.mean) << ',' << fmt(west.variance) << ','
            << fmt(west.se_mean) << ',' << fmt(west.se_variance) << ',' << west.samples << "\n";
    }
    mom.close();

    if (max_lag > 0.0) {
        const auto ac = oploss::mc::estimate_autocov(ensemble, max_lag, lag_stride);
        auto acsv = out.open("autocov.csv");
        acsv << "lag,estimate,se\n";
        for (std::size_t i = 0; i < ac.lag.size(); ++i) {
            acsv << fmt(ac.lag[i]) << ',' << fmt(ac.value[i]) << ',' << fmt(ac.se[i]) << "\n";
        }
    }

    if (dump) {
        auto bin_out = out.open("ensemble.bin");
        const char magic[8] = {'O', 'P', 'L', 'O', 'S', 'S', 'B', '1'};
        bin_out.write(magic, 8);
        const std::uint64_t head[4] = {std::uint64_t(ensemble.kind == oploss::mc::PathKind::loss),
                                       ensemble.realizations, ensemble.bins, ensemble.seed};
        bin_out.write(reinterpret_cast<const char*>(head), sizeof head);
        const double gh[2] = {ensemble.dt, ensemble.years};
        bin_out.write(reinterpret_cast<const char*>(gh), sizeof gh);
        bin_out.write(reinterpret_cast<const char*>(ensemble.data.data()),
                      std::streamsize(ensemble.data.size() * sizeof(double)));
    }

    Json cfg_echo = root;
    cfg_echo["resolved_protocol"] = Json{{"realizations", cfg.realizations},
                                         {"years", cfg.years},
                                         {"seed", cfg.seed},
                                         {"dt", cfg.dt}};
    cfg_echo["diagnostics"] = Json{{"clipped_bins", ensemble.clipped_bins},
                                   {"floored_jumps", ensemble.floored_jumps}};
    out.write_manifest("simulate", cfg_echo);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_compare(const fs::path& config_path, const fs::path& out_dir, const ProtocolArgs& args) {
    const Json root = read_json_file(config_path);
    const double dt = args.dt > 0.0 ? args.dt : root.value("dt", 1e-3);
    auto cfg = protocol_from_json(root, args, dt);
    const auto tws = tw_list(root, args);
    const double budget_bins = root.value("budget_bins", 0.0);

    OutputDir out(out_dir);
    auto csv = out.open("compare.csv");
    csv << "label,sweep,tw,stat,analytic,mc,mc_se,ratio\n";
    auto pair_csv = out.open("pair_compare.csv");
    pair_csv << "label,tw,c,analytic_cov,mc_cov_dt,mc_se_dt,mc_cov_raw,ratio\n";

    struct ScaleSeries {
        std::vector<double> analytic, mc;
    };
    std::map<std::pair<std::string, double>, ScaleSeries> scale_series;

    double used_bins = 0.0;
    bool partial = false;
    const double per_case_bins = double(cfg.realizations) * cfg.years / cfg.dt;

    if (!root.contains("cases") || root["cases"].empty()) {
        throw oploss::ValidationError("compare: config carries no cases");
    }
    for (const auto& c : root["cases"]) {
        if (budget_bins > 0.0 && used_bins + per_case_bins > budget_bins) {
            partial = true;
            break;
        }
        const std::string label = c.value("label", std::string("case"));
        if (c.contains("pair")) {
            const auto m = oploss::pair_loss_model_from_json(c["pair"]);
            used_bins += 2.0 * per_case_bins;
            const auto res = oploss::mc::simulate_pair_window_cov(m, cfg, tws);
            for (std::size_t t = 0; t < tws.size(); ++t) {
                const double analytic = oploss::pair_cov_window(m, tws[t]);
                // The covariance formulas carry one factor of dt; the
                // estimator is reported in both raw and dt-scaled units.
                const double mc_dt = res.cov[t].cov * m.dt;
                pair_csv << label << ',' << fmt(tws[t]) << ',' << fmt(m.coupling.c) << ','
                         << fmt(analytic) << ',' << fmt(mc_dt) << ','
                         << fmt(res.cov[t].se * m.dt) << ',' << fmt(res.cov[t].cov) << ','
                         << fmt(analytic != 0.0 ? mc_dt / analytic : 0.0) << "\n";
            }
            continue;
        }
        oploss::LossModel m{oploss::frequency_from_json(c.at("freq")),
                            oploss::severity_from_json(c.at("severity")), dt};
        const std::string sweep = c.value("sweep", std::string("all"));
        used_bins += per_case_bins;
        const auto res = oploss::mc::simulate_loss_window_moments(m, cfg, tws);
        for (std::size_t t = 0; t < tws.size(); ++t) {
            const auto st = oploss::loss_stats(m, tws[t]);
            const auto emit = [&](const char* stat, double analytic, double mc, double se) {
                csv << label << ',' << sweep << ',' << fmt(tws[t]) << ',' << stat << ','
                    << fmt(analytic) << ',' << fmt(mc) << ',' << fmt(se) << ','
                    << fmt(analytic != 0.0 ? mc / analytic : 0.0) << "\n";
            };
            emit("bin_mean", st.bin_mean, res.bin.mean, res.bin.se_mean);
            emit("bin_variance", st.bin_variance, res.bin.variance, res.bin.se_variance);
            emit("window_mean", st.window_mean, res.window[t].mean, res.window[t].se_mean);
            emit("window_variance", st.window_variance, res.window[t].variance,
                 res.window[t].se_variance);
            auto& series = scale_series[{sweep, tws[t]}];
            series.analytic.push_back(st.window_variance);
            series.mc.push_back(res.window[t].variance);
        }
    }
    csv.close();
    pair_csv.close();

    auto scale_csv = out.open("scale.csv");
    scale_csv << "sweep,tw,scale,points\n";
    for (const auto& [key, series] : scale_series) {
        if (series.analytic.size() < 2) continue;
        const double s = oploss::calibrate_scale(series.analytic, series.mc);
        scale_csv << key.first << ',' << fmt(key.second) << ',' << fmt(s) << ','
                  << series.analytic.size() << "\n";
    }
    scale_csv.close();

    Json cfg_echo = root;
    cfg_echo["resolved_protocol"] =
        Json{{"realizations", cfg.realizations},
             {"years", cfg.years},
             {"seed", cfg.seed},
             {"dt", cfg.dt},
             {"init", cfg.init == oploss::mc::InitMode::zero ? "zero" : "stationary"}};
    out.write_manifest("compare", cfg_echo, Json::object(), partial);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_orx(const fs::path& fixtures, const fs::path& out_dir) {
    const auto raw = oploss::orx::load_raw(fixtures);
    const auto yearly = oploss::orx::per_institution_yearly(raw);
    const auto stats = oploss::orx::category_stats(yearly, raw);

    OutputDir out(out_dir);
    auto js = out.open("category_stats.json");
    js << oploss::to_json(stats).dump(2) << "\n";
    js.close();

    auto cov = out.open("freq_cov.csv");
    cov << "category";
    for (auto* name : oploss::orx::kCategoryNames) cov << ',' << name;
    cov << "\n";
    for (std::size_t r = 0; r < oploss::orx::kCategories; ++r) {
        cov << oploss::orx::kCategoryNames[r];
        for (std::size_t c = 0; c < oploss::orx::kCategories; ++c) {
            cov << ',' << fmt(stats.freq_cov[r][c]);
        }
        cov << "\n";
    }
    cov.close();

    for (const auto& w : stats.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    Json inputs;
    for (const char* name : {"orx_frequency.csv", "orx_severity.csv", "orx_yearly.csv"}) {
        inputs[name] = oploss::orx::fnv1a_hex(fixtures / name);
    }
    out.write_manifest("orx", Json{{"fixtures", fixtures.string()}}, inputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_fit(const fs::path& stats_path, const fs::path& out_dir, std::size_t starts,
            std::uint64_t seed, std::size_t max_evals) {
    const Json stats_json = read_json_file(stats_path);
    const auto target = oploss::fit_target_from_category_stats(stats_json);
    const auto initial = oploss::fit::lhs_starts(starts, seed);
    oploss::fit::FitOptions opts;
    if (max_evals > 0) opts.max_evals = max_evals;
    const auto result = oploss::fit::fit(target, initial, opts);

    OutputDir out(out_dir);
    auto ens = out.open("fit_ensemble.json");
    ens << oploss::to_json(result, target.tw).dump(2) << "\n";
    ens.close();

    auto mean = out.open("fit_mean.json");
    mean << oploss::to_json(result.mean_params).dump(2) << "\n";
    mean.close();

    auto fitted = out.open("fitted_stats.csv");
    fitted << "stat,target,fitted_mean\n";
    const auto& ms = result.mean_stats;
    for (std::size_t j = 0; j < oploss::fit::kCategories; ++j) {
        fitted << "mean_" << oploss::orx::kCategoryNames[j] << ',' << fmt(target.freq_mean[j])
               << ',' << fmt(ms.mean[j]) << "\n";
    }
    for (std::size_t j = 0; j < oploss::fit::kCategories; ++j) {
        fitted << "var_" << oploss::orx::kCategoryNames[j] << ',' << fmt(target.freq_var[j])
               << ',' << fmt(ms.variance[j]) << "\n";
    }
    for (std::size_t i = 0; i < oploss::fit::kPairs; ++i) {
        const auto [j, k] = oploss::fit::pair_members(i);
        fitted << "cov_" << oploss::orx::kCategoryNames[j] << '_'
               << oploss::orx::kCategoryNames[k] << ',' << fmt(target.freq_cov[i]) << ','
               << fmt(ms.cov[i]) << "\n";
    }
    fitted.close();

    Json inputs{{stats_path.filename().string(), oploss::orx::fnv1a_hex(stats_path)}};
    out.write_manifest("fit",
                       Json{{"stats", stats_path.string()},
                            {"starts", starts},
                            {"seed", seed},
                            {"max_evals", opts.max_evals},
                            {"converged", result.converged},
                            {"best_objective", result.starts[result.best].objective}},
                       inputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------

std::vector<double> tw_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw oploss::ValidationError("sweep: need 0 < tw-min < tw-max and tw-count >= 2");
    }
    std::vector<double> grid(count);
    const double step = std::log(hi / lo) / double(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(double(i) * step);
    return grid;
}

int cmd_sweep(const fs::path& fit_path, const fs::path& stats_path, const fs::path& out_dir,
              double lo, double hi, std::size_t count, double dt) {
    const auto params = oploss::params_from_json(read_json_file(fit_path));
    const auto target = oploss::fit_target_from_category_stats(read_json_file(stats_path));
    const auto grid = tw_grid(lo, hi, count);
    const auto curves = oploss::fit::sweep_cov_q(params, target.severity_mean, grid, dt);

    OutputDir out(out_dir);
    auto csv = out.open("sweep.csv");
    csv << "pair,j,k,tw,cov\n";
    for (const auto& curve : curves) {
        const std::string pair_name = std::string(oploss::orx::kCategoryNames[curve.j]) + "-" +
                                      oploss::orx::kCategoryNames[curve.k];
        for (std::size_t t = 0; t < grid.size(); ++t) {
            csv << pair_name << ',' << curve.j << ',' << curve.k << ',' << fmt(grid[t]) << ','
                << fmt(curve.value[t]) << "\n";
        }
    }
    csv.close();

    Json inputs{{fit_path.filename().string(), oploss::orx::fnv1a_hex(fit_path)},
                {stats_path.filename().string(), oploss::orx::fnv1a_hex(stats_path)}};
    out.write_manifest("sweep",
                       Json{{"fit", fit_path.string()},
                            {"stats", stats_path.string()},
                            {"tw_min", lo},
                            {"tw_max", hi},
                            {"tw_count", count},
                            {"dt", dt}},
                       inputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_rank(const fs::path& sweep_path, double tw, const fs::path& out_dir) {
    std::ifstream in(sweep_path);
    if (!in) throw oploss::ValidationError("cannot open " + sweep_path.string());
    std::string line;
    std::getline(in, line);  // header
    struct Row {
        std::string pair;
        double cov;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string pair, j, k, tw_s, cov_s;
        std::getline(ss, pair, ',');
        std::getline(ss, j, ',');
        std::getline(ss, k, ',');
        std::getline(ss, tw_s, ',');
        std::getline(ss, cov_s, ',');
        if (cov_s.empty()) continue;
        const double row_tw = std::stod(tw_s);
        if (std::fabs(row_tw - tw) <= 1e-9 * std::max(1.0, tw)) {
            rows.push_back({pair, std::stod(cov_s)});
        }
    }
    if (rows.empty()) {
        throw oploss::ValidationError("rank: no sweep rows at tw=" + fmt(tw));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (std::fabs(a.cov) != std::fabs(b.cov)) return std::fabs(a.cov) > std::fabs(b.cov);
        return a.pair < b.pair;
    });

    OutputDir out(out_dir);
    auto csv = out.open("rank.csv");
    csv << "rank,pair,cov\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << (i + 1) << ',' << rows[i].pair << ',' << fmt(rows[i].cov) << "\n";
        std::printf("%2zu  %-12s %s\n", i + 1, rows[i].pair.c_str(), fmt(rows[i].cov).c_str());
    }
    csv.close();
    Json inputs{{sweep_path.filename().string(), oploss::orx::fnv1a_hex(sweep_path)}};
    out.write_manifest("rank", Json{{"sweep", sweep_path.string()}, {"tw", tw}}, inputs);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loss-process statistics: closed forms, Monte Carlo validation, "
                 "consortium calibration"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", fixtures, stats_file, fit_file, sweep_file;
    ProtocolArgs proto;
    double max_lag = 0.0, tw_min = 1.0 / 365.0, tw_max = 2.0, dt_sweep = 1e-3, rank_tw = 1.0;
    std::size_t lag_stride = 1, starts = 100, tw_count = 12, max_evals = 5000;
    std::uint64_t fit_seed = 1;
    bool dump = false;

    auto add_proto = [&](CLI::App* sub) {
        sub->add_option("--realizations", proto.realizations, "override realization count");
        sub->add_option("--years", proto.years, "override horizon (years)");
        auto* s = sub->add_option("--seed", proto.seed, "override base seed");
        s->each([&](const std::string&) { proto.seed_set = true; });
        sub->add_option("--dt", proto.dt, "override grid step (years)");
        sub->add_option("--tw", proto.tw, "single window length (years)");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* analytic = app.add_subcommand("analytic", "closed-form statistics for model cases");
    analytic->add_option("--config", config, "JSON config")->required();
    add_proto(analytic);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths and estimators");
    simulate->add_option("--config", config, "JSON config")->required();
    add_proto(simulate);
    simulate->add_option("--max-lag", max_lag, "autocovariance range (years)");
    simulate->add_option("--lag-stride", lag_stride, "lag grid stride (bins)");
    simulate->add_flag("--dump", dump, "write the raw ensemble (versioned binary)");

    auto* compare = app.add_subcommand("compare", "analytic vs Monte Carlo with scale factors");
    compare->add_option("--config", config, "JSON config")->required();
    add_proto(compare);

    auto* orx = app.add_subcommand("orx", "consortium tables to category statistics");
    orx->add_option("--fixtures", fixtures, "fixture directory")->required();
    orx->add_option("--out", out_dir, "output directory");

    auto* fit = app.add_subcommand("fit", "multistart frequency calibration");
    fit->add_option("--stats", stats_file, "category_stats.json")->required();
    fit->add_option("--starts", starts, "number of Latin hypercube starts");
    fit->add_option("--seed", fit_seed, "design seed");
    fit->add_option("--max-evals", max_evals, "objective evaluation cap per start");
    fit->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "pair covariance across time windows");
    sweep->add_option("--fit", fit_file, "fit_mean.json")->required();
    sweep->add_option("--stats", stats_file, "category_stats.json")->required();
    sweep->add_option("--tw-min", tw_min, "smallest window (years)");
    sweep->add_option("--tw-max", tw_max, "largest window (years)");
    sweep->add_option("--tw-count", tw_count, "grid size (log-spaced)");
    sweep->add_option("--dt", dt_sweep, "grid step entering the covariance formula");
    sweep->add_option("--out", out_dir, "output directory");

    auto* rank = app.add_subcommand("rank", "order pairs by |covariance| at one window");
    rank->add_option("--sweep", sweep_file, "sweep.csv from the sweep command")->required();
    rank->add_option("--tw", rank_tw, "window to rank at (years)");
    rank->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analytic) return cmd_analytic(config, out_dir, proto);
        if (*simulate) return cmd_simulate(config, out_dir, proto, max_lag, lag_stride, dump);
        if (*compare) return cmd_compare(config, out_dir, proto);
        if (*orx) return cmd_orx(fixtures, out_dir);
        if (*fit) return cmd_fit(stats_file, out_dir, starts, fit_seed, max_evals);
        if (*sweep) {
            return cmd_sweep(fit_file, stats_file, out_dir, tw_min, tw_max, tw_count, dt_sweep);
        }
        if (*rank) return cmd_rank(sweep_file, rank_tw, out_dir);
    } catch (const oploss::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
