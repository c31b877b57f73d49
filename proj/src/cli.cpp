#include "acbench/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "acbench/analysis.hpp"
#include "acbench/envs.hpp"
#include "acbench/offline.hpp"

namespace acbench {

namespace fs = std::filesystem;

namespace {

// Runtime failures (IO, numerics) as opposed to config errors.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

OfflineDataset build_offline(const nlohmann::json& doc, const Environment& env) {
  if (doc.contains("file")) {
    OfflineDataset d = load_offline(doc.at("file").get<std::string>(), env.mdp.horizon());
    validate_offline(d, env.mdp);
    return d;
  }
  return generate_offline(env.mdp, offline_spec_from_json(doc));
}

struct Job {
  Algo algo;
  std::uint64_t seed;
};

fs::path run_dir(const fs::path& root, const Job& job) {
  return root / to_string(job.algo) / ("seed-" + std::to_string(job.seed));
}

void emit_run(const RunConfig& cfg, const RunResult& run, const Environment& env,
              const fs::path& dir) {
  fs::create_directories(dir);
  if (cfg.emit_csv) {
    std::ostringstream csv;
    write_episodes_csv(run, csv);
    write_file(dir / "episodes.csv", csv.str());
  }
  if (cfg.emit_json) write_file(dir / "summary.json", run_summary(run, env).dump(2) + "\n");
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig cfg;
  cfg.env = doc.value("env", nlohmann::json::object());
  if (cfg.env.is_string()) cfg.env = nlohmann::json{{"preset", cfg.env.get<std::string>()}};
  if (!cfg.env.contains("preset") && !cfg.env.contains("file") && !cfg.env.contains("kind"))
    throw std::invalid_argument("config: env needs a preset, a kind or a file");
  const nlohmann::json algo = doc.value("algo", nlohmann::json::object());
  if (algo.is_string()) {
    cfg.algo = algo_config_from_json(nlohmann::json{{"algo", algo.get<std::string>()}});
  } else {
    cfg.algo = algo_config_from_json(algo);
  }
  if (doc.contains("snapshot_every")) cfg.algo.snapshot_every = doc.at("snapshot_every").get<int>();
  if (cfg.algo.snapshot_every < 1) throw std::invalid_argument("config: snapshot_every must be >= 1");
  if (doc.contains("algos")) {
    for (const auto& a : doc.at("algos")) cfg.algos.push_back(algo_from_string(a.get<std::string>()));
  } else {
    cfg.algos.push_back(cfg.algo.algo);
  }
  if (cfg.algos.empty()) throw std::invalid_argument("config: algos must not be empty");
  if (doc.contains("seeds")) {
    for (const auto& s : doc.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must not be empty");
  } else {
    cfg.seeds.push_back(cfg.algo.seed);
  }
  if (doc.contains("offline")) cfg.offline = doc.at("offline");
  cfg.output = doc.value("output", cfg.output);
  if (doc.contains("emit")) {
    const auto& e = doc.at("emit");
    cfg.emit_csv = e.value("csv", cfg.emit_csv);
    cfg.emit_json = e.value("json", cfg.emit_json);
    cfg.emit_svg = e.value("svg", cfg.emit_svg);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return run_config_from_json(doc);
}

std::string resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("ACBENCH_OUT"); env && *env) return env;
  return cfg.output;
}

int resolve_jobs() {
  if (const char* env = std::getenv("ACBENCH_JOBS"); env && *env) {
    const int n = std::atoi(env);
    if (n < 1) throw std::invalid_argument("ACBENCH_JOBS must be a positive integer");
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_episodes_csv(const RunResult& run, std::ostream& out) {
  out << "t,reward,regret,cum_regret,switch,cum_switches,reset\n";
  for (const auto& r : run.records) {
    out << r.t << ',' << format_double(r.reward) << ',' << format_double(r.regret) << ','
        << format_double(r.cum_regret) << ',' << (r.switched ? 1 : 0) << ',' << r.cum_switches
        << ',' << (r.reset ? 1 : 0) << '\n';
  }
}

nlohmann::json run_summary(const RunResult& run, const Environment& env) {
  std::vector<double> cum;
  cum.reserve(run.records.size());
  for (const auto& r : run.records) cum.push_back(r.cum_regret);
  const int T = static_cast<int>(cum.size());

  nlohmann::json s;
  s["algo"] = to_string(run.algo);
  s["env"] = run.env_name;
  s["seed"] = run.config.seed;
  s["episodes"] = T;
  s["v_star"] = run.v_star;
  s["v_uniform"] = run.v_uniform;
  s["final_regret"] = run.final_regret();
  s["uniform_baseline_regret"] = T * (run.v_star - run.v_uniform);
  s["eta"] = run.eta;
  s["beta"] = run.beta;
  s["bonus"] = run.bonus;
  s["switch_rule"] = to_string(run.switch_rule);
  s["switches"] = run.switches();
  s["switch_statistic"] = switch_curve(run.records).log_growth;
  s["refits"] = run.refits;
  s["resets"] = run.resets;
  if (T > 0) {
    const ExponentFit fit = exponent_fit(cum);
    s["exponent"] = {{"slope", json_number(fit.slope)},
                     {"intercept", json_number(fit.intercept)},
                     {"window", {T / 10 + 1, T}},
                     {"flagged", fit.flagged}};
  }
  if (run.bonus > 0.0 && !run.snapshots.empty())
    s["optimism_violation_rate"] = optimism_violation_rate(run.snapshots, env.mdp);
  return s;
}

int cmd_run(const std::string& config_path, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig cfg = load_run_config(config_path);
    const Environment env = environment_from_config(cfg.env);
    AlgoConfig algo = cfg.algo;
    algo.algo = cfg.algos.front();
    algo.seed = cfg.seeds.front();
    std::optional<OfflineDataset> offline;
    if (cfg.offline && needs_offline(algo.algo)) offline = build_offline(*cfg.offline, env);
    const RunResult run = run_algorithm(env, algo, offline ? &*offline : nullptr);
    const fs::path dir = resolve_output_dir(cfg);
    emit_run(cfg, run, env, dir);
    log << to_string(run.algo) << " on " << env.name << ": final regret "
        << format_double(run.final_regret()) << ", switches " << run.switches() << " -> "
        << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const std::string& config_path, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig cfg = load_run_config(config_path);
    const Environment env = environment_from_config(cfg.env);
    std::optional<OfflineDataset> offline;
    bool any_hybrid = false;
    for (Algo a : cfg.algos) any_hybrid = any_hybrid || needs_offline(a);
    if (cfg.offline && any_hybrid) offline = build_offline(*cfg.offline, env);
    const fs::path root = resolve_output_dir(cfg);
    fs::create_directories(root);

    std::vector<Job> jobs;
    for (Algo a : cfg.algos)
      for (std::uint64_t seed : cfg.seeds) jobs.push_back({a, seed});
    std::vector<std::optional<RunResult>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          AlgoConfig algo = cfg.algo;
          algo.algo = jobs[i].algo;
          algo.seed = jobs[i].seed;
          RunResult run = run_algorithm(env, algo, offline ? &*offline : nullptr);
          emit_run(cfg, run, env, run_dir(root, jobs[i]));
          results[i] = std::move(run);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    const int n_threads = std::min<int>(resolve_jobs(), static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::size_t ok = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (results[i]) {
        ++ok;
      } else {
        log << "warning: " << to_string(jobs[i].algo) << " seed " << jobs[i].seed
            << " failed: " << errors[i] << '\n';
      }
    }
    if (ok == 0) throw RuntimeFailure("every run in the sweep failed");

    std::ostringstream agg;
    agg << "algo,t,mean_cum_regret,lo_cum_regret,hi_cum_regret,mean_reward,lo_reward,hi_reward,"
           "mean_cum_switches,lo_cum_switches,hi_cum_switches\n";
    nlohmann::json summary;
    summary["env"] = env.name;
    summary["seeds"] = cfg.seeds;
    summary["succeeded"] = ok;
    summary["failed"] = jobs.size() - ok;
    for (Algo a : cfg.algos) {
      std::vector<std::vector<double>> regret, reward, switches;
      double v_star = 0.0, v_uniform = 0.0;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].algo != a || !results[i]) continue;
        std::vector<double> c, r, s;
        for (const auto& e : results[i]->records) {
          c.push_back(e.cum_regret);
          r.push_back(e.reward);
          s.push_back(e.cum_switches);
        }
        regret.push_back(std::move(c));
        reward.push_back(std::move(r));
        switches.push_back(std::move(s));
        v_star = results[i]->v_star;
        v_uniform = results[i]->v_uniform;
      }
      if (regret.empty()) continue;
      const Band br = aggregate_series(regret), bw = aggregate_series(reward),
                 bs = aggregate_series(switches);
      for (std::size_t t = 0; t < br.mean.size(); ++t) {
        agg << to_string(a) << ',' << t + 1 << ',' << format_double(br.mean[t]) << ','
            << format_double(br.lo[t]) << ',' << format_double(br.hi[t]) << ','
            << format_double(bw.mean[t]) << ',' << format_double(bw.lo[t]) << ','
            << format_double(bw.hi[t]) << ',' << format_double(bs.mean[t]) << ','
            << format_double(bs.lo[t]) << ',' << format_double(bs.hi[t]) << '\n';
      }
      const ExponentFit fit = exponent_fit(br.mean);
      const double T = static_cast<double>(br.mean.size());
      summary["algos"][to_string(a)] = {
          {"runs", regret.size()},
          {"mean_final_regret", br.mean.back()},
          {"uniform_baseline_regret", T * (v_star - v_uniform)},
          {"exponent", json_number(fit.slope)},
          {"exponent_flagged", fit.flagged},
          {"mean_final_switches", bs.mean.back()}};
    }
    // Ordering by mean final regret, best first.
    std::vector<std::pair<double, std::string>> order;
    for (auto& [name, s] : summary["algos"].items())
      order.emplace_back(s["mean_final_regret"].get<double>(), name);
    std::sort(order.begin(), order.end());
    for (const auto& [_, name] : order) summary["ordering"].push_back(name);

    write_file(root / "aggregate.csv", agg.str());
    write_file(root / "summary.json", summary.dump(2) + "\n");
    if (cfg.emit_svg) {
      std::ostringstream sink;
      cmd_plot((root / "aggregate.csv").string(), "regret", true, (root / "regret.svg").string(),
               sink);
    }
    log << "sweep: " << ok << "/" << jobs.size() << " runs succeeded -> " << root.string() << '\n';
    return kExitOk;
  });
}

int cmd_plot(const std::string& input_csv, const std::string& kind, bool loglog,
             const std::string& output_svg, std::ostream& log) {
  return guarded(log, [&] {
    int column;
    std::string y_label;
    if (kind == "regret") {
      column = 2;
      y_label = "cumulative regret";
    } else if (kind == "reward") {
      column = 5;
      y_label = "episode return";
    } else if (kind == "switches") {
      column = 8;
      y_label = "cumulative switches";
    } else {
      throw std::invalid_argument("plot kind must be regret, reward or switches");
    }
    std::ifstream in(input_csv);
    if (!in) throw RuntimeFailure("cannot open " + input_csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("algo,t,", 0) != 0)
      throw std::invalid_argument("plot: " + input_csv + " is not an aggregate.csv");
    std::vector<PlotSeries> series;
    std::map<std::string, std::size_t> index;
    int row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      if (cells.size() != 11) throw std::invalid_argument("plot: malformed row " + std::to_string(row));
      auto [it, fresh] = index.try_emplace(cells[0], series.size());
      if (fresh) series.push_back({cells[0], {}, {}, {}, {}});
      PlotSeries& p = series[it->second];
      try {
        p.t.push_back(std::stod(cells[1]));
        p.mean.push_back(std::stod(cells[column]));
        p.lo.push_back(std::stod(cells[column + 1]));
        p.hi.push_back(std::stod(cells[column + 2]));
      } catch (const std::exception&) {
        throw std::invalid_argument("plot: malformed number on row " + std::to_string(row));
      }
    }
    if (series.empty()) throw std::invalid_argument("plot: no data rows in " + input_csv);
    PlotOptions opt;
    opt.title = y_label + " vs episode";
    opt.y_label = y_label;
    opt.loglog = loglog;
    opt.annotate_slope = loglog && kind == "regret";
    const fs::path out(output_svg);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file(out, render_svg(series, opt));
    log << "wrote " << output_svg << '\n';
    return kExitOk;
  });
}

int cmd_gen_offline(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig cfg = load_run_config(config_path);
    const Environment env = environment_from_config(cfg.env);
    const OfflineDataset d =
        generate_offline(env.mdp, offline_spec_from_json(cfg.offline.value_or(nlohmann::json::object())));
    save_offline(d, out_dir);
    const ConcentrabilityReport c = estimate_concentrability(d, env.mdp);
    nlohmann::json report;
    report["ratio"] = json_number(c.ratio);
    report["unbounded"] = std::isinf(c.ratio);
    report["method"] = c.method;
    for (double r : c.per_step) report["per_step"].push_back(json_number(r));
    write_file(fs::path(out_dir) / "concentrability.json", report.dump(2) + "\n");
    log << "offline: " << d.n_samples() << " transitions (" << d.n_episodes << " episodes), "
        << "occupancy ratio " << format_double(c.ratio) << " -> " << out_dir << '\n';
    return kExitOk;
  });
}

}  // namespace acbench
