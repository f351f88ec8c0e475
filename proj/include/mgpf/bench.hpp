#pragma once
// Experiment harness: repeated trials per (planner, scenario), aggregated
// metrics, an RRT*-based reference solution per scenario, and SVG output.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mgpf/config.hpp"
#include "mgpf/graph.hpp"
#include "mgpf/gridmap.hpp"
#include "mgpf/heuristic.hpp"
#include "mgpf/mgpf.hpp"
#include "mgpf/rrt.hpp"

namespace mgpf {

struct PlannerSpec {
  std::string name;
  ProviderKind provider = ProviderKind::oracle;
  PlannerConfig config;
  std::filesystem::path masks_dir;  // files provider only
};

struct BenchScenario {
  std::string name;
  std::optional<Scenario> scenario;  // empty when loading failed
  std::string error;
};

struct BenchSpec {
  std::vector<BenchScenario> scenarios;
  std::vector<PlannerSpec> planners;
  std::size_t trials = 100;
  std::size_t budget = 2000;
  std::uint64_t seed = 1;
  bool reference = true;
  std::size_t reference_factor = 10;  // RRT* budget multiplier
  unsigned threads = 0;               // 0: hardware concurrency

  void validate() const {
    if (trials < 1) throw Error("bench spec: trials must be >= 1");
    if (budget < 1) throw Error("bench spec: budget must be >= 1");
    for (std::size_t i = 0; i < planners.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (planners[i].name == planners[j].name) throw Error("bench spec: duplicate planner name " + planners[i].name);
      }
    }
  }
};

struct TrialRecord {
  std::string planner;
  std::string scenario;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool success = false;  // planner success AND validation passed
  bool valid = false;
  double length = 0.0;
  std::size_t samples = 0;
  std::vector<std::size_t> samples_per_leg;
  std::vector<std::size_t> order;
  double time = 0.0;
};

/// Time and length statistics cover successful trials only; sample
/// statistics cover every trial.
struct MetricsRow {
  std::string planner;
  std::string scenario;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;  // percent
  double mean_time = 0.0;
  double median_time = 0.0;
  double mean_length = 0.0;
  double median_length = 0.0;
  double mean_samples = 0.0;
  double median_samples = 0.0;
  double prior_time = 0.0;
  std::string error;
};

struct BenchResult {
  std::vector<MetricsRow> rows;
  std::vector<TrialRecord> raw;
  std::map<std::string, PlanResult> references;  // by scenario name
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs job(i) for i in [0, n) on a small worker pool.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// All-pairs RRT* legs, an exact (or 2-opt) tour over their lengths, and the
/// corresponding RRT* paths as legs.
inline PlanResult optimal_reference(const Scenario& scenario, const RrtParams& params, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = scenario.vertex_count();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<PlanOutcome> outcomes(pairs.size());
  detail::parallel_for(pairs.size(), threads, [&](std::size_t k) {
    RrtParams p = params;
    p.seed = derive_seed(params.seed, k);
    outcomes[k] = rrt_star_plan(scenario.map, scenario.vertex(pairs[k].first), scenario.vertex(pairs[k].second), p);
    outcomes[k].tree = Tree{};
  });

  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::size_t>> pair_of(n, std::vector<std::size_t>(n, 0));
  std::size_t total_samples = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    if (!outcomes[k].success) {
      throw Error("unreachable pair (" + std::to_string(i) + "," + std::to_string(j) + ") for the reference planner");
    }
    w[i][j] = w[j][i] = path_cost(outcomes[k].path);
    pair_of[i][j] = pair_of[j][i] = k;
    total_samples += outcomes[k].samples;
  }
  const WeightedGraph graph(scenario.vertices(), w);

  PlanResult r;
  r.provider = "rrt_star";
  r.order = solve_tsp(graph, params.seed);
  r.success = true;
  for (std::size_t k = 0; k + 1 < r.order.sequence.size(); ++k) {
    const std::size_t a = r.order.sequence[k];
    const std::size_t b = r.order.sequence[k + 1];
    std::vector<State> leg = outcomes[pair_of[a][b]].path;
    if (a > b) std::reverse(leg.begin(), leg.end());
    r.total_length += path_cost(leg);
    r.legs.push_back(std::move(leg));
    r.samples_per_leg.push_back(outcomes[pair_of[a][b]].samples);
  }
  (void)total_samples;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline BenchResult run_bench(const BenchSpec& spec) {
  spec.validate();
  BenchResult out;
  for (const auto& bs : spec.scenarios) {
    for (const auto& planner : spec.planners) {
      MetricsRow row;
      row.planner = planner.name;
      row.scenario = bs.name;
      row.trials = spec.trials;
      if (!bs.scenario) {
        row.error = bs.error;
        out.rows.push_back(row);
        continue;
      }
      const Scenario& sc = *bs.scenario;
      WeightedGraph graph;
      try {
        auto provider = make_provider(planner.provider, planner.config.oracle, planner.masks_dir);
        const auto t0 = std::chrono::steady_clock::now();
        graph = build_graph(sc, *provider);
        row.prior_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } catch (const std::exception& e) {
        row.error = e.what();
        out.rows.push_back(row);
        continue;
      }

      std::vector<TrialRecord> records(spec.trials);
      detail::parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
        PlannerConfig cfg = planner.config;
        cfg.rrt.max_samples = spec.budget;
        cfg.set_seed(spec.seed + t);
        PlanResult r = plan_with_graph(sc, graph, cfg.sampler, cfg.rrt);
        TrialRecord& rec = records[t];
        rec.planner = planner.name;
        rec.scenario = bs.name;
        rec.trial = t;
        rec.seed = spec.seed + t;
        rec.valid = r.success && validate_solution(sc, r).ok();
        rec.success = rec.valid;
        rec.length = r.total_length;
        rec.samples = r.total_samples();
        rec.samples_per_leg = r.samples_per_leg;
        rec.order = r.order.sequence;
        rec.time = r.wall_time;
      });

      std::vector<double> times, lengths, samples;
      for (const auto& rec : records) {
        samples.push_back(static_cast<double>(rec.samples));
        if (!rec.success) continue;
        ++row.successes;
        times.push_back(rec.time);
        lengths.push_back(rec.length);
      }
      row.success_rate = 100.0 * static_cast<double>(row.successes) / static_cast<double>(spec.trials);
      row.mean_time = detail::mean_of(times);
      row.median_time = detail::median_of(times);
      row.mean_length = detail::mean_of(lengths);
      row.median_length = detail::median_of(lengths);
      row.mean_samples = detail::mean_of(samples);
      row.median_samples = detail::median_of(samples);
      out.rows.push_back(row);
      out.raw.insert(out.raw.end(), records.begin(), records.end());
    }

    if (spec.reference) {
      MetricsRow row;
      row.planner = "optimal";
      row.scenario = bs.name;
      row.trials = 1;
      if (!bs.scenario) {
        row.error = bs.error;
      } else {
        try {
          RrtParams p = PlannerConfig{}.rrt;
          if (!spec.planners.empty()) p = spec.planners.front().config.rrt;
          p.max_samples = spec.budget * spec.reference_factor;
          p.seed = spec.seed;
          PlanResult ref = optimal_reference(*bs.scenario, p, spec.threads);
          row.successes = 1;
          row.success_rate = 100.0;
          row.mean_time = row.median_time = ref.wall_time;
          row.mean_length = row.median_length = ref.total_length;
          row.mean_samples = row.median_samples = static_cast<double>(ref.total_samples());
          out.references.emplace(bs.name, std::move(ref));
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

/// Deterministic columns only; wall-clock figures go to timing_csv.
inline std::string results_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "planner,scenario,trials,successes,success_rate,mean_length,median_length,"
        "mean_samples_per_trial_total,median_samples_per_trial_total,error\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.2f,%.6f,%.6f,%.3f,%.1f,", r.trials, r.successes, r.success_rate,
                  r.mean_length, r.median_length, r.mean_samples, r.median_samples);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.planner << ',' << r.scenario << ',' << buf << err << '\n';
  }
  return os.str();
}

inline std::string timing_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "planner,scenario,mean_time_s,median_time_s,prior_time_s\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.mean_time, r.median_time, r.prior_time);
    os << r.planner << ',' << r.scenario << ',' << buf << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const TrialRecord& r) {
  return {{"planner", r.planner}, {"scenario", r.scenario}, {"trial", r.trial},   {"seed", r.seed},
          {"success", r.success}, {"valid", r.valid},       {"length", r.length}, {"samples", r.samples},
          {"samples_per_leg", r.samples_per_leg},           {"order", r.order},   {"time", r.time}};
}

// ---------------------------------------------------------------------------
// SVG output

namespace detail {

/// One <rect> per horizontal run of set cells.
inline void svg_runs(std::ostream& os, int width, int height, const std::function<bool(int, int)>& set) {
  for (int r = 0; r < height; ++r) {
    int c = 0;
    while (c < width) {
      if (!set(r, c)) {
        ++c;
        continue;
      }
      const int start = c;
      while (c < width && set(r, c)) ++c;
      os << "<rect x=\"" << start << "\" y=\"" << r << "\" width=\"" << (c - start) << "\" height=\"1\"/>";
    }
  }
  os << '\n';
}

}  // namespace detail

/// SVG of the map, optional region/guideline overlays, the closed path as a
/// single polyline, and numbered vertices. `priors` may be null.
inline std::string render_svg(const Scenario& scenario, const PlanResult& result, const WeightedGraph* priors,
                              double scale = 3.0) {
  const GridMap& map = scenario.map;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << map.width() * scale << "\" height=\""
     << map.height() * scale << "\" viewBox=\"0 0 " << map.width() << ' ' << map.height() << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << map.width() << "\" height=\"" << map.height() << "\" fill=\"white\"/>\n";
  os << "<g id=\"obstacles\" fill=\"black\">";
  detail::svg_runs(os, map.width(), map.height(), [&](int r, int c) { return map.occupied(r, c); });
  os << "</g>\n";

  if (priors && priors->has_priors() && result.order.sequence.size() > 1) {
    std::vector<std::uint8_t> region(map.cell_count(), 0), guide(map.cell_count(), 0);
    bool any = false;
    for (std::size_t k = 0; k + 1 < result.order.sequence.size(); ++k) {
      const auto& pk = priors->prior(result.order.sequence[k], result.order.sequence[k + 1]);
      for (auto i : pk.region.set_cells()) region[i] = 1, any = true;
      for (auto i : pk.guideline.set_cells()) guide[i] = 1, any = true;
    }
    if (any) {
      const int w = map.width();
      os << "<g id=\"region-overlay\" fill=\"rgb(200,0,0)\" fill-opacity=\"0.25\">";
      detail::svg_runs(os, w, map.height(), [&](int r, int c) { return region[static_cast<std::size_t>(r) * w + c] != 0; });
      os << "</g>\n<g id=\"guideline-overlay\" fill=\"rgb(255,40,40)\" fill-opacity=\"0.8\">";
      detail::svg_runs(os, w, map.height(), [&](int r, int c) { return guide[static_cast<std::size_t>(r) * w + c] != 0; });
      os << "</g>\n";
    }
  }

  std::vector<State> path;
  for (const auto& leg : result.legs) {
    for (std::size_t i = (path.empty() ? 0 : 1); i < leg.size(); ++i) path.push_back(leg[i]);
  }
  if (!path.empty()) {
    os << "<polyline fill=\"none\" stroke=\"rgb(0,90,255)\" stroke-width=\"1\" points=\"";
    char buf[64];
    for (const auto& s : path) {
      std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", s.x, s.y);
      os << buf;
    }
    os << "\"/>\n";
  }

  const auto vertices = scenario.vertices();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    os << "<circle cx=\"" << vertices[i].x << "\" cy=\"" << vertices[i].y << "\" r=\"2.5\" fill=\""
       << (i == 0 ? "red" : "blue") << "\"/>"
       << "<text x=\"" << vertices[i].x + 3 << "\" y=\"" << vertices[i].y - 3
       << "\" font-size=\"8\" fill=\"black\">" << i << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void render(const Scenario& scenario, const PlanResult& result, const std::filesystem::path& out,
                   const WeightedGraph* priors = nullptr) {
  if (result.legs.empty()) throw Error("render: result has no legs");
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out.string());
  f << render_svg(scenario, result, priors);
}

/// Time-vs-length scatter of successful trials, one colour per planner.
inline std::string scatter_svg(const std::string& scenario, const std::vector<TrialRecord>& raw) {
  static const char* colours[] = {"red", "black", "blue", "green", "orange", "purple"};
  std::vector<std::string> planners;
  double tmax = 1e-9, lmax = 1e-9;
  for (const auto& r : raw) {
    if (r.scenario != scenario || !r.success) continue;
    if (std::find(planners.begin(), planners.end(), r.planner) == planners.end()) planners.push_back(r.planner);
    tmax = std::max(tmax, r.time);
    lmax = std::max(lmax, r.length);
  }
  const double W = 400, H = 300, pad = 40;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 2 * pad << "\" height=\"" << H + 2 * pad << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad + H << "\" x2=\"" << pad + W << "\" y2=\"" << pad + H
     << "\" stroke=\"black\"/><line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << pad + H
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << pad + W / 2 << "\" y=\"" << H + 2 * pad - 8 << "\" font-size=\"12\">time (s), max "
     << tmax << "</text>\n";
  os << "<text x=\"4\" y=\"" << pad - 10 << "\" font-size=\"12\">path length, max " << lmax << " (" << scenario
     << ")</text>\n";
  for (std::size_t p = 0; p < planners.size(); ++p) {
    const char* col = colours[p % std::size(colours)];
    os << "<text x=\"" << pad + W - 120 << "\" y=\"" << pad + 14 * (p + 1) << "\" font-size=\"12\" fill=\"" << col
       << "\">" << planners[p] << "</text>\n";
    for (const auto& r : raw) {
      if (r.scenario != scenario || !r.success || r.planner != planners[p]) continue;
      os << "<circle cx=\"" << pad + W * r.time / tmax << "\" cy=\"" << pad + H - H * r.length / lmax
         << "\" r=\"2\" fill=\"" << col << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

/// Bench spec JSON:
/// {"scenarios": [<scenario.json relative to the spec>...],
///  "planners": [{"name": ..., "provider": "oracle|files|euclidean", "masks": <dir>, <PlannerConfig keys>...}],
///  "trials": 100, "budget": 2000, "seed": 1, "reference": true, "reference_factor": 10, "threads": 0}
inline BenchSpec load_bench_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bench spec " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed bench spec: ") + e.what());
  }
  const auto base = path.parent_path();
  BenchSpec spec;
  spec.trials = j.value("trials", spec.trials);
  spec.budget = j.value("budget", spec.budget);
  spec.seed = j.value("seed", spec.seed);
  spec.reference = j.value("reference", spec.reference);
  spec.reference_factor = j.value("reference_factor", spec.reference_factor);
  spec.threads = j.value("threads", spec.threads);
  for (const auto& s : j.at("scenarios")) {
    const auto p = base / s.get<std::string>();
    BenchScenario bs;
    bs.name = p.stem().string();
    try {
      bs.scenario = load_scenario(p);
      bs.name = bs.scenario->name;
    } catch (const std::exception& e) {
      bs.error = e.what();
    }
    spec.scenarios.push_back(std::move(bs));
  }
  for (const auto& pj : j.at("planners")) {
    PlannerSpec ps;
    ps.name = pj.at("name").get<std::string>();
    ps.provider = parse_provider_kind(pj.value("provider", std::string("oracle")));
    if (pj.contains("masks")) ps.masks_dir = base / pj["masks"].get<std::string>();
    nlohmann::json cfg = pj;
    cfg.erase("name");
    cfg.erase("provider");
    cfg.erase("masks");
    ps.config = planner_config_from_json(cfg);
    spec.planners.push_back(std::move(ps));
  }
  spec.validate();
  return spec;
}

/// results.csv, timing.csv, raw.jsonl and one scatter SVG per scenario.
inline void write_bench_outputs(const BenchSpec& spec, const BenchResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "results.csv");
    f << results_csv(res.rows);
  }
  {
    std::ofstream f(dir / "timing.csv");
    f << timing_csv(res.rows);
  }
  {
    std::ofstream f(dir / "raw.jsonl");
    for (const auto& r : res.raw) f << to_json(r).dump() << '\n';
  }
  for (const auto& bs : spec.scenarios) {
    std::ofstream f(dir / ("scatter_" + bs.name + ".svg"));
    f << scatter_svg(bs.name, res.raw);
  }
}

}  // namespace mgpf
