// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failures.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <sys/wait.h>

#include "mgpf/bench.hpp"
#include "mgpf/config.hpp"
#include "mgpf/dataset.hpp"
#include "mgpf/mgpf.hpp"
#include "test_support.hpp"

using namespace mgpf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario generated(std::uint64_t seed, int goals, bool dense) {
  DatasetConfig cfg = dense ? DatasetConfig::dense_small() : DatasetConfig{};
  cfg.seed = seed;
  Rng rng(seed);
  return generate_scenario(generate_map(cfg, rng), goals, rng, cfg, (dense ? "dense" : "plain") + std::to_string(seed));
}

// Minimum closed-tour cost by enumerating every permutation of 1..n-1.
double brute_force_tsp(const std::vector<std::vector<double>>& w) {
  std::vector<std::size_t> perm(w.size() - 1);
  std::iota(perm.begin(), perm.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = w[0][perm.front()] + w[perm.back()][0];
    for (std::size_t i = 1; i < perm.size(); ++i) c += w[perm[i - 1]][perm[i]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void tsp_oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_int_distribution<int> weight(1, 1000);
  std::size_t mismatches = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const int n = size(gen);
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    // Integer weights make every tour sum exact regardless of summation order.
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) w[i][j] = w[j][i] = weight(gen);
    }
    const WeightedGraph g(std::vector<State>(n, State{0, 0}), w);
    const VisitingOrder order = solve_tsp_exact(g);
    if (!is_valid_order(order, n) || tour_cost(g, order) != brute_force_tsp(w)) ++mismatches;
  }
  const double t = seconds_since(t0);
  report(mismatches == 0 && t < 10.0, "tsp_oracle_equivalence",
         fmt("500 instances, <=8 vertices, %zu mismatches, %.2f s (limit 10 s)", mismatches, t));
}

void collision_soundness() {
  std::mt19937_64 gen(77);
  std::size_t false_free = 0, false_collision = 0, non_grazing = 0, oracle_misses = 0, total = 0;
  for (int m = 0; m < 50; ++m) {
    const int w = 32 + static_cast<int>(gen() % 33), h = 32 + static_cast<int>(gen() % 33);
    const GridMap map = test::random_map(w, h, 0.05 + 0.25 * (m % 5) / 4.0, gen());
    std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h), len(0.5, 12.0), ang(0.0, 2 * std::numbers::pi);
    for (int s = 0; s < 1000; ++s, ++total) {
      const State a{ux(gen), uy(gen)};
      const double l = len(gen), th = ang(gen);
      const State b{std::clamp(a.x + l * std::cos(th), 0.0, std::nextafter(double(w), 0.0)),
                    std::clamp(a.y + l * std::sin(th), 0.0, std::nextafter(double(h), 0.0))};
      const bool ours = segment_collision_free(map, a, b);
      const bool oracle = test::sampled_collision_free(map, a, b, 0.01);
      if (ours == oracle) continue;
      if (ours) {
        ++false_free;
        continue;
      }
      // Ours reports a collision the sampler did not see: either a genuine
      // interior crossing the sampler stepped over, or a boundary graze.
      bool interior = false, grazes = false;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (!map.occupied(r, c)) continue;
          interior |= test::crosses_cell_interior(a, b, r, c);
          grazes |= test::touches_cell(a, b, r, c);
        }
      }
      if (interior) {
        ++oracle_misses;
      } else {
        ++false_collision;
        non_grazing += grazes ? 0 : 1;
      }
    }
  }
  const double rate = 100.0 * static_cast<double>(false_collision) / static_cast<double>(total);
  report(false_free == 0 && non_grazing == 0 && rate <= 0.5, "collision_soundness",
         fmt("%zu segments on 50 maps, false free %zu, false collision %zu (%.3f%%, limit 0.5%%, non-grazing %zu), "
             "interior crossings missed by the sampler %zu",
             total, false_free, false_collision, rate, non_grazing, oracle_misses));
}

void oracle_weight_bounds() {
  const GridMap map = test::empty_map(256, 256);
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> cell(0, 255);
  constexpr double kBound = 1.0824;
  std::size_t out = 0;
  double worst = 1.0;
  for (int i = 0; i < 1000; ++i) {
    State a, b;
    do {
      a = {cell(gen) + 0.5, cell(gen) + 0.5};
      b = {cell(gen) + 0.5, cell(gen) + 0.5};
    } while (a == b);
    const double l2 = distance(a, b);
    const double len = astar_shortest_path(map, a, b).length;
    out += (len >= l2 && len <= kBound * l2) ? 0 : 1;
    worst = std::max(worst, len / l2);
  }
  report(out == 0, "oracle_weight_bounds",
         fmt("1000 pairs on a free 256x256 map, %zu outside [L2, 1.0824 L2], max ratio %.6f", out, worst));
}

void solution_validation() {
  std::size_t successes = 0, violations = 0, attempts = 0;
  for (int k = 0; k < 10; ++k) {
    const Scenario s = generated(500 + k, 4 + k % 4, k % 2 == 1);
    const WeightedGraph g = build_graph(s, OracleProvider(OracleOptions{}));
    std::size_t here = 0;
    for (std::uint64_t seed = 0; here < 10 && seed < 50; ++seed, ++attempts) {
      PlannerConfig cfg;
      cfg.set_seed(seed);
      const PlanResult r = plan_with_graph(s, g, cfg.sampler, cfg.rrt);
      if (!r.success) continue;
      ++here;
      violations += validate_solution(s, r).ok() ? 0 : 1;
    }
    successes += here;
  }
  report(successes == 100 && violations == 0, "solution_validation",
         fmt("%zu successes (of %zu runs) over 10 scenarios, %zu violations", successes, attempts, violations));
}

void benchmark_direction() {
  const auto t0 = Clock::now();
  BenchSpec spec;
  const std::vector<Scenario> scenarios = {generated(101, 5, false), generated(102, 7, false), generated(201, 6, true),
                                           generated(202, 7, true)};
  for (const auto& s : scenarios) spec.scenarios.push_back({s.name, s, {}});
  PlannerSpec pke, euc;
  pke.name = "pke";
  pke.provider = ProviderKind::oracle;
  euc.name = "euclidean";
  euc.provider = ProviderKind::euclidean;
  spec.planners = {pke, euc};
  spec.trials = 100;
  spec.budget = 2000;
  spec.reference_factor = 10;
  const BenchResult res = run_bench(spec);
  const double t = seconds_since(t0);

  auto row = [&](const std::string& planner, const std::string& scenario) -> const MetricsRow& {
    for (const auto& r : res.rows) {
      if (r.planner == planner && r.scenario == scenario) return r;
    }
    throw Error("missing row");
  };
  bool ok = t <= 600.0;
  std::ostringstream detail;
  for (const auto& s : scenarios) {
    const MetricsRow& p = row("pke", s.name);
    const MetricsRow& e = row("euclidean", s.name);
    const double ref = row("optimal", s.name).mean_length;
    const bool pass = p.error.empty() && e.error.empty() && p.success_rate == 100.0 &&
                      p.mean_samples <= 0.6 * e.mean_samples && p.mean_length <= 1.15 * ref &&
                      p.mean_length <= e.mean_length;
    ok &= pass;
    detail << fmt("[%s N=%zu: success %.0f%%, samples %.0f vs %.0f (%.2fx), length %.1f vs ref %.1f (%.3fx) vs euclidean %.1f%s] ",
                  s.name.c_str(), s.goals.size(), p.success_rate, p.mean_samples, e.mean_samples,
                  p.mean_samples / e.mean_samples, p.mean_length, ref, p.mean_length / ref, e.mean_length,
                  pass ? "" : " FAIL");
  }
  detail << fmt("runtime %.0f s (limit 600 s)", t);
  report(ok, "benchmark_direction", detail.str());
}

void completeness_regression() {
  const Scenario s = generated(303, 5, false);
  WeightedGraph g = build_graph(s, EuclideanProvider());
  const Mask full = Mask::full(s.map.width(), s.map.height());
  g.set_priors(std::vector<PriorKnowledge>(g.size() * (g.size() - 1) / 2, PriorKnowledge{full, full, 0.0}));
  std::size_t mismatched = 0, legs = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RrtParams rp;
    rp.seed = seed;
    const PlanResult guided = plan_with_graph(s, g, {1.0, 0.0, seed}, rp);
    bool same = guided.order == solve_tsp(g, derive_seed(seed, 0));
    for (std::size_t k = 0; same && k < guided.samples_per_leg.size(); ++k, ++legs) {
      rp.seed = leg_seed(seed, k);
      UniformSampler u(s.map, leg_seed(seed, k));
      const PlanOutcome o =
          rrt_plan(s.map, s.vertex(guided.order.sequence[k]), s.vertex(guided.order.sequence[k + 1]), u, rp);
      same = o.samples == guided.samples_per_leg[k] && (!o.success || o.path == guided.legs[k]);
    }
    mismatched += same ? 0 : 1;
  }
  report(mismatched == 0, "completeness_regression",
         fmt("20 trials (%zu legs), full masks with k1=1 vs uniform RRT, %zu differing trials", legs, mismatched));
}

int run(const std::string& args) {
  const std::string cmd = std::string(MGPF_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void cli_determinism() {
  test::TempDir dir("accept");
  const auto q = [](const std::filesystem::path& p) { return "'" + p.string() + "'"; };
  Scenario s = generated(404, 5, false);
  save_scenario(s, dir / "s.json", "s.png");
  std::size_t compared = 0, differing = 0, bad_exit = 0;
  for (const char* provider : {"oracle", "euclidean"}) {
    for (const char* seed : {"0", "17"}) {
      const std::string base = std::string("plan --scenario ") + q(dir / "s.json") + " --provider " + provider + " --seed " + seed;
      bad_exit += run(base + " --out " + q(dir / "a.json")) != 0;
      bad_exit += run(base + " --out " + q(dir / "b.json")) != 0;
      ++compared;
      differing += slurp(dir / "a.json") != slurp(dir / "b.json") || slurp(dir / "a.json").empty();
    }
  }
  {
    std::ofstream f(dir / "spec.json");
    f << R"({"scenarios": ["s.json"], "planners": [{"name": "pke", "provider": "oracle"},
             {"name": "euclidean", "provider": "euclidean"}], "trials": 10, "budget": 2000, "reference_factor": 2})";
  }
  bad_exit += run("bench --spec " + q(dir / "spec.json") + " --out " + q(dir / "o1")) != 0;
  bad_exit += run("bench --spec " + q(dir / "spec.json") + " --out " + q(dir / "o2") + " --threads 1") != 0;
  ++compared;
  differing += slurp(dir / "o1/results.csv") != slurp(dir / "o2/results.csv") || slurp(dir / "o1/results.csv").empty();
  report(differing == 0 && bad_exit == 0, "cli_determinism",
         fmt("%zu repeated invocations compared byte-for-byte (result.json, results.csv), %zu differ, %zu bad exits",
             compared, differing, bad_exit));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"tsp_oracle_equivalence", tsp_oracle_equivalence},
      {"collision_soundness", collision_soundness},
      {"oracle_weight_bounds", oracle_weight_bounds},
      {"solution_validation", solution_validation},
      {"benchmark_direction", benchmark_direction},
      {"completeness_regression", completeness_regression},
      {"cli_determinism", cli_determinism},
  };
  for (const auto& [name, fn] : criteria) {
    if (argc > 1 && std::find(argv + 1, argv + argc, name) == argv + argc) continue;
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, std::string("exception: ") + e.what());
    }
  }
  return failures;
}
