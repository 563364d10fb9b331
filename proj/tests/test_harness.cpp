#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "isinglab/harness/config.hpp"
#include "isinglab/harness/emit.hpp"
#include "isinglab/harness/experiments.hpp"
#include "isinglab/harness/pool.hpp"
#include "isinglab/harness/stats.hpp"

using namespace isinglab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("isinglab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const fs::path kSmoke = fs::path(ISINGLAB_FIXTURES) / ".." / ".." / "configs" / "smoke";

// Deterministic toy work: a few draws from the replica seed.
std::vector<double> toy(std::uint64_t i, std::uint64_t seed) {
  Xoshiro256 g(seed);
  return {static_cast<double>(i), uniform01(g), uniform01(g)};
}

std::vector<std::vector<double>> values(const PoolResult& r) {
  std::vector<std::vector<double>> v;
  for (const auto& rec : r.records) v.push_back(rec.values);
  return v;
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

// --- config -----------------------------------------------------------------

TEST(Config, ParsesListsCommentsAndSideSpecs) {
  auto c = parse_config(
      "# leading comment\n"
      "kind = mixing-vs-size   # trailing\n"
      "beta = 0.5, 0.7\n"
      "L = 4,6\n"
      "bc = plus, (-,-,+,-), free\n"
      "replicas = 12\n");
  EXPECT_EQ(c.kind, ExperimentKind::mixing_vs_size);
  EXPECT_EQ(c.beta, (std::vector<double>{0.5, 0.7}));
  EXPECT_EQ(c.L, (std::vector<int>{4, 6}));
  EXPECT_EQ(c.bc, (std::vector<std::string>{"plus", "(-,-,+,-)", "free"}));
  EXPECT_EQ(c.replicas, 12u);
}

TEST(Config, Rejections) {
  const std::string ok = "kind = strip-fluctuation\nell = 8\nx = 1\n";
  EXPECT_NO_THROW(parse_config(ok));
  EXPECT_THROW(parse_config(ok + "colour = red\n"), ConfigError);
  EXPECT_THROW(parse_config(ok + "beta = 0.7\nbeta = 0.8\n"), ConfigError);
  EXPECT_THROW(parse_config("ell = 8\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config(ok + "seed = 12abc\n"), ConfigError);
  EXPECT_THROW(parse_config("kind = strip-fluctuation\nell = 8, 128\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config(ok + "epsilon = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("kind = mixing-vs-size\nL = 4\nrule = metropolis\n"), ConfigError);
  EXPECT_THROW(parse_config("kind = nonsense\n"), ConfigError);
  EXPECT_THROW(parse_config("kind = strip-fluctuation\n"), ConfigError);
  EXPECT_THROW(parse_config(ok + "just words\n"), ConfigError);
}

TEST(Config, TextRoundTripAndHashScope) {
  auto c = parse_config("kind = bernoulli-bc\nL = 4\np_plus = 0.3, 0.6\nbc = (-,+,-,+)\nseed = 99\n");
  auto d = parse_config(c.text());
  EXPECT_EQ(c.text(), d.text());
  EXPECT_EQ(c.hash(), d.hash());
  d.replicas = 12345;
  d.workers = 7;
  d.time_budget = 3;
  EXPECT_EQ(c.hash(), d.hash());
  d.seed = 100;
  EXPECT_NE(c.hash(), d.hash());
}

TEST(Config, SmokeConfigsAllParse) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kSmoke)) {
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 8);
}

// --- checkpoint ---------------------------------------------------------------

TEST(Checkpoint, TamperedLineIsRejected) {
  auto dir = scratch("tamper");
  auto file = dir / "t.ckpt";
  run_replicas("task", 5, 10, toy, {1, file, 0});
  auto text = slurp(file);
  auto at = text.find("\n3 ");
  ASSERT_NE(at, std::string::npos);
  text[at + 1] = '4';  // replica 3 claims to be replica 4
  write_file(file, text);
  EXPECT_THROW(Checkpoint(file, "task").load(), CorruptCheckpoint);
  EXPECT_THROW(run_replicas("task", 5, 10, toy, {1, file, 0}), CorruptCheckpoint);
}

TEST(Checkpoint, ForeignTaskIsRejected) {
  auto dir = scratch("foreign");
  auto file = dir / "t.ckpt";
  run_replicas("task-a", 5, 4, toy, {1, file, 0});
  EXPECT_THROW(Checkpoint(file, "task-b").load(), CorruptCheckpoint);
}

TEST(Checkpoint, TornTailIsDroppedAndRecomputed) {
  auto dir = scratch("torn");
  auto file = dir / "t.ckpt";
  auto straight = run_replicas("task", 5, 20, toy, {});
  run_replicas("task", 5, 20, toy, {1, file, 0});
  auto text = slurp(file);
  text.resize(text.size() - 7);  // half of the last line
  write_file(file, text);
  EXPECT_EQ(Checkpoint(file, "task").load().size(), 19u);
  std::atomic<int> calls = 0;
  auto counted = [&](std::uint64_t i, std::uint64_t s) {
    ++calls;
    return toy(i, s);
  };
  auto resumed = run_replicas("task", 5, 20, counted, {1, file, 0});
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(values(resumed), values(straight));
  EXPECT_EQ(Checkpoint(file, "task").load().size(), 20u);
}

TEST(Checkpoint, FinishedRunIsANoOp) {
  auto dir = scratch("noop");
  auto file = dir / "t.ckpt";
  auto first = run_replicas("task", 5, 8, toy, {2, file, 0});
  auto again = run_replicas(
      "task", 5, 8, [](std::uint64_t, std::uint64_t) -> std::vector<double> { throw std::logic_error("recomputed"); },
      {2, file, 0});
  EXPECT_EQ(values(first), values(again));
  EXPECT_TRUE(again.complete);
}

// --- pool ---------------------------------------------------------------------

TEST(Pool, ResultsIndependentOfWorkerCount) {
  auto one = run_replicas("task", 11, 64, toy, {1, {}, 0});
  for (unsigned w : {3u, 8u}) {
    auto many = run_replicas("task", 11, 64, toy, {w, {}, 0});
    EXPECT_EQ(values(one), values(many)) << w << " workers";
  }
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(one.records[i].replica, i);
    EXPECT_EQ(one.records[i].seed, replica_seed(11, i));
  }
}

TEST(Pool, BudgetStopsEarlyAndResumeMatches) {
  auto dir = scratch("budget");
  auto file = dir / "t.ckpt";
  auto slow = [](std::uint64_t i, std::uint64_t s) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return toy(i, s);
  };
  auto partial = run_replicas("task", 3, 40, slow, {2, file, 0.1});
  EXPECT_FALSE(partial.complete);
  EXPECT_LT(partial.records.size(), 40u);
  auto resumed = run_replicas("task", 3, 40, slow, {2, file, 0});
  EXPECT_TRUE(resumed.complete);
  EXPECT_EQ(values(resumed), values(run_replicas("task", 3, 40, toy, {})));
}

TEST(Pool, InterruptedRunResumesToTheSameResult) {
  auto dir = scratch("interrupt");
  auto file = dir / "t.ckpt";
  auto failing = [](std::uint64_t i, std::uint64_t s) {
    if (i == 13) throw std::runtime_error("killed");
    return toy(i, s);
  };
  EXPECT_THROW(run_replicas("task", 3, 30, failing, {3, file, 0}), std::runtime_error);
  EXPECT_GT(Checkpoint(file, "task").load().size(), 0u);
  auto resumed = run_replicas("task", 3, 30, toy, {3, file, 0});
  EXPECT_EQ(values(resumed), values(run_replicas("task", 3, 30, toy, {})));
}

// --- statistics ---------------------------------------------------------------

TEST(Stats, WilsonInterval) {
  auto [lo, hi] = wilson_interval(50, 100);
  EXPECT_NEAR(lo, 0.403832, 1e-6);
  EXPECT_NEAR(hi, 0.596168, 1e-6);
  auto [l0, h0] = wilson_interval(0, 20);
  EXPECT_EQ(l0, 0.0);
  EXPECT_NEAR(h0, 0.161125158, 1e-8);
}

TEST(Stats, MeanStderrAndBinomial) {
  auto [m, se] = mean_and_stderr({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_DOUBLE_EQ(binomial_stderr(0.5, 100), 0.05);
  EXPECT_EQ(binomial_stderr(0.5, 0), 0.0);
}

TEST(Stats, OlsRecoversALine) {
  auto f = ols_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2, 1e-14);
  EXPECT_NEAR(f.intercept, 1, 1e-14);
  EXPECT_NEAR(f.r2, 1, 1e-14);
  EXPECT_EQ(f.points, 4u);
  auto g = ols_fit({0, 1, 2, 3}, {0, 1, 0, 1});
  EXPECT_NEAR(g.slope, 0.2, 1e-14);
  EXPECT_NEAR(g.r2, 0.2, 1e-14);
}

TEST(Stats, ChiSquareTests) {
  // perfect fit: statistic 0, p = 1
  auto a = chi_square_gof({25, 25, 50}, {0.25, 0.25, 0.5});
  EXPECT_NEAR(a.statistic, 0, 1e-12);
  EXPECT_EQ(a.dof, 2);
  EXPECT_NEAR(a.p_value, 1, 1e-12);
  // 2 dof: p = exp(-x/2)
  auto b = chi_square_gof({30, 20, 50}, {0.25, 0.25, 0.5});
  EXPECT_NEAR(b.statistic, 2.0, 1e-12);
  EXPECT_NEAR(b.p_value, std::exp(-1.0), 1e-12);
  // small expected cells are pooled
  auto c = chi_square_gof({98, 1, 1}, {0.98, 0.01, 0.01});
  EXPECT_EQ(c.dof, 1);
  auto same = chi_square_two_sample({40, 60, 100}, {20, 30, 50});
  EXPECT_NEAR(same.statistic, 0, 1e-12);
  auto diff = chi_square_two_sample({100, 0}, {0, 100});
  EXPECT_LT(diff.p_value, 1e-20);
}

TEST(Stats, ChiSquareIsCalibratedUnderTheNull) {
  std::mt19937_64 g(5);
  std::discrete_distribution<int> d({0.1, 0.2, 0.3, 0.4});
  int rejects = 0;
  for (int rep = 0; rep < 400; ++rep) {
    std::vector<double> obs(4);
    for (int k = 0; k < 1000; ++k) obs[d(g)] += 1;
    rejects += chi_square_gof(obs, {0.1, 0.2, 0.3, 0.4}).p_value < 0.05;
  }
  EXPECT_NEAR(rejects / 400.0, 0.05, 0.035);
}

// --- CSV and emission ---------------------------------------------------------------

TEST(Csv, EscapeRoundTrip) {
  Table t{{"a", "b,c", "q\"uote"}, {{"1", "x\ny", ""}, {"(-,+)", "\"", "plain"}}};
  auto rows = parse_csv(to_csv(t));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], t.header);
  EXPECT_EQ(rows[1], t.rows[0]);
  EXPECT_EQ(rows[2], t.rows[1]);
}

TEST(Csv, EmptyTableIsHeaderOnly) { EXPECT_EQ(to_csv(Table{{"a", "b"}, {}}), "a,b\n"); }

TEST(Emit, RerunsAreByteIdenticalAcrossWorkerCounts) {
  auto c = load_config((kSmoke / "strip-fluctuation.conf").string());
  c.replicas = 24;
  auto d1 = scratch("emit1"), d2 = scratch("emit2");
  emit(run_experiment(c, {1, {}, false, 0}), d1);
  emit(run_experiment(c, {4, {}, false, 0}), d2);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(d2 / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_EQ(compared, 3);
}

TEST(Emit, ResumedRunEqualsStraightRun) {
  auto c = load_config((kSmoke / "positivity-scaling.conf").string());
  c.replicas = 30;
  auto ck = scratch("resume_ck"), a = scratch("resume_a"), b = scratch("resume_b");
  auto straight = run_experiment(c, {2, {}, false, 0});
  // a short partial run leaves logs behind, then a resumed run finishes it
  auto partial = c;
  partial.replicas = 11;
  run_experiment(partial, {2, ck, false, 0});
  auto resumed = run_experiment(c, {3, ck, true, 0});
  emit(straight, a);
  emit(resumed, b);
  for (const auto& name : {"positivity-scaling_records.csv", "positivity-scaling_summary.csv",
                           "positivity-scaling_fit.csv"})
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST(Emit, GoldenSchemasForEveryKind) {
  std::map<std::string, std::string> golden;
  {
    std::ifstream in(fs::path(ISINGLAB_FIXTURES) / "schema.txt");
    std::string file, header;
    while (in >> file >> header) golden[file] = header;
  }
  ASSERT_EQ(golden.size(), 10u);
  std::size_t matched = 0;
  for (const auto& [kind, name] : kind_names()) {
    auto c = load_config((kSmoke / (name + ".conf")).string());
    c.replicas = 4;
    if (kind == ExperimentKind::oracle_suite) {
      c.trials = 1;
      c.beta = {0.7};
    }
    if (kind == ExperimentKind::mixing_vs_size) c.L = {2, 3};
    auto dir = scratch("schema_" + name);
    auto written = emit(run_experiment(c, {2, {}, false, 0}), dir);
    auto records = parse_csv(slurp(dir / (name + "_records.csv")));
    ASSERT_FALSE(records.empty());
    EXPECT_EQ((std::vector<std::string>(records[0].begin(), records[0].begin() + 3)),
              (std::vector<std::string>{"task", "replica", "seed"}));
    for (const auto& p : written) {
      auto f = p.filename().string();
      if (p.extension() != ".csv" || f.ends_with("_records.csv")) continue;
      ASSERT_TRUE(golden.count(f)) << f;
      auto text = slurp(p);
      EXPECT_EQ(text.substr(0, text.find('\n')), golden[f]) << f;
      ++matched;
    }
    EXPECT_TRUE(fs::exists(dir / (name + ".json")));
  }
  EXPECT_EQ(matched, golden.size());
}

TEST(Report, RecomputesSummariesAndDetectsTampering) {
  auto c = load_config((kSmoke / "large-deviation-tail.conf").string());
  c.replicas = 16;
  auto dir = scratch("report");
  emit(run_experiment(c, {2, {}, false, 0}), dir);
  auto entries = report(dir);
  ASSERT_FALSE(entries.empty());
  for (const auto& e : entries) EXPECT_LE(e.max_difference, 1e-12) << e.file;
  auto file = dir / "large-deviation-tail_summary.csv";
  auto rows = parse_csv(slurp(file));
  ASSERT_GE(rows.size(), 2u);
  auto& cell = rows[1].back();  // stderr column
  cell = format_double(std::stod(cell) + 0.01);
  Table t{rows[0], {rows.begin() + 1, rows.end()}};
  write_file(file, to_csv(t));
  double worst = 0;
  for (const auto& e : report(dir)) worst = std::max(worst, e.max_difference);
  EXPECT_GT(worst, 1e-3);
}

// --- interface tasks ---------------------------------------------------------------

TEST(Interface, SmallStripObservablesAreConsistent) {
  InterfaceTask task;
  task.ell = 8;
  task.cutoff = 0;
  task.seed = 3;
  auto r = run_interface_task(task, 200, {2, {}, 0});
  ASSERT_TRUE(r.complete);
  ASSERT_EQ(r.records.size(), 200u);
  for (const auto& rec : r.records) {
    const auto& v = rec.values;
    ASSERT_EQ(v[kCoalesced], 1.0);
    EXPECT_LE(v[kMinSE], v[kMidSE]);
    EXPECT_LE(v[kMidSE], v[kMaxSE]);
    EXPECT_LE(v[kMinSW], v[kMidSW]);
    EXPECT_LE(v[kMidSW], v[kMaxSW]);
    // the interface starts and ends on level 0
    EXPECT_LE(v[kMinSE], 0.0);
    EXPECT_GE(v[kMaxSE], 0.0);
  }
  auto again = run_interface_task(task, 200, {4, {}, 0});
  EXPECT_EQ(values(r), values(again));
}
