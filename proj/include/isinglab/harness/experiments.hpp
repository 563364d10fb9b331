#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isinglab/contour/geometry.hpp"
#include "isinglab/core/duality.hpp"
#include "isinglab/dynamics/censoring.hpp"
#include "isinglab/dynamics/mixing.hpp"
#include "isinglab/harness/config.hpp"
#include "isinglab/harness/interface.hpp"
#include "isinglab/harness/stats.hpp"
#include "isinglab/randomline/battery.hpp"

namespace isinglab {

inline constexpr const char* kVersion = "isinglab 1.0.0";

using Params = std::vector<std::pair<std::string, std::string>>;

// One batch of replicas sharing a parameter point. `work(i, seed)` returns the
// observables of replica i, laid out as the experiment's field list.
struct TaskPlan {
  std::string label;
  Params params;
  std::string key;  // checkpoint identity
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;
  std::function<std::vector<double>(std::uint64_t, std::uint64_t)> work;
};

struct ExperimentPlan {
  std::vector<std::string> fields;
  std::vector<TaskPlan> tasks;
  // oracle-suite only: checks of every item, filled in by the workers
  std::shared_ptr<std::vector<std::vector<IdentityCheck>>> checks;
};

struct TaskOutcome {
  std::string label;
  Params params;
  std::string key;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 0;  // requested
  bool complete = true;
  std::vector<ResultRecord> records;

  const std::string& param(const std::string& name) const {
    for (const auto& [k, v] : params)
      if (k == name) return v;
    throw std::out_of_range("task " + label + " has no parameter " + name);
  }
  double number(const std::string& name) const { return std::stod(param(name)); }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> fields;
  std::vector<TaskOutcome> tasks;
  std::vector<std::pair<std::string, Table>> tables;  // "summary", "fit"
  std::vector<IdentityCheck> checks;                  // oracle-suite
  double wall_s = 0;
};

// ---------------------------------------------------------------------------
// Boundary conditions by name: plus, minus, free, or a side spec such as
// (-,-,+,-) / --+-.

inline BoundaryCondition named_bc(const std::string& name, RegionPtr r) {
  if (name == "plus") return BoundaryCondition::plus(std::move(r));
  if (name == "minus") return BoundaryCondition::minus(std::move(r));
  if (name == "free") return BoundaryCondition::free(std::move(r));
  try {
    return BoundaryCondition::sides(std::move(r), SideSpec::parse(name));
  } catch (const std::invalid_argument&) {
    throw ConfigError("unknown boundary condition: " + name);
  }
}

namespace detail {

inline std::string task_key(const ExperimentConfig& c, const std::string& label) {
  return to_string(c.kind) + " " + label + " cfg=" + hex64(c.hash());
}

inline TaskPlan make_task(const ExperimentConfig& c, Params params, std::uint64_t replicas,
                          std::function<std::vector<double>(std::uint64_t, std::uint64_t)> work) {
  std::string label;
  for (const auto& [k, v] : params) label += (label.empty() ? "" : " ") + k + "=" + v;
  TaskPlan t{label, std::move(params), "", 0, replicas, std::move(work)};
  t.key = task_key(c, t.label);
  t.seed = mix64(fnv1a(t.key));
  return t;
}

inline std::string num(double v) { return format_double(v); }
inline std::string num(std::uint64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

inline std::uint64_t event_cap(const ExperimentConfig& c) {
  return c.max_events >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                                : static_cast<std::uint64_t>(c.max_events);
}

inline int reach_threshold(double x, int ell) { return static_cast<int>(std::ceil(x * std::sqrt(double(ell)) - 1e-12)); }

inline int rectangle_height(double alpha, int ell) {
  return static_cast<int>(std::ceil(alpha * std::sqrt(double(ell)) - 1e-12));
}

inline int delta_length(double s, double alpha) { return static_cast<int>(std::ceil(s * alpha * alpha - 1e-12)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Planning: the task list of each kind. Everything that can fail on bad
// parameters fails here, before any replica runs.

inline std::vector<InterfaceTask> interface_tasks(const ExperimentConfig& c) {
  std::vector<InterfaceTask> out;
  for (double beta : c.beta)
    for (int ell : c.ell) {
      InterfaceTask t;
      t.beta = beta;
      t.ell = ell;
      t.cutoff = c.cutoff;
      t.seed = c.seed;
      out.push_back(t);
    }
  return out;
}

inline ExperimentPlan plan_experiment(const ExperimentConfig& c) {
  c.validate();
  using detail::num;
  ExperimentPlan plan;
  const MixingOptions mix{detail::event_cap(c)};

  switch (c.kind) {
    case ExperimentKind::strip_fluctuation:
    case ExperimentKind::positivity_scaling: {
      plan.fields = {"coalesced", "sweeps", "min_se", "max_se", "min_sw", "max_sw", "mid_se", "mid_sw"};
      for (const auto& it : interface_tasks(c)) {
        auto region = LatticeRegion::truncated_strip(it.ell, it.rows());
        auto bc = BoundaryCondition::half_plane_eta(region);
        auto lat = std::make_shared<PackedLattice>(bc, it.beta);
        TaskPlan t{"beta=" + num(it.beta) + " ell=" + num(it.ell),
                   {{"beta", num(it.beta)}, {"ell", num(it.ell)}, {"rows", num(it.rows())}},
                   it.key(),
                   it.task_seed(),
                   c.replicas,
                   [lat, bc, it](std::uint64_t, std::uint64_t s) { return interface_observables(*lat, bc, it, s); }};
        plan.tasks.push_back(std::move(t));
      }
      break;
    }

    case ExperimentKind::large_deviation_tail: {
      plan.fields = {"coalesced", "sweeps", "max_level", "confined"};
      for (double beta : c.beta)
        for (int ell : c.ell) {
          const int H = detail::rectangle_height(c.alpha, ell);
          const int dlen = detail::delta_length(c.s, c.alpha);
          if (dlen > ell - 2)
            throw ConfigError("large-deviation-tail: interval of length " + std::to_string(dlen) +
                              " does not fit the bottom side of width " + std::to_string(ell));
          auto box = LatticeRegion::box(ell, H);
          PackedCftpOptions o;
          o.initial_sweeps = static_cast<std::uint64_t>(ell) * static_cast<std::uint64_t>(ell);
          o.max_events = std::uint64_t{1} << 36;
          const double nan = std::numeric_limits<double>::quiet_NaN();
          {
            auto bc = BoundaryCondition::sides(box, SideSpec::parse("(-,-,+,-)"));
            auto lat = std::make_shared<PackedLattice>(bc, beta);
            plan.tasks.push_back(detail::make_task(
                c, {{"event", "reach"}, {"beta", num(beta)}, {"ell", num(ell)}, {"height", num(H)}}, c.replicas,
                [lat, bc, o, nan](std::uint64_t, std::uint64_t s) {
                  auto out = packed_cftp(*lat, s, o);
                  std::vector<double> v{out.coalesced() ? 1.0 : 0.0, double(out.events / lat->sites()), nan, nan};
                  if (!out.coalesced()) return v;
                  auto f = decompose(disagreement_duals(*out.sample, bc), SplitRule::se);
                  auto open = f.open();
                  if (open.size() != 1) throw CompatibilityError("expected a single open contour");
                  v[2] = open.front()->max_level();
                  return v;
                }));
          }
          {
            const int mid = (ell + 1) / 2;
            const int from = mid - dlen / 2, to = from + dlen - 1;
            auto bc = BoundaryCondition::delta_interval(box, SideSpec::parse("(-,+,+,+)"), Side::south, from, to, -1);
            auto corners = split_corners(*box, from, to);
            auto lat = std::make_shared<PackedLattice>(bc, beta);
            plan.tasks.push_back(detail::make_task(
                c,
                {{"event", "split"}, {"beta", num(beta)}, {"ell", num(ell)}, {"height", num(H)},
                 {"delta", num(dlen)}},
                c.replicas, [lat, bc, o, nan, box, corners](std::uint64_t, std::uint64_t s) {
                  auto out = packed_cftp(*lat, s, o);
                  std::vector<double> v{out.coalesced() ? 1.0 : 0.0, double(out.events / lat->sites()), nan, nan};
                  if (!out.coalesced()) return v;
                  auto f = decompose(disagreement_duals(*out.sample, bc), SplitRule::se);
                  v[3] = confined_split(f, *box, corners) ? 1.0 : 0.0;
                  return v;
                }));
          }
        }
      break;
    }

    case ExperimentKind::mixing_vs_size: {
      plan.fields = {"value"};
      for (double beta : c.beta)
        for (const auto& name : c.bc)
          for (int L : c.L) {
            auto bc = named_bc(name, LatticeRegion::box(L, L));
            plan.tasks.push_back(detail::make_task(
                c, {{"measure", "coupling"}, {"beta", num(beta)}, {"bc", name}, {"L", num(L)}}, c.replicas,
                [bc, beta, mix](std::uint64_t, std::uint64_t s) {
                  return std::vector<double>{coupling_time_for_seed(bc, beta, s, mix)};
                }));
            if (L * L <= 16)
              plan.tasks.push_back(detail::make_task(
                  c, {{"measure", "gap"}, {"beta", num(beta)}, {"bc", name}, {"L", num(L)}}, 1,
                  [bc, beta](std::uint64_t, std::uint64_t) {
                    return std::vector<double>{spectral_gap_exact(exact_generator(bc, beta, RateRule::heat_bath))};
                  }));
          }
      break;
    }

    case ExperimentKind::censoring_benchmark: {
      plan.fields = {"time"};
      RecursiveScheduleParams p;
      p.N = c.N;
      p.kappa = c.kappa;
      p.n_base = c.n_base;
      p.t_base = c.t_base;
      p.growth_c = c.growth_c;
      p.s = c.s;
      p.flip = c.flip == "within" ? DeltaFlip::within : c.flip == "between" ? DeltaFlip::between : DeltaFlip::none;
      auto rs = [&] {
        try {
          return recursive_schedule(p);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("censoring-benchmark: ") + e.what());
        }
      }();
      auto sched = std::make_shared<CensorSchedule>(rs.schedule);
      const double T = sched->total_duration();
      auto full = std::make_shared<CensorSchedule>(CensorSchedule::full(rs.region, T));
      const double per_pass = T * static_cast<double>(rs.region->size());
      const int repeats = static_cast<int>(std::clamp(std::ceil(c.max_events / per_pass), 1.0, 1e6));
      const std::string geom = std::to_string(rs.region->width()) + "x" + std::to_string(rs.region->height());
      for (double beta : c.beta) {
        auto bc = named_bc(c.bc.front(), rs.region);
        for (auto [name, s] : {std::pair{"censored", sched}, std::pair{"uncensored", full}})
          plan.tasks.push_back(detail::make_task(
              c,
              {{"schedule", name}, {"beta", num(beta)}, {"region", geom}, {"duration", num(T)},
               {"repeats", num(repeats)}},
              c.replicas, [bc, beta, s = s, repeats](std::uint64_t, std::uint64_t seed) {
                auto t = censored_coupling_time(bc, beta, *s, seed, repeats);
                return std::vector<double>{t ? *t : std::numeric_limits<double>::infinity()};
              }));
      }
      break;
    }

    case ExperimentKind::bernoulli_bc: {
      plan.fields = {"time"};
      for (double beta : c.beta)
        for (int L : c.L)
          for (double p : c.p_plus) {
            auto region = LatticeRegion::box(L, L);
            plan.tasks.push_back(detail::make_task(
                c, {{"beta", num(beta)}, {"L", num(L)}, {"p_plus", num(p)}}, c.replicas,
                [region, beta, p, mix](std::uint64_t, std::uint64_t s) {
                  auto bc = BoundaryCondition::bernoulli(region, p, mix64(s ^ 0xB0A7D5EEDull));
                  return std::vector<double>{coupling_time_for_seed(bc, beta, s, mix)};
                }));
          }
      break;
    }

    case ExperimentKind::autocorrelation: {
      auto grid = c.times;
      std::sort(grid.begin(), grid.end());
      plan.fields = {"s0"};
      for (double t : grid) plan.fields.push_back("ab@" + num(t));
      for (double beta : c.beta)
        for (int L : c.L) {
          auto region = LatticeRegion::box(L, L);
          auto bc = BoundaryCondition::plus(region);
          const std::size_t origin = *region->index_of(box_center(L));
          plan.tasks.push_back(detail::make_task(
              c, {{"measure", "sampled"}, {"beta", num(beta)}, {"L", num(L)}}, c.replicas,
              [bc, beta, origin, grid](std::uint64_t, std::uint64_t s) {
                return autocorrelation_replica(bc, beta, origin, grid, s);
              }));
          if (L * L <= 16)
            plan.tasks.push_back(detail::make_task(
                c, {{"measure", "exact"}, {"beta", num(beta)}, {"L", num(L)}}, 1,
                [beta, L, grid](std::uint64_t, std::uint64_t) {
                  std::vector<double> v{std::numeric_limits<double>::quiet_NaN()};
                  for (const auto& pt : autocorrelation_exact(L, beta, grid)) v.push_back(pt.rho);
                  return v;
                }));
        }
      break;
    }

    case ExperimentKind::oracle_suite: {
      plan.fields = {"checks", "failed", "observational", "worst"};
      auto items = std::make_shared<std::vector<BatteryItem>>(full_battery(c.beta, c.trials, c.seed));
      plan.checks = std::make_shared<std::vector<std::vector<IdentityCheck>>>(items->size());
      std::vector<std::string> names;
      for (const auto& it : *items)
        if (std::find(names.begin(), names.end(), it.name) == names.end()) names.push_back(it.name);
      for (const auto& name : names) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < items->size(); ++k)
          if ((*items)[k].name == name) members.push_back(k);
        plan.tasks.push_back(detail::make_task(
            c, {{"check", name}}, members.size(),
            [items, members, checks = plan.checks](std::uint64_t i, std::uint64_t) {
              const std::size_t k = members[i];
              auto cs = (*items)[k].run();
              double failed = 0, obs = 0, worst = 0;
              for (const auto& ch : cs) {
                if (ch.observational) {
                  ++obs;
                  continue;
                }
                failed += !ch.passed();
                worst = std::max(worst, ch.inequality ? std::max(ch.gap, 0.0) : std::abs(ch.gap));
                if (std::isnan(ch.gap)) worst = std::numeric_limits<double>::infinity();
              }
              (*checks)[k] = std::move(cs);
              return std::vector<double>{double((*checks)[k].size()), failed, obs, worst};
            }));
      }
      break;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Summaries. They read only task parameters, the config and the records, so
// `report` can rebuild them from the CSV files.

namespace detail {

inline std::vector<std::string> row(std::initializer_list<std::string> xs) { return xs; }

inline std::vector<const ResultRecord*> coalesced(const TaskOutcome& t) {
  std::vector<const ResultRecord*> out;
  for (const auto& r : t.records)
    if (r.values.at(0) == 1.0) out.push_back(&r);
  return out;
}

inline Table proportion_table(std::vector<std::string> header) { return {std::move(header), {}}; }

inline LinearFit fit_or_nan(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, x.size()};
  }
  return ols_fit(x, y);
}

inline MixingEstimate safe_summary(std::vector<double> times, double eps) {
  try {
    return summarize_coupling_times(std::move(times), eps);
  } catch (const BudgetExhausted&) {
    MixingEstimate e;
    const double inf = std::numeric_limits<double>::infinity();
    e.t_hat = e.ci_low = e.ci_high = inf;
    e.replicas = times.size();
    for (double t : times) e.censored += std::isinf(t);
    e.uncoupled_at_t_hat = std::numeric_limits<double>::quiet_NaN();
    return e;
  } catch (const std::invalid_argument&) {  // no replicas
    MixingEstimate e;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    e.t_hat = e.ci_low = e.ci_high = e.uncoupled_at_t_hat = nan;
    return e;
  }
}

}  // namespace detail

inline std::vector<std::pair<std::string, Table>> summarize(const ExperimentConfig& c,
                                                            const std::vector<TaskOutcome>& tasks) {
  using detail::num;
  const std::string exp = to_string(c.kind);
  std::vector<std::pair<std::string, Table>> out;

  switch (c.kind) {
    case ExperimentKind::strip_fluctuation: {
      Table s{{"experiment", "beta", "ell", "x", "n_samples", "n_hits", "p_hat", "stderr"}, {}};
      Table f{{"experiment", "beta", "ell", "points", "slope", "intercept", "r2"}, {}};
      for (const auto& t : tasks) {
        const int ell = static_cast<int>(t.number("ell"));
        auto ok = detail::coalesced(t);
        std::vector<double> fx, fy;
        for (double x : c.x) {
          const int h = detail::reach_threshold(x, ell);
          std::uint64_t hits = 0;
          for (auto* r : ok) hits += r->values[kMaxSE] >= h;
          const double n = static_cast<double>(ok.size());
          const double p = n > 0 ? hits / n : std::numeric_limits<double>::quiet_NaN();
          s.rows.push_back({exp, t.param("beta"), t.param("ell"), num(x), num(std::uint64_t(ok.size())), num(hits),
                            num(p), num(binomial_stderr(p, n))});
          if (hits > 0) {
            fx.push_back(x * x);
            fy.push_back(std::log(p));
          }
        }
        auto fit = detail::fit_or_nan(fx, fy);
        f.rows.push_back({exp, t.param("beta"), t.param("ell"), num(std::uint64_t(fit.points)), num(fit.slope),
                          num(fit.intercept), num(fit.r2)});
      }
      out = {{"summary", s}, {"fit", f}};
      break;
    }

    case ExperimentKind::positivity_scaling: {
      Table s{{"experiment", "beta", "ell", "n_samples", "n_hits", "p_hat", "stderr"}, {}};
      Table f{{"experiment", "beta", "points", "slope", "intercept", "r2"}, {}};
      std::vector<std::string> betas;
      for (const auto& t : tasks)
        if (std::find(betas.begin(), betas.end(), t.param("beta")) == betas.end()) betas.push_back(t.param("beta"));
      for (const auto& b : betas) {
        std::vector<double> fx, fy;
        for (const auto& t : tasks) {
          if (t.param("beta") != b) continue;
          auto ok = detail::coalesced(t);
          std::uint64_t hits = 0;
          for (auto* r : ok) hits += r->values[kMinSE] >= 0;
          const double n = static_cast<double>(ok.size());
          const double p = n > 0 ? hits / n : std::numeric_limits<double>::quiet_NaN();
          s.rows.push_back({exp, b, t.param("ell"), num(std::uint64_t(ok.size())), num(hits), num(p),
                            num(binomial_stderr(p, n))});
          if (hits > 0) {
            fx.push_back(std::log(t.number("ell")));
            fy.push_back(std::log(p));
          }
        }
        auto fit = detail::fit_or_nan(fx, fy);
        f.rows.push_back({exp, b, num(std::uint64_t(fit.points)), num(fit.slope), num(fit.intercept), num(fit.r2)});
      }
      out = {{"summary", s}, {"fit", f}};
      break;
    }

    case ExperimentKind::large_deviation_tail: {
      Table s{{"experiment", "beta", "ell", "height", "event", "param", "threshold", "n_samples", "n_hits", "p_hat",
               "stderr"},
              {}};
      for (const auto& t : tasks) {
        auto ok = detail::coalesced(t);
        const double n = static_cast<double>(ok.size());
        auto emit = [&](const std::string& event, const std::string& param, int threshold, std::uint64_t hits) {
          const double p = n > 0 ? hits / n : std::numeric_limits<double>::quiet_NaN();
          s.rows.push_back({exp, t.param("beta"), t.param("ell"), t.param("height"), event, param, num(threshold),
                            num(std::uint64_t(ok.size())), num(hits), num(p), num(binomial_stderr(p, n))});
        };
        if (t.param("event") == "reach") {
          const int ell = static_cast<int>(t.number("ell"));
          for (double d : c.x) {
            // reach height delta * alpha * sqrt(ell)
            const int h = static_cast<int>(std::ceil(d * c.alpha * std::sqrt(double(ell)) - 1e-12));
            std::uint64_t hits = 0;
            for (auto* r : ok) hits += r->values[2] >= h;
            emit("reach", num(d), h, hits);
          }
        } else {
          std::uint64_t hits = 0;
          for (auto* r : ok) hits += r->values[3] == 0.0;
          emit("not-confined", num(c.s), static_cast<int>(t.number("delta")), hits);
        }
      }
      out = {{"summary", s}};
      break;
    }

    case ExperimentKind::mixing_vs_size: {
      Table s{{"experiment", "beta", "bc", "L", "replicas", "censored", "epsilon", "t_hat", "ci_low", "ci_high",
               "uncoupled_at_t_hat", "gap_exact"},
              {}};
      for (const auto& t : tasks) {
        if (t.param("measure") != "coupling") continue;
        double gap = std::numeric_limits<double>::quiet_NaN();
        for (const auto& g : tasks)
          if (g.param("measure") == "gap" && g.param("beta") == t.param("beta") && g.param("bc") == t.param("bc") &&
              g.param("L") == t.param("L") && !g.records.empty())
            gap = g.records.front().values[0];
        std::vector<double> times;
        for (const auto& r : t.records) times.push_back(r.values[0]);
        auto e = detail::safe_summary(times, c.epsilon);
        s.rows.push_back({exp, t.param("beta"), t.param("bc"), t.param("L"), num(std::uint64_t(times.size())),
                          num(std::uint64_t(e.censored)), num(c.epsilon), num(e.t_hat), num(e.ci_low), num(e.ci_high),
                          num(e.uncoupled_at_t_hat), num(gap)});
      }
      out = {{"summary", s}};
      break;
    }

    case ExperimentKind::censoring_benchmark: {
      Table s{{"experiment", "beta", "N", "kappa", "flip", "schedule", "region", "duration", "n_samples",
               "n_censored", "mean_time", "stderr", "median_time"},
              {}};
      for (const auto& t : tasks) {
        std::vector<double> ok;
        std::uint64_t censored = 0;
        for (const auto& r : t.records) {
          if (std::isinf(r.values[0]))
            ++censored;
          else
            ok.push_back(r.values[0]);
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        auto [m, se] = ok.size() >= 2 ? mean_and_stderr(ok) : std::pair{ok.empty() ? nan : ok[0], nan};
        double med = nan;
        if (!ok.empty()) {
          std::sort(ok.begin(), ok.end());
          med = ok.size() % 2 ? ok[ok.size() / 2] : 0.5 * (ok[ok.size() / 2 - 1] + ok[ok.size() / 2]);
        }
        s.rows.push_back({exp, t.param("beta"), num(c.N), num(c.kappa), c.flip, t.param("schedule"),
                          t.param("region"), t.param("duration"), num(std::uint64_t(t.records.size())),
                          num(censored), num(m), num(se), num(med)});
      }
      out = {{"summary", s}};
      break;
    }

    case ExperimentKind::bernoulli_bc: {
      Table s{{"experiment", "beta", "L", "p_plus", "threshold", "above_threshold", "replicas", "censored", "epsilon",
               "t_hat", "ci_low", "ci_high"},
              {}};
      for (const auto& t : tasks) {
        const double th = bernoulli_threshold(t.number("beta"));
        std::vector<double> times;
        for (const auto& r : t.records) times.push_back(r.values[0]);
        auto e = detail::safe_summary(times, c.epsilon);
        s.rows.push_back({exp, t.param("beta"), t.param("L"), t.param("p_plus"), num(th),
                          t.number("p_plus") >= th ? "1" : "0", num(std::uint64_t(times.size())),
                          num(std::uint64_t(e.censored)), num(c.epsilon), num(e.t_hat), num(e.ci_low),
                          num(e.ci_high)});
      }
      out = {{"summary", s}};
      break;
    }

    case ExperimentKind::autocorrelation: {
      auto grid = c.times;
      std::sort(grid.begin(), grid.end());
      Table s{{"experiment", "beta", "L", "t", "rho", "stderr", "rho_exact"}, {}};
      for (const auto& t : tasks) {
        if (t.param("measure") != "sampled") continue;
        std::vector<double> exact(grid.size(), std::numeric_limits<double>::quiet_NaN());
        for (const auto& e : tasks)
          if (e.param("measure") == "exact" && e.param("beta") == t.param("beta") && e.param("L") == t.param("L") &&
              !e.records.empty())
            for (std::size_t j = 0; j < grid.size(); ++j) exact[j] = e.records.front().values[j + 1];
        std::vector<std::vector<double>> rows;
        for (const auto& r : t.records) rows.push_back(r.values);
        std::vector<AutocorrPoint> pts;
        if (rows.size() >= 2) pts = summarize_autocorrelation(rows, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          s.rows.push_back({exp, t.param("beta"), t.param("L"), num(grid[j]), num(pts.empty() ? nan : pts[j].rho),
                            num(pts.empty() ? nan : pts[j].stderr), num(exact[j])});
        }
      }
      out = {{"summary", s}};
      break;
    }

    case ExperimentKind::oracle_suite: {
      Table s{{"experiment", "check", "items", "checks", "failed", "observational", "worst"}, {}};
      for (const auto& t : tasks) {
        double checks = 0, failed = 0, obs = 0, worst = 0;
        for (const auto& r : t.records) {
          checks += r.values[0];
          failed += r.values[1];
          obs += r.values[2];
          worst = std::max(worst, r.values[3]);
        }
        s.rows.push_back({exp, t.param("check"), num(std::uint64_t(t.records.size())), num(checks), num(failed),
                          num(obs), num(worst)});
      }
      out = {{"summary", s}};
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Execution.

struct RunOptions {
  unsigned workers = 1;
  std::optional<std::filesystem::path> checkpoint_dir;  // per-task replica logs
  bool resume = false;  // keep existing logs; otherwise they are cleared first
  double time_budget_s = 0;
};

inline std::filesystem::path checkpoint_file(const std::filesystem::path& dir, const std::string& key) {
  return dir / (hex64(fnv1a(key)) + ".ckpt");
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto plan = plan_experiment(c);
  ExperimentResult res;
  res.config = c;
  res.fields = plan.fields;
  if (opt.checkpoint_dir) std::filesystem::create_directories(*opt.checkpoint_dir);
  for (auto& t : plan.tasks) {
    PoolOptions po;
    po.workers = opt.workers;
    // oracle checks live in memory only, so those tasks never resume
    if (opt.checkpoint_dir && !plan.checks) {
      po.checkpoint = checkpoint_file(*opt.checkpoint_dir, t.key);
      if (!opt.resume) std::filesystem::remove(*po.checkpoint);
    }
    if (opt.time_budget_s > 0) {
      double left = opt.time_budget_s - std::chrono::duration<double>(clock::now() - start).count();
      po.time_budget_s = std::max(left, 1e-9);
    }
    auto pr = run_replicas(t.key, t.seed, t.replicas, t.work, po);
    res.tasks.push_back({t.label, t.params, t.key, t.seed, t.replicas, pr.complete, std::move(pr.records)});
  }
  if (plan.checks)
    for (auto& cs : *plan.checks)
      for (auto& ch : cs) res.checks.push_back(std::move(ch));
  res.tables = summarize(c, res.tasks);
  res.wall_s = std::chrono::duration<double>(clock::now() - start).count();
  return res;
}

}  // namespace isinglab
