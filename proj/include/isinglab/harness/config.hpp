#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isinglab/core/errors.hpp"
#include "isinglab/core/format.hpp"

namespace isinglab {

enum class ExperimentKind {
  strip_fluctuation,
  positivity_scaling,
  large_deviation_tail,
  mixing_vs_size,
  censoring_benchmark,
  bernoulli_bc,
  autocorrelation,
  oracle_suite
};

inline const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::strip_fluctuation, "strip-fluctuation"},
      {ExperimentKind::positivity_scaling, "positivity-scaling"},
      {ExperimentKind::large_deviation_tail, "large-deviation-tail"},
      {ExperimentKind::mixing_vs_size, "mixing-vs-size"},
      {ExperimentKind::censoring_benchmark, "censoring-benchmark"},
      {ExperimentKind::bernoulli_bc, "bernoulli-bc"},
      {ExperimentKind::autocorrelation, "autocorrelation"},
      {ExperimentKind::oracle_suite, "oracle-suite"}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (auto& [kk, n] : kind_names())
    if (kk == k) return n;
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto& [k, n] : kind_names())
    if (n == s) return k;
  throw ConfigError("unknown experiment kind: " + s);
}

// Flat key = value configuration. Lists are comma separated; '#' starts a
// comment. Only the keys below are accepted.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::oracle_suite;
  std::vector<double> beta{0.7};
  std::vector<int> ell;              // strip widths
  std::vector<double> x;             // height grid in units of sqrt(ell)
  double alpha = 2;                  // rectangle aspect: ell x ceil(alpha sqrt ell)
  double s = 1;                      // Delta length factor
  std::vector<int> L;                // box sides
  int N = 0;                         // top scale of the recursive schedule
  double kappa = 1;
  std::optional<int> n_base;
  double growth_c = 0.05;
  double t_base = 1;
  std::string flip = "none";         // Delta flips: none | within | between
  std::vector<std::string> bc{"plus"};
  std::string rule = "heat-bath";
  std::uint64_t replicas = 100;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double time_budget = 0;            // seconds, 0 = unlimited
  double epsilon = 0.25;
  int cutoff = 0;                    // strip half-height, 0 = default
  std::vector<double> p_plus;
  std::vector<double> times;
  double max_events = 17179869184.0;  // 2^34 per replica
  int trials = 20;                   // oracle-suite randomized graphs

  // Canonical text of every field that influences results. Replica count,
  // workers and the time budget are excluded: they change how much is
  // computed, not what any replica computes.
  std::string canonical() const {
    std::ostringstream o;
    auto list = [&](const auto& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>)
          s += format_double(v[i]);
        else if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, std::string>)
          s += v[i];
        else
          s += std::to_string(v[i]);
      }
      return s;
    };
    o << "kind=" << to_string(kind) << "\nbeta=" << list(beta) << "\nell=" << list(ell) << "\nx=" << list(x)
      << "\nalpha=" << format_double(alpha) << "\ns=" << format_double(s) << "\nL=" << list(L) << "\nN=" << N
      << "\nkappa=" << format_double(kappa) << (n_base ? "\nn_base=" + std::to_string(*n_base) : std::string())
      << "\ngrowth_c=" << format_double(growth_c) << "\nt_base=" << format_double(t_base) << "\nflip=" << flip
      << "\nbc=" << list(bc) << "\nrule=" << rule << "\nseed=" << seed << "\nepsilon=" << format_double(epsilon)
      << "\ncutoff=" << cutoff << "\np_plus=" << list(p_plus) << "\ntimes=" << list(times)
      << "\nmax_events=" << format_double(max_events) << "\ntrials=" << trials << "\n";
    return o.str();
  }

  std::uint64_t hash() const { return fnv1a(canonical()); }

  // Full text form, readable by parse_config.
  std::string text() const {
    return canonical() + "replicas=" + std::to_string(replicas) + "\nworkers=" + std::to_string(workers) +
           "\ntime_budget=" + format_double(time_budget) + "\n";
  }

  // Everything a kind needs, checked before any work starts.
  void validate() const {
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw ConfigError(to_string(kind) + ": " + what);
    };
    auto positive = [&](const auto& v, const char* what) {
      for (auto e : v) need(e > 0, what);
    };
    need(!beta.empty(), "beta is required");
    positive(beta, "beta must be positive");
    positive(ell, "ell values must be positive");
    positive(x, "x values must be positive");
    positive(L, "L values must be positive");
    positive(times, "times must be positive");
    need(alpha > 0 && s > 0 && kappa > 0 && t_base > 0 && growth_c >= 0, "alpha, s, kappa, t_base must be positive");
    need(replicas > 0, "replicas must be positive");
    need(epsilon > 0 && epsilon < 1, "epsilon must lie in (0,1)");
    need(max_events > 0, "max_events must be positive");
    need(rule == "heat-bath" || rule == "metropolis", "rule must be heat-bath or metropolis");
    need(flip == "none" || flip == "within" || flip == "between", "flip must be none, within or between");
    for (double p : p_plus) need(p >= 0 && p <= 1, "p_plus values must lie in [0,1]");
    switch (kind) {
      case ExperimentKind::strip_fluctuation:
        need(!ell.empty() && !x.empty(), "needs ell and x");
        break;
      case ExperimentKind::positivity_scaling:
        need(ell.size() >= 2, "needs at least two ell values");
        break;
      case ExperimentKind::large_deviation_tail:
        need(!ell.empty() && !x.empty(), "needs ell and x (delta grid)");
        break;
      case ExperimentKind::mixing_vs_size:
      case ExperimentKind::autocorrelation:
        need(!L.empty(), "needs L");
        if (kind == ExperimentKind::autocorrelation) need(!times.empty(), "needs times");
        need(rule == "heat-bath", "coupling estimates need the heat-bath rule");
        break;
      case ExperimentKind::censoring_benchmark:
        need(N > 0, "needs N");
        break;
      case ExperimentKind::bernoulli_bc:
        need(!L.empty() && !p_plus.empty(), "needs L and p_plus");
        break;
      case ExperimentKind::oracle_suite:
        need(trials > 0, "trials must be positive");
        break;
    }
    for (int l : ell) need(l <= 64, "ell is limited to 64 (packed sampler width)");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

// Comma separated items; commas inside parentheses do not split, so side
// specs like (-,-,+,-) survive.
inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  int depth = 0;
  auto flush = [&] {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
    item.clear();
  };
  for (char c : v) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0)
      flush();
    else
      item += c;
  }
  flush();
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_same_v<T, double>)
      out = std::stod(v, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      out = std::stoull(v, &used);
    else
      out = static_cast<T>(std::stoll(v, &used));
    if (used != v.size()) throw std::invalid_argument("trailing text");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": " + v);
  }
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  for (auto& item : split_list(v)) out.push_back(parse_number<T>(key, item));
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool has_kind = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), v = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key: " + key);
    using namespace detail;
    if (key == "kind") c.kind = parse_kind(v), has_kind = true;
    else if (key == "beta") c.beta = parse_list<double>(key, v);
    else if (key == "ell") c.ell = parse_list<int>(key, v);
    else if (key == "x") c.x = parse_list<double>(key, v);
    else if (key == "alpha") c.alpha = parse_number<double>(key, v);
    else if (key == "s") c.s = parse_number<double>(key, v);
    else if (key == "L") c.L = parse_list<int>(key, v);
    else if (key == "N") c.N = parse_number<int>(key, v);
    else if (key == "kappa") c.kappa = parse_number<double>(key, v);
    else if (key == "n_base") c.n_base = parse_number<int>(key, v);
    else if (key == "growth_c") c.growth_c = parse_number<double>(key, v);
    else if (key == "t_base") c.t_base = parse_number<double>(key, v);
    else if (key == "flip") c.flip = v;
    else if (key == "bc") c.bc = split_list(v);
    else if (key == "rule") c.rule = v;
    else if (key == "replicas") c.replicas = parse_number<std::uint64_t>(key, v);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "workers") c.workers = parse_number<unsigned>(key, v);
    else if (key == "time_budget") c.time_budget = parse_number<double>(key, v);
    else if (key == "epsilon") c.epsilon = parse_number<double>(key, v);
    else if (key == "cutoff") c.cutoff = parse_number<int>(key, v);
    else if (key == "p_plus") c.p_plus = parse_list<double>(key, v);
    else if (key == "times") c.times = parse_list<double>(key, v);
    else if (key == "max_events") c.max_events = parse_number<double>(key, v);
    else if (key == "trials") c.trials = parse_number<int>(key, v);
    else throw ConfigError("unknown key: " + key);
  }
  if (!has_kind) throw ConfigError("missing key: kind");
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace isinglab
