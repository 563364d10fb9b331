#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isinglab/harness/experiments.hpp"

namespace isinglab {

namespace fs = std::filesystem;

// Output layout of one run in <out>:
//   <kind>_records.csv   one row per replica: task, replica, seed, observables
//   <kind>_summary.csv   aggregates (fixed per-kind schema)
//   <kind>_fit.csv       log-scale fits (strip-fluctuation, positivity-scaling)
//   <kind>.json          sidecar: config, seeds, version, task list, timings
//   identity_report.jsonl  oracle-suite checks
// Every CSV is a pure function of (config, master seed); wall-clock data
// lives only in the sidecar's "timings" object.

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
  return o + "\"";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + csv_escape(cells[k]);
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> cur;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cur.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      cur.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else {
      cell += c;
    }
  }
  if (any) {
    cur.push_back(std::move(cell));
    rows.push_back(std::move(cur));
  }
  return rows;
}

inline Table records_table(const ExperimentResult& r) {
  Table t{{"task", "replica", "seed"}, {}};
  for (const auto& f : r.fields) t.header.push_back(f);
  for (const auto& task : r.tasks)
    for (const auto& rec : task.records) {
      std::vector<std::string> row{task.label, std::to_string(rec.replica), std::to_string(rec.seed)};
      for (double v : rec.values) row.push_back(format_double(v));
      t.rows.push_back(std::move(row));
    }
  return t;
}

inline nlohmann::ordered_json sidecar(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["experiment"] = to_string(r.config.kind);
  j["config_hash"] = hex64(r.config.hash());
  j["master_seed"] = r.config.seed;
  j["config"] = r.config.text();
  j["fields"] = r.fields;
  auto tasks = nlohmann::ordered_json::array();
  double total_ms = 0;
  nlohmann::ordered_json per_task = nlohmann::ordered_json::object();
  for (const auto& t : r.tasks) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.params) p[k] = v;
    tasks.push_back({{"label", t.label},
                     {"key", t.key},
                     {"task_seed", t.seed},
                     {"replicas", t.replicas},
                     {"completed", t.records.size()},
                     {"complete", t.complete},
                     {"params", p}});
    double ms = 0;
    for (const auto& rec : t.records) ms += rec.wall_ms;
    per_task[t.label] = ms;
    total_ms += ms;
  }
  j["tasks"] = tasks;
  j["timings"] = {{"wall_s", r.wall_s}, {"replica_cpu_ms", total_ms}, {"per_task_ms", per_task}};
  return j;
}

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + p.string());
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<fs::path> emit(const ExperimentResult& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string kind = to_string(r.config.kind);
  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    auto p = out_dir / name;
    write_file(p, text);
    written.push_back(p);
  };
  put(kind + "_records.csv", to_csv(records_table(r)));
  for (const auto& [name, table] : r.tables) put(kind + "_" + name + ".csv", to_csv(table));
  if (r.config.kind == ExperimentKind::oracle_suite) put("identity_report.jsonl", jsonl(r.checks));
  put(kind + ".json", sidecar(r).dump(2) + "\n");
  return written;
}

// Rebuilds a result (without oracle checks or timings) from an output
// directory: config and task list from the sidecar, records from the CSV.
inline ExperimentResult load_result(const fs::path& dir) {
  fs::path side;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") side = e.path();
  if (side.empty()) throw std::runtime_error("no sidecar .json in " + dir.string());
  auto j = nlohmann::ordered_json::parse(read_file(side));
  ExperimentResult r;
  r.config = parse_config(j.at("config").get<std::string>());
  r.fields = j.at("fields").get<std::vector<std::string>>();
  std::map<std::string, std::size_t> by_label;
  for (const auto& t : j.at("tasks")) {
    TaskOutcome o;
    o.label = t.at("label");
    o.key = t.at("key");
    o.seed = t.at("task_seed");
    o.replicas = t.at("replicas");
    o.complete = t.at("complete");
    for (const auto& [k, v] : t.at("params").items()) o.params.push_back({k, v.get<std::string>()});
    by_label[o.label] = r.tasks.size();
    r.tasks.push_back(std::move(o));
  }
  const auto csv = dir / (to_string(r.config.kind) + "_records.csv");
  auto rows = parse_csv(read_file(csv));
  if (rows.empty()) throw std::runtime_error("empty records file " + csv.string());
  const std::size_t width = 3 + r.fields.size();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != width) throw std::runtime_error(csv.string() + ": bad row " + std::to_string(i + 1));
    auto it = by_label.find(row[0]);
    if (it == by_label.end()) throw std::runtime_error(csv.string() + ": unknown task " + row[0]);
    ResultRecord rec;
    rec.replica = std::stoull(row[1]);
    rec.seed = std::stoull(row[2]);
    for (std::size_t k = 3; k < width; ++k) {
      double v = 0;
      const auto& s = row[k];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error(csv.string() + ": bad number '" + s + "'");
      rec.values.push_back(v);
    }
    r.tasks[it->second].records.push_back(std::move(rec));
  }
  return r;
}

// Largest numeric difference between two tables of the same shape (strings
// must match exactly); +inf when shapes or text cells differ.
inline double table_difference(const std::vector<std::vector<std::string>>& a,
                               const std::vector<std::vector<std::string>>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return INFINITY;
    for (std::size_t k = 0; k < a[i].size(); ++k) {
      if (a[i][k] == b[i][k]) continue;
      double x = 0, y = 0;
      auto [p1, e1] = std::from_chars(a[i][k].data(), a[i][k].data() + a[i][k].size(), x);
      auto [p2, e2] = std::from_chars(b[i][k].data(), b[i][k].data() + b[i][k].size(), y);
      if (e1 != std::errc() || e2 != std::errc()) return INFINITY;
      if (std::isnan(x) && std::isnan(y)) continue;
      worst = std::max(worst, std::abs(x - y));
    }
  }
  return worst;
}

struct ReportEntry {
  fs::path file;
  Table table;
  double max_difference = 0;  // against the file on disk (inf if absent)
};

// Recomputes every summary table from the raw records and compares with
// the emitted files.
inline std::vector<ReportEntry> report(const fs::path& dir) {
  auto r = load_result(dir);
  std::vector<ReportEntry> out;
  for (auto& [name, table] : summarize(r.config, r.tasks)) {
    ReportEntry e{dir / (to_string(r.config.kind) + "_" + name + ".csv"), table, INFINITY};
    if (fs::exists(e.file)) e.max_difference = table_difference(parse_csv(read_file(e.file)), parse_csv(to_csv(table)));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace isinglab
