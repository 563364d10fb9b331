#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "isinglab/core/errors.hpp"
#include "isinglab/core/format.hpp"

namespace isinglab {

// One replica's output. `values` are the observables; wall time is kept
// apart because it is the only field that differs between reruns.
struct ResultRecord {
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  double wall_ms = 0;
};

// Append-only replica log. Each line carries its own FNV-1a hash, so a
// tampered line is rejected while a torn final line (killed writer) is
// dropped and recomputed.
//
//   #isinglab-checkpoint <task-key-hash> <hash>
//   <replica> <seed> <wall_ms> <v1> ... <vk> <hash>
class Checkpoint {
 public:
  Checkpoint(std::filesystem::path path, std::string task_key)
      : path_(std::move(path)), key_(std::move(task_key)) {}

  const std::filesystem::path& path() const { return path_; }

  // Completed records keyed by replica id.
  std::map<std::uint64_t, ResultRecord> load() const {
    std::map<std::uint64_t, ResultRecord> out;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return out;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    bool header = false;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string::npos) break;  // torn tail
      std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      auto cut = line.rfind(' ');
      if (cut == std::string::npos || hex64(fnv1a(line.substr(0, cut))) != line.substr(cut + 1))
        throw CorruptCheckpoint("corrupt checkpoint line in " + path_.string());
      std::string body = line.substr(0, cut);
      if (!header) {
        if (body != header_body()) throw CorruptCheckpoint("checkpoint " + path_.string() + " belongs to another task");
        header = true;
        continue;
      }
      std::istringstream is(body);
      ResultRecord r;
      is >> r.replica >> r.seed >> r.wall_ms;
      std::string tok;
      while (is >> tok) r.values.push_back(std::stod(tok));
      out[r.replica] = std::move(r);
    }
    return out;
  }

  // Opens for appending, rewriting the file without any torn tail.
  void open_for_append(const std::map<std::uint64_t, ResultRecord>& existing) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    auto tmp = path_;
    tmp += ".tmp";
    {
      std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
      if (!o) throw std::runtime_error("cannot write checkpoint " + tmp.string());
      write_line(o, header_body());
      for (const auto& [id, r] : existing) write_line(o, record_body(r));
    }
    std::filesystem::rename(tmp, path_);
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("cannot append to checkpoint " + path_.string());
  }

  void append(const ResultRecord& r) {
    write_line(out_, record_body(r));
    out_.flush();
  }

 private:
  std::string header_body() const { return "#isinglab-checkpoint " + hex64(fnv1a(key_)); }

  static std::string record_body(const ResultRecord& r) {
    std::string s = std::to_string(r.replica) + " " + std::to_string(r.seed) + " " + format_double(r.wall_ms);
    for (double v : r.values) s += " " + format_double(v);
    return s;
  }

  static void write_line(std::ostream& o, const std::string& body) { o << body << ' ' << hex64(fnv1a(body)) << '\n'; }

  std::filesystem::path path_;
  std::string key_;
  std::ofstream out_;
};

}  // namespace isinglab
