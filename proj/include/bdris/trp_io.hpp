#pragma once

// Plain-text persistence for candidate pools and selected TRP sets.
//
//   bdris-trps 1
//   kind pool|set
//   n_elements <N>
//   group_size <N0>
//   count <rows>
//   length <N0*N+1>
//   indices <i_0> ... <i_{count-1}>      (kind set only)
//   <(re,im)> x length                   (one line per TRP)
//
// Entries are written with 17 significant digits, so a write/read round trip
// is exact. Lines starting with '#' are ignored.

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bdris/common.hpp"
#include "bdris/trp_select.hpp"

namespace bdris {

namespace detail {

inline void write_trps(std::ostream& out, const char* kind, int n_elements, int group_size,
                       const std::vector<TrpVector>& trps, const std::vector<int>* indices) {
  const auto length = trps.empty() ? static_cast<Eigen::Index>(group_size) * n_elements + 1
                                   : trps.front().size();
  out << "bdris-trps 1\n"
      << "kind " << kind << '\n'
      << "n_elements " << n_elements << '\n'
      << "group_size " << group_size << '\n'
      << "count " << trps.size() << '\n'
      << "length " << length << '\n';
  if (indices) {
    out << "indices";
    for (int i : *indices) out << ' ' << i;
    out << '\n';
  }
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& v : trps) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v.entries(i);
    out << '\n';
  }
}

struct TrpFile {
  std::string kind;
  int n_elements = 0;
  int group_size = 0;
  std::vector<int> indices;
  std::vector<TrpVector> trps;
};

inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

template <typename T>
T read_field(std::istream& in, const std::string& key, const std::string& origin) {
  std::string line;
  if (!next_line(in, line)) throw IoError(origin + ": missing '" + key + "'");
  std::istringstream ss(line);
  std::string k;
  T value{};
  if (!(ss >> k >> value) || k != key) throw IoError(origin + ": expected '" + key + " <value>'");
  return value;
}

inline TrpFile read_trps(std::istream& in, const std::string& origin) {
  std::string line;
  if (!next_line(in, line) || line != "bdris-trps 1")
    throw IoError(origin + ": not a bdris-trps v1 file");
  TrpFile f;
  f.kind = read_field<std::string>(in, "kind", origin);
  if (f.kind != "pool" && f.kind != "set") throw IoError(origin + ": unknown kind '" + f.kind + "'");
  f.n_elements = read_field<int>(in, "n_elements", origin);
  f.group_size = read_field<int>(in, "group_size", origin);
  const long count = read_field<long>(in, "count", origin);
  const long length = read_field<long>(in, "length", origin);
  if (count < 0 || length < 1 || f.group_size < 1 ||
      length != static_cast<long>(f.group_size) * f.n_elements + 1)
    throw IoError(origin + ": inconsistent header");
  if (f.kind == "set") {
    if (!next_line(in, line)) throw IoError(origin + ": missing 'indices'");
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != "indices") throw IoError(origin + ": expected 'indices'");
    for (int i; ss >> i;) f.indices.push_back(i);
    if (static_cast<long>(f.indices.size()) != count)
      throw IoError(origin + ": index count does not match 'count'");
  }
  f.trps.reserve(count);
  for (long r = 0; r < count; ++r) {
    if (!next_line(in, line)) throw IoError(origin + ": expected " + std::to_string(count) + " TRPs");
    std::istringstream ss(line);
    TrpVector v{CVector(length)};
    for (long i = 0; i < length; ++i) {
      cplx z;
      if (!(ss >> z)) throw IoError(origin + ": TRP " + std::to_string(r) + " has too few entries");
      v.entries(i) = z;
    }
    std::string extra;
    if (ss >> extra) throw IoError(origin + ": TRP " + std::to_string(r) + " has too many entries");
    f.trps.push_back(std::move(v));
  }
  return f;
}

inline void write_file(const std::string& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace detail

inline void write_pool(std::ostream& out, const CandidatePool& pool) {
  detail::write_trps(out, "pool", pool.n_elements, pool.group_size, pool.trps, nullptr);
}

inline void write_trp_set(std::ostream& out, const TrpSet& set) {
  detail::write_trps(out, "set", set.n_elements, set.group_size, set.selected, &set.source_indices);
}

inline CandidatePool read_pool(std::istream& in, const std::string& origin = "<stream>") {
  auto f = detail::read_trps(in, origin);
  if (f.kind != "pool") throw IoError(origin + ": expected a pool, found kind '" + f.kind + "'");
  return {f.n_elements, f.group_size, std::move(f.trps)};
}

inline TrpSet read_trp_set(std::istream& in, const std::string& origin = "<stream>") {
  auto f = detail::read_trps(in, origin);
  if (f.kind != "set") throw IoError(origin + ": expected a TRP set, found kind '" + f.kind + "'");
  return {f.n_elements, f.group_size, std::move(f.trps), std::move(f.indices)};
}

inline void save_pool(const CandidatePool& pool, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_pool(o, pool); });
}

inline void save_trp_set(const TrpSet& set, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_trp_set(o, set); });
}

inline CandidatePool load_pool(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_pool(in, path);
}

inline TrpSet load_trp_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_trp_set(in, path);
}

}  // namespace bdris
