#ifndef XHINGE_TOOLS_IO_HPP
#define XHINGE_TOOLS_IO_HPP

#include "xhinge/error.hpp"
#include "xhinge/geometry.hpp"
#include "xhinge/kinetostatics.hpp"
#include "xhinge/pareto.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace xhinge::io {

using json = nlohmann::ordered_json;

inline constexpr std::array<std::string_view, 3> kObjectiveColumns = {"r_bar", "c_bar", "k_bar"};
inline constexpr std::array<std::string_view, 3> kNormalizedColumns = {"r_norm", "c_norm", "k_norm"};
inline constexpr std::array<std::string_view, 3> kWeightColumns = {"w_r", "w_c", "w_k"};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::ConfigError, "malformed number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<double> parse_list(std::string_view s) {
  std::vector<double> v;
  for (const auto& item : split(s)) v.push_back(parse_double(item));
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::ptrdiff_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                              std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

/// Design vectors from any CSV carrying the 13 design columns by name.
inline std::vector<DesignVector> designs_from_table(const CsvTable& t) {
  std::array<std::ptrdiff_t, kNumDesignVars> idx{};
  for (std::size_t i = 0; i < kNumDesignVars; ++i) {
    idx[i] = t.column(kDesignColumns[i]);
    if (idx[i] < 0) throw Error(ErrorCode::ConfigError, "missing design column " + std::string(kDesignColumns[i]));
  }
  std::vector<DesignVector> out;
  for (const auto& row : t.rows) {
    std::array<double, kNumDesignVars> v{};
    for (std::size_t i = 0; i < kNumDesignVars; ++i) v[i] = row[static_cast<std::size_t>(idx[i])];
    out.push_back(DesignVector::from_array(v));
  }
  return out;
}

inline std::vector<DesignVector> read_designs(const std::filesystem::path& path) {
  return designs_from_table(read_csv(path));
}

inline void write_designs(const std::filesystem::path& path, std::span<const DesignVector> designs) {
  CsvTable t;
  for (auto c : kDesignColumns) t.header.emplace_back(c);
  for (const auto& d : designs) {
    const auto a = d.to_array();
    t.rows.emplace_back(a.begin(), a.end());
  }
  write_csv(path, t);
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

/// Archive CSV: design columns, raw objectives, normalized objectives and
/// pseudo-weights (normalization from the archive's ideal/nadir).
inline CsvTable archive_table(const ParetoArchive& archive) {
  CsvTable t;
  for (auto c : kDesignColumns) t.header.emplace_back(c);
  for (auto c : kObjectiveColumns) t.header.emplace_back(c);
  for (auto c : kNormalizedColumns) t.header.emplace_back(c);
  for (auto c : kWeightColumns) t.header.emplace_back(c);
  for (const auto& e : archive.entries) {
    std::vector<double> row = e.x;
    row.insert(row.end(), e.y.begin(), e.y.end());
    const auto yn = normalize(e.y, archive.ideal, archive.nadir);
    row.insert(row.end(), yn.begin(), yn.end());
    try {
      const auto w = pseudo_weights(yn);
      row.insert(row.end(), w.begin(), w.end());
    } catch (const Error&) {
      row.insert(row.end(), 3, std::nan(""));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline json archive_sidecar(const ParetoArchive& archive) {
  json j;
  j["objectives"] = kObjectiveColumns;
  j["count"] = archive.size();
  j["ideal"] = archive.ideal;
  j["nadir"] = archive.nadir;
  return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

inline void write_archive(const std::filesystem::path& csv, const ParetoArchive& archive) {
  write_csv(csv, archive_table(archive));
  write_json(sidecar_path(csv), archive_sidecar(archive));
}

/// Reads an archive CSV; ideal/nadir come from the sidecar when present,
/// otherwise from the entries.
inline ParetoArchive read_archive(const std::filesystem::path& csv) {
  const CsvTable t = read_csv(csv);
  const auto designs = designs_from_table(t);
  std::array<std::ptrdiff_t, 3> obj{};
  for (std::size_t i = 0; i < 3; ++i) {
    obj[i] = t.column(kObjectiveColumns[i]);
    if (obj[i] < 0) throw Error(ErrorCode::ConfigError, "missing objective column " + std::string(kObjectiveColumns[i]));
  }
  ParetoArchive a;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto x = designs[r].to_array();
    ArchiveEntry e{{x.begin(), x.end()}, {}};
    for (auto c : obj) e.y.push_back(t.rows[r][static_cast<std::size_t>(c)]);
    a.entries.push_back(std::move(e));
  }
  const auto side = sidecar_path(csv);
  if (std::filesystem::exists(side)) {
    const json j = read_json(side);
    a.ideal = j.at("ideal").get<std::vector<double>>();
    a.nadir = j.at("nadir").get<std::vector<double>>();
  } else {
    a.recompute_bounds();
  }
  return a;
}

inline json design_json(const DesignVector& d) {
  json j;
  const auto a = d.to_array();
  for (std::size_t i = 0; i < kNumDesignVars; ++i) j[std::string(kDesignColumns[i])] = a[i];
  return j;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json objectives_json(const ObjectiveVector& o) {
  json j;
  j["feasible"] = o.feasible;
  j["violation"] = o.violation;
  j["r_bar"] = number_or_null(o.r_bar);
  j["c_bar"] = number_or_null(o.c_bar);
  j["k_bar"] = number_or_null(o.k_bar);
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

inline json report_json(const DesignVector& d, const ObjectiveVector& o) {
  json j;
  j["design"] = design_json(d);
  const json obj = objectives_json(o);
  for (const auto& [k, v] : obj.items()) j[k] = v;
  return j;
}

inline json points_json(std::span<const Vec2> pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

inline std::vector<Vec2> points_from_json(const json& arr) {
  std::vector<Vec2> out;
  for (const auto& p : arr) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return out;
}

/// Per-step sweep dump with nodal positions of both flexures.
inline json trace_json(const DesignVector& d, const EvaluationDetail& det) {
  json j = report_json(d, det.objectives);
  j["max_strain"] = det.sweep.max_strain;
  j["converged"] = det.sweep.converged;
  json reference = json::array();
  for (const auto& f : det.geometry.flexures) {
    reference.push_back({{"height", f.height}, {"centerline", points_json(positions(f.samples))}});
  }
  j["reference"] = reference;
  json steps = json::array();
  for (std::size_t k = 0; k < det.sweep.records.size(); ++k) {
    const auto& r = det.sweep.records[k];
    json s;
    s["phi"] = r.phi;
    s["x_A"] = {r.tip.x(), r.tip.y()};
    s["M"] = r.moment;
    s["K_t"] = {{r.stiffness(0, 0), r.stiffness(0, 1)}, {r.stiffness(1, 0), r.stiffness(1, 1)}};
    s["max_strain"] = r.max_strain;
    s["iterations"] = r.iterations;
    if (det.model && k < det.sweep.states.size()) {
      json nodes = json::array();
      for (std::size_t f = 0; f < det.model->flexures.size(); ++f)
        nodes.push_back(points_json(fem::deformed_positions(*det.model, det.sweep.states[k], static_cast<int>(f))));
      s["nodes"] = nodes;
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = steps;
  return j;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 15> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

} // namespace xhinge::io

#endif
