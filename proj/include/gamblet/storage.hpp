#pragma once

// On-disk caching. Hierarchies go to a JSON document; a GambletSystem goes to a
// directory of CSV matrices plus manifest.json (sizes, trunc, hierarchy hash).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamblet/error.hpp"
#include "gamblet/gamblets.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/matrix_io.hpp"

namespace gamblet {

using Json = nlohmann::json;

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, Index cols) {
  const auto rows = static_cast<Index>(j.size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    require(static_cast<Index>(row.size()) == cols, ErrorCode::Io, "ragged matrix row in JSON");
    for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace detail

inline Json hierarchy_to_json(const Hierarchy& h) {
  Json j;
  j["dim"] = h.dim;
  j["h"] = h.h;
  j["sizes"] = h.sizes;
  Json agg = Json::array();
  for (const auto& p : h.aggregation) agg.push_back(detail::matrix_to_json(p));
  j["aggregation"] = std::move(agg);
  Json det = Json::array();
  for (const auto& w : h.details) det.push_back(detail::matrix_to_json(w));
  j["details"] = std::move(det);
  j["parents"] = h.parents;
  j["cell_volumes"] = h.cell_volumes;
  j["centers"] = h.centers;
  j["fine_points"] = h.fine_points;
  j["merged_levels"] = h.merged_levels;
  j["point_level_appended"] = h.point_level_appended;
  j["min_points_per_box"] = h.min_points_per_box;
  j["max_points_per_box"] = h.max_points_per_box;
  return j;
}

inline Hierarchy hierarchy_from_json(const Json& j) {
  try {
    Hierarchy h;
    h.dim = j.at("dim").get<int>();
    h.h = j.at("h").get<double>();
    h.sizes = j.at("sizes").get<std::vector<Index>>();
    const int q = h.levels();
    const auto& agg = j.at("aggregation");
    detail::require(static_cast<int>(agg.size()) == std::max(q - 1, 0), ErrorCode::Io, "aggregation count");
    for (int k = 1; k < q; ++k)
      h.aggregation.push_back(
          detail::matrix_from_json(agg.at(static_cast<std::size_t>(k - 1)), h.sizes[static_cast<std::size_t>(k)]));
    const auto& det = j.at("details");
    detail::require(static_cast<int>(det.size()) == std::max(q - 1, 0), ErrorCode::Io, "detail count");
    for (int k = 2; k <= q; ++k)
      h.details.push_back(
          detail::matrix_from_json(det.at(static_cast<std::size_t>(k - 2)), h.sizes[static_cast<std::size_t>(k - 1)]));
    h.parents = j.at("parents").get<std::vector<std::vector<Index>>>();
    h.cell_volumes = j.at("cell_volumes").get<std::vector<std::vector<double>>>();
    h.centers = j.at("centers").get<std::vector<std::vector<Point2>>>();
    h.fine_points = j.at("fine_points").get<std::vector<Index>>();
    h.merged_levels = j.at("merged_levels").get<std::vector<int>>();
    h.point_level_appended = j.at("point_level_appended").get<bool>();
    h.min_points_per_box = j.at("min_points_per_box").get<Index>();
    h.max_points_per_box = j.at("max_points_per_box").get<Index>();
    return h;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("hierarchy JSON: ") + e.what());
  }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::string hierarchy_hash(const Hierarchy& h) { return hex64(fnv1a(hierarchy_to_json(h).dump())); }

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + p.string());
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for " + p.string());
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline constexpr int kSystemFormat = 1;

/// Writes A_k, B_k (k = 1..q), R_k, N_k (k = 2..q) as CSV plus hierarchy.json and
/// manifest.json. `input_hash` identifies whatever produced the system (config,
/// operator) and is stored verbatim for cache checks.
inline void save_system(const GambletSystem& sys, const std::filesystem::path& dir, const std::string& input_hash = "") {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const int q = sys.levels();
  for (int k = 1; k <= q; ++k) {
    write_csv_file((dir / ("A_" + std::to_string(k) + ".csv")).string(), sys.A(k).dense());
    write_csv_file((dir / ("B_" + std::to_string(k) + ".csv")).string(), sys.B(k).dense());
  }
  for (int k = 2; k <= q; ++k) {
    write_csv_file((dir / ("R_" + std::to_string(k) + ".csv")).string(), sys.R(k));
    write_csv_file((dir / ("N_" + std::to_string(k) + ".csv")).string(), sys.N(k));
  }
  write_text(dir / "hierarchy.json", hierarchy_to_json(*sys.hierarchy).dump());
  Json m;
  m["format"] = kSystemFormat;
  m["levels"] = q;
  std::vector<Index> sizes;
  std::vector<Index> details;
  for (int k = 1; k <= q; ++k) {
    sizes.push_back(sys.hierarchy->size(k));
    details.push_back(sys.hierarchy->detail_size(k));
  }
  m["sizes"] = sizes;
  m["detail_sizes"] = details;
  m["trunc"] = sys.trunc;
  m["hierarchy_hash"] = hierarchy_hash(*sys.hierarchy);
  m["input_hash"] = input_hash;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

namespace detail {

template <class T>
T manifest_field(const Json& m, const std::string& key) {
  if (!m.contains(key)) throw Error(ErrorCode::Io, "manifest field '" + key + "' is missing");
  try {
    return m.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::Io, "manifest field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Json read_manifest(const std::filesystem::path& dir) {
  const std::string text = read_text(dir / "manifest.json");
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, "manifest.json is not valid JSON: " + std::string(e.what()));
  }
}

/// Inverse of save_system; every manifest field is checked against the stored
/// hierarchy and matrices, and a mismatch names the field.
inline GambletSystem load_system(const std::filesystem::path& dir) {
  const Json m = read_manifest(dir);
  const int format = detail::manifest_field<int>(m, "format");
  detail::require(format == kSystemFormat, ErrorCode::Io, "manifest field 'format' unsupported: " + std::to_string(format));
  const int q = detail::manifest_field<int>(m, "levels");
  const auto sizes = detail::manifest_field<std::vector<Index>>(m, "sizes");
  const auto details = detail::manifest_field<std::vector<Index>>(m, "detail_sizes");
  const double trunc = detail::manifest_field<double>(m, "trunc");
  const auto hash = detail::manifest_field<std::string>(m, "hierarchy_hash");
  (void)detail::manifest_field<std::string>(m, "input_hash");

  Json hj;
  try {
    hj = Json::parse(read_text(dir / "hierarchy.json"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, "hierarchy.json is not valid JSON: " + std::string(e.what()));
  }
  auto hier = std::make_shared<const Hierarchy>(hierarchy_from_json(hj));
  detail::require(hierarchy_hash(*hier) == hash, ErrorCode::Io, "manifest field 'hierarchy_hash' does not match hierarchy.json");
  detail::require(q == hier->levels(), ErrorCode::Io, "manifest field 'levels' does not match the hierarchy");
  detail::require(static_cast<int>(sizes.size()) == q, ErrorCode::Io, "manifest field 'sizes' has the wrong length");
  detail::require(static_cast<int>(details.size()) == q, ErrorCode::Io, "manifest field 'detail_sizes' has the wrong length");
  for (int k = 1; k <= q; ++k) {
    detail::require(sizes[static_cast<std::size_t>(k - 1)] == hier->size(k), ErrorCode::Io,
                    "manifest field 'sizes' disagrees at level " + std::to_string(k));
    detail::require(details[static_cast<std::size_t>(k - 1)] == hier->detail_size(k), ErrorCode::Io,
                    "manifest field 'detail_sizes' disagrees at level " + std::to_string(k));
  }
  detail::require(trunc >= 0.0, ErrorCode::Io, "manifest field 'trunc' is negative");

  GambletSystem sys;
  sys.hierarchy = hier;
  sys.trunc = trunc;
  auto load = [&](const std::string& name, Index rows, Index cols) {
    const Matrix mat = read_csv_file((dir / name).string());
    detail::require(mat.rows() == rows && mat.cols() == cols, ErrorCode::Io,
                    name + " has shape " + std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()) +
                        ", manifest field 'sizes' implies " + std::to_string(rows) + "x" + std::to_string(cols));
    return mat;
  };
  for (int k = 1; k <= q; ++k) {
    const Index n = hier->size(k);
    sys.a.push_back(SymMatrix::from(load("A_" + std::to_string(k) + ".csv", n, n)));
    sys.b.push_back(SymMatrix::from(load("B_" + std::to_string(k) + ".csv", hier->detail_size(k), hier->detail_size(k))));
    sys.b_chol.push_back(cholesky(sys.b.back()));
  }
  for (int k = 2; k <= q; ++k) {
    sys.r.push_back(load("R_" + std::to_string(k) + ".csv", hier->size(k - 1), hier->size(k)));
    sys.n.push_back(load("N_" + std::to_string(k) + ".csv", hier->size(k), hier->detail_size(k)));
  }
  check_invariants(sys);
  return sys;
}

}  // namespace gamblet
