#pragma once

// Workspace files (JSON):
//
//   { "n_nodes": 256,
//     "external": <curve>, "internal": [<curve>, ...],
//     "centers": [[x, y], ...], "anchor": [x, y] }
//
// <curve> is one of
//   {"kind": "circle", "center": [x, y], "radius": r, "orientation": "ccw"|"cw"}
//   {"kind": "ellipse", "center": [x, y], "semi_axes": [a, b], "rotation": t, "orientation": "ccw"|"cw"}
//   {"kind": "trig_polynomial", "center": [x, y], "terms": [[n, re, im], ...]}
//   {"kind": "point_list", "points": [[x, y], ...]}

#include <conav/core.hpp>
#include <conav/geometry.hpp>

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace conav {

using Json = nlohmann::json;

/// Parsed workspace file: the raw document, the curve specs and the sampled workspace.
struct WorkspaceFile {
  Json document;
  std::size_t n_nodes = 256;
  CurveSpec external;
  std::vector<CurveSpec> internal;
  Workspace workspace;
};

namespace detail {

inline Complex json_point(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError(what + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline double json_number(const Json& obj, const char* key, const std::string& what) {
  if (!obj.contains(key) || !obj[key].is_number()) throw FormatError(what + ": missing number '" + key + "'");
  return obj[key].get<double>();
}

inline Orientation json_orientation(const Json& obj, const std::string& what, Orientation fallback) {
  if (!obj.contains("orientation")) return fallback;
  const auto s = obj["orientation"].get<std::string>();
  if (s == "ccw" || s == "counterclockwise") return Orientation::counterclockwise;
  if (s == "cw" || s == "clockwise") return Orientation::clockwise;
  throw FormatError(what + ": unknown orientation '" + s + "'");
}

inline Json point_json(Complex p) { return Json::array({p.real(), p.imag()}); }

}  // namespace detail

/// Curve spec from its JSON object. `fallback` is the orientation used when none is given.
inline CurveSpec parse_curve_spec(const Json& j, const std::string& what,
                                  Orientation fallback = Orientation::counterclockwise) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw FormatError(what + ": curve must be an object with a 'kind'");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "circle") {
    return CurveSpec::circle(detail::json_point(j.at("center"), what), detail::json_number(j, "radius", what),
                             detail::json_orientation(j, what, fallback));
  }
  if (kind == "ellipse") {
    if (!j.contains("semi_axes")) throw FormatError(what + ": ellipse needs 'semi_axes'");
    const Complex ab = detail::json_point(j["semi_axes"], what + ".semi_axes");
    const double rot = j.contains("rotation") ? detail::json_number(j, "rotation", what) : 0.0;
    return CurveSpec::ellipse(detail::json_point(j.at("center"), what), ab.real(), ab.imag(), rot,
                              detail::json_orientation(j, what, fallback));
  }
  if (kind == "trig_polynomial") {
    if (!j.contains("terms") || !j["terms"].is_array()) throw FormatError(what + ": trig_polynomial needs 'terms'");
    std::vector<TrigTerm> terms;
    for (const auto& t : j["terms"]) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer())
        throw FormatError(what + ": each term is [n, re, im]");
      terms.push_back({t[0].get<int>(), Complex(t[1].get<double>(), t[2].get<double>())});
    }
    const Complex c = j.contains("center") ? detail::json_point(j["center"], what + ".center") : Complex(0.0);
    return CurveSpec::trig_polynomial(c, std::move(terms));
  }
  if (kind == "point_list") {
    if (!j.contains("points") || !j["points"].is_array()) throw FormatError(what + ": point_list needs 'points'");
    std::vector<Complex> pts;
    for (const auto& p : j["points"]) pts.push_back(detail::json_point(p, what + ".points"));
    return CurveSpec::point_list(std::move(pts));
  }
  throw FormatError(what + ": unknown curve kind '" + kind + "'");
}

/// Parse and sample a workspace document. n_nodes_override > 0 replaces the file's node count.
/// Parse/schema problems raise FormatError; sampling problems raise the geometry errors.
inline WorkspaceFile parse_workspace(const Json& doc, std::size_t n_nodes_override = 0) {
  if (!doc.is_object()) throw FormatError("workspace: top level must be an object");
  WorkspaceFile out;
  out.document = doc;
  try {
    out.n_nodes = n_nodes_override > 0 ? n_nodes_override
                                       : (doc.contains("n_nodes") ? doc["n_nodes"].get<std::size_t>() : 256);
    if (!doc.contains("external")) throw FormatError("workspace: missing 'external'");
    out.external = parse_curve_spec(doc["external"], "external", Orientation::counterclockwise);
    if (doc.contains("internal")) {
      if (!doc["internal"].is_array()) throw FormatError("workspace: 'internal' must be an array");
      for (std::size_t i = 0; i < doc["internal"].size(); ++i)
        out.internal.push_back(parse_curve_spec(doc["internal"][i], "internal[" + std::to_string(i) + "]",
                                                Orientation::clockwise));
    }
    if (doc.contains("centers")) {
      if (!doc["centers"].is_array()) throw FormatError("workspace: 'centers' must be an array");
      for (const auto& c : doc["centers"]) out.workspace.obstacle_centers.push_back(detail::json_point(c, "centers"));
    }
    if (!doc.contains("anchor")) throw FormatError("workspace: missing 'anchor'");
    out.workspace.interior_anchor = detail::json_point(doc["anchor"], "anchor");
  } catch (const Json::exception& e) {
    throw FormatError(std::string("workspace: ") + e.what());
  }
  out.workspace.external = sample_curve(out.external, out.n_nodes);
  for (const auto& spec : out.internal) out.workspace.internal.push_back(sample_curve(spec, out.n_nodes));
  return out;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline WorkspaceFile load_workspace(const std::string& path, std::size_t n_nodes_override = 0) {
  return parse_workspace(read_json_file(path), n_nodes_override);
}

/// FNV-1a 64-bit.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Cache key: hash of the canonical workspace document plus the node count and tolerance bits.
inline std::uint64_t workspace_hash(const Json& doc, std::size_t n_nodes, double tol) {
  const std::string canon = doc.dump();
  std::uint64_t h = fnv1a(canon.data(), canon.size());
  const auto n = static_cast<std::uint64_t>(n_nodes);
  h = fnv1a(&n, sizeof n, h);
  const auto bits = std::bit_cast<std::uint64_t>(tol);
  return fnv1a(&bits, sizeof bits, h);
}

}  // namespace conav
