#pragma once

// Binary cache of a converged composite map. All integers little-endian as written by the host,
// doubles as raw IEEE-754 bits, so a round trip is bit-exact.
//
//   char[8]  magic "CONAVMAP"
//   u32      format_version
//   u64      workspace_hash
//   u64      n_nodes
//   f64      tol
//   i32      n_iterations
//   f64      final_delta
//   u64      stage count, then per stage:
//              u8 kind, c128 center, f64 c, u64 N (0 for affine),
//              c128[N] gamma, dgamma, ddgamma, f_boundary, map_boundary
//   u64      image curve count, then per curve: u64 N, c128[N] gamma, dgamma, ddgamma
//   u64      tracked point count, c128[] points
//   u64      delta count, f64[] deltas; u64 ratio count, f64[] ratios; u8 converged
//   sphere world: c128 external center, f64 external radius, f64 external residual,
//                 u64 M, per obstacle c128 center, f64 radius, f64 residual
//   source workspace: curve external, u64 M, M curves, u64 center count, c128[] centers, c128 anchor
//   u64      FNV-1a of every preceding byte
//
// c128 is two f64 (re, im).

#include <conav/core.hpp>
#include <conav/koebe.hpp>
#include <conav/workspace_io.hpp>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace conav {

inline constexpr char kCacheMagic[8] = {'C', 'O', 'N', 'A', 'V', 'M', 'A', 'P'};
inline constexpr std::uint32_t kCacheFormatVersion = 1;

struct CacheHeader {
  std::uint32_t format_version = kCacheFormatVersion;
  std::uint64_t workspace_hash = 0;
  std::uint64_t n_nodes = 0;
  double tol = 0.0;
  std::int32_t n_iterations = 0;
  double final_delta = 0.0;
};

struct CacheContents {
  CacheHeader header;
  CompositeMap map;
  SphereWorld sphere_world;
  IterationReport report;
};

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void put(Complex z) {
    put(z.real());
    put(z.imag());
  }
  void put_points(const std::vector<Complex>& v) {
    for (auto z : v) put(z);
  }
  void put_count(std::size_t n) { put(static_cast<std::uint64_t>(n)); }
  void put_curve(const ParametricCurve& c) {
    put_count(c.size());
    put_points(c.gamma());
    put_points(c.dgamma());
    put_points(c.ddgamma());
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  Complex get_complex() {
    const double re = get<double>();
    return {re, get<double>()};
  }
  std::size_t get_count(std::size_t elem_size) {
    const auto n = get<std::uint64_t>();
    if (elem_size > 0 && n > (end_ - pos_) / elem_size) throw FormatError("cache: corrupt count");
    return static_cast<std::size_t>(n);
  }
  std::vector<Complex> get_points(std::size_t n) {
    need(n * 16);
    std::vector<Complex> v(n);
    for (auto& z : v) z = get_complex();
    return v;
  }
  ParametricCurve get_curve() {
    const std::size_t n = get_count(48);
    auto g = get_points(n);
    auto d1 = get_points(n);
    auto d2 = get_points(n);
    return ParametricCurve(std::move(g), std::move(d1), std::move(d2));
  }
  std::vector<double> get_doubles() {
    const std::size_t n = get_count(8);
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw FormatError("cache: truncated file");
  }
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Serialize to bytes (see the layout at the top of this header).
inline std::string serialize_cache(const CompositeMap& cm, const SphereWorld& sw, const IterationReport& report,
                                   std::uint64_t workspace_hash, double tol) {
  detail::ByteWriter w;
  w.raw(kCacheMagic, sizeof kCacheMagic);
  w.put(kCacheFormatVersion);
  w.put(workspace_hash);
  w.put(static_cast<std::uint64_t>(cm.source.external.size()));
  w.put(tol);
  w.put(static_cast<std::int32_t>(cm.n_iterations));
  w.put(cm.final_delta);

  w.put_count(cm.stages.size());
  for (const auto& st : cm.stages) {
    w.put(static_cast<std::uint8_t>(st.kind()));
    w.put(st.center());
    w.put(st.c_const());
    if (st.kind() == StageKind::affine) {
      w.put_count(0);
      continue;
    }
    w.put_count(st.curve().size());
    w.put_points(st.curve().gamma());
    w.put_points(st.curve().dgamma());
    w.put_points(st.curve().ddgamma());
    w.put_points(st.f_boundary());
    w.put_points(st.map_boundary());
  }

  w.put_count(cm.image_curves.size());
  for (const auto& c : cm.image_curves) w.put_curve(c);
  w.put_count(cm.tracked_points.size());
  w.put_points(cm.tracked_points);

  w.put_count(report.deltas.size());
  for (double d : report.deltas) w.put(d);
  w.put_count(report.ratio_estimates.size());
  for (double d : report.ratio_estimates) w.put(d);
  w.put(static_cast<std::uint8_t>(report.converged ? 1 : 0));

  w.put(sw.external_center);
  w.put(sw.external_radius);
  w.put(sw.external_fit_residual);
  w.put_count(sw.obstacles.size());
  for (std::size_t i = 0; i < sw.obstacles.size(); ++i) {
    w.put(sw.obstacles[i].center);
    w.put(sw.obstacles[i].radius);
    w.put(i < sw.fit_residuals.size() ? sw.fit_residuals[i] : 0.0);
  }

  w.put_curve(cm.source.external);
  w.put_count(cm.source.internal.size());
  for (const auto& c : cm.source.internal) w.put_curve(c);
  w.put_count(cm.source.obstacle_centers.size());
  w.put_points(cm.source.obstacle_centers);
  w.put(cm.source.interior_anchor);

  w.put(fnv1a(w.bytes().data(), w.bytes().size()));
  return w.bytes();
}

/// Parse cache bytes. Throws FormatError on any structural problem.
inline CacheContents deserialize_cache(const std::string& bytes) {
  if (bytes.size() < sizeof kCacheMagic + sizeof(std::uint64_t) ||
      std::memcmp(bytes.data(), kCacheMagic, sizeof kCacheMagic) != 0)
    throw FormatError("cache: not a conav cache file");
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  if (stored != fnv1a(bytes.data(), body)) throw FormatError("cache: checksum mismatch (file is corrupt)");

  detail::ByteReader r(bytes, body);
  for (std::size_t i = 0; i < sizeof kCacheMagic; ++i) r.get<char>();
  CacheContents out;
  auto& h = out.header;
  h.format_version = r.get<std::uint32_t>();
  if (h.format_version != kCacheFormatVersion)
    throw FormatError("cache: unsupported format version " + std::to_string(h.format_version));
  h.workspace_hash = r.get<std::uint64_t>();
  h.n_nodes = r.get<std::uint64_t>();
  h.tol = r.get<double>();
  h.n_iterations = r.get<std::int32_t>();
  h.final_delta = r.get<double>();

  try {
    auto& cm = out.map;
    cm.n_iterations = h.n_iterations;
    cm.final_delta = h.final_delta;
    const std::size_t n_stages = r.get_count(33);
    cm.stages.reserve(n_stages);
    for (std::size_t s = 0; s < n_stages; ++s) {
      const auto kind = r.get<std::uint8_t>();
      if (kind > 2) throw FormatError("cache: unknown stage kind");
      const Complex center = r.get_complex();
      const double c = r.get<double>();
      const std::size_t n = r.get_count(80);
      if (static_cast<StageKind>(kind) == StageKind::affine) {
        // built from the stored constant: exp(log r) need not round-trip r
        cm.stages.emplace_back(StageKind::affine, center, c, BoundaryFunction{}, std::vector<Complex>{});
        continue;
      }
      auto g = r.get_points(n);
      auto d1 = r.get_points(n);
      auto d2 = r.get_points(n);
      auto f = r.get_points(n);
      auto image = r.get_points(n);
      ParametricCurve curve(std::move(g), std::move(d1), std::move(d2));
      cm.stages.emplace_back(static_cast<StageKind>(kind), center, c, BoundaryFunction(std::move(curve), std::move(f)),
                             std::move(image));
    }
    const std::size_t n_curves = r.get_count(56);
    for (std::size_t i = 0; i < n_curves; ++i) cm.image_curves.push_back(r.get_curve());
    cm.tracked_points = r.get_points(r.get_count(16));

    out.report.deltas = r.get_doubles();
    out.report.ratio_estimates = r.get_doubles();
    out.report.converged = r.get<std::uint8_t>() != 0;

    auto& sw = out.sphere_world;
    sw.external_center = r.get_complex();
    sw.external_radius = r.get<double>();
    sw.external_fit_residual = r.get<double>();
    const std::size_t m = r.get_count(32);
    for (std::size_t i = 0; i < m; ++i) {
      Circle c;
      c.center = r.get_complex();
      c.radius = r.get<double>();
      sw.obstacles.push_back(c);
      sw.fit_residuals.push_back(r.get<double>());
    }

    cm.source.external = r.get_curve();
    const std::size_t m_src = r.get_count(56);
    for (std::size_t i = 0; i < m_src; ++i) cm.source.internal.push_back(r.get_curve());
    cm.source.obstacle_centers = r.get_points(r.get_count(16));
    cm.source.interior_anchor = r.get_complex();
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("cache: invalid contents: ") + e.what());
  }
  if (r.remaining() != 0) throw FormatError("cache: trailing bytes");
  return out;
}

inline void save_cache(const std::string& path, const CompositeMap& cm, const SphereWorld& sw,
                       const IterationReport& report, std::uint64_t workspace_hash, double tol) {
  const auto bytes = serialize_cache(cm, sw, report, workspace_hash, tol);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("save_cache: cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("save_cache: write failed for " + path);
}

/// Load without checking the key.
inline CacheContents load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_cache: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_cache(ss.str());
}

/// Load and require the cache to have been built for this workspace hash.
inline CacheContents load_cache(const std::string& path, std::uint64_t expected_hash) {
  auto c = load_cache(path);
  if (c.header.workspace_hash != expected_hash)
    throw StaleCacheError("load_cache: " + path +
                          " was built for a different workspace, node count or tolerance; rebuild it");
  return c;
}

}  // namespace conav
