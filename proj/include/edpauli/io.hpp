#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edpauli/field.hpp"
#include "edpauli/sampler.hpp"

namespace edpauli {
namespace io {

namespace detail {

inline std::uint64_t to_le_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xFFu);
    bits = r;
  }
  return bits;
}

inline double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xFFu);
    bits = r;
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void write_doubles(std::ofstream& os, const double* data, std::size_t n) {
  std::vector<std::uint64_t> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = to_le_bits(data[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
}

inline std::vector<double> read_doubles(std::ifstream& is, std::size_t n) {
  std::vector<std::uint64_t> buf(n);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
  if (!is) throw structural_error("io: short read");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = from_le_bits(buf[i]);
  return out;
}

inline nlohmann::json grid_json(const Grid& g) {
  nlohmann::json j;
  j["dim"] = g.dim();
  for (int a = 0; a < g.dim(); ++a) {
    j["points"].push_back(g.points(a));
    j["extents"].push_back(g.extent(a));
  }
  return j;
}

}  // namespace detail

/// Spinor dump: little-endian 64-bit floats, row-major over grid points,
/// component order + then -, real then imaginary interleaved per value.
/// A JSON sidecar `<base>.json` carries dim, points, extents and the layout.
inline void write_spinor_dump(const std::string& base, const SpinorField& psi,
                              const nlohmann::json& extra = {}) {
  const std::size_t n = psi.npoints();
  std::ofstream os(base + ".bin", std::ios::binary);
  if (!os) throw structural_error("io: cannot open " + base + ".bin");
  std::vector<double> flat;
  flat.reserve(4 * n);
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      flat.push_back(psi.at(k, i).real());
      flat.push_back(psi.at(k, i).imag());
    }
  detail::write_doubles(os, flat.data(), flat.size());

  nlohmann::json j = detail::grid_json(psi.grid);
  j["kind"] = "spinor";
  j["component_order"] = "plus_then_minus";
  j["value_layout"] = "real_imag_interleaved";
  j["byte_order"] = "little_endian";
  j["dtype"] = "float64";
  j["storage"] = "row_major";
  if (!extra.is_null()) j["info"] = extra;
  std::ofstream js(base + ".json");
  js << j.dump(2) << "\n";
}

inline SpinorField read_spinor_dump(const std::string& base) {
  std::ifstream js(base + ".json");
  if (!js) throw structural_error("io: cannot open " + base + ".json");
  nlohmann::json j;
  js >> j;
  std::vector<int> points = j["points"].get<std::vector<int>>();
  std::vector<double> extents = j["extents"].get<std::vector<double>>();
  Grid g(points, extents);
  std::ifstream is(base + ".bin", std::ios::binary);
  if (!is) throw structural_error("io: cannot open " + base + ".bin");
  const std::vector<double> flat = detail::read_doubles(is, 4 * g.size());
  SpinorField psi(g);
  std::size_t pos = 0;
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < g.size(); ++i) {
      psi.at(k, i) = cplx(flat[pos], flat[pos + 1]);
      pos += 2;
    }
  return psi;
}

/// Scalar dump, same conventions (one float64 per point).
inline void write_scalar_dump(const std::string& base, const ScalarField& f,
                              const nlohmann::json& extra = {}) {
  std::ofstream os(base + ".bin", std::ios::binary);
  if (!os) throw structural_error("io: cannot open " + base + ".bin");
  detail::write_doubles(os, f.values.data(), f.values.size());
  nlohmann::json j = detail::grid_json(f.grid);
  j["kind"] = "scalar";
  j["byte_order"] = "little_endian";
  j["dtype"] = "float64";
  j["storage"] = "row_major";
  if (!extra.is_null()) j["info"] = extra;
  std::ofstream js(base + ".json");
  js << j.dump(2) << "\n";
}

/// Trajectory frames: float64 positions, frame-major then walker-major then
/// axis; sidecar records N, dim, dt, seed and the recording stride.
struct TrajectoryWriter {
  std::ofstream bin;
  std::string base;
  int frames = 0;

  TrajectoryWriter(const std::string& base_path) : base(base_path) {
    bin.open(base + ".bin", std::ios::binary);
    if (!bin) throw structural_error("io: cannot open " + base + ".bin");
  }

  void append(const TrajectoryEnsemble& ens) {
    detail::write_doubles(bin, ens.positions.data(), ens.positions.size());
    ++frames;
  }

  void finish(const TrajectoryEnsemble& ens, double dt, int stride) {
    nlohmann::json j;
    j["n_walkers"] = ens.n_walkers;
    j["dim"] = ens.grid.dim();
    j["dt"] = dt;
    j["seed"] = ens.seed;
    j["stride"] = stride;
    j["frames"] = frames;
    j["byte_order"] = "little_endian";
    j["dtype"] = "float64";
    j["layout"] = "frame_walker_axis";
    std::ofstream js(base + ".json");
    js << j.dump(2) << "\n";
  }
};

/// Minimal CSV writer with full-precision formatting (%.17g) so identical
/// runs reproduce output files bitwise.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns) : os_(path) {
    if (!os_) throw structural_error("io: cannot open " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
      os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }

  void row(const std::vector<double>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
      os_ << (i ? "," : "") << buf;
    }
    os_ << "\n";
  }

 private:
  std::ofstream os_;
};

}  // namespace io
}  // namespace edpauli
