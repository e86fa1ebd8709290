#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edpauli/errors.hpp"

namespace edpauli {

/// Uniform Cartesian grid (1-D, 2-D or 3-D) with periodic boundaries.
///
/// Points along axis a sit at x = -extent/2 + i*spacing, i = 0..points-1,
/// so the box is centered on the origin and spacing = extent / points
/// (periodic convention: the point at +extent/2 is identified with the one
/// at -extent/2). Fields are stored flat in row-major order, the last axis
/// fastest.
class Grid {
 public:
  static constexpr int max_dim = 3;

  Grid(std::span<const int> points, std::span<const double> extents) {
    dim_ = static_cast<int>(points.size());
    if (dim_ < 1 || dim_ > max_dim)
      throw structural_error("Grid: dim must be 1, 2 or 3");
    if (extents.size() != points.size())
      throw structural_error("Grid: points/extents size mismatch");
    points_ = {1, 1, 1};
    extent_ = {0.0, 0.0, 0.0};
    spacing_ = {0.0, 0.0, 0.0};
    size_ = 1;
    for (int a = 0; a < dim_; ++a) {
      if (points[a] < 2)
        throw structural_error("Grid: need at least 2 points per axis");
      if (!(extents[a] > 0.0))
        throw structural_error("Grid: extents must be positive");
      points_[a] = points[a];
      extent_[a] = extents[a];
      spacing_[a] = extents[a] / points[a];
      size_ *= static_cast<std::size_t>(points[a]);
    }
    stride_ = {1, 1, 1};
    for (int a = dim_ - 2; a >= 0; --a)
      stride_[a] = stride_[a + 1] * static_cast<std::size_t>(points_[a + 1]);
  }

  Grid(std::initializer_list<int> points, std::initializer_list<double> extents)
      : Grid(std::span<const int>(points.begin(), points.size()),
             std::span<const double>(extents.begin(), extents.size())) {}

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  int points(int axis) const { return points_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing_[a];
    return v;
  }

  double max_spacing() const {
    double h = 0.0;
    for (int a = 0; a < dim_; ++a) h = std::max(h, spacing_[a]);
    return h;
  }

  /// Coordinate of grid node `index` along `axis`, in [-extent/2, extent/2).
  double coordinate(int axis, int index) const {
    return -0.5 * extent_[axis] + spacing_[axis] * index;
  }

  /// Wraps a continuous coordinate into the primary box [-L/2, L/2).
  double wrap_coordinate(int axis, double x) const {
    const double l = extent_[axis];
    double y = std::fmod(x + 0.5 * l, l);
    if (y < 0.0) y += l;
    return y - 0.5 * l;
  }

  int wrap_index(int axis, long i) const {
    const long n = points_[axis];
    long r = i % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
  }

  std::size_t flatten(const std::array<int, 3>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f += stride_[a] * static_cast<std::size_t>(idx[a]);
    return f;
  }

  std::array<int, 3> unflatten(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      idx[a] = static_cast<int>((flat / stride_[a]) % static_cast<std::size_t>(points_[a]));
    }
    return idx;
  }

  /// Index of the point shifted by `shift` cells along `axis`, with wraparound.
  std::size_t neighbor(std::size_t flat, int axis, int shift) const {
    const std::size_t s = stride_[axis];
    const int n = points_[axis];
    const int ia = static_cast<int>((flat / s) % static_cast<std::size_t>(n));
    const int ja = wrap_index(axis, ia + shift);
    return flat + (static_cast<std::size_t>(ja) - static_cast<std::size_t>(ia)) * s;
  }

  void require_axis(int axis) const {
    if (axis < 0 || axis >= dim_)
      throw structural_error("axis " + std::to_string(axis) + " out of range for dim " +
                             std::to_string(dim_));
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && points_ == o.points_ && extent_ == o.extent_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int dim_;
  std::array<int, 3> points_;
  std::array<double, 3> extent_;
  std::array<double, 3> spacing_;
  std::array<std::size_t, 3> stride_;
  std::size_t size_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw structural_error(std::string(where) + ": grid mismatch");
}

}  // namespace edpauli
