#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnav {

enum class Unit { kNanotesla, kBits, kDimensionless };

std::string unit_name(Unit u);
Unit unit_from_name(const std::string& name);

/// Violation of a text format; line numbers are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Query outside the cell-center hull of a grid.
class BoundsError : public std::runtime_error {
 public:
  BoundsError(double x, double y);
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

/// Immutable regular 2-D scalar grid. Values live at cell centers, stored
/// row-major with row 0 at minimum y. The interpolation domain is the hull
/// of cell centers; queries outside it throw BoundsError rather than
/// extrapolating, so callers that want clamping must ask for it.
class GridField {
 public:
  GridField(double origin_x, double origin_y, double dx, double dy, int nx,
            int ny, std::vector<double> values, Unit unit);

  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Unit unit() const { return unit_; }
  const std::vector<double>& values() const { return values_; }

  double at(int ix, int iy) const { return values_[static_cast<size_t>(iy) * nx_ + ix]; }
  double cell_x(int ix) const { return origin_x_ + ix * dx_; }
  double cell_y(int iy) const { return origin_y_ + iy * dy_; }

  double x_min() const { return origin_x_; }
  double x_max() const { return origin_x_ + (nx_ - 1) * dx_; }
  double y_min() const { return origin_y_; }
  double y_max() const { return origin_y_ + (ny_ - 1) * dy_; }

  bool contains(double x, double y) const;

  /// Bilinear interpolation over the four surrounding cell centers; exact at
  /// cell centers. Throws BoundsError outside the cell-center hull.
  double interpolate(double x, double y) const;

  /// Clamps the query point into the cell-center hull, then interpolates.
  double interpolate_clamped(double x, double y) const;

 private:
  double origin_x_;
  double origin_y_;
  double dx_;
  double dy_;
  int nx_;
  int ny_;
  Unit unit_;
  std::vector<double> values_;
};

/// Parses the grid-CSV format. Errors carry the offending line number.
GridField load_grid(const std::string& text);

/// Canonical grid-CSV serialization: one header line, ny rows of nx
/// comma-separated values at 17 significant digits, LF endings.
std::string save_grid(const GridField& field);

/// Refines spacing by an integer factor over the same extent; new values are
/// bilinearly interpolated, original nodes are preserved. factor=1 returns
/// the input unchanged.
GridField upsample(const GridField& field, int factor);

struct Anomaly {
  double center_x = 0.0;
  double center_y = 0.0;
  double amplitude = 0.0;     // nT, signed
  double length_scale = 1.0;  // meters
};

/// Recipe for a synthetic anomaly map: base field plus a sum of Gaussians.
struct SynthSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double spacing = 0.0;
  double base_field = 0.0;
  std::vector<Anomaly> anomalies;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

GridField synth_map(const SynthSpec& spec);

}  // namespace magnav
