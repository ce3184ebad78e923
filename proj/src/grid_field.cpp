#include "magnav/grid_field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

namespace magnav {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Parses a complete token as a double; returns false on trailing garbage.
bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

bool parse_int(const std::string& tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace

std::string unit_name(Unit u) {
  switch (u) {
    case Unit::kNanotesla: return "nT";
    case Unit::kBits: return "bits";
    case Unit::kDimensionless: return "none";
  }
  throw std::invalid_argument("unit_name: unknown unit");
}

Unit unit_from_name(const std::string& name) {
  if (name == "nT") return Unit::kNanotesla;
  if (name == "bits") return Unit::kBits;
  if (name == "none") return Unit::kDimensionless;
  throw std::invalid_argument("unit_from_name: unknown unit '" + name + "'");
}

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

BoundsError::BoundsError(double x, double y)
    : std::runtime_error("query point (" + format_double(x) + ", " + format_double(y) +
                         ") is outside the grid"),
      x_(x),
      y_(y) {}

GridField::GridField(double origin_x, double origin_y, double dx, double dy, int nx,
                     int ny, std::vector<double> values, Unit unit)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      dx_(dx),
      dy_(dy),
      nx_(nx),
      ny_(ny),
      unit_(unit),
      values_(std::move(values)) {
  if (!(dx_ > 0.0) || !(dy_ > 0.0))
    throw std::invalid_argument("GridField: spacing must be positive");
  if (nx_ < 2 || ny_ < 2)
    throw std::invalid_argument("GridField: need at least 2 cells per axis");
  if (!std::isfinite(origin_x_) || !std::isfinite(origin_y_))
    throw std::invalid_argument("GridField: origin must be finite");
  if (values_.size() != static_cast<size_t>(nx_) * ny_)
    throw std::invalid_argument("GridField: value count does not match nx*ny");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("GridField: non-finite value");
  }
}

bool GridField::contains(double x, double y) const {
  return x >= x_min() && x <= x_max() && y >= y_min() && y <= y_max();
}

double GridField::interpolate(double x, double y) const {
  if (!contains(x, y)) throw BoundsError(x, y);
  double fx = (x - origin_x_) / dx_;
  double fy = (y - origin_y_) / dy_;
  int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
  int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
  double tx = fx - ix;
  double ty = fy - iy;
  double v00 = at(ix, iy);
  double v10 = at(ix + 1, iy);
  double v01 = at(ix, iy + 1);
  double v11 = at(ix + 1, iy + 1);
  return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
}

double GridField::interpolate_clamped(double x, double y) const {
  return interpolate(std::clamp(x, x_min(), x_max()), std::clamp(y, y_min(), y_max()));
}

GridField load_grid(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  // A canonical document ends with LF, which split() reports as one empty tail.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty document");

  const std::string& header = lines[0];
  const std::string prefix = "# grid ";
  if (header.rfind(prefix, 0) != 0)
    throw ParseError(1, "malformed header: expected '# grid ...'");

  double x0 = 0, y0 = 0, dx = 0, dy = 0;
  int nx = -1, ny = -1;
  Unit unit = Unit::kDimensionless;
  bool seen[7] = {false, false, false, false, false, false, false};
  for (const std::string& tok : split(header.substr(prefix.size()), ' ')) {
    if (tok.empty()) throw ParseError(1, "malformed header: stray whitespace");
    size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw ParseError(1, "malformed header: token '" + tok + "' is not key=value");
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    auto take = [&](int slot) {
      if (seen[slot]) throw ParseError(1, "malformed header: duplicate key '" + key + "'");
      seen[slot] = true;
    };
    if (key == "x0") {
      take(0);
      if (!parse_double(val, x0)) throw ParseError(1, "malformed header: bad x0");
    } else if (key == "y0") {
      take(1);
      if (!parse_double(val, y0)) throw ParseError(1, "malformed header: bad y0");
    } else if (key == "dx") {
      take(2);
      if (!parse_double(val, dx)) throw ParseError(1, "malformed header: bad dx");
    } else if (key == "dy") {
      take(3);
      if (!parse_double(val, dy)) throw ParseError(1, "malformed header: bad dy");
    } else if (key == "nx") {
      take(4);
      if (!parse_int(val, nx)) throw ParseError(1, "malformed header: bad nx");
    } else if (key == "ny") {
      take(5);
      if (!parse_int(val, ny)) throw ParseError(1, "malformed header: bad ny");
    } else if (key == "unit") {
      take(6);
      try {
        unit = unit_from_name(val);
      } catch (const std::invalid_argument&) {
        throw ParseError(1, "malformed header: unknown unit '" + val + "'");
      }
    } else {
      throw ParseError(1, "malformed header: unknown key '" + key + "'");
    }
  }
  for (bool s : seen) {
    if (!s) throw ParseError(1, "malformed header: missing required key");
  }
  if (nx < 2 || ny < 2) throw ParseError(1, "nx and ny must each be at least 2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw ParseError(1, "dx and dy must be positive");

  if (static_cast<int>(lines.size()) - 1 != ny) {
    int line = static_cast<int>(lines.size()) > ny + 1 ? ny + 2 : static_cast<int>(lines.size()) + 1;
    throw ParseError(line, "row count mismatch: header says ny=" + std::to_string(ny) +
                               " but document has " + std::to_string(lines.size() - 1) +
                               " data rows");
  }

  std::vector<double> values;
  values.reserve(static_cast<size_t>(nx) * ny);
  for (int row = 0; row < ny; ++row) {
    int line_no = row + 2;
    std::vector<std::string> cells = split(lines[row + 1], ',');
    if (static_cast<int>(cells.size()) != nx)
      throw ParseError(line_no, "ragged row: expected " + std::to_string(nx) +
                                    " values, got " + std::to_string(cells.size()));
    for (const std::string& cell : cells) {
      double v;
      if (!parse_double(cell, v))
        throw ParseError(line_no, "invalid value '" + cell + "'");
      if (!std::isfinite(v))
        throw ParseError(line_no, "non-finite value '" + cell + "'");
      values.push_back(v);
    }
  }
  return GridField(x0, y0, dx, dy, nx, ny, std::move(values), unit);
}

std::string save_grid(const GridField& f) {
  std::string out = "# grid x0=" + format_double(f.origin_x()) +
                    " y0=" + format_double(f.origin_y()) + " dx=" + format_double(f.dx()) +
                    " dy=" + format_double(f.dy()) + " nx=" + std::to_string(f.nx()) +
                    " ny=" + std::to_string(f.ny()) + " unit=" + unit_name(f.unit()) + "\n";
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      if (ix != 0) out += ',';
      out += format_double(f.at(ix, iy));
    }
    out += '\n';
  }
  return out;
}

GridField upsample(const GridField& f, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample: factor must be >= 1");
  if (factor == 1) return f;
  int nx = (f.nx() - 1) * factor + 1;
  int ny = (f.ny() - 1) * factor + 1;
  double dx = f.dx() / factor;
  double dy = f.dy() / factor;
  std::vector<double> values;
  values.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      values.push_back(f.interpolate(f.origin_x() + ix * dx, f.origin_y() + iy * dy));
    }
  }
  return GridField(f.origin_x(), f.origin_y(), dx, dy, nx, ny, std::move(values), f.unit());
}

void SynthSpec::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min))
    throw std::invalid_argument("SynthSpec: degenerate extent");
  if (!(spacing > 0.0)) throw std::invalid_argument("SynthSpec: spacing must be positive");
  if (!std::isfinite(base_field)) throw std::invalid_argument("SynthSpec: base_field must be finite");
  for (const Anomaly& a : anomalies) {
    if (!(a.length_scale > 0.0))
      throw std::invalid_argument("SynthSpec: anomaly length_scale must be positive");
    if (!std::isfinite(a.amplitude) || !std::isfinite(a.center_x) || !std::isfinite(a.center_y))
      throw std::invalid_argument("SynthSpec: anomaly parameters must be finite");
  }
}

GridField synth_map(const SynthSpec& spec) {
  spec.validate();
  // Summation order is canonicalized so the output is identical for any
  // permutation of the anomaly list.
  std::vector<Anomaly> anomalies = spec.anomalies;
  std::sort(anomalies.begin(), anomalies.end(), [](const Anomaly& a, const Anomaly& b) {
    return std::tie(a.center_x, a.center_y, a.amplitude, a.length_scale) <
           std::tie(b.center_x, b.center_y, b.amplitude, b.length_scale);
  });
  // A touch of slack so exact multiples of the spacing are not lost to rounding.
  int nx = static_cast<int>(std::floor((spec.x_max - spec.x_min) / spec.spacing + 1e-9)) + 1;
  int ny = static_cast<int>(std::floor((spec.y_max - spec.y_min) / spec.spacing + 1e-9)) + 1;
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("synth_map: extent too small for spacing");
  std::vector<double> values;
  values.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    double y = spec.y_min + iy * spec.spacing;
    for (int ix = 0; ix < nx; ++ix) {
      double x = spec.x_min + ix * spec.spacing;
      double v = spec.base_field;
      for (const Anomaly& a : anomalies) {
        double rx = x - a.center_x;
        double ry = y - a.center_y;
        double s2 = a.length_scale * a.length_scale;
        v += a.amplitude * std::exp(-(rx * rx + ry * ry) / (2.0 * s2));
      }
      values.push_back(v);
    }
  }
  return GridField(spec.x_min, spec.y_min, spec.spacing, spec.spacing, nx, ny,
                   std::move(values), Unit::kNanotesla);
}

}  // namespace magnav
