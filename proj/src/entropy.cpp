#include "magnav/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace magnav {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int bin_index(double offset, double bin_size) {
  return static_cast<int>(std::floor(offset / bin_size + 0.5));
}

}  // namespace

void EntropyConfig::validate() const {
  if (!(bin_size > 0.0)) throw std::invalid_argument("EntropyConfig: bin_size must be positive");
  if (window_size < 2) throw std::invalid_argument("EntropyConfig: window_size must be >= 2");
  if (!(probability_floor > 0.0))
    throw std::invalid_argument("EntropyConfig: probability_floor must be positive");
}

GridField bin_map(const GridField& field, double bin_size) {
  if (!(bin_size >= std::max(field.dx(), field.dy())))
    throw std::invalid_argument("bin_map: bin_size smaller than source spacing");
  int nbx = bin_index((field.nx() - 1) * field.dx(), bin_size) + 1;
  int nby = bin_index((field.ny() - 1) * field.dy(), bin_size) + 1;
  if (nbx < 2 || nby < 2)
    throw std::invalid_argument("bin_map: bin_size too large, needs at least 2 bins per axis");

  std::vector<double> sums(static_cast<size_t>(nbx) * nby, 0.0);
  std::vector<int> counts(static_cast<size_t>(nbx) * nby, 0);
  for (int iy = 0; iy < field.ny(); ++iy) {
    int by = bin_index(iy * field.dy(), bin_size);
    for (int ix = 0; ix < field.nx(); ++ix) {
      int bx = bin_index(ix * field.dx(), bin_size);
      size_t idx = static_cast<size_t>(by) * nbx + bx;
      sums[idx] += field.at(ix, iy);
      counts[idx] += 1;
    }
  }
  std::vector<double> means(sums.size());
  for (size_t i = 0; i < sums.size(); ++i) {
    // bin_size >= spacing guarantees every bin interval holds a cell center
    if (counts[i] == 0) throw std::logic_error("bin_map: empty bin");
    means[i] = sums[i] / counts[i];
  }
  return GridField(field.origin_x(), field.origin_y(), bin_size, bin_size, nbx, nby,
                   std::move(means), field.unit());
}

GridField normalize_bins(const GridField& binned) {
  const auto& v = binned.values();
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo))
    throw std::domain_error("normalize_bins: degenerate field (max == min)");
  std::vector<double> out(v.size());
  double range = hi - lo;
  for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / range;
  return GridField(binned.origin_x(), binned.origin_y(), binned.dx(), binned.dy(),
                   binned.nx(), binned.ny(), std::move(out), Unit::kDimensionless);
}

std::vector<double> window_probabilities(const GridField& normalized, int i, int j,
                                         int r, double probability_floor) {
  if (r < 1) throw std::invalid_argument("window_probabilities: window size must be >= 1");
  if (!(probability_floor > 0.0))
    throw std::invalid_argument("window_probabilities: probability_floor must be positive");
  if (i < 0 || j < 0 || i + r > normalized.nx() || j + r > normalized.ny())
    throw std::out_of_range("window_probabilities: window exceeds grid bounds");
  std::vector<double> probs;
  probs.reserve(static_cast<size_t>(r) * r);
  double sum = 0.0;
  for (int jj = j; jj < j + r; ++jj) {
    for (int ii = i; ii < i + r; ++ii) {
      double v = std::max(normalized.at(ii, jj), probability_floor);
      probs.push_back(v);
      sum += v;
    }
  }
  for (double& p : probs) p /= sum;
  return probs;
}

double window_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= p * std::log2(p);
  return h;
}

GridField entropy_map(const GridField& field, const EntropyConfig& cfg) {
  cfg.validate();
  GridField normalized = normalize_bins(bin_map(field, cfg.bin_size));
  int r = cfg.window_size;
  int onx = normalized.nx() - r + 1;
  int ony = normalized.ny() - r + 1;
  if (onx < 2 || ony < 2)
    throw std::domain_error("entropy_map: field too small for window size");
  std::vector<double> values;
  values.reserve(static_cast<size_t>(onx) * ony);
  for (int j = 0; j < ony; ++j) {
    for (int i = 0; i < onx; ++i) {
      values.push_back(
          window_entropy(window_probabilities(normalized, i, j, r, cfg.probability_floor)));
    }
  }
  double half_span = 0.5 * (r - 1);
  return GridField(normalized.origin_x() + half_span * normalized.dx(),
                   normalized.origin_y() + half_span * normalized.dy(), normalized.dx(),
                   normalized.dy(), onx, ony, std::move(values), Unit::kBits);
}

std::vector<EntropyPoint> select_low_entropy_points(const GridField& emap,
                                                    double k_sigma, int max_points) {
  if (k_sigma < 0.0)
    throw std::invalid_argument("select_low_entropy_points: k_sigma must be >= 0");
  if (max_points < 0)
    throw std::invalid_argument("select_low_entropy_points: max_points must be >= 0");
  const auto& v = emap.values();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  double threshold = mean - k_sigma * std::sqrt(var);

  struct Candidate {
    double entropy;
    size_t index;
  };
  std::vector<Candidate> picked;
  for (size_t idx = 0; idx < v.size(); ++idx) {
    if (v[idx] <= threshold) picked.push_back({v[idx], idx});
  }
  std::sort(picked.begin(), picked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.index < b.index;
  });
  if (static_cast<int>(picked.size()) > max_points) picked.resize(max_points);

  std::vector<EntropyPoint> out;
  out.reserve(picked.size());
  for (const Candidate& c : picked) {
    int ix = static_cast<int>(c.index) % emap.nx();
    int iy = static_cast<int>(c.index) / emap.nx();
    out.push_back({emap.cell_x(ix), emap.cell_y(iy), c.entropy, entropy_weight(c.entropy)});
  }
  return out;
}

double entropy_weight(double entropy_bits, double log_guard, double weight_cap) {
  if (!(entropy_bits > 0.0))
    throw std::domain_error("entropy_weight: entropy must be positive");
  double l = std::log2(entropy_bits);
  if (std::abs(l) < log_guard) l = l > 0.0 ? log_guard : -log_guard;
  double xi = std::pow(0.5, 1.0 / l);
  if (!(xi <= weight_cap)) xi = weight_cap;  // also catches overflow to +inf
  if (xi < std::numeric_limits<double>::min()) xi = std::numeric_limits<double>::min();
  return xi;
}

std::string save_points_csv(const std::vector<EntropyPoint>& points) {
  std::string out = "x,y,entropy_bits,weight\n";
  for (const EntropyPoint& p : points) {
    out += format_double(p.x) + "," + format_double(p.y) + "," +
           format_double(p.entropy_bits) + "," + format_double(p.weight) + "\n";
  }
  return out;
}

}  // namespace magnav
