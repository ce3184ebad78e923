#pragma once

#include <span>
#include <string>
#include <vector>

#include "magnav/grid_field.hpp"

namespace magnav {

/// Parameters of the entropy-map pipeline. Entropy is always measured in
/// bits (log base 2).
struct EntropyConfig {
  double bin_size = 0.2;             // meters; must be >= map spacing
  int window_size = 2;               // r; each window covers r x r bins
  double probability_floor = 1e-12;  // applied per cell before normalization

  void validate() const;
};

/// A low-entropy map location with its attraction weight.
struct EntropyPoint {
  double x = 0.0;
  double y = 0.0;
  double entropy_bits = 0.0;
  double weight = 0.0;
};

/// Segments the field into square bins of side bin_size and averages the
/// cells whose centers fall in each bin. Bin centers are aligned with the
/// field origin, so bin_size == spacing is the identity.
GridField bin_map(const GridField& field, double bin_size);

/// Min-max normalization to [0, 1]. Throws std::domain_error when the field
/// is constant (max == min).
GridField normalize_bins(const GridField& binned);

/// Probabilities of the r x r window anchored at bin (i, j): each cell is
/// floored at probability_floor and the window is normalized to sum 1.
/// Cells are emitted row-major within the window.
std::vector<double> window_probabilities(const GridField& normalized, int i, int j,
                                         int r, double probability_floor = 1e-12);

/// Shannon entropy in bits of a probability vector (each entry > 0).
double window_entropy(std::span<const double> probs);

/// Full pipeline: bin, normalize, then slide an r x r window with stride 1.
/// Output has one value per window anchor, placed at the window center,
/// with unit bits.
GridField entropy_map(const GridField& field, const EntropyConfig& cfg);

/// Points with entropy at least k_sigma standard deviations below the map
/// mean (H <= mu - k_sigma*sigma), lowest entropy first, ties by row-major
/// index, truncated to max_points. Each point carries its entropy_weight.
std::vector<EntropyPoint> select_low_entropy_points(const GridField& emap,
                                                    double k_sigma, int max_points);

/// Attraction weight 0.5^(1/log2(H)). log2(H) is clamped away from zero by
/// log_guard (the H == 1 bit singularity resolves to the negative side), the
/// result is capped at weight_cap and floored at the smallest positive
/// double so it stays finite and positive.
double entropy_weight(double entropy_bits, double log_guard = 1e-6,
                      double weight_cap = 1e3);

/// CSV with header `x,y,entropy_bits,weight`, one point per line.
std::string save_points_csv(const std::vector<EntropyPoint>& points);

}  // namespace magnav
