#include "hybridflow/occupancy.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridflow {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

const std::vector<double>& OccupancyDistribution::surveyCounts() {
  static const std::vector<double> counts{452, 979, 273, 185, 62, 9};
  return counts;
}

OccupancyDistribution OccupancyDistribution::fromCounts(std::vector<double> counts) {
  if (counts.empty()) throw std::invalid_argument("occupancy distribution needs categories");
  double total = 0.0;
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("occupancy counts must be finite and non-negative");
    }
    total += c;
  }
  if (!(total > 0.0)) throw std::invalid_argument("occupancy counts sum to zero");
  OccupancyDistribution dist;
  dist.counts_ = std::move(counts);
  double running = 0.0;
  for (double c : dist.counts_) {
    dist.pmf_.push_back(c / total);
    running += c;
    dist.cdf_.push_back(running / total);
  }
  return dist;
}

double OccupancyDistribution::probability(int occupancy) const {
  if (occupancy < 1 || occupancy > maxOccupancy()) return 0.0;
  return pmf_[static_cast<std::size_t>(occupancy - 1)];
}

double OccupancyDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < pmf_.size(); ++k) m += static_cast<double>(k + 1) * pmf_[k];
  return m;
}

int sampleOccupancy(Rng& rng, const OccupancyDistribution& dist) {
  const double u = uniform01(rng);
  for (std::size_t k = 0; k < dist.cdf_.size(); ++k) {
    if (u < dist.cdf_[k] && dist.pmf_[k] > 0.0) return static_cast<int>(k + 1);
  }
  // u beyond the rounded last cumulative value: the highest non-empty category.
  for (std::size_t k = dist.pmf_.size(); k-- > 0;) {
    if (dist.pmf_[k] > 0.0) return static_cast<int>(k + 1);
  }
  return 1;
}

}  // namespace hybridflow
