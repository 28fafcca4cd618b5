#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hybridflow {

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(Rng& rng);

/// Persons-per-car probability mass function over occupancies 1..K.
class OccupancyDistribution {
 public:
  /// Festival survey counts for 1, 2, 3, 4, 5 and 5+ occupants (5+ counted as 6).
  static const std::vector<double>& surveyCounts();
  static OccupancyDistribution survey() { return fromCounts(surveyCounts()); }
  /// counts[k] is the weight of occupancy k + 1.
  static OccupancyDistribution fromCounts(std::vector<double> counts);

  const std::vector<double>& counts() const { return counts_; }
  const std::vector<double>& pmf() const { return pmf_; }
  double probability(int occupancy) const;
  double mean() const;
  int maxOccupancy() const { return static_cast<int>(pmf_.size()); }

  bool operator==(const OccupancyDistribution& other) const { return counts_ == other.counts_; }

 private:
  std::vector<double> counts_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;

  friend int sampleOccupancy(Rng& rng, const OccupancyDistribution& dist);
};

/// Inverse-CDF draw of an occupancy in 1..maxOccupancy().
int sampleOccupancy(Rng& rng, const OccupancyDistribution& dist);

}  // namespace hybridflow
