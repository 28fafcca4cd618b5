#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace hybridflow {

/// Pedestrian speed-density law (exponential Weidmann-type relation).
struct PedestrianParams {
  double vffMean = 1.34;    // m/s
  double vffStdDev = 0.26;  // m/s
  double gamma = 1.913;
  double rhoMax = 5.4;  // people/m^2

  bool operator==(const PedestrianParams&) const = default;
};

/// Car speed-density law. `vffStdDev` only matters when cars use more than
/// one velocity class.
struct CarParams {
  double vff = 15.0;  // m/s
  double vffStdDev = 0.0;
  double bigK = 6.83;
  double n = 1.81;
  double rhoMax = 0.12;  // cars/m

  bool operator==(const CarParams&) const = default;
};

/// Below this total density the pedestrian law returns its zero-density limit.
inline constexpr double kFreeFlowDensity = 1e-12;
/// Slack allowed above rho_max before a density is treated as invalid.
inline constexpr double kDensitySlack = 1e-12;

double pedestrianVelocity(double vff, double rho, const PedestrianParams& params);
double carVelocity(double vff, double rho, const CarParams& params);
double reducedVelocity(double rho, const PedestrianParams& params);
double reducedVelocity(double rho, const CarParams& params);

/// Test/diagnostic law: every class moves at `speed` regardless of density.
struct ConstantVelocity {
  double speed = 1.0;
  double rhoMax = 1.0;

  bool operator==(const ConstantVelocity&) const = default;
};

/// Speed-density law attached to an edge mode.
class FundamentalDiagram {
 public:
  using Law = std::variant<PedestrianParams, CarParams, ConstantVelocity>;

  FundamentalDiagram(Law law);  // NOLINT(google-explicit-constructor)

  double rhoMax() const;
  bool isConstant() const { return std::holds_alternative<ConstantVelocity>(law_); }
  const Law& law() const { return law_; }

  /// v(vff; rho), validating rho against [0, rhoMax].
  double velocity(double vff, double rho) const;

  /// v-hat(rho) with rho clamped to [0, rhoMax]; the solver's inner-loop form.
  double reducedClamped(double rho) const;

  /// Speed of class `vff` at total density `rho`, clamped like reducedClamped.
  double classVelocityClamped(double vff, double rho) const;

 private:
  Law law_;
};

/// Normal distribution of free-flow speeds across the population.
struct FreeFlowDistribution {
  double mean = 1.34;
  double stdDev = 0.26;

  bool operator==(const FreeFlowDistribution&) const = default;
};

/// Split of the free-flow speed axis into velocity classes. Boundaries are
/// stored both as speeds and as standard scores so symmetric partitions
/// produce bitwise-symmetric class masses.
class VelocityClassPartition {
 public:
  /// `classes` equal-width classes spanning mean +/- truncation * stdDev,
  /// representatives at midpoints. stdDev == 0 is allowed only with one class
  /// and yields a single class at the mean.
  static VelocityClassPartition symmetric(FreeFlowDistribution dist, std::size_t classes,
                                          double truncation);

  /// Arbitrary strictly increasing speed boundaries (at least two).
  static VelocityClassPartition fromBoundaries(FreeFlowDistribution dist,
                                               std::vector<double> boundaries);

  std::size_t classCount() const { return representatives_.size(); }
  const std::vector<double>& boundaries() const { return boundaries_; }
  const std::vector<double>& representatives() const { return representatives_; }
  const FreeFlowDistribution& distribution() const { return dist_; }

  /// Phi(v_j) - Phi(v_{j-1}) per class, before renormalization.
  const std::vector<double>& intervalProbabilities() const { return probabilities_; }
  /// Class fractions renormalized to sum to one.
  const std::vector<double>& weights() const { return weights_; }

  /// Upper boundary speed, the bound used by the CFL check.
  double maxSpeed() const { return boundaries_.back(); }
  double maxRepresentative() const;

 private:
  VelocityClassPartition(FreeFlowDistribution dist, std::vector<double> boundaries,
                         std::vector<double> scores);

  FreeFlowDistribution dist_;
  std::vector<double> boundaries_;
  std::vector<double> representatives_;
  std::vector<double> probabilities_;
  std::vector<double> weights_;
};

/// Splits a total density into per-class densities summing to `rho0`.
std::vector<double> partitionClasses(double rho0, const VelocityClassPartition& partition);

double totalDensity(std::span<const double> classDensities);


/// Physics attached to one edge mode: the speed law plus its velocity classes.
struct ModeModel {
  FundamentalDiagram diagram;
  VelocityClassPartition classes;

  double rhoMax() const { return diagram.rhoMax(); }
  /// Fastest speed any class can reach; constant laws report their speed.
  double maxSpeed() const;
  double meanFreeFlowSpeed() const { return classes.distribution().mean; }
};

}  // namespace hybridflow
