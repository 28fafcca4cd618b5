#include "hybridflow/fundamental_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hybridflow {

namespace {

void checkDensity(double rho, double rhoMax) {
  if (!(rho >= 0.0)) throw std::invalid_argument("density must be non-negative");
  if (rho > rhoMax + kDensitySlack) {
    throw std::invalid_argument("density " + std::to_string(rho) + " exceeds rho_max " +
                                std::to_string(rhoMax));
  }
}

void checkSpeed(double vff) {
  if (!(vff > 0.0)) throw std::invalid_argument("free-flow velocity must be positive");
}

double pedestrianFactor(double rho, const PedestrianParams& p) {
  if (rho < kFreeFlowDensity) return 1.0;
  rho = std::min(rho, p.rhoMax);
  return 1.0 - std::exp(-p.gamma * (1.0 / rho - 1.0 / p.rhoMax));
}

double carFactor(double rho, const CarParams& p) {
  rho = std::clamp(rho, 0.0, p.rhoMax);
  const double jam = std::pow(p.rhoMax, p.n);
  const double load = std::pow(rho, p.n);
  return (jam - load) / (jam + p.bigK * load);
}

}  // namespace

double reducedVelocity(double rho, const PedestrianParams& params) {
  checkDensity(rho, params.rhoMax);
  return pedestrianFactor(rho, params);
}

double reducedVelocity(double rho, const CarParams& params) {
  checkDensity(rho, params.rhoMax);
  return carFactor(rho, params);
}

double pedestrianVelocity(double vff, double rho, const PedestrianParams& params) {
  checkSpeed(vff);
  return vff * reducedVelocity(rho, params);
}

double carVelocity(double vff, double rho, const CarParams& params) {
  checkSpeed(vff);
  return vff * reducedVelocity(rho, params);
}

FundamentalDiagram::FundamentalDiagram(Law law) : law_(law) {}

double FundamentalDiagram::rhoMax() const {
  return std::visit([](const auto& p) { return p.rhoMax; }, law_);
}

double FundamentalDiagram::velocity(double vff, double rho) const {
  if (const auto* c = std::get_if<ConstantVelocity>(&law_)) {
    checkDensity(rho, c->rhoMax);
    return c->speed;
  }
  if (const auto* p = std::get_if<PedestrianParams>(&law_)) return pedestrianVelocity(vff, rho, *p);
  return carVelocity(vff, rho, std::get<CarParams>(law_));
}

double FundamentalDiagram::reducedClamped(double rho) const {
  if (const auto* p = std::get_if<PedestrianParams>(&law_)) return pedestrianFactor(rho, *p);
  if (const auto* c = std::get_if<CarParams>(&law_)) return carFactor(rho, *c);
  return 1.0;
}

double FundamentalDiagram::classVelocityClamped(double vff, double rho) const {
  if (const auto* c = std::get_if<ConstantVelocity>(&law_)) return c->speed;
  return vff * reducedClamped(rho);
}

VelocityClassPartition::VelocityClassPartition(FreeFlowDistribution dist,
                                               std::vector<double> boundaries,
                                               std::vector<double> scores)
    : dist_(dist), boundaries_(std::move(boundaries)) {
  const std::size_t classes = boundaries_.size() - 1;
  if (scores.empty()) {
    // Degenerate single-speed partition.
    representatives_ = {dist_.mean};
    probabilities_ = {1.0};
    weights_ = {1.0};
    return;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < classes; ++j) {
    representatives_.push_back(0.5 * (boundaries_[j] + boundaries_[j + 1]));
    const double p =
        0.5 * (std::erf(scores[j + 1] / std::sqrt(2.0)) - std::erf(scores[j] / std::sqrt(2.0)));
    probabilities_.push_back(p);
    sum += p;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("velocity classes carry no probability mass");
  for (double p : probabilities_) weights_.push_back(p / sum);
}

VelocityClassPartition VelocityClassPartition::symmetric(FreeFlowDistribution dist,
                                                         std::size_t classes, double truncation) {
  if (classes < 1) throw std::invalid_argument("need at least one velocity class");
  if (!(dist.mean > 0.0)) throw std::invalid_argument("free-flow mean must be positive");
  if (!(dist.stdDev >= 0.0)) throw std::invalid_argument("free-flow stddev must be non-negative");
  if (dist.stdDev == 0.0) {
    if (classes != 1) {
      throw std::invalid_argument("multiple velocity classes need a positive stddev");
    }
    return VelocityClassPartition(dist, {dist.mean, dist.mean}, {});
  }
  if (!(truncation > 0.0)) throw std::invalid_argument("truncation factor must be positive");
  if (dist.mean - truncation * dist.stdDev <= 0.0) {
    throw std::invalid_argument("truncated free-flow range reaches non-positive speeds");
  }
  const auto m = static_cast<double>(classes);
  std::vector<double> scores;
  std::vector<double> speeds;
  for (std::size_t j = 0; j <= classes; ++j) {
    // (2j - M) / M is exactly antisymmetric in j <-> M - j.
    const double z = truncation * ((2.0 * static_cast<double>(j) - m) / m);
    scores.push_back(z);
    speeds.push_back(dist.mean + dist.stdDev * z);
  }
  return VelocityClassPartition(dist, std::move(speeds), std::move(scores));
}

VelocityClassPartition VelocityClassPartition::fromBoundaries(FreeFlowDistribution dist,
                                                              std::vector<double> boundaries) {
  if (boundaries.size() < 2) throw std::invalid_argument("need at least two class boundaries");
  if (!(dist.stdDev > 0.0)) throw std::invalid_argument("free-flow stddev must be positive");
  for (std::size_t j = 0; j < boundaries.size(); ++j) {
    if (j > 0 && !(boundaries[j] > boundaries[j - 1])) {
      throw std::invalid_argument("class boundaries must be strictly increasing");
    }
  }
  if (!(boundaries.front() > 0.0)) throw std::invalid_argument("class speeds must be positive");
  std::vector<double> scores;
  for (double v : boundaries) scores.push_back((v - dist.mean) / dist.stdDev);
  return VelocityClassPartition(dist, std::move(boundaries), std::move(scores));
}

double VelocityClassPartition::maxRepresentative() const {
  return *std::max_element(representatives_.begin(), representatives_.end());
}

std::vector<double> partitionClasses(double rho0, const VelocityClassPartition& partition) {
  if (!(rho0 >= 0.0)) throw std::invalid_argument("density must be non-negative");
  std::vector<double> out;
  out.reserve(partition.classCount());
  for (double w : partition.weights()) out.push_back(rho0 * w);
  return out;
}

double totalDensity(std::span<const double> classDensities) {
  double sum = 0.0;
  for (double d : classDensities) sum += d;
  return sum;
}


double ModeModel::maxSpeed() const {
  if (const auto* c = std::get_if<ConstantVelocity>(&diagram.law())) return c->speed;
  return classes.maxSpeed();
}

}  // namespace hybridflow
