#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hybridflow/fundamental_diagram.hpp"

using namespace hybridflow;

namespace {

// Scalar oracles written straight from the closed-form laws.
double pedOracle(double vff, double rho) {
  return vff * (1.0 - std::exp(-1.913 * (1.0 / rho - 1.0 / 5.4)));
}

double carOracle(double vff, double rho) {
  const double a = std::pow(0.12, 1.81);
  const double b = std::pow(rho, 1.81);
  return vff * (a - b) / (a + 6.83 * b);
}

double normalCdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

const PedestrianParams kPed;
const CarParams kCar;

}  // namespace

TEST_CASE("pedestrian law endpoints and spot value") {
  CHECK(std::abs(pedestrianVelocity(1.34, 5.4, kPed)) <= 1e-12);
  CHECK(std::abs(pedestrianVelocity(1.34, 1e-9, kPed) - 1.34) <= 1e-6);
  CHECK(pedestrianVelocity(1.34, 0.0, kPed) == 1.34);
  const double v = pedestrianVelocity(1.34, 1.0, kPed);
  CHECK(std::abs(v - pedOracle(1.34, 1.0)) <= 1e-12);
  CHECK(std::abs(v - 1.0580) <= 1e-4);
}

TEST_CASE("car law endpoints and spot value") {
  CHECK(carVelocity(15.0, 0.0, kCar) == 15.0);
  CHECK(carVelocity(15.0, 0.12, kCar) == 0.0);
  const double v = carVelocity(15.0, 0.06, kCar);
  CHECK(std::abs(v - carOracle(15.0, 0.06)) <= 1e-12);
  // 3.6373 m/s; the two-decimal figure is 3.64.
  CHECK(std::abs(v - 3.64) <= 0.005);
}

TEST_CASE("reduced velocity") {
  CHECK(reducedVelocity(0.0, kPed) == 1.0);
  CHECK(reducedVelocity(0.0, kCar) == 1.0);
  CHECK(std::abs(reducedVelocity(5.4, kPed)) <= 1e-15);
  CHECK(reducedVelocity(0.12, kCar) == 0.0);
  CHECK(std::abs(reducedVelocity(1.0, kPed) - pedOracle(1.34, 1.0) / 1.34) <= 1e-14);
  CHECK(std::abs(reducedVelocity(1.0, kPed) - 0.78957) <= 1e-4);
}

TEST_CASE("laws reject out-of-range inputs") {
  CHECK_THROWS_AS(pedestrianVelocity(1.34, 5.5, kPed), std::invalid_argument);
  CHECK_THROWS_AS(pedestrianVelocity(1.34, -0.1, kPed), std::invalid_argument);
  CHECK_THROWS_AS(pedestrianVelocity(-1.0, 1.0, kPed), std::invalid_argument);
  CHECK_THROWS_AS(carVelocity(15.0, 0.2, kCar), std::invalid_argument);
  CHECK_THROWS_AS(carVelocity(15.0, -1e-3, kCar), std::invalid_argument);
  CHECK_THROWS_AS(reducedVelocity(6.0, kPed), std::invalid_argument);
  CHECK_THROWS_AS(reducedVelocity(std::nan(""), kCar), std::invalid_argument);
}

TEST_CASE("laws are strictly decreasing, bounded, and factor out vff exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double a = 5.4 * u(rng);
    const double b = 5.4 * u(rng);
    if (a <= 0.0 || b <= 0.0 || a == b || a >= 5.4 || b >= 5.4) continue;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    const double vff = 0.5 + 2.0 * u(rng);
    // Below ~0.1 people/m^2 the exponential underflows against 1 in double
    // precision, so strictness is only observable above that.
    CHECK(pedestrianVelocity(vff, lo, kPed) >= pedestrianVelocity(vff, hi, kPed));
    if (lo > 0.1) CHECK(pedestrianVelocity(vff, lo, kPed) > pedestrianVelocity(vff, hi, kPed));
    const double v = pedestrianVelocity(vff, lo, kPed);
    CHECK(v >= 0.0);
    CHECK(v <= vff);
    CHECK(std::abs(v - vff * reducedVelocity(lo, kPed)) <= 1e-15 * vff);

    const double cl = lo / 45.0;
    const double ch = hi / 45.0;
    const double cv = 5.0 + 20.0 * u(rng);
    CHECK(carVelocity(cv, cl, kCar) > carVelocity(cv, ch, kCar));
    const double c = carVelocity(cv, cl, kCar);
    CHECK(c >= 0.0);
    CHECK(c <= cv);
    CHECK(std::abs(c - cv * reducedVelocity(cl, kCar)) <= 1e-15 * cv);
  }
}

TEST_CASE("symmetric two-class split is exactly half and half") {
  const auto part = VelocityClassPartition::symmetric({1.34, 0.26}, 2, 3.0);
  const auto rho = partitionClasses(1.0, part);
  REQUIRE(rho.size() == 2);
  CHECK(rho[0] == 0.5);
  CHECK(rho[1] == 0.5);
}

TEST_CASE("single class below the mean carries Phi(0) - Phi(-1)") {
  const auto part = VelocityClassPartition::fromBoundaries({1.34, 0.26}, {1.34 - 0.26, 1.34});
  const double oracle = normalCdf(1.34, 1.34, 0.26) - normalCdf(1.08, 1.34, 0.26);
  CHECK(std::abs(part.intervalProbabilities()[0] - oracle) <= 1e-12);
  CHECK(std::abs(part.intervalProbabilities()[0] - 0.341345) <= 1e-6);
  CHECK(partitionClasses(1.0, part)[0] == 1.0);
}

TEST_CASE("default pedestrian partition") {
  const auto part = VelocityClassPartition::symmetric({1.34, 0.26}, 16, 3.0);
  CHECK(part.classCount() == 16);
  CHECK(part.boundaries().front() == doctest::Approx(1.34 - 0.78));
  CHECK(part.boundaries().back() == doctest::Approx(2.12));
  CHECK(part.maxSpeed() == doctest::Approx(2.12));
  const double width = 0.78 * 2 / 16;
  double sum = 0.0;
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(part.boundaries()[j + 1] - part.boundaries()[j] == doctest::Approx(width));
    CHECK(part.representatives()[j] > part.boundaries()[j]);
    CHECK(part.representatives()[j] < part.boundaries()[j + 1]);
    const double oracle = normalCdf(part.boundaries()[j + 1], 1.34, 0.26) -
                          normalCdf(part.boundaries()[j], 1.34, 0.26);
    CHECK(std::abs(part.intervalProbabilities()[j] - oracle) <= 1e-12);
    sum += oracle;
  }
  // Truncation at three standard deviations keeps 99.73% of the mass.
  CHECK(sum == doctest::Approx(0.9973).epsilon(1e-4));
  CHECK(std::abs(totalDensity(partitionClasses(2.7, part)) - 2.7) <= 1e-12);
}

TEST_CASE("partition properties on random inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t m = 1 + static_cast<std::size_t>(u(rng) * 24);
    const double c = 0.5 + 3.0 * u(rng);
    const auto part = VelocityClassPartition::symmetric({1.34, 0.26}, m, std::min(c, 5.0));
    const double rho0 = 5.4 * u(rng);
    const auto rho = partitionClasses(rho0, part);
    for (double r : rho) CHECK(r >= 0.0);
    CHECK(std::abs(totalDensity(rho) - rho0) <= 1e-12);
    const double a = 0.1 + u(rng);
    const auto scaled = partitionClasses(a * rho0, part);
    for (std::size_t k = 0; k < m; ++k) {
      CHECK(std::abs(scaled[k] - a * rho[k]) <= 1e-15 * scaled[k]);
    }
  }
}

TEST_CASE("total density") {
  CHECK(totalDensity({}) == 0.0);
  const double half[] = {0.5, 0.5};
  CHECK(totalDensity(half) == 1.0);
}

TEST_CASE("partition construction errors") {
  CHECK_THROWS_AS(VelocityClassPartition::symmetric({1.34, 0.26}, 0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(VelocityClassPartition::symmetric({1.34, 0.0}, 4, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(VelocityClassPartition::symmetric({1.34, 0.26}, 4, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(VelocityClassPartition::fromBoundaries({1.34, 0.26}, {1.5, 1.2}),
                  std::invalid_argument);
  const auto single = VelocityClassPartition::symmetric({15.0, 0.0}, 1, 3.0);
  CHECK(single.classCount() == 1);
  CHECK(single.representatives()[0] == 15.0);
  CHECK(single.weights()[0] == 1.0);
}

TEST_CASE("fundamental diagram wrapper") {
  const FundamentalDiagram ped(kPed);
  CHECK(ped.rhoMax() == 5.4);
  CHECK(ped.velocity(1.34, 1.0) == pedestrianVelocity(1.34, 1.0, kPed));
  CHECK(ped.reducedClamped(7.0) == 0.0);
  const FundamentalDiagram constant(ConstantVelocity{2.0, 3.0});
  CHECK(constant.isConstant());
  CHECK(constant.velocity(1.0, 2.9) == 2.0);
  CHECK_THROWS_AS(constant.velocity(1.0, 3.5), std::invalid_argument);
}
