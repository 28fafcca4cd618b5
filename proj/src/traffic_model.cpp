#include "hybridflow/traffic_model.hpp"

#include <stdexcept>

namespace hybridflow {

TrafficModel TrafficModel::fromParams(const ModelParams& params) {
  const auto& ped = params.pedestrian;
  const auto& car = params.car;
  if (!(ped.vffMean > 0 && ped.vffStdDev > 0 && ped.gamma > 0 && ped.rhoMax > 0)) {
    throw std::invalid_argument("pedestrian parameters must be strictly positive");
  }
  if (!(car.vff > 0 && car.bigK > 0 && car.n > 0 && car.rhoMax > 0 && car.vffStdDev >= 0)) {
    throw std::invalid_argument("car parameters must be strictly positive");
  }
  auto walkClasses = VelocityClassPartition::symmetric({ped.vffMean, ped.vffStdDev},
                                                       params.pedestrianClasses, params.truncation);
  auto carClasses = VelocityClassPartition::symmetric({car.vff, car.vffStdDev}, params.carClasses,
                                                      params.truncation);
  return TrafficModel{ModeModel{FundamentalDiagram(ped), std::move(walkClasses)},
                      ModeModel{FundamentalDiagram(car), std::move(carClasses)}};
}

}  // namespace hybridflow
