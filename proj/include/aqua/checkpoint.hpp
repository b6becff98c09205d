#pragma once

#include <string>

#include "aqua/detect.hpp"
#include "aqua/forecast.hpp"

namespace aqua {

constexpr int kCheckpointSchemaVersion = 1;

void save_forecast_checkpoint(const std::string& path,
                              const ForecastModelConfig& cfg,
                              const ParamSet& params);
ForecastModel load_forecast_checkpoint(const std::string& path);

void save_detector_checkpoint(const std::string& path,
                              const DetectorConfig& cfg,
                              const ParamSet& params);
Detector load_detector_checkpoint(const std::string& path);

} // namespace aqua
