#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqua/datapipe.hpp"
#include "aqua/detect.hpp"
#include "aqua/gauges.hpp"
#include "aqua/series.hpp"
#include "aqua/train.hpp"

namespace aqua {

constexpr int kReportSchemaVersion = 1;

// Configuration / IO problems map to exit code 2; everything else to 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exit codes shared by every command.
constexpr int kExitOk = 0;
constexpr int kExitComputeError = 1;
constexpr int kExitConfigError = 2;

// Synthetic scenario: `ponds` sensors, the last one held out for testing
// and carrying the injected anomalies.
struct ScenarioConfig {
    int ponds = 3;
    int days = 60;
    double forecast_error_std = 0.5;

    bool inject = true;
    double crash_day = 45.0;
    double crash_hours = 12.0;
    double crash_severity = 0.9;
    double fouling_day = 50.0;
    double fouling_days = 8.0;
    double fouling_severity = 0.8;
};

struct GaugeConfig {
    GaugeSpec spec;
    double weight = 0.25;
};

struct RunConfig {
    std::string data_dir = "data";
    std::string model_dir = "models";
    std::string report_dir = "reports";
    std::uint64_t seed = 7;

    ScenarioConfig scenario;
    TrainConfig train;

    // Forecaster kinds trained in both proposed and standard variants on
    // the target variable.
    std::vector<ModelKind> forecast_kinds = {ModelKind::ForecastNet,
                                             ModelKind::Attention,
                                             ModelKind::Transformer};
    // Extra proposed-ForecastNet forecasters feeding the state gauges.
    std::vector<Variable> gauge_variables = {Variable::Ph, Variable::WaterTemp,
                                             Variable::Chlorophyll};
    std::vector<DetectorKind> detector_kinds;
    DetectorKind pipeline_detector = DetectorKind::ForecastNet;

    std::size_t train_stride = 96;
    std::size_t eval_stride = 96;
    std::size_t score_stride = 4;
    double threshold_percentile = 0.99;
    double level_fraction = 0.7;
    std::size_t ticks = 24;

    std::vector<GaugeConfig> gauges;

    RunConfig();

    std::string test_sensor() const;
    void validate() const;

    static RunConfig load(const std::string& path);
    std::string dump() const; // pretty JSON, includes every field
};

int cmd_synth(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_detect(const RunConfig& cfg);
int cmd_pipeline(const RunConfig& cfg);

} // namespace aqua
