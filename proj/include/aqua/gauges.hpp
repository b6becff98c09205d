#pragma once

#include <map>
#include <vector>

#include "aqua/forecast.hpp"
#include "aqua/series.hpp"

namespace aqua {

enum class GaugeDirection { AboveUpper, BelowLower };

// Pond-state gauge: area between the forecast curve and a horizontal
// threshold, normalized against T_norm minutes at the dataset extreme.
struct GaugeSpec {
    Variable variable = Variable::Do;
    double threshold = 0.0;
    GaugeDirection direction = GaugeDirection::AboveUpper;
    double v_ext = 0.0;        // dataset max (above) or min (below)
    double t_norm_min = 180.0; // "3 hours"

    void validate() const;
};

struct GaugeReading {
    double value = 0.0; // [0, 100]
    double area = 0.0;  // exceedance area, unit x minutes
    bool clamped = false;
};

// Trapezoidal exceedance area over the forecast horizon with exact
// threshold-crossing subdivision; value = 100 * min(1, A / (T_norm * |v_ext
// - threshold|)). Forecast must be in physical units.
GaugeReading state_gauge(const ForecastOutput& forecast, const GaugeSpec& spec);

// Weighted mean of gauge values; weights are normalized at use.
GaugeReading overall_gauge(const std::vector<GaugeReading>& readings,
                           const std::vector<double>& weights);

// 100 * min(1, mse / theta_max); theta_max is the level-100 MSE from
// threshold calibration.
GaugeReading anomaly_level(double mse, double theta_max);

// DO 0.4, pH 0.2, water temperature 0.2, chlorophyll 0.2.
std::map<Variable, double> default_gauge_weights();

} // namespace aqua
