#include "aqua/gauges.hpp"

#include <cmath>
#include <stdexcept>

namespace aqua {

void GaugeSpec::validate() const {
    if (!(t_norm_min > 0.0)) throw std::invalid_argument("gauge: t_norm_min <= 0");
    if (direction == GaugeDirection::AboveUpper && !(v_ext > threshold)) {
        throw std::invalid_argument("gauge: v_ext must exceed the upper threshold");
    }
    if (direction == GaugeDirection::BelowLower && !(v_ext < threshold)) {
        throw std::invalid_argument("gauge: v_ext must undercut the lower threshold");
    }
}

GaugeReading state_gauge(const ForecastOutput& forecast, const GaugeSpec& spec) {
    spec.validate();
    double s = spec.direction == GaugeDirection::AboveUpper ? 1.0 : -1.0;
    const std::vector<double>& f = forecast.mean;
    if (f.size() < 2) throw std::invalid_argument("gauge: forecast too short");

    double dt = kStepSeconds / 60.0; // minutes between samples
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        double e0 = s * (f[i] - spec.threshold);
        double e1 = s * (f[i + 1] - spec.threshold);
        if (e0 >= 0.0 && e1 >= 0.0) {
            area += 0.5 * (e0 + e1) * dt;
        } else if (e0 > 0.0) {
            // crossing at fraction u of the interval
            double u = e0 / (e0 - e1);
            area += 0.5 * e0 * u * dt;
        } else if (e1 > 0.0) {
            double u = e1 / (e1 - e0);
            area += 0.5 * e1 * u * dt;
        }
    }

    double denom = spec.t_norm_min * std::fabs(spec.v_ext - spec.threshold);
    GaugeReading r;
    r.area = area;
    r.clamped = area >= denom;
    r.value = 100.0 * std::min(1.0, area / denom);
    return r;
}

GaugeReading overall_gauge(const std::vector<GaugeReading>& readings,
                           const std::vector<double>& weights) {
    if (readings.size() != weights.size()) {
        throw std::invalid_argument("overall_gauge: length mismatch");
    }
    if (readings.empty()) throw std::invalid_argument("overall_gauge: empty");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("overall_gauge: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("overall_gauge: zero weight sum");
    GaugeReading r;
    for (std::size_t i = 0; i < readings.size(); ++i) {
        r.value += weights[i] / total * readings[i].value;
        r.area += weights[i] / total * readings[i].area;
    }
    r.clamped = r.value >= 100.0;
    return r;
}

GaugeReading anomaly_level(double mse, double theta_max) {
    if (mse < 0.0) throw std::invalid_argument("anomaly_level: negative mse");
    if (!(theta_max > 0.0)) throw std::invalid_argument("anomaly_level: theta_max <= 0");
    GaugeReading r;
    r.area = mse;
    r.clamped = mse >= theta_max;
    r.value = 100.0 * std::min(1.0, mse / theta_max);
    return r;
}

std::map<Variable, double> default_gauge_weights() {
    return {{Variable::Do, 0.4},
            {Variable::Ph, 0.2},
            {Variable::WaterTemp, 0.2},
            {Variable::Chlorophyll, 0.2}};
}

} // namespace aqua
