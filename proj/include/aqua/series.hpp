#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace aqua {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

constexpr Timestamp kStepSeconds = 15 * 60;
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return v != v; }

// "2020-01-31T12:45:00Z" <-> Timestamp. Throws on malformed input.
Timestamp parse_iso8601(const std::string& s);
std::string format_iso8601(Timestamp t);

enum class Variable { Do, Ph, Chlorophyll, WaterTemp, AirTemp, AirTempForecast };

const char* variable_name(Variable v);
Variable variable_from_name(const std::string& name);

// The five history variables in fixed column order.
inline constexpr Variable kHistoryVariables[] = {
    Variable::Do, Variable::Ph, Variable::Chlorophyll, Variable::WaterTemp,
    Variable::AirTemp};
inline constexpr std::size_t kNumHistoryVariables = 5;

// One variable from one sensor on the uniform 15-minute grid.
// values[i] corresponds to start + i * kStepSeconds; NaN marks missing.
struct TimeSeries {
    std::string sensor_id;
    Variable variable = Variable::Do;
    Timestamp start = 0;
    std::vector<double> values;

    Timestamp time_at(std::size_t i) const {
        return start + static_cast<Timestamp>(i) * kStepSeconds;
    }
    Timestamp end() const { return time_at(values.size()); }
};

// Sensor CSV: header "timestamp,sensor_id,variable,value"; empty value field
// marks a missing sample. Rows may arrive unordered; they are binned onto
// the grid. Off-grid or duplicate timestamps are errors.
std::vector<TimeSeries> load_sensor_csv(const std::string& path);
void save_sensor_csv(const std::string& path, const std::vector<TimeSeries>& series);

// One weather-forecast issue: hourly valid-at points for a 24-h horizon.
struct ForecastIssue {
    Timestamp issued_at = 0;
    std::vector<Timestamp> valid_at;
    std::vector<double> air_temp;
};

// Forecast CSV: header "issued_at,valid_at,air_temp_forecast".
std::vector<ForecastIssue> load_forecast_csv(const std::string& path);
void save_forecast_csv(const std::string& path, const std::vector<ForecastIssue>& issues);

// Linear interpolation of one hourly issue onto the 15-minute grid.
// Throws if the issue covers less than 24 hours.
TimeSeries resample_forecast(const ForecastIssue& issue);

} // namespace aqua
