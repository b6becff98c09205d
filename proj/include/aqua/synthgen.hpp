#pragma once

#include <cstdint>
#include <vector>

#include "aqua/series.hpp"

namespace aqua {

struct VarParams {
    double base = 0.0;
    double amplitude = 0.0; // diurnal
    double phase_h = 0.0;   // hours; diurnal peak offset
    double noise_std = 0.0;
};

// Deterministic pond model: diurnal sinusoids, a multi-day air-temperature
// trend, cross-couplings (water temp follows air temp; DO lags water temp;
// chlorophyll modulates the DO amplitude) and seeded Gaussian noise.
struct PondParams {
    VarParams do_v{7.0, 2.5, 16.0, 0.15};
    VarParams ph{8.0, 0.15, 17.0, 0.02};
    VarParams chl{40.0, 5.0, 15.0, 1.0};
    VarParams water{28.0, 1.5, 16.0, 0.08};
    VarParams air{26.0, 5.0, 15.0, 0.3};

    double air_trend_amp = 3.0;       // degC, multi-day swing
    double air_trend_period_d = 6.5;  // days
    double air_trend_phase_d = 0.0;

    double wt_air_coupling = 0.55;
    double wt_air_lag_h = 2.0;
    double do_wt_coupling = 0.9;  // mg/L per degC of lagged water-temp deviation
    double do_wt_lag_h = 3.0;
    double do_chl_amp_coupling = 0.4;
    double chl_slow_period_d = 11.0;
    double chl_slow_amp = 8.0;

    std::uint64_t seed = 0;
};

// Default scenario pond, with per-sensor phase/trend offsets.
PondParams paperlike_pond(int sensor_index, std::uint64_t seed);

struct AnomalyInjection {
    enum class Kind { DoCrash, Biofouling };
    Kind kind = Kind::DoCrash;
    Timestamp start = 0;
    Timestamp duration = 0;
    double severity = 1.0; // in (0, 1]
};

// Five history variables on the 15-min grid starting at `start`.
std::vector<TimeSeries> gen_pond(int days, const PondParams& params,
                                 const std::string& sensor_id, Timestamp start = 0);

// Smooth cosine-taper ramp down to (1 - severity) x baseline at the window
// midpoint and back. Only samples inside the window change.
void inject_do_crash(TimeSeries& do_series, const AnomalyInjection& inj);

// From the window start the diurnal amplitude decays exponentially and the
// level drifts toward a fouled offset. Only samples inside the window change.
void inject_biofouling(TimeSeries& series, const AnomalyInjection& inj);

// Simulated weather service: hourly issues, each covering `horizon_hours`
// (+ endpoint), forecast = truth + seeded noise growing linearly with lead.
std::vector<ForecastIssue> gen_air_forecast(const TimeSeries& truth_air,
                                            double error_std, std::uint64_t seed,
                                            int horizon_hours = 24);

} // namespace aqua
