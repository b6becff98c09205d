#include "aqua/synthgen.hpp"

#include <cmath>
#include <stdexcept>

#include "aqua/rng.hpp"

namespace aqua {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSamplesPerDay = 96.0;

double diurnal(const VarParams& p, double day_frac_h) {
    return p.amplitude * std::sin(kTwoPi * (day_frac_h - p.phase_h) / 24.0);
}

} // namespace

PondParams paperlike_pond(int sensor_index, std::uint64_t seed) {
    PondParams p;
    p.seed = seed * 1000003ULL + static_cast<std::uint64_t>(sensor_index);
    // small per-pond character differences
    p.air_trend_phase_d = 0.9 * sensor_index;
    p.do_v.base += 0.3 * sensor_index;
    p.water.base += 0.2 * sensor_index;
    p.chl.base += 3.0 * sensor_index;
    return p;
}

std::vector<TimeSeries> gen_pond(int days, const PondParams& params,
                                 const std::string& sensor_id, Timestamp start) {
    if (days < 1) throw std::invalid_argument("gen_pond: days < 1");
    std::size_t n = static_cast<std::size_t>(days) * 96;
    Rng rng(params.seed);

    std::vector<double> air_clean(n), water_clean(n), chl_slow(n);
    for (std::size_t i = 0; i < n; ++i) {
        double day = static_cast<double>(i) / kSamplesPerDay;
        double hour = std::fmod(static_cast<double>(start) / 3600.0 + day * 24.0, 24.0);
        double trend = params.air_trend_amp *
                       std::sin(kTwoPi * (day - params.air_trend_phase_d) /
                                params.air_trend_period_d);
        air_clean[i] = params.air.base + diurnal(params.air, hour) + trend;
        chl_slow[i] = params.chl.base +
                      params.chl_slow_amp *
                          std::sin(kTwoPi * day / params.chl_slow_period_d);
    }
    std::size_t wt_lag = static_cast<std::size_t>(params.wt_air_lag_h * 4.0);
    std::size_t do_lag = static_cast<std::size_t>(params.do_wt_lag_h * 4.0);
    for (std::size_t i = 0; i < n; ++i) {
        double day = static_cast<double>(i) / kSamplesPerDay;
        double hour = std::fmod(static_cast<double>(start) / 3600.0 + day * 24.0, 24.0);
        double air_lagged = air_clean[i >= wt_lag ? i - wt_lag : 0];
        water_clean[i] = params.water.base + diurnal(params.water, hour) +
                         params.wt_air_coupling * (air_lagged - params.air.base);
    }

    std::vector<TimeSeries> out;
    for (Variable var : kHistoryVariables) {
        TimeSeries ts;
        ts.sensor_id = sensor_id;
        ts.variable = var;
        ts.start = start;
        ts.values.resize(n);
        out.push_back(std::move(ts));
    }
    auto& do_s = out[0].values;
    auto& ph_s = out[1].values;
    auto& chl_s = out[2].values;
    auto& wt_s = out[3].values;
    auto& at_s = out[4].values;

    for (std::size_t i = 0; i < n; ++i) {
        double day = static_cast<double>(i) / kSamplesPerDay;
        double hour = std::fmod(static_cast<double>(start) / 3600.0 + day * 24.0, 24.0);

        at_s[i] = air_clean[i] + rng.normal(0.0, params.air.noise_std);
        wt_s[i] = water_clean[i] + rng.normal(0.0, params.water.noise_std);
        chl_s[i] = chl_slow[i] + diurnal(params.chl, hour) +
                   rng.normal(0.0, params.chl.noise_std);
        ph_s[i] = params.ph.base + diurnal(params.ph, hour) +
                  rng.normal(0.0, params.ph.noise_std);

        double amp_scale =
            1.0 + params.do_chl_amp_coupling * (chl_slow[i] - params.chl.base) /
                      params.chl.base;
        double wt_lagged = water_clean[i >= do_lag ? i - do_lag : 0];
        do_s[i] = params.do_v.base + amp_scale * diurnal(params.do_v, hour) +
                  params.do_wt_coupling * (wt_lagged - params.water.base) +
                  rng.normal(0.0, params.do_v.noise_std);
    }
    return out;
}

void inject_do_crash(TimeSeries& do_series, const AnomalyInjection& inj) {
    if (inj.kind != AnomalyInjection::Kind::DoCrash) {
        throw std::invalid_argument("inject_do_crash: wrong kind");
    }
    if (inj.severity <= 0.0 || inj.severity > 1.0) {
        throw std::invalid_argument("inject_do_crash: severity outside (0, 1]");
    }
    Timestamp end = inj.start + inj.duration;
    if (inj.start < do_series.start || end > do_series.end()) {
        throw std::invalid_argument("inject_do_crash: window outside series");
    }
    for (std::size_t i = 0; i < do_series.values.size(); ++i) {
        Timestamp t = do_series.time_at(i);
        if (t < inj.start || t > end) continue;
        double u = static_cast<double>(t - inj.start) / static_cast<double>(inj.duration);
        // cosine taper: 1 at the edges, 1 - severity at the midpoint
        double factor = 1.0 - inj.severity * 0.5 * (1.0 - std::cos(kTwoPi * u));
        do_series.values[i] *= factor;
    }
}

void inject_biofouling(TimeSeries& series, const AnomalyInjection& inj) {
    if (inj.kind != AnomalyInjection::Kind::Biofouling) {
        throw std::invalid_argument("inject_biofouling: wrong kind");
    }
    if (inj.severity <= 0.0 || inj.severity > 1.0) {
        throw std::invalid_argument("inject_biofouling: severity outside (0, 1]");
    }
    Timestamp end = inj.start + inj.duration;
    if (inj.start < series.start || end > series.end()) {
        throw std::invalid_argument("inject_biofouling: window outside series");
    }
    // baseline = mean of the clean samples before the injection (whole series
    // mean when the injection starts at the first sample)
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (series.time_at(i) >= inj.start) break;
        sum += series.values[i];
        ++cnt;
    }
    if (cnt == 0) {
        for (double v : series.values) sum += v;
        cnt = series.values.size();
    }
    double baseline = sum / static_cast<double>(cnt);
    const double fouled_frac = 0.35; // long-run level as a fraction of baseline

    for (std::size_t i = 0; i < series.values.size(); ++i) {
        Timestamp t = series.time_at(i);
        if (t < inj.start || t > end) continue;
        double days = static_cast<double>(t - inj.start) / 86400.0;
        double atten = std::exp(-2.0 * inj.severity * days);
        double drift = 1.0 - (1.0 - fouled_frac) * inj.severity *
                                 (1.0 - std::exp(-0.8 * inj.severity * days));
        series.values[i] = baseline * drift + (series.values[i] - baseline) * atten;
    }
}

std::vector<ForecastIssue> gen_air_forecast(const TimeSeries& truth_air,
                                            double error_std, std::uint64_t seed,
                                            int horizon_hours) {
    if (truth_air.variable != Variable::AirTemp) {
        throw std::invalid_argument("gen_air_forecast: needs the air_temp series");
    }
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<ForecastIssue> issues;
    Timestamp first = truth_air.start;
    // issues on the hour only
    if (first % 3600 != 0) first += 3600 - (first % 3600);
    Timestamp horizon = static_cast<Timestamp>(horizon_hours) * 3600;
    for (Timestamp t = first; t + horizon < truth_air.end(); t += 3600) {
        ForecastIssue iss;
        iss.issued_at = t;
        for (int h = 0; h <= horizon_hours; ++h) {
            Timestamp valid = t + static_cast<Timestamp>(h) * 3600;
            std::size_t idx = (valid - truth_air.start) / kStepSeconds;
            double lead_frac = static_cast<double>(h) / horizon_hours;
            double noise = h == 0 ? 0.0 : rng.normal(0.0, error_std * lead_frac);
            iss.valid_at.push_back(valid);
            iss.air_temp.push_back(truth_air.values[idx] + noise);
        }
        issues.push_back(std::move(iss));
    }
    return issues;
}

} // namespace aqua
