#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqua/series.hpp"
#include "aqua/tensor.hpp"

namespace aqua {

// Gap-free run of samples cut out of one TimeSeries.
struct Segment {
    Timestamp start = 0;
    std::vector<double> values;

    Timestamp time_at(std::size_t i) const {
        return start + static_cast<Timestamp>(i) * kStepSeconds;
    }
};

// Linear interpolation across missing runs of <= max_gap samples; longer
// runs split the series. Leading/trailing missing runs are trimmed.
std::vector<Segment> impute(const TimeSeries& series, std::size_t max_gap = 8);

// Per-variable standardization, population (1/n) sigma, fit on training
// data only and pooled across training sensors.
class Standardizer {
public:
    void fit(const std::vector<TimeSeries>& train_series);

    double apply(Variable v, double x) const;
    double invert(Variable v, double z) const;

    double mean_of(Variable v) const { return stats(v).mu; }
    double sigma_of(Variable v) const { return stats(v).sigma; }
    bool has(Variable v) const { return stats_.count(v) != 0; }

private:
    struct Stats {
        double mu = 0.0;
        double sigma = 1.0;
    };
    const Stats& stats(Variable v) const;
    std::map<Variable, Stats> stats_;
};

// One model instance: 48-h multivariate history, 24-h exogenous forecast,
// 24-h target.
struct WindowPair {
    Tensor history;             // [in_len x kNumHistoryVariables]
    Tensor exo;                 // [out_len x 1]
    Tensor target;              // [out_len x 1]
    double last_target = 0.0;   // final observed target value (decoder seed)
    Timestamp target_start = 0; // time of the first target step
    std::string sensor;
};

struct WindowSpec {
    std::size_t in_len = 192;
    std::size_t out_len = 96;
    std::size_t stride = 1;
    Variable target = Variable::Do;
};

// Sliding-window pair count for a gap-free segment of length L:
// max(0, L - (in + out) + 1) at stride 1.
std::size_t window_count(std::size_t segment_len, std::size_t in_len,
                         std::size_t out_len, std::size_t stride = 1);

// Serves the exogenous air-temperature forecast for a given target span,
// using the latest issue at or before the span start that covers it.
class ExoProvider {
public:
    ExoProvider() = default;
    explicit ExoProvider(std::vector<ForecastIssue> issues);

    // 15-min values for [t0, t0 + n*step); nullopt when no issue covers it.
    std::optional<std::vector<double>> exo_for(Timestamp t0, std::size_t n) const;

    bool empty() const { return resampled_.empty(); }

private:
    std::vector<TimeSeries> resampled_; // sorted by issue time
    std::vector<Timestamp> issued_;
};

// Aligned multivariate view of one sensor: [T x 5] with NaN rows where any
// variable is missing after imputation.
struct SensorFrame {
    std::string sensor_id;
    Timestamp start = 0;
    std::size_t length = 0;
    Tensor data; // [length x kNumHistoryVariables]

    Timestamp time_at(std::size_t i) const {
        return start + static_cast<Timestamp>(i) * kStepSeconds;
    }
};

// Groups series by sensor, imputes each variable and aligns the five
// history variables onto a common grid.
std::vector<SensorFrame> build_frames(const std::vector<TimeSeries>& all);

// Every offset with in+out consecutive complete rows (and exo coverage when
// `exo` is non-null) yields one pair. Values are emitted as stored in the
// frame; standardize the frame first for model use.
std::vector<WindowPair> make_windows(const SensorFrame& frame, const WindowSpec& spec,
                                     const ExoProvider* exo);

// Time interval excluded from training data; empty sensor_id matches all.
struct Exclusion {
    std::string sensor_id;
    Timestamp start = 0;
    Timestamp end = 0;
};

struct SplitPlan {
    std::string test_sensor;
    std::vector<Exclusion> exclusions;
    WindowSpec spec;
};

struct Dataset {
    std::vector<WindowPair> train;
    std::vector<WindowPair> test;
    Standardizer standardizer;
};

// Leave-one-out split: training pairs from all non-test sensors with
// exclusion intervals removed before windowing; test pairs from the test
// sensor only. All emitted windows are standardized with training stats.
// Forecast issues are keyed by sensor; the "" key serves any sensor
// without its own entry.
Dataset leave_one_out_split(
    const std::vector<TimeSeries>& all,
    const std::map<std::string, std::vector<ForecastIssue>>& issues_by_sensor,
    const SplitPlan& plan);
Dataset leave_one_out_split(const std::vector<TimeSeries>& all,
                            const std::vector<ForecastIssue>& issues,
                            const SplitPlan& plan);

// Univariate (context, target) example for the anomaly detectors, in
// standardized units. For autoencoders target == context.
struct UniWindow {
    Tensor context; // [ctx_len x 1]
    Tensor target;  // [out_len x 1]
    Timestamp scored_end = 0; // time of the last sample of the scored span
};

std::vector<UniWindow> make_uni_windows(const std::vector<Segment>& segments,
                                        std::size_t ctx_len, std::size_t out_len,
                                        bool reconstruct, std::size_t stride = 1);

} // namespace aqua
