#include "aqua/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace aqua {

std::vector<Segment> impute(const TimeSeries& series, std::size_t max_gap) {
    std::vector<Segment> out;
    const auto& v = series.values;
    std::size_t n = v.size();
    std::size_t i = 0;
    Segment cur;
    bool open = false;
    while (i < n) {
        if (!is_missing(v[i])) {
            if (!open) {
                cur = Segment{series.time_at(i), {}};
                open = true;
            }
            cur.values.push_back(v[i]);
            ++i;
            continue;
        }
        // run of missing values [i, j)
        std::size_t j = i;
        while (j < n && is_missing(v[j])) ++j;
        std::size_t run = j - i;
        if (open && j < n && run <= max_gap) {
            double a = cur.values.back();
            double b = v[j];
            for (std::size_t k = 1; k <= run; ++k) {
                cur.values.push_back(a + (b - a) * static_cast<double>(k) /
                                             static_cast<double>(run + 1));
            }
        } else if (open) {
            out.push_back(std::move(cur));
            open = false;
        }
        i = j;
    }
    if (open) out.push_back(std::move(cur));
    return out;
}

void Standardizer::fit(const std::vector<TimeSeries>& train_series) {
    std::map<Variable, std::pair<double, double>> acc; // sum, sumsq
    std::map<Variable, std::size_t> counts;
    for (const auto& ts : train_series) {
        for (double x : ts.values) {
            if (is_missing(x)) continue;
            acc[ts.variable].first += x;
            acc[ts.variable].second += x * x;
            counts[ts.variable]++;
        }
    }
    stats_.clear();
    for (const auto& [var, sums] : acc) {
        std::size_t n = counts[var];
        if (n == 0) continue;
        double mu = sums.first / n;
        double var_pop = sums.second / n - mu * mu;
        double sigma = std::sqrt(std::max(var_pop, 0.0));
        if (sigma <= 0.0) {
            throw std::runtime_error(std::string("degenerate variable: ") +
                                     variable_name(var));
        }
        stats_[var] = {mu, sigma};
    }
}

const Standardizer::Stats& Standardizer::stats(Variable v) const {
    // The exogenous forecast shares the air-temperature scale.
    if (v == Variable::AirTempForecast && !stats_.count(v)) v = Variable::AirTemp;
    auto it = stats_.find(v);
    if (it == stats_.end()) {
        throw std::out_of_range(std::string("Standardizer: unfitted variable ") +
                                variable_name(v));
    }
    return it->second;
}

double Standardizer::apply(Variable v, double x) const {
    const Stats& s = stats(v);
    return (x - s.mu) / s.sigma;
}

double Standardizer::invert(Variable v, double z) const {
    const Stats& s = stats(v);
    return z * s.sigma + s.mu;
}

std::size_t window_count(std::size_t segment_len, std::size_t in_len,
                         std::size_t out_len, std::size_t stride) {
    std::size_t need = in_len + out_len;
    if (segment_len < need) return 0;
    return (segment_len - need) / stride + 1;
}

ExoProvider::ExoProvider(std::vector<ForecastIssue> issues) {
    std::sort(issues.begin(), issues.end(),
              [](const ForecastIssue& a, const ForecastIssue& b) {
                  return a.issued_at < b.issued_at;
              });
    for (const auto& iss : issues) {
        resampled_.push_back(resample_forecast(iss));
        issued_.push_back(iss.issued_at);
    }
}

std::optional<std::vector<double>> ExoProvider::exo_for(Timestamp t0, std::size_t n) const {
    Timestamp t_end = t0 + static_cast<Timestamp>(n - 1) * kStepSeconds;
    // latest issue at or before the span start that still covers the span
    auto it = std::upper_bound(issued_.begin(), issued_.end(), t0);
    while (it != issued_.begin()) {
        --it;
        const TimeSeries& rs = resampled_[it - issued_.begin()];
        if (rs.start <= t0 && rs.time_at(rs.values.size() - 1) >= t_end) {
            std::vector<double> out(n);
            std::size_t off = (t0 - rs.start) / kStepSeconds;
            for (std::size_t i = 0; i < n; ++i) out[i] = rs.values[off + i];
            return out;
        }
    }
    return std::nullopt;
}

std::vector<SensorFrame> build_frames(const std::vector<TimeSeries>& all) {
    std::map<std::string, std::vector<const TimeSeries*>> by_sensor;
    for (const auto& ts : all) {
        if (ts.variable == Variable::AirTempForecast) continue;
        by_sensor[ts.sensor_id].push_back(&ts);
    }
    std::vector<SensorFrame> frames;
    for (const auto& [sensor, list] : by_sensor) {
        Timestamp lo = list.front()->start;
        Timestamp hi = list.front()->end();
        for (const TimeSeries* ts : list) {
            lo = std::min(lo, ts->start);
            hi = std::max(hi, ts->end());
        }
        std::size_t len = (hi - lo) / kStepSeconds;
        SensorFrame f;
        f.sensor_id = sensor;
        f.start = lo;
        f.length = len;
        f.data = Tensor::zeros(len, kNumHistoryVariables);
        for (auto& v : f.data.data()) v = kMissing;
        for (const TimeSeries* ts : list) {
            std::size_t col = kNumHistoryVariables;
            for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
                if (kHistoryVariables[c] == ts->variable) col = c;
            }
            if (col == kNumHistoryVariables) continue;
            for (const Segment& seg : impute(*ts)) {
                std::size_t off = (seg.start - lo) / kStepSeconds;
                for (std::size_t i = 0; i < seg.values.size(); ++i) {
                    f.data(off + i, col) = seg.values[i];
                }
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

namespace {

std::size_t target_column(Variable v) {
    for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
        if (kHistoryVariables[c] == v) return c;
    }
    throw std::invalid_argument("target variable not a history variable");
}

} // namespace

std::vector<WindowPair> make_windows(const SensorFrame& frame, const WindowSpec& spec,
                                     const ExoProvider* exo) {
    std::vector<WindowPair> out;
    std::size_t need = spec.in_len + spec.out_len;
    if (frame.length < need) return out;
    std::size_t tcol = target_column(spec.target);

    // complete[i]: all five variables present in row i
    std::vector<char> complete(frame.length, 1);
    for (std::size_t i = 0; i < frame.length; ++i) {
        for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
            if (is_missing(frame.data(i, c))) {
                complete[i] = 0;
                break;
            }
        }
    }
    // run_len[i]: consecutive complete rows starting at i
    std::vector<std::size_t> run_len(frame.length + 1, 0);
    for (std::size_t i = frame.length; i-- > 0;) {
        run_len[i] = complete[i] ? run_len[i + 1] + 1 : 0;
    }

    for (std::size_t off = 0; off + need <= frame.length; off += spec.stride) {
        if (run_len[off] < need) continue;
        Timestamp t0 = frame.time_at(off + spec.in_len);
        std::optional<std::vector<double>> exo_vals;
        if (exo != nullptr) {
            exo_vals = exo->exo_for(t0, spec.out_len);
            if (!exo_vals) continue;
        }
        WindowPair wp;
        wp.sensor = frame.sensor_id;
        wp.target_start = t0;
        wp.history = Tensor::zeros(spec.in_len, kNumHistoryVariables);
        for (std::size_t i = 0; i < spec.in_len; ++i) {
            for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
                wp.history(i, c) = frame.data(off + i, c);
            }
        }
        wp.target = Tensor::zeros(spec.out_len, 1);
        for (std::size_t i = 0; i < spec.out_len; ++i) {
            wp.target(i, 0) = frame.data(off + spec.in_len + i, tcol);
        }
        wp.last_target = frame.data(off + spec.in_len - 1, tcol);
        wp.exo = Tensor::zeros(spec.out_len, 1);
        if (exo_vals) {
            for (std::size_t i = 0; i < spec.out_len; ++i) wp.exo(i, 0) = (*exo_vals)[i];
        }
        out.push_back(std::move(wp));
    }
    return out;
}

namespace {

void apply_exclusions(TimeSeries& ts, const std::vector<Exclusion>& exclusions) {
    for (const auto& ex : exclusions) {
        if (!ex.sensor_id.empty() && ex.sensor_id != ts.sensor_id) continue;
        for (std::size_t i = 0; i < ts.values.size(); ++i) {
            Timestamp t = ts.time_at(i);
            if (t >= ex.start && t <= ex.end) ts.values[i] = kMissing;
        }
    }
}

void standardize_frame(SensorFrame& f, const Standardizer& st) {
    for (std::size_t i = 0; i < f.length; ++i) {
        for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
            double& v = f.data(i, c);
            if (!is_missing(v)) v = st.apply(kHistoryVariables[c], v);
        }
    }
}

} // namespace

Dataset leave_one_out_split(
    const std::vector<TimeSeries>& all,
    const std::map<std::string, std::vector<ForecastIssue>>& issues_by_sensor,
    const SplitPlan& plan) {
    std::vector<TimeSeries> train_series, test_series;
    bool saw_test = false;
    for (const auto& ts : all) {
        if (ts.sensor_id == plan.test_sensor) {
            saw_test = true;
            test_series.push_back(ts);
        } else {
            TimeSeries cut = ts;
            apply_exclusions(cut, plan.exclusions);
            train_series.push_back(std::move(cut));
        }
    }
    if (!saw_test) throw std::invalid_argument("test sensor absent: " + plan.test_sensor);
    if (train_series.empty()) throw std::invalid_argument("leave_one_out_split: no training sensors");

    Dataset ds;
    ds.standardizer.fit(train_series);

    std::map<std::string, ExoProvider> providers;
    for (const auto& [sensor, issues] : issues_by_sensor) {
        providers.emplace(sensor, ExoProvider(issues));
    }

    auto emit = [&](const std::vector<TimeSeries>& src, std::vector<WindowPair>& dst) {
        for (SensorFrame& f : build_frames(src)) {
            const ExoProvider* exo_ptr = nullptr;
            auto it = providers.find(f.sensor_id);
            if (it == providers.end()) it = providers.find(std::string());
            if (it != providers.end() && !it->second.empty()) exo_ptr = &it->second;
            standardize_frame(f, ds.standardizer);
            auto pairs = make_windows(f, plan.spec, exo_ptr);
            for (auto& wp : pairs) {
                if (exo_ptr != nullptr) {
                    for (auto& v : wp.exo.data()) {
                        v = ds.standardizer.apply(Variable::AirTempForecast, v);
                    }
                }
                dst.push_back(std::move(wp));
            }
        }
    };
    emit(train_series, ds.train);
    emit(test_series, ds.test);
    return ds;
}

Dataset leave_one_out_split(const std::vector<TimeSeries>& all,
                            const std::vector<ForecastIssue>& issues,
                            const SplitPlan& plan) {
    // one regional forecast source shared by every sensor
    std::map<std::string, std::vector<ForecastIssue>> shared;
    shared.emplace(std::string(), issues);
    return leave_one_out_split(all, shared, plan);
}

std::vector<UniWindow> make_uni_windows(const std::vector<Segment>& segments,
                                        std::size_t ctx_len, std::size_t out_len,
                                        bool reconstruct, std::size_t stride) {
    std::vector<UniWindow> out;
    for (const Segment& seg : segments) {
        std::size_t need = reconstruct ? ctx_len : ctx_len + out_len;
        if (seg.values.size() < need) continue;
        for (std::size_t off = 0; off + need <= seg.values.size(); off += stride) {
            UniWindow w;
            w.context = Tensor::zeros(ctx_len, 1);
            for (std::size_t i = 0; i < ctx_len; ++i) w.context(i, 0) = seg.values[off + i];
            if (reconstruct) {
                w.target = w.context;
                w.scored_end = seg.time_at(off + ctx_len - 1);
            } else {
                w.target = Tensor::zeros(out_len, 1);
                for (std::size_t i = 0; i < out_len; ++i) {
                    w.target(i, 0) = seg.values[off + ctx_len + i];
                }
                w.scored_end = seg.time_at(off + need - 1);
            }
            out.push_back(std::move(w));
        }
    }
    return out;
}

} // namespace aqua
