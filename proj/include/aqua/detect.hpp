#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aqua/datapipe.hpp"
#include "aqua/forecast.hpp"
#include "aqua/nn.hpp"
#include "aqua/params.hpp"
#include "aqua/tape.hpp"

namespace aqua {

enum class DetectorKind {
    RnnAe,
    DeepAe,
    RnnAeFc,
    Seq2Seq,
    Attention,
    DeepAnt,
    Transformer,
    ForecastNet,
};

enum class DetectorFamily { Autoencoder, Forecaster };

const char* detector_kind_name(DetectorKind k);
DetectorKind detector_kind_from_name(const std::string& s);
std::vector<DetectorKind> all_detector_kinds();

// Dimensions default to the deployed configuration; tests shrink them for
// gradient checks.
struct DetectorConfig {
    DetectorKind kind = DetectorKind::RnnAe;
    Variable variable = Variable::Do;

    std::size_t context_len = 0; // 0 = per-kind default (see context())
    std::size_t horizon_len = 96;
    std::size_t hidden = 24;              // rnnAe / rnnAeFc / seq2seq / attention
    std::vector<std::size_t> ae_hidden = {56, 41, 32}; // deepAe encoder
    std::size_t kernel = 8;               // deepAnt
    std::size_t channels = 32;            // deepAnt
    std::size_t d_model = 16;             // transformer
    std::size_t heads = 4;                // transformer
    std::size_t ff_units = 24;            // transformer
    std::size_t fn_layers = 2;            // forecastNet
    std::size_t fn_units = 24;            // forecastNet

    DetectorFamily family() const;
    // rnnAe/deepAe reconstruct their own 96-sample window; rnnAeFc is the
    // one forecaster working from a 96-sample context, the rest see 192.
    std::size_t context() const;
    // Autoencoders reconstruct their context; forecasters emit horizon_len.
    std::size_t horizon() const {
        return family() == DetectorFamily::Autoencoder ? context() : horizon_len;
    }

    std::string name() const { return detector_kind_name(kind); }
};

// Univariate anomaly detector over standardized data. Autoencoders emit a
// reconstruction of the input window; forecasters emit the next 96 steps.
class Detector {
public:
    Detector(DetectorConfig cfg, std::uint64_t seed);
    Detector(DetectorConfig cfg, ParamSet params); // from checkpoint

    const DetectorConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    // Prediction [horizon x 1]. teacher_forced substitutes the true target
    // for the feedback path where the architecture has one.
    Var forward(Tape& tape, const VarMap& p, const UniWindow& w,
                bool teacher_forced) const;

    Var loss(Tape& tape, const VarMap& p, const UniWindow& w) const;

    std::vector<double> predict(const UniWindow& w) const;

    // Keeps parameters injected once; rolls the tape back between windows.
    class Session {
    public:
        explicit Session(const Detector& d);
        std::vector<double> predict(const UniWindow& w);

    private:
        const Detector& d_;
        Tape tape_;
        VarMap pvars_;
        std::size_t mark_;
    };

private:
    DetectorConfig cfg_;
    ParamSet params_;
};

struct ScorePoint {
    Timestamp t = 0; // last sample of the scored 24-h span
    double mse = 0.0;
};

using ScoreSeries = std::vector<ScorePoint>;

// Sliding MSE over gap-free standardized segments. Segments shorter than
// context + horizon (context alone for autoencoders) contribute nothing.
ScoreSeries score(const Detector& det, const std::vector<Segment>& segments,
                  std::size_t stride = 1);

// Nearest-rank percentile of the training scores: sorted[ceil(p * n)],
// 1-indexed. Throws on empty input.
double calibrate_threshold(std::vector<double> scores, double percentile = 0.99);

struct AnomalyEvent {
    Timestamp enter = 0;
    Timestamp exit = 0;
    double peak_mse = 0.0;
};

// Maximal runs of consecutive scores strictly above
// level_fraction * theta_max.
std::vector<AnomalyEvent> detect(const ScoreSeries& scores, double theta_max,
                                 double level_fraction);

constexpr Timestamp kLeadTimeLookback = 48 * 3600;

// (time of the variable's minimum inside [win_start, win_end]) minus (time
// of the first score above `effective_threshold` from win_start - lookback
// onward). Positive = early warning, in seconds. nullopt when the scores
// never cross before the minimum.
std::optional<double> lead_time(const ScoreSeries& scores,
                                double effective_threshold,
                                const Segment& observed, Timestamp win_start,
                                Timestamp win_end,
                                Timestamp lookback = kLeadTimeLookback);

} // namespace aqua
