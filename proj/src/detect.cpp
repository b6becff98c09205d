#include "aqua/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqua {

const char* detector_kind_name(DetectorKind k) {
    switch (k) {
        case DetectorKind::RnnAe: return "rnnAe";
        case DetectorKind::DeepAe: return "deepAe";
        case DetectorKind::RnnAeFc: return "rnnAeFc";
        case DetectorKind::Seq2Seq: return "seq2seq";
        case DetectorKind::Attention: return "attention";
        case DetectorKind::DeepAnt: return "deepAnt";
        case DetectorKind::Transformer: return "transformer";
        case DetectorKind::ForecastNet: return "forecastNet";
    }
    return "?";
}

DetectorKind detector_kind_from_name(const std::string& s) {
    for (DetectorKind k : all_detector_kinds()) {
        if (s == detector_kind_name(k)) return k;
    }
    throw std::invalid_argument("unknown detector kind: " + s);
}

std::vector<DetectorKind> all_detector_kinds() {
    return {DetectorKind::RnnAe,     DetectorKind::DeepAe,
            DetectorKind::RnnAeFc,   DetectorKind::Seq2Seq,
            DetectorKind::Attention, DetectorKind::DeepAnt,
            DetectorKind::Transformer, DetectorKind::ForecastNet};
}

DetectorFamily DetectorConfig::family() const {
    switch (kind) {
        case DetectorKind::RnnAe:
        case DetectorKind::DeepAe: return DetectorFamily::Autoencoder;
        default: return DetectorFamily::Forecaster;
    }
}

std::size_t DetectorConfig::context() const {
    if (context_len != 0) return context_len;
    switch (kind) {
        case DetectorKind::RnnAe:
        case DetectorKind::DeepAe:
        case DetectorKind::RnnAeFc: return 96;
        default: return 2 * horizon_len;
    }
}

namespace {

arch::AttentionDims det_att_dims(const DetectorConfig& c) {
    return {1, c.hidden, c.horizon(), true, false};
}
arch::TransformerDims det_trans_dims(const DetectorConfig& c) {
    return {1, c.d_model, c.heads, c.ff_units, c.horizon(), false};
}
arch::ForecastNetDims det_fn_dims(const DetectorConfig& c) {
    return {c.context(), c.horizon(), c.fn_layers, c.fn_units, Head::Linear};
}

std::vector<std::size_t> deep_ae_dims(const DetectorConfig& c) {
    std::vector<std::size_t> dims = {c.context()};
    dims.insert(dims.end(), c.ae_hidden.begin(), c.ae_hidden.end());
    for (std::size_t i = c.ae_hidden.size() - 1; i-- > 0;) {
        dims.push_back(c.ae_hidden[i]);
    }
    dims.push_back(c.context());
    return dims;
}

// Encoder/decoder LSTM stack with scalar feedback, shared by the rnnAe,
// rnnAeFc and seq2seq detectors.
Var lstm_seq(Tape& tape, const VarMap& p, const std::string& prefix,
             std::size_t layers, std::size_t hidden, const Tensor& context,
             double y0, std::size_t steps, const Tensor* teacher) {
    Var ctx = tape.constant(context);
    std::vector<LstmVars> enc_w(layers), dec_w(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        std::string tag = "." + std::to_string(l);
        enc_w[l] = lstm_vars(p, prefix + ".enc" + tag);
        dec_w[l] = lstm_vars(p, prefix + ".dec" + tag);
    }
    Tensor zero = Tensor::zeros(1, hidden);
    std::vector<LstmState> st(layers,
                              {tape.constant(zero), tape.constant(zero)});
    for (std::size_t t = 0; t < context.rows(); ++t) {
        Var x = slice_rows(ctx, t, t + 1);
        for (std::size_t l = 0; l < layers; ++l) {
            st[l] = lstm_step(x, st[l], enc_w[l]);
            x = st[l].h;
        }
    }
    Var y_prev = tape.constant(Tensor::scalar(y0));
    Var teach;
    if (teacher != nullptr) teach = tape.constant(*teacher);
    std::vector<Var> outputs;
    outputs.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        Var x = y_prev;
        for (std::size_t l = 0; l < layers; ++l) {
            st[l] = lstm_step(x, st[l], dec_w[l]);
            x = st[l].h;
        }
        Var y = dense(x, p.at(prefix + ".out.w"), p.at(prefix + ".out.b"),
                      Activation::Linear);
        outputs.push_back(y);
        y_prev = teacher != nullptr ? slice_rows(teach, k, k + 1) : y;
    }
    return concat_rows(outputs);
}

void init_lstm_seq(ParamSet& ps, Rng& rng, const std::string& prefix,
                   std::size_t layers, std::size_t hidden) {
    for (std::size_t l = 0; l < layers; ++l) {
        std::string tag = "." + std::to_string(l);
        std::size_t in = l == 0 ? 1 : hidden;
        init_lstm(ps, rng, prefix + ".enc" + tag, in, hidden);
        init_lstm(ps, rng, prefix + ".dec" + tag, in, hidden);
    }
    ps.add(prefix + ".out.w", glorot_uniform(rng, hidden, 1));
    ps.add(prefix + ".out.b", Tensor::zeros(1, 1));
}

Var deep_ae_forward(Tape& tape, const VarMap& p, const DetectorConfig& cfg,
                    const Tensor& context) {
    Var x = transpose(tape.constant(context)); // [1 x context]
    std::size_t n = deep_ae_dims(cfg).size() - 1;
    for (std::size_t l = 0; l < n; ++l) {
        std::string lp = "deepAe.l" + std::to_string(l);
        Activation act = l + 1 == n ? Activation::Linear : Activation::Relu;
        x = dense(x, p.at(lp + ".w"), p.at(lp + ".b"), act);
    }
    return transpose(x);
}

Var flatten_rows(Var x) {
    std::vector<Var> parts;
    parts.reserve(x.val().rows());
    for (std::size_t r = 0; r < x.val().rows(); ++r) {
        parts.push_back(slice_rows(x, r, r + 1));
    }
    return concat_cols(parts);
}

Var deep_ant_forward(Tape& tape, const VarMap& p, const DetectorConfig& cfg,
                     const Tensor& context) {
    Var x = tape.constant(context); // [context x 1]
    x = relu(conv1d(x, p.at("deepAnt.c1.w"), p.at("deepAnt.c1.b"), cfg.kernel));
    x = maxpool1d(x, 2);
    x = relu(conv1d(x, p.at("deepAnt.c2.w"), p.at("deepAnt.c2.b"), cfg.kernel));
    x = maxpool1d(x, 2);
    Var flat = flatten_rows(x);
    Var out = dense(flat, p.at("deepAnt.fc.w"), p.at("deepAnt.fc.b"),
                    Activation::Linear);
    return transpose(out); // [horizon x 1]
}

std::size_t deep_ant_flat_dim(const DetectorConfig& cfg) {
    std::size_t len = cfg.context();
    len = (len - cfg.kernel + 1) / 2; // conv then pool
    len = (len - cfg.kernel + 1) / 2;
    return len * cfg.channels;
}

} // namespace

Detector::Detector(DetectorConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(seed) {
    Rng rng(seed);
    switch (cfg_.kind) {
        case DetectorKind::RnnAe:
            init_lstm_seq(params_, rng, "rnnAe", 1, cfg_.hidden);
            break;
        case DetectorKind::RnnAeFc:
            init_lstm_seq(params_, rng, "rnnAeFc", 1, cfg_.hidden);
            break;
        case DetectorKind::Seq2Seq:
            init_lstm_seq(params_, rng, "seq2seq", 2, cfg_.hidden);
            break;
        case DetectorKind::DeepAe: {
            auto dims = deep_ae_dims(cfg_);
            for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
                std::string lp = "deepAe.l" + std::to_string(l);
                params_.add(lp + ".w", glorot_uniform(rng, dims[l], dims[l + 1]));
                params_.add(lp + ".b", Tensor::zeros(1, dims[l + 1]));
            }
            break;
        }
        case DetectorKind::DeepAnt:
            params_.add("deepAnt.c1.w",
                        glorot_uniform(rng, cfg_.kernel, cfg_.channels));
            params_.add("deepAnt.c1.b", Tensor::zeros(1, cfg_.channels));
            params_.add("deepAnt.c2.w",
                        glorot_uniform(rng, cfg_.kernel * cfg_.channels,
                                       cfg_.channels));
            params_.add("deepAnt.c2.b", Tensor::zeros(1, cfg_.channels));
            params_.add("deepAnt.fc.w",
                        glorot_uniform(rng, deep_ant_flat_dim(cfg_),
                                       cfg_.horizon()));
            params_.add("deepAnt.fc.b", Tensor::zeros(1, cfg_.horizon()));
            break;
        case DetectorKind::Attention:
            arch::init_attention(params_, rng, "att", det_att_dims(cfg_));
            break;
        case DetectorKind::Transformer:
            arch::init_transformer(params_, rng, "trans", det_trans_dims(cfg_));
            break;
        case DetectorKind::ForecastNet:
            arch::init_forecastnet(params_, rng, "fn", det_fn_dims(cfg_));
            break;
    }
}

Detector::Detector(DetectorConfig cfg, ParamSet params)
    : cfg_(cfg), params_(std::move(params)) {}

Var Detector::forward(Tape& tape, const VarMap& p, const UniWindow& w,
                      bool teacher_forced) const {
    if (w.context.rows() != cfg_.context() || w.context.cols() != 1) {
        throw std::invalid_argument("detector forward: context shape");
    }
    double y0 = w.context(w.context.rows() - 1, 0);
    const Tensor* teach = teacher_forced ? &w.target : nullptr;
    std::size_t steps = cfg_.horizon();
    switch (cfg_.kind) {
        case DetectorKind::RnnAe:
            return lstm_seq(tape, p, "rnnAe", 1, cfg_.hidden, w.context, y0,
                            steps, teach);
        case DetectorKind::RnnAeFc:
            return lstm_seq(tape, p, "rnnAeFc", 1, cfg_.hidden, w.context, y0,
                            steps, teach);
        case DetectorKind::Seq2Seq:
            return lstm_seq(tape, p, "seq2seq", 2, cfg_.hidden, w.context, y0,
                            steps, teach);
        case DetectorKind::DeepAe:
            return deep_ae_forward(tape, p, cfg_, w.context);
        case DetectorKind::DeepAnt:
            return deep_ant_forward(tape, p, cfg_, w.context);
        case DetectorKind::Attention:
            return arch::attention_forecast(tape, p, "att", w.context, nullptr,
                                            y0, det_att_dims(cfg_));
        case DetectorKind::Transformer:
            return arch::transformer_forecast(tape, p, "trans", w.context,
                                              nullptr, y0, teach,
                                              det_trans_dims(cfg_));
        case DetectorKind::ForecastNet: {
            Tensor flat = Tensor::zeros(1, w.context.rows());
            for (std::size_t i = 0; i < w.context.rows(); ++i) {
                flat(0, i) = w.context(i, 0);
            }
            return arch::forecastnet_forward(tape, p, "fn", flat, y0,
                                             det_fn_dims(cfg_))
                .mean;
        }
    }
    throw std::logic_error("detector forward: unknown kind");
}

Var Detector::loss(Tape& tape, const VarMap& p, const UniWindow& w) const {
    return mse_loss(forward(tape, p, w, /*teacher_forced=*/true),
                    tape.constant(w.target));
}

std::vector<double> Detector::predict(const UniWindow& w) const {
    Session s(*this);
    return s.predict(w);
}

Detector::Session::Session(const Detector& d) : d_(d) {
    pvars_ = d.params_.inject(tape_);
    mark_ = tape_.size();
}

std::vector<double> Detector::Session::predict(const UniWindow& w) {
    tape_.truncate(mark_);
    Var out = d_.forward(tape_, pvars_, w, /*teacher_forced=*/false);
    return out.val().data();
}

ScoreSeries score(const Detector& det, const std::vector<Segment>& segments,
                  std::size_t stride) {
    const DetectorConfig& cfg = det.config();
    bool reconstruct = cfg.family() == DetectorFamily::Autoencoder;
    Detector::Session session(det);
    ScoreSeries out;
    for (const Segment& seg : segments) {
        auto windows = make_uni_windows({seg}, cfg.context(), cfg.horizon(),
                                        reconstruct, stride);
        for (const UniWindow& w : windows) {
            std::vector<double> pred = session.predict(w);
            double acc = 0.0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                double e = pred[i] - w.target(i, 0);
                acc += e * e;
            }
            out.push_back({w.scored_end, acc / static_cast<double>(pred.size())});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ScorePoint& a, const ScorePoint& b) { return a.t < b.t; });
    return out;
}

double calibrate_threshold(std::vector<double> scores, double percentile) {
    if (scores.empty()) throw std::invalid_argument("calibrate_threshold: no scores");
    if (percentile <= 0.0 || percentile > 1.0) {
        throw std::invalid_argument("calibrate_threshold: percentile out of range");
    }
    std::sort(scores.begin(), scores.end());
    auto n = static_cast<double>(scores.size());
    auto rank = static_cast<std::size_t>(std::ceil(percentile * n));
    if (rank == 0) rank = 1;
    return scores[rank - 1];
}

std::vector<AnomalyEvent> detect(const ScoreSeries& scores, double theta_max,
                                 double level_fraction) {
    if (level_fraction <= 0.0 || level_fraction > 1.0) {
        throw std::invalid_argument("detect: level_fraction out of range");
    }
    double threshold = level_fraction * theta_max;
    std::vector<AnomalyEvent> events;
    bool open = false;
    for (const ScorePoint& sp : scores) {
        if (sp.mse > threshold) {
            if (!open) {
                events.push_back({sp.t, sp.t, sp.mse});
                open = true;
            } else {
                events.back().exit = sp.t;
                events.back().peak_mse = std::max(events.back().peak_mse, sp.mse);
            }
        } else {
            open = false;
        }
    }
    return events;
}

std::optional<double> lead_time(const ScoreSeries& scores,
                                double effective_threshold,
                                const Segment& observed, Timestamp win_start,
                                Timestamp win_end, Timestamp lookback) {
    Timestamp t_min = 0;
    double v_min = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < observed.values.size(); ++i) {
        Timestamp t = observed.time_at(i);
        if (t < win_start || t > win_end) continue;
        if (!found || observed.values[i] < v_min) {
            v_min = observed.values[i];
            t_min = t;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("lead_time: window outside observed data");
    for (const ScorePoint& sp : scores) {
        if (sp.t < win_start - lookback || sp.t > win_end) continue;
        if (sp.mse > effective_threshold) {
            return static_cast<double>(t_min - sp.t);
        }
    }
    return std::nullopt;
}

} // namespace aqua
