#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aqua/datapipe.hpp"
#include "aqua/nn.hpp"
#include "aqua/params.hpp"
#include "aqua/tape.hpp"

namespace aqua {

enum class ModelKind { ForecastNet, Attention, Transformer };
enum class Head { Linear, Gaussian };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& s);

struct ForecastModelConfig {
    ModelKind kind = ModelKind::ForecastNet;
    bool proposed = true; // include the air-temperature forecast
    Head head = Head::Linear;

    std::size_t in_len = 192;
    std::size_t out_len = 96;
    std::size_t n_vars = kNumHistoryVariables;

    // forecastnet: hidden blocks of `fn_layers` dense layers x `fn_units`
    std::size_t fn_layers = 3;
    std::size_t fn_units = 24;
    // attention: encoder/decoder LSTM hidden size
    std::size_t att_hidden = 48;
    // transformer
    std::size_t d_model = 16;
    std::size_t heads = 4;
    std::size_t ff_units = 24;

    void validate() const;
    std::string name() const; // "proposed_fn", "att", ...
};

struct ForecastOutput {
    std::vector<double> mean;
    std::vector<double> sigma; // empty unless head == Gaussian
    Timestamp start = 0;
};

// ---- reusable architectures (also wired into the anomaly detectors) ------

namespace arch {

struct AttentionDims {
    std::size_t input_dim = 5;
    std::size_t hidden = 48;
    std::size_t steps = 96;
    bool bidirectional = true;
    bool exo = false;
};

void init_attention(ParamSet& ps, Rng& rng, const std::string& prefix,
                    const AttentionDims& d);

// Encoder over `history` [T x input_dim], decoder unrolled `steps` times with
// tanh-alignment attention recomputed per step. y0 seeds the feedback input.
// When att_weights is given, the per-step attention rows are appended to it.
Var attention_forecast(Tape& tape, const VarMap& p, const std::string& prefix,
                       const Tensor& history, const Tensor* exo, double y0,
                       const AttentionDims& d,
                       std::vector<Tensor>* att_weights = nullptr);

struct TransformerDims {
    std::size_t input_dim = 5;
    std::size_t d_model = 16;
    std::size_t heads = 4;
    std::size_t ff = 24;
    std::size_t steps = 96;
    bool exo = false;
};

void init_transformer(ParamSet& ps, Rng& rng, const std::string& prefix,
                      const TransformerDims& d);

// Single encoder/decoder layer, post-norm residuals, causal decoder
// self-attention. teacher_targets != nullptr runs one teacher-forced pass
// over the shifted targets; nullptr decodes autoregressively (incremental,
// feeding back predictions).
Var transformer_forecast(Tape& tape, const VarMap& p, const std::string& prefix,
                         const Tensor& history, const Tensor* exo, double y0,
                         const Tensor* teacher_targets, const TransformerDims& d);

struct ForecastNetDims {
    std::size_t input_dim = 960; // flattened history (+ exo when proposed)
    std::size_t blocks = 96;
    std::size_t layers = 3;
    std::size_t units = 24;
    Head head = Head::Linear;
};

void init_forecastnet(ParamSet& ps, Rng& rng, const std::string& prefix,
                      const ForecastNetDims& d);

struct HeadVars {
    Var mean;
    std::optional<Var> sigma; // [steps x 1], entries >= 1e-6
};

// Time-variant chain: block k sees [input vector, previous block's hidden
// output, previous step's mean] and emits forecast step k.
HeadVars forecastnet_forward(Tape& tape, const VarMap& p, const std::string& prefix,
                             const Tensor& input_vec, double y0,
                             const ForecastNetDims& d);

} // namespace arch

// ---- model wrapper ----------------------------------------------------------

class ForecastModel {
public:
    ForecastModel(ForecastModelConfig cfg, std::uint64_t seed);
    ForecastModel(ForecastModelConfig cfg, ParamSet params); // from checkpoint

    const ForecastModelConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    // Mean (and sigma for the Gaussian head). Transformer obeys
    // teacher_forced; the other kinds ignore it.
    arch::HeadVars forward(Tape& tape, const VarMap& p, const WindowPair& w,
                           bool teacher_forced,
                           std::vector<Tensor>* att_weights = nullptr) const;

    // Training objective: MSE for linear heads, Gaussian NLL otherwise.
    Var loss(Tape& tape, const VarMap& p, const WindowPair& w) const;

    ForecastOutput predict(const WindowPair& w) const;

    // Reusable inference context; keeps parameters injected once and rolls
    // the tape back between windows.
    class Session {
    public:
        explicit Session(const ForecastModel& m);
        ForecastOutput predict(const WindowPair& w);

    private:
        const ForecastModel& m_;
        Tape tape_;
        VarMap pvars_;
        std::size_t mark_;
    };

private:
    Tensor input_vector(const WindowPair& w) const; // forecastnet flattening

    ForecastModelConfig cfg_;
    ParamSet params_;
};

} // namespace aqua
