#include "aqua/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace aqua {

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::ForecastNet: return "fn";
        case ModelKind::Attention: return "att";
        case ModelKind::Transformer: return "trans";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& s) {
    if (s == "fn" || s == "forecastnet") return ModelKind::ForecastNet;
    if (s == "att" || s == "attention") return ModelKind::Attention;
    if (s == "trans" || s == "transformer") return ModelKind::Transformer;
    throw std::invalid_argument("unknown model kind: " + s);
}

void ForecastModelConfig::validate() const {
    if (kind == ModelKind::Transformer && d_model % heads != 0) {
        throw std::invalid_argument("transformer: d_model % heads != 0");
    }
    if (head == Head::Gaussian && kind != ModelKind::ForecastNet) {
        throw std::invalid_argument("gaussian head only deployed on forecastnet");
    }
    if (in_len == 0 || out_len == 0 || n_vars == 0) {
        throw std::invalid_argument("degenerate window dims");
    }
}

std::string ForecastModelConfig::name() const {
    std::string n = model_kind_name(kind);
    return proposed ? "proposed_" + n : n;
}

namespace arch {

// ---- attention ------------------------------------------------------------

void init_attention(ParamSet& ps, Rng& rng, const std::string& prefix,
                    const AttentionDims& d) {
    std::size_t H = d.hidden;
    init_lstm(ps, rng, prefix + ".enc_f", d.input_dim, H);
    if (d.bidirectional) {
        init_lstm(ps, rng, prefix + ".enc_b", d.input_dim, H);
        ps.add(prefix + ".enc_proj.w", glorot_uniform(rng, 2 * H, H));
        ps.add(prefix + ".enc_proj.b", Tensor::zeros(1, H));
    }
    ps.add(prefix + ".att.wa", glorot_uniform(rng, H, H));
    ps.add(prefix + ".att.ua", glorot_uniform(rng, H, H));
    ps.add(prefix + ".att.ba", Tensor::zeros(1, H));
    ps.add(prefix + ".att.v", glorot_uniform(rng, H, 1));
    std::size_t dec_in = H + 1 + (d.exo ? 1 : 0);
    init_lstm(ps, rng, prefix + ".dec", dec_in, H);
    ps.add(prefix + ".out.w", glorot_uniform(rng, H, 1));
    ps.add(prefix + ".out.b", Tensor::zeros(1, 1));
}

Var attention_forecast(Tape& tape, const VarMap& p, const std::string& prefix,
                       const Tensor& history, const Tensor* exo, double y0,
                       const AttentionDims& d, std::vector<Tensor>* att_weights) {
    if (history.cols() != d.input_dim) {
        throw std::invalid_argument("attention_forecast: history width mismatch");
    }
    if (d.exo && (exo == nullptr || exo->rows() != d.steps)) {
        throw std::invalid_argument("attention_forecast: exo missing or wrong length");
    }
    std::size_t T = history.rows();
    std::size_t H = d.hidden;
    Var hist = tape.constant(history);

    // encoder
    std::vector<Var> fwd_states(T);
    {
        LstmVars w = lstm_vars(p, prefix + ".enc_f");
        LstmState s{tape.constant(Tensor::zeros(1, H)), tape.constant(Tensor::zeros(1, H))};
        for (std::size_t t = 0; t < T; ++t) {
            s = lstm_step(slice_rows(hist, t, t + 1), s, w);
            fwd_states[t] = s.h;
        }
    }
    Var enc;
    if (d.bidirectional) {
        std::vector<Var> bwd_states(T);
        LstmVars w = lstm_vars(p, prefix + ".enc_b");
        LstmState s{tape.constant(Tensor::zeros(1, H)), tape.constant(Tensor::zeros(1, H))};
        for (std::size_t t = T; t-- > 0;) {
            s = lstm_step(slice_rows(hist, t, t + 1), s, w);
            bwd_states[t] = s.h;
        }
        std::vector<Var> rows(T);
        for (std::size_t t = 0; t < T; ++t) {
            rows[t] = concat_cols({fwd_states[t], bwd_states[t]});
        }
        enc = dense(concat_rows(rows), p.at(prefix + ".enc_proj.w"),
                    p.at(prefix + ".enc_proj.b"), Activation::Linear);
    } else {
        enc = concat_rows(fwd_states);
    }

    // precompute W_a * enc once; per-step alignment adds the decoder term
    Var enc_wa = matmul(enc, p.at(prefix + ".att.wa"));
    Var ua = p.at(prefix + ".att.ua");
    Var ba = p.at(prefix + ".att.ba");
    Var av = p.at(prefix + ".att.v");

    LstmVars dec_w = lstm_vars(p, prefix + ".dec");
    LstmState s{tape.constant(Tensor::zeros(1, H)), tape.constant(Tensor::zeros(1, H))};
    Var y_prev = tape.constant(Tensor::scalar(y0));
    Var exo_var;
    if (d.exo) exo_var = tape.constant(*exo);

    std::vector<Var> outputs;
    outputs.reserve(d.steps);
    for (std::size_t k = 0; k < d.steps; ++k) {
        Var align = tanh_op(add_rowvec(add_rowvec(enc_wa, matmul(s.h, ua)), ba));
        Var scores = transpose(matmul(align, av)); // [1 x T]
        Var att = softmax_rows(scores);
        if (att_weights != nullptr) att_weights->push_back(att.val());
        Var context = matmul(att, enc); // [1 x H]
        std::vector<Var> in_parts = {context, y_prev};
        if (d.exo) in_parts.push_back(slice_rows(exo_var, k, k + 1));
        s = lstm_step(concat_cols(in_parts), s, dec_w);
        Var y = dense(s.h, p.at(prefix + ".out.w"), p.at(prefix + ".out.b"),
                      Activation::Linear);
        outputs.push_back(y);
        y_prev = y;
    }
    return concat_rows(outputs); // [steps x 1]
}

// ---- transformer -----------------------------------------------------------

void init_transformer(ParamSet& ps, Rng& rng, const std::string& prefix,
                      const TransformerDims& d) {
    std::size_t dm = d.d_model;
    ps.add(prefix + ".enc_embed.w", glorot_uniform(rng, d.input_dim, dm));
    ps.add(prefix + ".enc_embed.b", Tensor::zeros(1, dm));
    init_mha(ps, rng, prefix + ".enc_sa", dm, d.heads);
    ps.add(prefix + ".enc_ln1.g", Tensor::full(1, dm, 1.0));
    ps.add(prefix + ".enc_ln1.b", Tensor::zeros(1, dm));
    ps.add(prefix + ".enc_ff.w1", glorot_uniform(rng, dm, d.ff));
    ps.add(prefix + ".enc_ff.b1", Tensor::zeros(1, d.ff));
    ps.add(prefix + ".enc_ff.w2", glorot_uniform(rng, d.ff, dm));
    ps.add(prefix + ".enc_ff.b2", Tensor::zeros(1, dm));
    ps.add(prefix + ".enc_ln2.g", Tensor::full(1, dm, 1.0));
    ps.add(prefix + ".enc_ln2.b", Tensor::zeros(1, dm));

    std::size_t dec_in = 1 + (d.exo ? 1 : 0);
    ps.add(prefix + ".dec_embed.w", glorot_uniform(rng, dec_in, dm));
    ps.add(prefix + ".dec_embed.b", Tensor::zeros(1, dm));
    init_mha(ps, rng, prefix + ".dec_sa", dm, d.heads);
    ps.add(prefix + ".dec_ln1.g", Tensor::full(1, dm, 1.0));
    ps.add(prefix + ".dec_ln1.b", Tensor::zeros(1, dm));
    init_mha(ps, rng, prefix + ".dec_ca", dm, d.heads);
    ps.add(prefix + ".dec_ln2.g", Tensor::full(1, dm, 1.0));
    ps.add(prefix + ".dec_ln2.b", Tensor::zeros(1, dm));
    ps.add(prefix + ".dec_ff.w1", glorot_uniform(rng, dm, d.ff));
    ps.add(prefix + ".dec_ff.b1", Tensor::zeros(1, d.ff));
    ps.add(prefix + ".dec_ff.w2", glorot_uniform(rng, d.ff, dm));
    ps.add(prefix + ".dec_ff.b2", Tensor::zeros(1, dm));
    ps.add(prefix + ".dec_ln3.g", Tensor::full(1, dm, 1.0));
    ps.add(prefix + ".dec_ln3.b", Tensor::zeros(1, dm));
    ps.add(prefix + ".out.w", glorot_uniform(rng, dm, 1));
    ps.add(prefix + ".out.b", Tensor::zeros(1, 1));
}

namespace {

Var feed_forward(Var x, const VarMap& p, const std::string& prefix) {
    Var h = dense(x, p.at(prefix + ".w1"), p.at(prefix + ".b1"), Activation::Relu);
    return dense(h, p.at(prefix + ".w2"), p.at(prefix + ".b2"), Activation::Linear);
}

Var post_norm(Var x, Var sub, const VarMap& p, const std::string& ln) {
    return layer_norm_rows(add(x, sub), p.at(ln + ".g"), p.at(ln + ".b"));
}

Var encode(Tape& tape, const VarMap& p, const std::string& prefix,
           const Tensor& history, const TransformerDims& d) {
    Var x = dense(tape.constant(history), p.at(prefix + ".enc_embed.w"),
                  p.at(prefix + ".enc_embed.b"), Activation::Linear);
    x = add(x, tape.constant(positional_encoding(history.rows(), d.d_model)));
    Var sa = multi_head_attention(x, x, x, mha_vars(p, prefix + ".enc_sa"), d.heads);
    x = post_norm(x, sa, p, prefix + ".enc_ln1");
    Var ff = feed_forward(x, p, prefix + ".enc_ff");
    return post_norm(x, ff, p, prefix + ".enc_ln2");
}

// One decoder layer applied to query rows `q` attending over `self_kv`
// (already embedded decoder rows, q included) and the encoder output.
Var decode_rows(Var q, Var self_kv, Var enc, const VarMap& p,
                const std::string& prefix, const TransformerDims& d,
                const Tensor& causal_mask) {
    Var sa = multi_head_attention(q, self_kv, self_kv,
                                  mha_vars(p, prefix + ".dec_sa"), d.heads,
                                  causal_mask);
    Var x = post_norm(q, sa, p, prefix + ".dec_ln1");
    Var ca = multi_head_attention(x, enc, enc, mha_vars(p, prefix + ".dec_ca"),
                                  d.heads);
    x = post_norm(x, ca, p, prefix + ".dec_ln2");
    Var ff = feed_forward(x, p, prefix + ".dec_ff");
    x = post_norm(x, ff, p, prefix + ".dec_ln3");
    return dense(x, p.at(prefix + ".out.w"), p.at(prefix + ".out.b"),
                 Activation::Linear);
}

} // namespace

Var transformer_forecast(Tape& tape, const VarMap& p, const std::string& prefix,
                         const Tensor& history, const Tensor* exo, double y0,
                         const Tensor* teacher_targets, const TransformerDims& d) {
    if (history.cols() != d.input_dim) {
        throw std::invalid_argument("transformer_forecast: history width mismatch");
    }
    if (d.exo && (exo == nullptr || exo->rows() != d.steps)) {
        throw std::invalid_argument("transformer_forecast: exo missing or wrong length");
    }
    Var enc = encode(tape, p, prefix, history, d);
    Tensor pe = positional_encoding(d.steps, d.d_model);
    std::size_t dec_in = 1 + (d.exo ? 1 : 0);

    if (teacher_targets != nullptr) {
        // teacher forced: one causal pass over the shifted targets
        Tensor rows = Tensor::zeros(d.steps, dec_in);
        for (std::size_t k = 0; k < d.steps; ++k) {
            rows(k, 0) = k == 0 ? y0 : (*teacher_targets)(k - 1, 0);
            if (d.exo) rows(k, 1) = (*exo)(k, 0);
        }
        Var x = dense(tape.constant(rows), p.at(prefix + ".dec_embed.w"),
                      p.at(prefix + ".dec_embed.b"), Activation::Linear);
        x = add(x, tape.constant(pe));
        Tensor mask = Tensor::zeros(d.steps, d.steps);
        for (std::size_t i = 0; i < d.steps; ++i)
            for (std::size_t j = i + 1; j < d.steps; ++j) mask(i, j) = -1e30;
        return decode_rows(x, x, enc, p, prefix, d, mask);
    }

    // autoregressive: grow the embedded-row cache one step at a time; the
    // newest row attends over everything cached, so no mask is needed.
    std::vector<Var> cache;
    cache.reserve(d.steps);
    std::vector<Var> outputs;
    outputs.reserve(d.steps);
    double y_prev = y0;
    for (std::size_t k = 0; k < d.steps; ++k) {
        Tensor row = Tensor::zeros(1, dec_in);
        row(0, 0) = y_prev;
        if (d.exo) row(0, 1) = (*exo)(k, 0);
        Var emb = dense(tape.constant(row), p.at(prefix + ".dec_embed.w"),
                        p.at(prefix + ".dec_embed.b"), Activation::Linear);
        Tensor pe_row = Tensor::zeros(1, d.d_model);
        for (std::size_t j = 0; j < d.d_model; ++j) pe_row(0, j) = pe(k, j);
        emb = add(emb, tape.constant(pe_row));
        cache.push_back(emb);
        Var kv = cache.size() == 1 ? emb : concat_rows(cache);
        Var y = decode_rows(emb, kv, enc, p, prefix, d, Tensor());
        outputs.push_back(y);
        y_prev = y.val()(0, 0);
    }
    return concat_rows(outputs);
}

// ---- forecastnet -------------------------------------------------------------

void init_forecastnet(ParamSet& ps, Rng& rng, const std::string& prefix,
                      const ForecastNetDims& d) {
    std::size_t out_w = d.head == Head::Gaussian ? 2 : 1;
    for (std::size_t b = 0; b < d.blocks; ++b) {
        std::string bp = prefix + ".b" + std::to_string(b);
        std::size_t in = d.input_dim + (b == 0 ? 0 : d.units) + 1;
        for (std::size_t l = 0; l < d.layers; ++l) {
            ps.add(bp + ".l" + std::to_string(l) + ".w",
                   glorot_uniform(rng, l == 0 ? in : d.units, d.units));
            ps.add(bp + ".l" + std::to_string(l) + ".b", Tensor::zeros(1, d.units));
        }
        ps.add(bp + ".out.w", glorot_uniform(rng, d.units, out_w));
        ps.add(bp + ".out.b", Tensor::zeros(1, out_w));
    }
}

HeadVars forecastnet_forward(Tape& tape, const VarMap& p, const std::string& prefix,
                             const Tensor& input_vec, double y0,
                             const ForecastNetDims& d) {
    if (input_vec.rows() != 1 || input_vec.cols() != d.input_dim) {
        throw std::invalid_argument("forecastnet_forward: input vector shape");
    }
    Var input = tape.constant(input_vec);
    Var prev_hidden; // unset for block 0
    Var prev_mean = tape.constant(Tensor::scalar(y0));
    std::vector<Var> means, sigmas;
    means.reserve(d.blocks);
    for (std::size_t b = 0; b < d.blocks; ++b) {
        std::string bp = prefix + ".b" + std::to_string(b);
        std::vector<Var> parts = {input};
        if (b > 0) parts.push_back(prev_hidden);
        parts.push_back(prev_mean);
        Var h = concat_cols(parts);
        for (std::size_t l = 0; l < d.layers; ++l) {
            std::string lp = bp + ".l" + std::to_string(l);
            h = dense(h, p.at(lp + ".w"), p.at(lp + ".b"), Activation::Relu);
        }
        Var o = dense(h, p.at(bp + ".out.w"), p.at(bp + ".out.b"), Activation::Linear);
        Var mu = d.head == Head::Gaussian ? slice_cols(o, 0, 1) : o;
        if (d.head == Head::Gaussian) {
            sigmas.push_back(add_const(softplus(slice_cols(o, 1, 2)), 1e-6));
        }
        means.push_back(mu);
        prev_hidden = h;
        prev_mean = mu;
    }
    HeadVars out;
    out.mean = concat_rows(means);
    if (d.head == Head::Gaussian) out.sigma = concat_rows(sigmas);
    return out;
}

} // namespace arch

// ---- model wrapper --------------------------------------------------------

namespace {

arch::AttentionDims att_dims(const ForecastModelConfig& c) {
    return {c.n_vars, c.att_hidden, c.out_len, true, c.proposed};
}

arch::TransformerDims trans_dims(const ForecastModelConfig& c) {
    return {c.n_vars, c.d_model, c.heads, c.ff_units, c.out_len, c.proposed};
}

arch::ForecastNetDims fn_dims(const ForecastModelConfig& c) {
    std::size_t in = c.in_len * c.n_vars + (c.proposed ? c.out_len : 0);
    return {in, c.out_len, c.fn_layers, c.fn_units, c.head};
}

} // namespace

ForecastModel::ForecastModel(ForecastModelConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(seed) {
    cfg_.validate();
    Rng rng(seed);
    switch (cfg_.kind) {
        case ModelKind::ForecastNet:
            arch::init_forecastnet(params_, rng, "fn", fn_dims(cfg_));
            break;
        case ModelKind::Attention:
            arch::init_attention(params_, rng, "att", att_dims(cfg_));
            break;
        case ModelKind::Transformer:
            arch::init_transformer(params_, rng, "trans", trans_dims(cfg_));
            break;
    }
}

ForecastModel::ForecastModel(ForecastModelConfig cfg, ParamSet params)
    : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
}

Tensor ForecastModel::input_vector(const WindowPair& w) const {
    std::size_t n = cfg_.in_len * cfg_.n_vars + (cfg_.proposed ? cfg_.out_len : 0);
    Tensor v = Tensor::zeros(1, n);
    std::size_t idx = 0;
    // variable-major: each univariate sequence stays contiguous
    for (std::size_t c = 0; c < cfg_.n_vars; ++c) {
        for (std::size_t i = 0; i < cfg_.in_len; ++i) v[idx++] = w.history(i, c);
    }
    if (cfg_.proposed) {
        for (std::size_t i = 0; i < cfg_.out_len; ++i) v[idx++] = w.exo(i, 0);
    }
    return v;
}

arch::HeadVars ForecastModel::forward(Tape& tape, const VarMap& p, const WindowPair& w,
                                      bool teacher_forced,
                                      std::vector<Tensor>* att_weights) const {
    const Tensor* exo = cfg_.proposed ? &w.exo : nullptr;
    switch (cfg_.kind) {
        case ModelKind::ForecastNet:
            return arch::forecastnet_forward(tape, p, "fn", input_vector(w),
                                             w.last_target, fn_dims(cfg_));
        case ModelKind::Attention:
            return {arch::attention_forecast(tape, p, "att", w.history, exo,
                                             w.last_target, att_dims(cfg_), att_weights),
                    std::nullopt};
        case ModelKind::Transformer:
            return {arch::transformer_forecast(tape, p, "trans", w.history, exo,
                                               w.last_target,
                                               teacher_forced ? &w.target : nullptr,
                                               trans_dims(cfg_)),
                    std::nullopt};
    }
    throw std::logic_error("forward: unknown kind");
}

Var ForecastModel::loss(Tape& tape, const VarMap& p, const WindowPair& w) const {
    arch::HeadVars out = forward(tape, p, w, /*teacher_forced=*/true);
    Var target = tape.constant(w.target);
    if (out.sigma) return gaussian_nll(out.mean, *out.sigma, target);
    return mse_loss(out.mean, target);
}

ForecastOutput ForecastModel::predict(const WindowPair& w) const {
    Session s(*this);
    return s.predict(w);
}

ForecastModel::Session::Session(const ForecastModel& m) : m_(m) {
    pvars_ = m.params_.inject(tape_);
    mark_ = tape_.size();
}

ForecastOutput ForecastModel::Session::predict(const WindowPair& w) {
    tape_.truncate(mark_);
    arch::HeadVars out = m_.forward(tape_, pvars_, w, /*teacher_forced=*/false);
    ForecastOutput fo;
    fo.start = w.target_start;
    fo.mean = out.mean.val().data();
    if (out.sigma) fo.sigma = out.sigma->val().data();
    return fo;
}

} // namespace aqua
