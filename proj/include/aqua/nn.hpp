#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqua/params.hpp"
#include "aqua/tape.hpp"
#include "aqua/tensor.hpp"

namespace aqua {

enum class Activation { Linear, Relu, Tanh, Sigmoid };

// activation(x W + b). x is [R x in], W [in x out], b [1 x out].
Var dense(Var x, Var w, Var b, Activation act);

struct LstmState {
    Var h;
    Var c;
};

// Gate weights packed [in x 4H] / [H x 4H], gate order i, f, g, o.
struct LstmVars {
    Var wx;
    Var wh;
    Var b;
};

// Standard LSTM cell. x [1 x in], h/c [1 x H].
LstmState lstm_step(Var x, LstmState state, const LstmVars& w);

// Registers LSTM parameters under prefix.{wx,wh,b}; forget-gate bias = 1.
void init_lstm(ParamSet& ps, Rng& rng, const std::string& prefix,
               std::size_t input_dim, std::size_t hidden);
LstmVars lstm_vars(const VarMap& p, const std::string& prefix);

struct MhaVars {
    Var wq, wk, wv, wo; // each [d_model x d_model]
};

// Scaled dot-product multi-head attention. q [Tq x d], k/v [Tk x d].
// `mask`, if non-empty, is [Tq x Tk] and added to the logits of every head.
Var multi_head_attention(Var q, Var k, Var v, const MhaVars& w,
                         std::size_t heads, const Tensor& mask = Tensor());

void init_mha(ParamSet& ps, Rng& rng, const std::string& prefix, std::size_t d_model,
              std::size_t heads);
MhaVars mha_vars(const VarMap& p, const std::string& prefix);

// Sinusoidal positional encoding, [length x d_model]. d_model must be even.
Tensor positional_encoding(std::size_t length, std::size_t d_model);

// dL/d(param) for every entry in `params`; parameters unreachable from the
// loss get zero tensors.
std::map<std::string, Tensor> param_grads(Tape& tape, Var loss, const VarMap& params);

// Max relative error between analytic gradients and central finite
// differences of `forward_fn` over every entry of `params`.
double grad_check(const std::function<Var(Tape&, const VarMap&)>& forward_fn,
                  ParamSet& params, double h = 1e-5);

} // namespace aqua
