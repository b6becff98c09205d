#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aqua/tensor.hpp"

namespace aqua {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& val() const;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Append-only record of primitive operations. Node order is the topological
// order by construction: an op can only reference already-recorded inputs.
class Tape {
public:
    struct Node {
        Tensor value;
        std::vector<int> parents;
        // Receives d(loss)/d(value) and pushes contributions into the
        // parents via Tape::accumulate.
        std::function<void(Tape&, const Tensor&)> backward;
    };

    // Leaf with gradient tracking. Rejects non-finite entries.
    Var leaf(Tensor value);
    // Untracked input (data, masks). Same storage, no finiteness check.
    Var constant(Tensor value);

    int push(Tensor value, std::vector<int> parents,
             std::function<void(Tape&, const Tensor&)> backward);

    // Roll back to `n` nodes; lets inference reuse one tape across windows.
    void truncate(std::size_t n) { nodes_.resize(n); }

    const Node& node(int id) const { return nodes_[id]; }
    const Tensor& value(int id) const { return nodes_[id].value; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss. Returns one gradient slot per node;
    // slots never touched stay empty.
    std::vector<Tensor> backward(const Var& loss);

    // Valid only inside a backward sweep.
    void accumulate(int id, const Tensor& grad);

private:
    std::vector<Node> nodes_;
    std::vector<Tensor>* grads_ = nullptr;
};

using VarMap = std::map<std::string, Var>;

// ---- primitive ops ----------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b); // elementwise
Var div(Var a, Var b); // elementwise
Var scale(Var a, double c);
Var add_const(Var a, double c);
Var neg(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var tanh_op(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var exp_op(Var a);
Var log_op(Var a);
Var softplus(Var a);
Var square(Var a);

Var sum(Var a);  // 1x1
Var mean(Var a); // 1x1

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t r0, std::size_t r1); // [r0, r1)
Var slice_cols(Var a, std::size_t c0, std::size_t c1); // [c0, c1)

// mat [R x C] + row [1 x C] broadcast over rows.
Var add_rowvec(Var mat, Var rowv);

// Row-wise softmax; `mask` (if non-empty) is added to the logits first.
// Use large negative mask entries to zero out positions.
Var softmax_rows(Var a, const Tensor& mask = Tensor());

// Row-wise layer normalization with learned gain/bias [1 x C].
Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);

// Valid cross-correlation. x is [L x Cin], w is [K*Cin x Cout] with the
// kernel tap index varying slowest, b is [1 x Cout].
// Output is [(L-K)/stride + 1 x Cout].
Var conv1d(Var x, Var w, Var b, std::size_t kernel, std::size_t stride = 1);

// Non-overlapping windowed maxima over rows, per column. [floor(L/width) x C].
Var maxpool1d(Var x, std::size_t width);

// ---- losses ------------------------------------------------------------

Var mse_loss(Var pred, Var target);

// mean over entries of 0.5*ln(2*pi*sigma^2) + (y - mu)^2 / (2*sigma^2).
// sigma must be positive (softplus head upstream guarantees it).
Var gaussian_nll(Var mu, Var sigma, Var y);

} // namespace aqua
