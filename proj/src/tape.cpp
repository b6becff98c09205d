#include "aqua/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aqua {

const Tensor& Var::val() const { return tape->value(id); }

Var Tape::leaf(Tensor value) {
    if (!value.all_finite()) {
        throw std::invalid_argument("Tape::leaf: non-finite entry");
    }
    int id = push(std::move(value), {}, nullptr);
    return {this, id};
}

Var Tape::constant(Tensor value) {
    int id = push(std::move(value), {}, nullptr);
    return {this, id};
}

int Tape::push(Tensor value, std::vector<int> parents,
               std::function<void(Tape&, const Tensor&)> backward) {
    for (int p : parents) {
        if (p < 0 || p >= static_cast<int>(nodes_.size())) {
            throw std::logic_error("Tape::push: parent not on tape");
        }
    }
    nodes_.push_back(Node{std::move(value), std::move(parents), std::move(backward)});
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::accumulate(int id, const Tensor& grad) {
    auto& slot = (*grads_)[id];
    if (slot.empty()) {
        slot = grad;
    } else {
        slot += grad;
    }
}

std::vector<Tensor> Tape::backward(const Var& loss) {
    if (loss.tape != this) throw std::logic_error("backward: loss from another tape");
    if (value(loss.id).size() != 1) {
        throw std::invalid_argument("backward: loss must be scalar");
    }
    std::vector<Tensor> grads(nodes_.size());
    grads_ = &grads;
    grads[loss.id] = Tensor::scalar(1.0);
    for (int i = loss.id; i >= 0; --i) {
        const Node& n = nodes_[i];
        if (grads[i].empty() || !n.backward) continue;
        n.backward(*this, grads[i]);
    }
    grads_ = nullptr;
    return grads;
}

namespace {

void check_same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw std::logic_error("op: vars from different tapes");
}

Tensor shape_like(const Tensor& t) { return Tensor(t.shape()); }

} // namespace

// ---- elementwise -------------------------------------------------------

Var add(Var a, Var b) {
    check_same_tape(a, b);
    const Tensor& ta = a.val();
    const Tensor& tb = b.val();
    if (!ta.same_shape(tb)) throw std::invalid_argument("add: shape mismatch");
    Tensor out = ta;
    out += tb;
    int ia = a.id, ib = b.id;
    int id = a.tape->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        t.accumulate(ia, g);
        t.accumulate(ib, g);
    });
    return {a.tape, id};
}

Var sub(Var a, Var b) {
    check_same_tape(a, b);
    const Tensor& ta = a.val();
    const Tensor& tb = b.val();
    if (!ta.same_shape(tb)) throw std::invalid_argument("sub: shape mismatch");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
    int ia = a.id, ib = b.id;
    int id = a.tape->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        t.accumulate(ia, g);
        Tensor gn = g;
        for (std::size_t i = 0; i < gn.size(); ++i) gn[i] = -gn[i];
        t.accumulate(ib, gn);
    });
    return {a.tape, id};
}

Var mul(Var a, Var b) {
    check_same_tape(a, b);
    const Tensor& ta = a.val();
    const Tensor& tb = b.val();
    if (!ta.same_shape(tb)) throw std::invalid_argument("mul: shape mismatch");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
    int ia = a.id, ib = b.id;
    int id = a.tape->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& va = t.value(ia);
        const Tensor& vb = t.value(ib);
        Tensor ga = shape_like(va), gb = shape_like(vb);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] = g[i] * vb[i];
            gb[i] = g[i] * va[i];
        }
        t.accumulate(ia, ga);
        t.accumulate(ib, gb);
    });
    return {a.tape, id};
}

Var div(Var a, Var b) {
    check_same_tape(a, b);
    const Tensor& ta = a.val();
    const Tensor& tb = b.val();
    if (!ta.same_shape(tb)) throw std::invalid_argument("div: shape mismatch");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= tb[i];
    int ia = a.id, ib = b.id;
    int id = a.tape->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& va = t.value(ia);
        const Tensor& vb = t.value(ib);
        Tensor ga = shape_like(va), gb = shape_like(vb);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] = g[i] / vb[i];
            gb[i] = -g[i] * va[i] / (vb[i] * vb[i]);
        }
        t.accumulate(ia, ga);
        t.accumulate(ib, gb);
    });
    return {a.tape, id};
}

Var scale(Var a, double c) {
    Tensor out = a.val();
    for (auto& v : out.data()) v *= c;
    int ia = a.id;
    int id = a.tape->push(std::move(out), {ia}, [ia, c](Tape& t, const Tensor& g) {
        Tensor ga = g;
        for (auto& v : ga.data()) v *= c;
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

Var add_const(Var a, double c) {
    Tensor out = a.val();
    for (auto& v : out.data()) v += c;
    int ia = a.id;
    int id = a.tape->push(std::move(out), {ia}, [ia](Tape& t, const Tensor& g) {
        t.accumulate(ia, g);
    });
    return {a.tape, id};
}

Var neg(Var a) { return scale(a, -1.0); }

// ---- linear algebra ----------------------------------------------------

Var matmul(Var a, Var b) {
    check_same_tape(a, b);
    const Tensor& ta = a.val();
    const Tensor& tb = b.val();
    if (ta.cols() != tb.rows()) throw std::invalid_argument("matmul: inner dims");
    std::size_t R = ta.rows(), K = ta.cols(), C = tb.cols();
    Tensor out = Tensor::zeros(R, C);
    for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            double av = ta(i, k);
            if (av == 0.0) continue;
            const double* brow = &tb.data()[k * C];
            double* orow = &out.data()[i * C];
            for (std::size_t j = 0; j < C; ++j) orow[j] += av * brow[j];
        }
    }
    int ia = a.id, ib = b.id;
    int id = a.tape->push(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& va = t.value(ia);
        const Tensor& vb = t.value(ib);
        std::size_t R = va.rows(), K = va.cols(), C = vb.cols();
        // dA = g * B^T
        Tensor ga = Tensor::zeros(R, K);
        for (std::size_t i = 0; i < R; ++i) {
            for (std::size_t j = 0; j < C; ++j) {
                double gv = g(i, j);
                if (gv == 0.0) continue;
                for (std::size_t k = 0; k < K; ++k) ga(i, k) += gv * vb(k, j);
            }
        }
        // dB = A^T * g
        Tensor gb = Tensor::zeros(K, C);
        for (std::size_t i = 0; i < R; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                double av = va(i, k);
                if (av == 0.0) continue;
                const double* grow = &g.data()[i * C];
                double* brow = &gb.data()[k * C];
                for (std::size_t j = 0; j < C; ++j) brow[j] += av * grow[j];
            }
        }
        t.accumulate(ia, ga);
        t.accumulate(ib, gb);
    });
    return {a.tape, id};
}

Var transpose(Var a) {
    const Tensor& ta = a.val();
    std::size_t R = ta.rows(), C = ta.cols();
    Tensor out = Tensor::zeros(C, R);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) out(j, i) = ta(i, j);
    int ia = a.id;
    int id = a.tape->push(std::move(out), {ia}, [ia](Tape& t, const Tensor& g) {
        std::size_t R = g.rows(), C = g.cols();
        Tensor ga = Tensor::zeros(C, R);
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < C; ++j) ga(j, i) = g(i, j);
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

// ---- nonlinearities ------------------------------------------------------

namespace {

template <typename F, typename DF>
Var unary(Var a, F f, DF df_from_out_and_in) {
    Tensor out = a.val();
    for (auto& v : out.data()) v = f(v);
    int ia = a.id;
    int id = a.tape->push(out, {ia}, [ia, df_from_out_and_in, out](Tape& t, const Tensor& g) {
        const Tensor& in = t.value(ia);
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) {
            ga[i] *= df_from_out_and_in(out[i], in[i]);
        }
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

} // namespace

Var tanh_op(Var a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double y, double) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
    return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                 [](double y, double) { return y * (1.0 - y); });
}

Var relu(Var a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp_op(Var a) {
    return unary(a, [](double x) { return std::exp(x); },
                 [](double y, double) { return y; });
}

Var log_op(Var a) {
    return unary(a, [](double x) { return std::log(x); },
                 [](double, double x) { return 1.0 / x; });
}

Var softplus(Var a) {
    // log1p(exp(x)) with overflow guard
    return unary(a,
                 [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
                 [](double, double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var square(Var a) {
    return unary(a, [](double x) { return x * x; },
                 [](double, double x) { return 2.0 * x; });
}

// ---- reductions ----------------------------------------------------------

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.val().data()) s += v;
    int ia = a.id;
    int id = a.tape->push(Tensor::scalar(s), {ia}, [ia](Tape& t, const Tensor& g) {
        const Tensor& in = t.value(ia);
        Tensor ga = shape_like(in);
        for (auto& v : ga.data()) v = g[0];
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

Var mean(Var a) {
    std::size_t n = a.val().size();
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

// ---- shaping ---------------------------------------------------------------

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
    Tape* tape = parts[0].tape;
    std::size_t C = parts[0].val().cols();
    std::size_t R = 0;
    std::vector<int> ids;
    for (const Var& p : parts) {
        if (p.tape != tape) throw std::logic_error("concat_rows: mixed tapes");
        if (p.val().cols() != C) throw std::invalid_argument("concat_rows: column mismatch");
        R += p.val().rows();
        ids.push_back(p.id);
    }
    Tensor out = Tensor::zeros(R, C);
    std::size_t r = 0;
    for (const Var& p : parts) {
        const Tensor& tp = p.val();
        std::copy(tp.data().begin(), tp.data().end(), out.data().begin() + r * C);
        r += tp.rows();
    }
    int id = tape->push(std::move(out), ids, [ids](Tape& t, const Tensor& g) {
        std::size_t C = g.cols();
        std::size_t r = 0;
        for (int pid : ids) {
            const Tensor& vp = t.value(pid);
            Tensor gp = shape_like(vp);
            std::copy(g.data().begin() + r * C,
                      g.data().begin() + (r + vp.rows()) * C, gp.data().begin());
            t.accumulate(pid, gp);
            r += vp.rows();
        }
    });
    return {tape, id};
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    Tape* tape = parts[0].tape;
    std::size_t R = parts[0].val().rows();
    std::size_t C = 0;
    std::vector<int> ids;
    for (const Var& p : parts) {
        if (p.tape != tape) throw std::logic_error("concat_cols: mixed tapes");
        if (p.val().rows() != R) throw std::invalid_argument("concat_cols: row mismatch");
        C += p.val().cols();
        ids.push_back(p.id);
    }
    Tensor out = Tensor::zeros(R, C);
    std::size_t c0 = 0;
    for (const Var& p : parts) {
        const Tensor& tp = p.val();
        for (std::size_t i = 0; i < R; ++i)
            for (std::size_t j = 0; j < tp.cols(); ++j) out(i, c0 + j) = tp(i, j);
        c0 += tp.cols();
    }
    int id = tape->push(std::move(out), ids, [ids](Tape& t, const Tensor& g) {
        std::size_t c0 = 0;
        for (int pid : ids) {
            const Tensor& vp = t.value(pid);
            Tensor gp = shape_like(vp);
            for (std::size_t i = 0; i < vp.rows(); ++i)
                for (std::size_t j = 0; j < vp.cols(); ++j) gp(i, j) = g(i, c0 + j);
            t.accumulate(pid, gp);
            c0 += vp.cols();
        }
    });
    return {tape, id};
}

Var slice_rows(Var a, std::size_t r0, std::size_t r1) {
    const Tensor& ta = a.val();
    if (r1 > ta.rows() || r0 >= r1) throw std::invalid_argument("slice_rows: bad range");
    std::size_t C = ta.cols();
    Tensor out = Tensor::zeros(r1 - r0, C);
    std::copy(ta.data().begin() + r0 * C, ta.data().begin() + r1 * C, out.data().begin());
    int ia = a.id;
    int id = a.tape->push(std::move(out), {ia}, [ia, r0, r1](Tape& t, const Tensor& g) {
        const Tensor& in = t.value(ia);
        Tensor ga = shape_like(in);
        std::copy(g.data().begin(), g.data().end(), ga.data().begin() + r0 * in.cols());
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
    const Tensor& ta = a.val();
    if (c1 > ta.cols() || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
    std::size_t R = ta.rows();
    Tensor out = Tensor::zeros(R, c1 - c0);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = c0; j < c1; ++j) out(i, j - c0) = ta(i, j);
    int ia = a.id;
    int id = a.tape->push(std::move(out), {ia}, [ia, c0, c1](Tape& t, const Tensor& g) {
        const Tensor& in = t.value(ia);
        Tensor ga = shape_like(in);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = c0; j < c1; ++j) ga(i, j) = g(i, j - c0);
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

Var add_rowvec(Var mat, Var rowv) {
    check_same_tape(mat, rowv);
    const Tensor& tm = mat.val();
    const Tensor& tr = rowv.val();
    if (tr.rows() != 1 || tr.cols() != tm.cols()) {
        throw std::invalid_argument("add_rowvec: shape mismatch");
    }
    Tensor out = tm;
    std::size_t R = tm.rows(), C = tm.cols();
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) out(i, j) += tr[j];
    int im = mat.id, ir = rowv.id;
    int id = mat.tape->push(std::move(out), {im, ir}, [im, ir](Tape& t, const Tensor& g) {
        t.accumulate(im, g);
        Tensor gr = Tensor::zeros(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gr[j] += g(i, j);
        t.accumulate(ir, gr);
    });
    return {mat.tape, id};
}

// ---- fused ops --------------------------------------------------------------

Var softmax_rows(Var a, const Tensor& mask) {
    const Tensor& ta = a.val();
    std::size_t R = ta.rows(), C = ta.cols();
    if (!mask.empty() && !mask.same_shape(ta)) {
        throw std::invalid_argument("softmax_rows: mask shape mismatch");
    }
    Tensor out = Tensor::zeros(R, C);
    for (std::size_t i = 0; i < R; ++i) {
        double mx = -1e300;
        for (std::size_t j = 0; j < C; ++j) {
            double v = ta(i, j) + (mask.empty() ? 0.0 : mask(i, j));
            out(i, j) = v;
            mx = std::max(mx, v);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            out(i, j) = std::exp(out(i, j) - mx);
            z += out(i, j);
        }
        for (std::size_t j = 0; j < C; ++j) out(i, j) /= z;
    }
    int ia = a.id;
    int id = a.tape->push(out, {ia}, [ia, out](Tape& t, const Tensor& g) {
        std::size_t R = g.rows(), C = g.cols();
        Tensor ga = Tensor::zeros(R, C);
        for (std::size_t i = 0; i < R; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < C; ++j) dot += g(i, j) * out(i, j);
            for (std::size_t j = 0; j < C; ++j) ga(i, j) = out(i, j) * (g(i, j) - dot);
        }
        t.accumulate(ia, ga);
    });
    return {a.tape, id};
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps) {
    check_same_tape(a, gain);
    check_same_tape(a, bias);
    const Tensor& ta = a.val();
    std::size_t R = ta.rows(), C = ta.cols();
    if (gain.val().cols() != C || bias.val().cols() != C) {
        throw std::invalid_argument("layer_norm_rows: gain/bias width mismatch");
    }
    Tensor xhat = Tensor::zeros(R, C);
    Tensor inv_std = Tensor::zeros(R, 1);
    Tensor out = Tensor::zeros(R, C);
    const Tensor& gv = gain.val();
    const Tensor& bv = bias.val();
    for (std::size_t i = 0; i < R; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < C; ++j) mu += ta(i, j);
        mu /= C;
        double var = 0.0;
        for (std::size_t j = 0; j < C; ++j) {
            double d = ta(i, j) - mu;
            var += d * d;
        }
        var /= C;
        double is = 1.0 / std::sqrt(var + eps);
        inv_std(i, 0) = is;
        for (std::size_t j = 0; j < C; ++j) {
            xhat(i, j) = (ta(i, j) - mu) * is;
            out(i, j) = xhat(i, j) * gv[j] + bv[j];
        }
    }
    int ia = a.id, ig = gain.id, ib = bias.id;
    int id = a.tape->push(std::move(out), {ia, ig, ib},
                          [ia, ig, ib, xhat, inv_std](Tape& t, const Tensor& g) {
        std::size_t R = g.rows(), C = g.cols();
        const Tensor& gv = t.value(ig);
        Tensor ggain = Tensor::zeros(1, C), gbias = Tensor::zeros(1, C);
        Tensor ga = Tensor::zeros(R, C);
        for (std::size_t i = 0; i < R; ++i) {
            double m1 = 0.0, m2 = 0.0; // mean(dxhat), mean(dxhat * xhat)
            for (std::size_t j = 0; j < C; ++j) {
                ggain[j] += g(i, j) * xhat(i, j);
                gbias[j] += g(i, j);
                double dxh = g(i, j) * gv[j];
                m1 += dxh;
                m2 += dxh * xhat(i, j);
            }
            m1 /= C;
            m2 /= C;
            for (std::size_t j = 0; j < C; ++j) {
                double dxh = g(i, j) * gv[j];
                ga(i, j) = inv_std(i, 0) * (dxh - m1 - xhat(i, j) * m2);
            }
        }
        t.accumulate(ia, ga);
        t.accumulate(ig, ggain);
        t.accumulate(ib, gbias);
    });
    return {a.tape, id};
}

Var conv1d(Var x, Var w, Var b, std::size_t kernel, std::size_t stride) {
    check_same_tape(x, w);
    check_same_tape(x, b);
    const Tensor& tx = x.val();
    const Tensor& tw = w.val();
    const Tensor& tb = b.val();
    std::size_t L = tx.rows(), Cin = tx.cols(), Cout = tw.cols();
    if (kernel > L) throw std::invalid_argument("conv1d: kernel longer than input");
    if (stride == 0) throw std::invalid_argument("conv1d: zero stride");
    if (tw.rows() != kernel * Cin) throw std::invalid_argument("conv1d: weight shape");
    if (tb.rows() != 1 || tb.cols() != Cout) throw std::invalid_argument("conv1d: bias shape");
    std::size_t Lout = (L - kernel) / stride + 1;
    Tensor out = Tensor::zeros(Lout, Cout);
    for (std::size_t o = 0; o < Lout; ++o) {
        std::size_t base = o * stride;
        for (std::size_t k = 0; k < kernel; ++k) {
            for (std::size_t ci = 0; ci < Cin; ++ci) {
                double xv = tx(base + k, ci);
                if (xv == 0.0) continue;
                const double* wrow = &tw.data()[(k * Cin + ci) * Cout];
                double* orow = &out.data()[o * Cout];
                for (std::size_t co = 0; co < Cout; ++co) orow[co] += xv * wrow[co];
            }
        }
        for (std::size_t co = 0; co < Cout; ++co) out(o, co) += tb[co];
    }
    int ix = x.id, iw = w.id, ib = b.id;
    int id = x.tape->push(std::move(out), {ix, iw, ib},
                          [ix, iw, ib, kernel, stride](Tape& t, const Tensor& g) {
        const Tensor& tx = t.value(ix);
        const Tensor& tw = t.value(iw);
        std::size_t Cin = tx.cols(), Cout = tw.cols();
        std::size_t Lout = g.rows();
        Tensor gx = shape_like(tx);
        Tensor gw = shape_like(tw);
        Tensor gb = Tensor::zeros(1, Cout);
        for (std::size_t o = 0; o < Lout; ++o) {
            std::size_t base = o * stride;
            for (std::size_t co = 0; co < Cout; ++co) {
                double gv = g(o, co);
                if (gv == 0.0) continue;
                gb[co] += gv;
                for (std::size_t k = 0; k < kernel; ++k) {
                    for (std::size_t ci = 0; ci < Cin; ++ci) {
                        gx(base + k, ci) += gv * tw(k * Cin + ci, co);
                        gw(k * Cin + ci, co) += gv * tx(base + k, ci);
                    }
                }
            }
        }
        t.accumulate(ix, gx);
        t.accumulate(iw, gw);
        t.accumulate(ib, gb);
    });
    return {x.tape, id};
}

Var maxpool1d(Var x, std::size_t width) {
    const Tensor& tx = x.val();
    if (width == 0 || width > tx.rows()) throw std::invalid_argument("maxpool1d: bad width");
    std::size_t L = tx.rows(), C = tx.cols();
    std::size_t Lout = L / width;
    Tensor out = Tensor::zeros(Lout, C);
    std::vector<std::size_t> argmax(Lout * C);
    for (std::size_t o = 0; o < Lout; ++o) {
        for (std::size_t c = 0; c < C; ++c) {
            std::size_t best = o * width;
            double bv = tx(best, c);
            for (std::size_t k = 1; k < width; ++k) {
                double v = tx(o * width + k, c);
                if (v > bv) {
                    bv = v;
                    best = o * width + k;
                }
            }
            out(o, c) = bv;
            argmax[o * C + c] = best;
        }
    }
    int ix = x.id;
    int id = x.tape->push(std::move(out), {ix}, [ix, argmax](Tape& t, const Tensor& g) {
        const Tensor& tx = t.value(ix);
        Tensor gx = shape_like(tx);
        std::size_t C = g.cols();
        for (std::size_t o = 0; o < g.rows(); ++o)
            for (std::size_t c = 0; c < C; ++c) gx(argmax[o * C + c], c) += g(o, c);
        t.accumulate(ix, gx);
    });
    return {x.tape, id};
}

// ---- losses -------------------------------------------------------------

Var mse_loss(Var pred, Var target) {
    if (!pred.val().same_shape(target.val())) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    return mean(square(sub(pred, target)));
}

Var gaussian_nll(Var mu, Var sigma, Var y) {
    const double two_pi = 6.283185307179586476925286766559;
    Var var = square(sigma);
    Var log_term = scale(log_op(scale(var, two_pi)), 0.5);
    Var quad = div(square(sub(y, mu)), scale(var, 2.0));
    return mean(add(log_term, quad));
}

} // namespace aqua
