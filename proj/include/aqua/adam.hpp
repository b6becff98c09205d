#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "aqua/params.hpp"
#include "aqua/tensor.hpp"

namespace aqua {

// Bias-corrected Adam over a ParamSet.
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    double lr() const { return lr_; }
    long step_count() const { return t_; }

    void step(ParamSet& params, const std::map<std::string, Tensor>& grads) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (auto& [name, p] : params.values()) {
            auto git = grads.find(name);
            if (git == grads.end()) {
                throw std::invalid_argument("Adam: missing gradient for " + name);
            }
            const Tensor& g = git->second;
            Tensor& m = moment(m_, name, p);
            Tensor& v = moment(v_, name, p);
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    Tensor& moment(std::map<std::string, Tensor>& store, const std::string& name,
                   const Tensor& like) {
        auto it = store.find(name);
        if (it == store.end()) it = store.emplace(name, Tensor(like.shape())).first;
        return it->second;
    }

    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::map<std::string, Tensor> m_, v_;
};

} // namespace aqua
