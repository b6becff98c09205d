#include "aqua/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace aqua {

void TrainConfig::validate() const {
    if (lr_grid.empty()) throw std::invalid_argument("train: empty lr grid");
    for (double lr : lr_grid) {
        if (!(lr > 0.0)) throw std::invalid_argument("train: lr grid entries must be positive");
    }
    if (batch_size == 0) throw std::invalid_argument("train: batch_size == 0");
    if (max_epochs == 0) throw std::invalid_argument("train: max_epochs == 0");
    if (patience == 0) throw std::invalid_argument("train: patience == 0");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("train: val_fraction out of (0, 1)");
    }
}

namespace {

double mean_loss(const ParamSet& params, const LossFn& loss,
                 std::size_t begin, std::size_t end) {
    Tape tape;
    VarMap p = params.inject(tape);
    std::size_t mark = tape.size();
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        tape.truncate(mark);
        acc += loss(tape, p, i).val().item();
    }
    return acc / static_cast<double>(end - begin);
}

} // namespace

TrainResult train(ParamSet init, std::size_t n_examples, const LossFn& loss,
                  double lr, const TrainConfig& cfg) {
    cfg.validate();
    if (n_examples < 2) {
        throw std::invalid_argument("train: need at least 2 examples for a validation split");
    }
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(cfg.val_fraction * static_cast<double>(n_examples)));
    n_val = std::clamp<std::size_t>(n_val, 1, n_examples - 1);
    std::size_t n_train = n_examples - n_val;

    TrainResult res;
    res.params = init;
    res.best_val = std::numeric_limits<double>::infinity();

    ParamSet current = std::move(init);
    Adam opt(lr);
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t since_improve = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_sum = 0.0;
        for (std::size_t b0 = 0; b0 < n_train && !res.diverged; b0 += cfg.batch_size) {
            std::size_t b1 = std::min(b0 + cfg.batch_size, n_train);
            Tape tape;
            VarMap p = current.inject(tape);
            Var batch;
            for (std::size_t i = b0; i < b1; ++i) {
                Var li = loss(tape, p, order[i]);
                batch = batch.valid() ? add(batch, li) : li;
            }
            batch = scale(batch, 1.0 / static_cast<double>(b1 - b0));
            double value = batch.val().item();
            if (!std::isfinite(value)) {
                res.diverged = true;
                break;
            }
            epoch_sum += value * static_cast<double>(b1 - b0);
            opt.step(current, param_grads(tape, batch, p));
        }
        if (res.diverged) break;

        double train_loss = epoch_sum / static_cast<double>(n_train);
        double val_loss = mean_loss(current, loss, n_train, n_examples);
        res.train_history.push_back(train_loss);
        res.val_history.push_back(val_loss);
        if (!std::isfinite(val_loss)) {
            res.diverged = true;
            break;
        }
        if (val_loss < res.best_val - cfg.min_delta) {
            res.best_val = val_loss;
            res.best_epoch = epoch;
            res.params = current;
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve >= cfg.patience) break;
        }
    }
    return res;
}

LrSearchResult lr_search(const std::function<ParamSet()>& init_factory,
                         std::size_t n_examples, const LossFn& loss,
                         const TrainConfig& cfg) {
    cfg.validate();
    LrSearchResult out;
    double best = std::numeric_limits<double>::infinity();
    double best_lr = 0.0;
    for (double lr : cfg.lr_grid) {
        TrainResult r = train(init_factory(), n_examples, loss, lr, cfg);
        out.val_losses.push_back(r.best_val);
        bool better = r.best_val < best ||
                      (r.best_val == best && best_lr != 0.0 && lr < best_lr);
        if (std::isfinite(r.best_val) && better) {
            best = r.best_val;
            best_lr = lr;
            out.best = std::move(r);
        }
    }
    if (!std::isfinite(best)) throw std::runtime_error("lr_search: every run diverged");
    out.best_lr = best_lr;
    return out;
}

double mape(const std::vector<double>& y, const std::vector<double>& yhat,
            double eps_floor) {
    if (y.size() != yhat.size() || y.empty()) {
        throw std::invalid_argument("mape: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        acc += std::fabs(y[i] - yhat[i]) / std::max(std::fabs(y[i]), eps_floor);
    }
    return 100.0 * acc / static_cast<double>(y.size());
}

double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size() || y.empty()) {
        throw std::invalid_argument("rmse: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - yhat[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(y.size()));
}

EvalRow evaluate_forecaster(const ForecastModel& model,
                            const std::vector<WindowPair>& test,
                            const Standardizer& stdz, Variable target,
                            double eps_floor) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    EvalRow row;
    row.model = model.config().name();
    ForecastModel::Session session(model);
    std::vector<double> mapes, rmses;
    mapes.reserve(test.size());
    rmses.reserve(test.size());
    double runtime = 0.0;
    for (const WindowPair& w : test) {
        auto t0 = std::chrono::steady_clock::now();
        ForecastOutput out = session.predict(w);
        auto t1 = std::chrono::steady_clock::now();
        runtime += std::chrono::duration<double>(t1 - t0).count();
        std::vector<double> y(out.mean.size()), yhat(out.mean.size());
        for (std::size_t i = 0; i < out.mean.size(); ++i) {
            y[i] = stdz.invert(target, w.target(i, 0));
            yhat[i] = stdz.invert(target, out.mean[i]);
        }
        mapes.push_back(mape(y, yhat, eps_floor));
        rmses.push_back(rmse(y, yhat));
    }
    auto agg = [](const std::vector<double>& v, double& mu, double& sd) {
        double n = static_cast<double>(v.size());
        mu = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mu) * (x - mu);
        sd = std::sqrt(ss / n);
    };
    agg(mapes, row.mape_mean, row.mape_std);
    agg(rmses, row.rmse_mean, row.rmse_std);
    row.runtime_s = runtime;
    return row;
}

} // namespace aqua
