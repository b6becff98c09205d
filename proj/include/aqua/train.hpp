#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aqua/adam.hpp"
#include "aqua/datapipe.hpp"
#include "aqua/forecast.hpp"
#include "aqua/params.hpp"

namespace aqua {

struct TrainConfig {
    std::vector<double> lr_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
    std::size_t batch_size = 32;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    double min_delta = 0.0;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    ParamSet params; // best-validation snapshot
    std::vector<double> train_history;
    std::vector<double> val_history;
    double best_val = 0.0;
    std::size_t best_epoch = 0;
    bool diverged = false;
};

// Per-example training objective; the trainer owns batching and updates.
using LossFn = std::function<Var(Tape&, const VarMap&, std::size_t example)>;

// Adam with early stopping. Examples are assumed time-ordered; the latest
// val_fraction of them form the validation set. Divergence (non-finite
// loss) aborts, returning the last finite best-validation parameters.
TrainResult train(ParamSet init, std::size_t n_examples, const LossFn& loss,
                  double lr, const TrainConfig& cfg);

struct LrSearchResult {
    double best_lr = 0.0;
    std::vector<double> val_losses; // aligned with cfg.lr_grid
    TrainResult best;
};

// One training run per grid point from the same initial parameters;
// argmin validation loss, ties toward the smaller rate.
LrSearchResult lr_search(const std::function<ParamSet()>& init_factory,
                         std::size_t n_examples, const LossFn& loss,
                         const TrainConfig& cfg);

// Default |y| floor for MAPE denominators, in physical units: DO can reach
// 0 mg/L mid-crash, where the bare definition blows up.
constexpr double kMapeFloor = 0.1;

double mape(const std::vector<double>& y, const std::vector<double>& yhat,
            double eps_floor = kMapeFloor);
double rmse(const std::vector<double>& y, const std::vector<double>& yhat);

struct EvalRow {
    std::string model;
    double mape_mean = 0.0;
    double mape_std = 0.0;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    double runtime_s = 0.0; // inference only, whole test set
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

// Per-window MAPE/RMSE in physical units (population mean/std across
// windows) plus summed inference wall time.
EvalRow evaluate_forecaster(const ForecastModel& model,
                            const std::vector<WindowPair>& test,
                            const Standardizer& stdz, Variable target,
                            double eps_floor = kMapeFloor);

} // namespace aqua
