#include "doctest.h"

#include <cmath>

#include "aqua/train.hpp"

using namespace aqua;

namespace {

// single scalar parameter "x", objective (x - c)^2, same for every example
LossFn quadratic(double c) {
    return [c](Tape& tape, const VarMap& p, std::size_t) {
        return square(add_const(p.at("x"), -c));
    };
}

ParamSet scalar_param(double x0) {
    ParamSet ps(0);
    ps.add("x", Tensor::scalar(x0));
    return ps;
}

} // namespace

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.lr_grid == std::vector<double>{1e-6, 1e-5, 1e-4, 1e-3, 1e-2});
    CHECK(cfg.patience == 10);
    CHECK(cfg.val_fraction == 0.2);
    CHECK(cfg.batch_size == 32);
    CHECK(cfg.max_epochs == 200);

    TrainConfig bad = cfg;
    bad.val_fraction = 1.0;
    CHECK_THROWS(bad.validate());
    bad = cfg;
    bad.lr_grid.clear();
    CHECK_THROWS(bad.validate());
    bad = cfg;
    bad.patience = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("lr 0 leaves parameters unchanged and history constant") {
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.patience = 100;
    TrainResult r = train(scalar_param(1.5), 10, quadratic(3.0), 0.0, cfg);
    CHECK(r.params.at("x").item() == 1.5);
    REQUIRE(r.train_history.size() >= 2);
    for (double v : r.train_history) CHECK(v == r.train_history[0]);
    for (double v : r.val_history) CHECK(v == r.val_history[0]);
}

TEST_CASE("quadratic objective converges to the minimizer") {
    TrainConfig cfg;
    cfg.max_epochs = 500;
    cfg.patience = 500;
    TrainResult r = train(scalar_param(2.0), 10, quadratic(3.0), 1e-2, cfg);
    CHECK(std::fabs(r.params.at("x").item() - 3.0) <= 1e-3);
    CHECK(!r.diverged);
}

TEST_CASE("early stopping fires after exactly patience non-improving epochs") {
    TrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.patience = 7;
    // constant objective: first epoch improves on +inf, then a plateau
    LossFn plateau = [](Tape& tape, const VarMap& p, std::size_t) {
        return add_const(mul(p.at("x"), tape.constant(Tensor::scalar(0.0))), 4.0);
    };
    TrainResult r = train(scalar_param(1.0), 10, plateau, 1e-3, cfg);
    CHECK(r.val_history.size() == 1 + cfg.patience);
    CHECK(r.best_epoch == 0);
    CHECK(r.best_val == 4.0);
}

TEST_CASE("divergence aborts with the last finite snapshot") {
    TrainConfig cfg;
    cfg.max_epochs = 50;
    LossFn explode = [](Tape& tape, const VarMap& p, std::size_t) {
        return square(p.at("x"));
    };
    TrainResult r = train(scalar_param(1e200), 10, explode, 1e-3, cfg);
    CHECK(r.diverged);
    CHECK(r.params.at("x").item() == 1e200); // never improved past init
}

TEST_CASE("training is reproducible for a fixed seed") {
    TrainConfig cfg;
    cfg.max_epochs = 20;
    cfg.patience = 20;
    cfg.seed = 42;
    TrainResult a = train(scalar_param(0.0), 16, quadratic(2.0), 1e-3, cfg);
    TrainResult b = train(scalar_param(0.0), 16, quadratic(2.0), 1e-3, cfg);
    CHECK(a.train_history == b.train_history);
    CHECK(a.val_history == b.val_history);
    CHECK(a.params.at("x").item() == b.params.at("x").item());
}

TEST_CASE("lr search") {
    TrainConfig cfg;
    cfg.max_epochs = 40;
    cfg.patience = 40;
    auto factory = [] { return scalar_param(0.0); };

    SUBCASE("grid of one returns that lr") {
        cfg.lr_grid = {1e-3};
        LrSearchResult r = lr_search(factory, 10, quadratic(1.0), cfg);
        CHECK(r.best_lr == 1e-3);
        CHECK(r.val_losses.size() == 1);
    }
    SUBCASE("best lr is the argmin of the reported losses") {
        LrSearchResult r = lr_search(factory, 10, quadratic(1.0), cfg);
        REQUIRE(r.val_losses.size() == cfg.lr_grid.size());
        std::size_t arg = 0;
        for (std::size_t i = 1; i < r.val_losses.size(); ++i) {
            if (r.val_losses[i] < r.val_losses[arg]) arg = i;
        }
        CHECK(r.best_lr == cfg.lr_grid[arg]);
        // a quadratic this easy is best served by the largest rate
        CHECK(r.best_lr == 1e-2);
    }
    SUBCASE("ties break toward the smaller lr") {
        LossFn flat = [](Tape& tape, const VarMap& p, std::size_t) {
            return add_const(mul(p.at("x"), tape.constant(Tensor::scalar(0.0))), 1.0);
        };
        LrSearchResult r = lr_search(factory, 10, flat, cfg);
        CHECK(r.best_lr == 1e-6);
    }
    SUBCASE("all runs diverging is an error") {
        LossFn explode = [](Tape& tape, const VarMap& p, std::size_t) {
            return square(p.at("x"));
        };
        auto big = [] { return scalar_param(1e200); };
        CHECK_THROWS(lr_search(big, 10, explode, cfg));
    }
}

TEST_CASE("mape and rmse") {
    CHECK(mape({10, 20}, {10, 20}) == 0.0);
    CHECK(rmse({10, 20}, {10, 20}) == 0.0);
    CHECK(mape({10, 20}, {9, 22}) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rmse({3, 4}, {0, 0}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
    // floor takes over when |y| < eps
    CHECK(mape({0.0}, {0.05}) == doctest::Approx(50.0).epsilon(1e-12));
    CHECK_THROWS(mape({1, 2}, {1}));
    CHECK_THROWS(rmse({}, {}));
}

TEST_CASE("metrics match a brute-force oracle on random vectors") {
    Rng rng(99);
    for (int c = 0; c < 300; ++c) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 30));
        std::vector<double> y(n), yh(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(-50, 50);
            yh[i] = rng.uniform(-50, 50);
        }
        double m = 0.0, s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m += std::fabs(y[i] - yh[i]) / std::max(std::fabs(y[i]), 0.1);
            s += (y[i] - yh[i]) * (y[i] - yh[i]);
        }
        m = 100.0 * m / static_cast<double>(n);
        s = std::sqrt(s / static_cast<double>(n));
        CHECK(mape(y, yh) == doctest::Approx(m).epsilon(1e-12));
        CHECK(rmse(y, yh) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("evaluate_forecaster") {
    // standardizer with mean 1, sigma 1 on DO
    TimeSeries ts;
    ts.sensor_id = "s0";
    ts.variable = Variable::Do;
    ts.start = 0;
    ts.values = {0.0, 2.0};
    Standardizer stdz;
    stdz.fit({ts});

    ForecastModelConfig c;
    c.kind = ModelKind::ForecastNet;
    c.proposed = false;
    c.in_len = 8;
    c.out_len = 4;
    c.n_vars = 2;
    c.fn_layers = 1;
    c.fn_units = 3;
    ForecastModel m(c, 5);

    Rng rng(6);
    std::vector<WindowPair> test(3);
    for (auto& w : test) {
        w.history = Tensor::zeros(8, 2);
        for (auto& v : w.history.data()) v = rng.uniform(-1, 1);
        w.exo = Tensor::zeros(4, 1);
        w.target = Tensor::zeros(4, 1);
        for (auto& v : w.target.data()) v = rng.uniform(-1, 1);
        w.last_target = w.history(7, 0);
    }

    EvalRow row = evaluate_forecaster(m, test, stdz, Variable::Do);
    CHECK(row.model == "fn");
    CHECK(row.mape_mean >= 0.0);
    CHECK(row.rmse_mean >= 0.0);
    CHECK(row.runtime_s > 0.0);

    SUBCASE("identical models give identical metric rows") {
        ForecastModel m2(c, 5);
        EvalRow other = evaluate_forecaster(m2, test, stdz, Variable::Do);
        CHECK(other.mape_mean == row.mape_mean);
        CHECK(other.mape_std == row.mape_std);
        CHECK(other.rmse_mean == row.rmse_mean);
        CHECK(other.rmse_std == row.rmse_std);
    }
    SUBCASE("single-window std is zero") {
        EvalRow one = evaluate_forecaster(m, {test[0]}, stdz, Variable::Do);
        CHECK(one.mape_std == 0.0);
        CHECK(one.rmse_std == 0.0);
    }
    SUBCASE("empty test set is an error") {
        CHECK_THROWS(evaluate_forecaster(m, {}, stdz, Variable::Do));
    }
}
