#include "doctest.h"

#include <cstdio>

#include "aqua/checkpoint.hpp"

using namespace aqua;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& p) : path(p) {}
    ~TempFile() { std::remove(path.c_str()); }
};

WindowPair small_window(std::uint64_t seed, std::size_t in_len, std::size_t out_len,
                        std::size_t n_vars) {
    Rng rng(seed);
    WindowPair w;
    w.history = Tensor::zeros(in_len, n_vars);
    for (auto& v : w.history.data()) v = rng.uniform(-1, 1);
    w.exo = Tensor::zeros(out_len, 1);
    for (auto& v : w.exo.data()) v = rng.uniform(-1, 1);
    w.target = Tensor::zeros(out_len, 1);
    for (auto& v : w.target.data()) v = rng.uniform(-1, 1);
    w.last_target = w.history(in_len - 1, 0);
    return w;
}

} // namespace

TEST_CASE("forecast checkpoint round-trips bit-exactly") {
    ForecastModelConfig cfg;
    cfg.kind = ModelKind::Transformer;
    cfg.proposed = true;
    cfg.in_len = 8;
    cfg.out_len = 4;
    cfg.n_vars = 2;
    cfg.d_model = 4;
    cfg.heads = 2;
    cfg.ff_units = 3;
    ForecastModel m(cfg, 1234);
    // scramble past the nicely rounded init so the test exercises
    // arbitrary doubles
    Rng rng(5);
    for (auto& [name, t] : m.params().values()) {
        for (auto& v : t.data()) v += rng.normal(0.0, 0.37);
    }

    TempFile f("/tmp/aqua_ckpt_fc.json");
    save_forecast_checkpoint(f.path, cfg, m.params());
    ForecastModel back = load_forecast_checkpoint(f.path);

    CHECK(back.config().kind == cfg.kind);
    CHECK(back.config().proposed == cfg.proposed);
    CHECK(back.params().seed() == 1234);
    REQUIRE(back.params().values().size() == m.params().values().size());
    for (const auto& [name, t] : m.params().values()) {
        CHECK(back.params().at(name).data() == t.data());
    }

    WindowPair w = small_window(9, 8, 4, 2);
    CHECK(m.predict(w).mean == back.predict(w).mean);
}

TEST_CASE("detector checkpoint round-trips bit-exactly") {
    DetectorConfig cfg;
    cfg.kind = DetectorKind::DeepAnt;
    cfg.context_len = 16;
    cfg.horizon_len = 8;
    cfg.kernel = 3;
    cfg.channels = 2;
    Detector d(cfg, 777);

    TempFile f("/tmp/aqua_ckpt_det.json");
    save_detector_checkpoint(f.path, cfg, d.params());
    Detector back = load_detector_checkpoint(f.path);

    CHECK(back.config().kind == cfg.kind);
    CHECK(back.config().context() == cfg.context());
    for (const auto& [name, t] : d.params().values()) {
        CHECK(back.params().at(name).data() == t.data());
    }

    Rng rng(3);
    UniWindow w;
    w.context = Tensor::zeros(16, 1);
    for (auto& v : w.context.data()) v = rng.uniform(-1, 1);
    w.target = Tensor::zeros(8, 1);
    CHECK(d.predict(w) == back.predict(w));
}

TEST_CASE("checkpoint loading rejects the wrong type or a missing file") {
    DetectorConfig cfg;
    cfg.kind = DetectorKind::DeepAe;
    cfg.context_len = 12;
    cfg.ae_hidden = {8, 6, 4};
    Detector d(cfg, 1);
    TempFile f("/tmp/aqua_ckpt_mix.json");
    save_detector_checkpoint(f.path, cfg, d.params());
    CHECK_THROWS(load_forecast_checkpoint(f.path));
    CHECK_THROWS(load_detector_checkpoint("/tmp/aqua_ckpt_nope.json"));
}
