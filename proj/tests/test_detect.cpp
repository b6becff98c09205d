#include "doctest.h"

#include <cmath>

#include "aqua/detect.hpp"

using namespace aqua;

namespace {

DetectorConfig toy_config(DetectorKind k) {
    DetectorConfig c;
    c.kind = k;
    c.horizon_len = 8;
    c.context_len =
        (k == DetectorKind::RnnAe || k == DetectorKind::DeepAe ||
         k == DetectorKind::RnnAeFc)
            ? 12
            : 16;
    c.hidden = 3;
    c.ae_hidden = {8, 6, 4};
    c.kernel = 3;
    c.channels = 2;
    c.d_model = 4;
    c.heads = 2;
    c.ff_units = 3;
    c.fn_layers = 2;
    c.fn_units = 3;
    return c;
}

UniWindow toy_window(const DetectorConfig& c, std::uint64_t seed) {
    Rng rng(seed);
    UniWindow w;
    w.context = Tensor::zeros(c.context(), 1);
    for (auto& v : w.context.data()) v = rng.uniform(-1, 1);
    if (c.family() == DetectorFamily::Autoencoder) {
        w.target = w.context;
    } else {
        w.target = Tensor::zeros(c.horizon(), 1);
        for (auto& v : w.target.data()) v = rng.uniform(-1, 1);
    }
    w.scored_end = 0;
    return w;
}

Segment ramp_segment(std::size_t n, Timestamp start = 0) {
    Segment seg;
    seg.start = start;
    seg.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        seg.values[i] = std::sin(static_cast<double>(i) * 0.15);
    }
    return seg;
}

} // namespace

TEST_CASE("kind names round-trip") {
    for (DetectorKind k : all_detector_kinds()) {
        CHECK(detector_kind_from_name(detector_kind_name(k)) == k);
    }
    CHECK_THROWS(detector_kind_from_name("nope"));
}

TEST_CASE("family and window dimensions") {
    for (DetectorKind k : all_detector_kinds()) {
        DetectorConfig c;
        c.kind = k;
        bool ae = k == DetectorKind::RnnAe || k == DetectorKind::DeepAe;
        CHECK((c.family() == DetectorFamily::Autoencoder) == ae);
        CHECK(c.horizon() == 96);
        if (ae || k == DetectorKind::RnnAeFc) {
            CHECK(c.context() == 96);
        } else {
            CHECK(c.context() == 192);
        }
    }
}

TEST_CASE("deepAe parameter count matches the mirrored 96-56-41-32 stack") {
    DetectorConfig c;
    c.kind = DetectorKind::DeepAe;
    Detector d(c, 1);
    std::size_t dims[] = {96, 56, 41, 32, 41, 56, 96};
    std::size_t expect = 0;
    for (std::size_t l = 0; l + 1 < std::size(dims); ++l) {
        expect += dims[l] * dims[l + 1] + dims[l + 1];
    }
    CHECK(d.params().count_entries() == expect);
}

TEST_CASE("every kind emits its horizon at deployed dimensions") {
    for (DetectorKind k : all_detector_kinds()) {
        CAPTURE(detector_kind_name(k));
        DetectorConfig c;
        c.kind = k;
        Detector d(c, 3);
        UniWindow w = toy_window(c, 5);
        auto pred = d.predict(w);
        CHECK(pred.size() == c.horizon());
        for (double v : pred) CHECK(std::isfinite(v));
    }
}

TEST_CASE("prediction never reads the scored ground truth") {
    for (DetectorKind k : all_detector_kinds()) {
        if (DetectorConfig{k}.family() == DetectorFamily::Autoencoder) continue;
        CAPTURE(detector_kind_name(k));
        DetectorConfig c = toy_config(k);
        Detector d(c, 7);
        UniWindow w = toy_window(c, 9);
        auto a = d.predict(w);
        for (auto& v : w.target.data()) v += 2.0;
        auto b = d.predict(w);
        CHECK(a == b);
    }
}

TEST_CASE("gradient checks at toy dimensions") {
    for (DetectorKind k : all_detector_kinds()) {
        CAPTURE(detector_kind_name(k));
        DetectorConfig c = toy_config(k);
        Detector d(c, 11);
        Rng jitter(123);
        for (auto& [name, t] : d.params().values()) {
            for (auto& v : t.data()) v += jitter.uniform(-0.05, 0.05);
        }
        UniWindow w = toy_window(c, 13);
        auto f = [&](Tape& t, const VarMap& p) { return d.loss(t, p, w); };
        CHECK(grad_check(f, d.params(), 1e-5) <= 1e-4);
    }
}

TEST_CASE("score counts follow window arithmetic") {
    std::vector<Segment> segs = {ramp_segment(300)};
    DetectorConfig ae;
    ae.kind = DetectorKind::DeepAe;
    Detector dae(ae, 2);
    CHECK(score(dae, segs).size() == 300 - 95);

    DetectorConfig fc;
    fc.kind = DetectorKind::DeepAnt;
    Detector dant(fc, 2);
    ScoreSeries s = score(dant, segs);
    CHECK(s.size() == 300 - 287);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t > s[i - 1].t);
    for (const ScorePoint& sp : s) CHECK(sp.mse >= 0.0);
}

TEST_CASE("too-short segments yield no scores") {
    DetectorConfig c;
    c.kind = DetectorKind::DeepAnt;
    Detector d(c, 2);
    CHECK(score(d, {ramp_segment(287)}).empty());
}

TEST_CASE("constant-zero predictor scores the mean squared observation") {
    DetectorConfig c;
    c.kind = DetectorKind::DeepAe;
    Detector d(c, 4);
    for (auto& [name, t] : d.params().values()) {
        for (auto& v : t.data()) v = 0.0;
    }
    Segment seg = ramp_segment(120);
    ScoreSeries s = score(d, {seg});
    REQUIRE(s.size() == 120 - 95);
    for (std::size_t w0 = 0; w0 < s.size(); ++w0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 96; ++i) {
            acc += seg.values[w0 + i] * seg.values[w0 + i];
        }
        CHECK(s[w0].mse == doctest::Approx(acc / 96.0).epsilon(1e-12));
        CHECK(s[w0].t == seg.time_at(w0 + 95));
    }
}

TEST_CASE("scores are timestamped at the window end") {
    // zero-filled data: a perfect detector (zero weights reconstruct zero)
    DetectorConfig c;
    c.kind = DetectorKind::DeepAe;
    Detector d(c, 4);
    for (auto& [name, t] : d.params().values()) {
        for (auto& v : t.data()) v = 0.0;
    }
    Segment seg;
    seg.start = 1000 * kStepSeconds;
    seg.values.assign(100, 0.0);
    ScoreSeries s = score(d, {seg});
    REQUIRE(s.size() == 5);
    for (const ScorePoint& sp : s) CHECK(sp.mse == 0.0);
    CHECK(s.front().t == seg.time_at(95));
    CHECK(s.back().t == seg.time_at(99));
}

TEST_CASE("threshold calibration uses the nearest rank") {
    std::vector<double> scores;
    for (int i = 1; i <= 100; ++i) scores.push_back(i);
    Rng rng(5);
    rng.shuffle(scores);
    CHECK(calibrate_threshold(scores) == 99.0);
    CHECK(calibrate_threshold({3.5, 3.5, 3.5}) == 3.5);
    CHECK(calibrate_threshold({7.25}) == 7.25);
    CHECK(calibrate_threshold({1, 2, 3, 4}, 0.5) == 2.0);
    CHECK_THROWS(calibrate_threshold({}));
    CHECK_THROWS(calibrate_threshold({1.0}, 1.5));
}

TEST_CASE("event detection") {
    auto series = [](std::initializer_list<double> mses) {
        ScoreSeries s;
        Timestamp t = 0;
        for (double m : mses) {
            s.push_back({t, m});
            t += kStepSeconds;
        }
        return s;
    };

    SUBCASE("all below threshold: no events") {
        CHECK(detect(series({0.1, 0.2, 0.3}), 1.0, 0.7).empty());
    }
    SUBCASE("single excursion spans the run") {
        auto ev = detect(series({0.1, 0.8, 0.9, 0.1}), 1.0, 0.7);
        REQUIRE(ev.size() == 1);
        CHECK(ev[0].enter == kStepSeconds);
        CHECK(ev[0].exit == 2 * kStepSeconds);
        CHECK(ev[0].peak_mse == 0.9);
    }
    SUBCASE("two separated excursions: two events") {
        auto ev = detect(series({0.8, 0.1, 0.8, 0.9}), 1.0, 0.7);
        CHECK(ev.size() == 2);
    }
    SUBCASE("strictly above: equality does not trigger") {
        CHECK(detect(series({0.7, 0.7}), 1.0, 0.7).empty());
    }
    SUBCASE("raising the level fraction never adds events or duration") {
        Rng rng(17);
        ScoreSeries s;
        for (int i = 0; i < 400; ++i) {
            s.push_back({i * kStepSeconds, rng.uniform(0, 1.2)});
        }
        auto stats = [&](double frac) {
            auto ev = detect(s, 1.0, frac);
            Timestamp dur = 0;
            for (const auto& e : ev) dur += e.exit - e.enter;
            return std::pair<std::size_t, Timestamp>(ev.size(), dur);
        };
        auto prev = stats(0.1);
        for (double f : {0.3, 0.5, 0.7, 0.9, 1.0}) {
            auto cur = stats(f);
            CHECK(cur.second <= prev.second);
            prev = cur;
        }
    }
}

TEST_CASE("lead time") {
    // DO minimum at 07:00; scores cross at configurable points
    Segment obs;
    obs.start = 0;
    obs.values.resize(96);
    for (std::size_t i = 0; i < 96; ++i) {
        double hours = static_cast<double>(i) / 4.0;
        obs.values[i] = std::fabs(hours - 7.0); // unique minimum at 7 h
    }
    auto scores_crossing_at = [](double hour) {
        ScoreSeries s;
        for (int i = 0; i < 96; ++i) {
            Timestamp t = i * kStepSeconds;
            s.push_back({t, t >= static_cast<Timestamp>(hour * 3600) ? 1.0 : 0.1});
        }
        return s;
    };

    SUBCASE("crossing at 02:00, minimum at 07:00: +5 h") {
        auto lt = lead_time(scores_crossing_at(2.0), 0.7, obs, 0, 24 * 3600);
        REQUIRE(lt.has_value());
        CHECK(*lt == 5 * 3600.0);
    }
    SUBCASE("crossing exactly at the minimum: 0 h") {
        auto lt = lead_time(scores_crossing_at(7.0), 0.7, obs, 0, 24 * 3600);
        REQUIRE(lt.has_value());
        CHECK(*lt == 0.0);
    }
    SUBCASE("crossing 1 h after the minimum: -1 h") {
        auto lt = lead_time(scores_crossing_at(8.0), 0.7, obs, 0, 24 * 3600);
        REQUIRE(lt.has_value());
        CHECK(*lt == -3600.0);
    }
    SUBCASE("no crossing: sentinel") {
        ScoreSeries flat;
        for (int i = 0; i < 96; ++i) flat.push_back({i * kStepSeconds, 0.1});
        CHECK(!lead_time(flat, 0.7, obs, 0, 24 * 3600).has_value());
    }
    SUBCASE("window outside the observed data throws") {
        CHECK_THROWS(lead_time(scores_crossing_at(2.0), 0.7, obs,
                               100 * 86400, 101 * 86400));
    }
}
