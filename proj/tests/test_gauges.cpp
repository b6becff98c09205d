#include "doctest.h"

#include <cmath>

#include "aqua/gauges.hpp"

using namespace aqua;

namespace {

ForecastOutput fc(std::vector<double> values) {
    ForecastOutput f;
    f.mean = std::move(values);
    return f;
}

// 1-second Riemann sum over the piecewise-linear forecast, in unit-minutes.
double riemann_area(const std::vector<double>& f, double threshold, double sign) {
    double acc = 0.0;
    double span = static_cast<double>((f.size() - 1) * kStepSeconds);
    for (double t = 0.5; t < span; t += 1.0) {
        double pos = t / static_cast<double>(kStepSeconds);
        auto i = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(i);
        double v = f[i] + frac * (f[i + 1] - f[i]);
        acc += std::max(0.0, sign * (v - threshold));
    }
    return acc / 60.0;
}

GaugeSpec upper(double threshold, double v_ext) {
    GaugeSpec g;
    g.threshold = threshold;
    g.v_ext = v_ext;
    return g;
}

} // namespace

TEST_CASE("spec validation") {
    CHECK_NOTHROW(upper(5, 10).validate());
    CHECK_THROWS(upper(5, 5).validate());
    CHECK_THROWS(upper(5, 3).validate());
    GaugeSpec low;
    low.direction = GaugeDirection::BelowLower;
    low.threshold = 4.0;
    low.v_ext = 0.0;
    CHECK_NOTHROW(low.validate());
    low.v_ext = 4.5;
    CHECK_THROWS(low.validate());
    low.v_ext = 0.0;
    low.t_norm_min = 0.0;
    CHECK_THROWS(low.validate());
}

TEST_CASE("forecast never exceeding the threshold reads zero") {
    GaugeReading r = state_gauge(fc(std::vector<double>(96, 4.0)), upper(5, 10));
    CHECK(r.value == 0.0);
    CHECK(r.area == 0.0);
    CHECK(!r.clamped);
}

TEST_CASE("forecast pinned at the extreme for over 180 min clamps at 100") {
    GaugeReading r = state_gauge(fc(std::vector<double>(96, 10.0)), upper(5, 10));
    CHECK(r.value == 100.0);
    CHECK(r.clamped);
}

TEST_CASE("rectangle with crossing ramps: area 225 over denom 900 reads 25") {
    // at threshold, up to 7.5 over one step, flat through 90 min, back down:
    // ramps contribute 18.75 each, the 75-min plateau 187.5.
    std::vector<double> f(96, 5.0);
    for (int i = 1; i <= 6; ++i) f[i] = 7.5;
    GaugeReading r = state_gauge(fc(f), upper(5, 10));
    CHECK(r.area == doctest::Approx(225.0).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(!r.clamped);
}

TEST_CASE("below-lower direction mirrors above-upper") {
    GaugeSpec low;
    low.direction = GaugeDirection::BelowLower;
    low.threshold = 4.0;
    low.v_ext = 0.0;
    std::vector<double> f(96, 4.0);
    for (int i = 10; i < 20; ++i) f[i] = 2.0;
    GaugeReading r = state_gauge(fc(f), low);
    CHECK(r.value > 0.0);
    CHECK(r.area ==
          doctest::Approx(riemann_area(f, 4.0, -1.0)).epsilon(1e-6));
}

TEST_CASE("trapezoid matches a 1-second Riemann oracle on random forecasts") {
    Rng rng(31);
    for (int c = 0; c < 40; ++c) {
        std::vector<double> f(96);
        for (auto& v : f) v = rng.uniform(2.0, 9.0);
        GaugeSpec g = upper(5.5, 10.0);
        GaugeReading r = state_gauge(fc(f), g);
        double oracle = riemann_area(f, g.threshold, 1.0);
        CHECK(r.area == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("state gauge is monotone in the forecast") {
    Rng rng(37);
    std::vector<double> f(96);
    for (auto& v : f) v = rng.uniform(3.0, 8.0);
    GaugeReading base = state_gauge(fc(f), upper(5, 10));
    std::vector<double> raised = f;
    for (auto& v : raised) v += rng.uniform(0.0, 1.0);
    GaugeReading up = state_gauge(fc(raised), upper(5, 10));
    CHECK(up.value >= base.value);
}

TEST_CASE("overall gauge") {
    auto reading = [](double v) {
        GaugeReading r;
        r.value = v;
        return r;
    };
    std::vector<GaugeReading> rs = {reading(100), reading(0), reading(0), reading(0)};

    SUBCASE("equal weights average") {
        CHECK(overall_gauge(rs, {1, 1, 1, 1}).value == 25.0);
    }
    SUBCASE("degenerate weight vector picks one reading") {
        CHECK(overall_gauge(rs, {1, 0, 0, 0}).value == 100.0);
    }
    SUBCASE("all readings 100 stay 100 for any weights") {
        std::vector<GaugeReading> full(4, reading(100));
        GaugeReading r = overall_gauge(full, {0.1, 0.5, 0.3, 0.9});
        CHECK(r.value == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(r.clamped);
    }
    SUBCASE("weight scaling is irrelevant") {
        GaugeReading a = overall_gauge(rs, {0.4, 0.2, 0.2, 0.2});
        GaugeReading b = overall_gauge(rs, {4, 2, 2, 2});
        CHECK(a.value == b.value);
    }
    SUBCASE("errors") {
        CHECK_THROWS(overall_gauge(rs, {1, 1}));
        CHECK_THROWS(overall_gauge(rs, {0, 0, 0, 0}));
        CHECK_THROWS(overall_gauge(rs, {1, 1, 1, -1}));
        CHECK_THROWS(overall_gauge({}, {}));
    }
}

TEST_CASE("anomaly level") {
    CHECK(anomaly_level(0.0, 1.026).value == 0.0);
    CHECK(anomaly_level(1.026, 1.026).value == 100.0);
    CHECK(anomaly_level(1.026, 1.026).clamped);
    CHECK(anomaly_level(0.513, 1.026).value == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(anomaly_level(5.0, 1.026).value == 100.0);
    CHECK_THROWS(anomaly_level(-0.1, 1.0));
    CHECK_THROWS(anomaly_level(0.1, 0.0));

    SUBCASE("piecewise linear and nondecreasing") {
        double prev = -1.0;
        for (double m = 0.0; m <= 2.0; m += 0.01) {
            double v = anomaly_level(m, 1.026).value;
            CHECK(v >= prev);
            if (m < 1.026) CHECK(v == doctest::Approx(100.0 * m / 1.026));
            prev = v;
        }
    }
}

TEST_CASE("default weights") {
    auto w = default_gauge_weights();
    CHECK(w.at(Variable::Do) == 0.4);
    CHECK(w.at(Variable::Ph) == 0.2);
    CHECK(w.at(Variable::WaterTemp) == 0.2);
    CHECK(w.at(Variable::Chlorophyll) == 0.2);
    double sum = 0.0;
    for (auto& [v, x] : w) sum += x;
    CHECK(sum == doctest::Approx(1.0));
}
