#include "aqua/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "aqua/checkpoint.hpp"
#include "aqua/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aqua {

namespace {

// ---- config plumbing -------------------------------------------------------

const char* direction_name(GaugeDirection d) {
    return d == GaugeDirection::AboveUpper ? "above_upper" : "below_lower";
}

GaugeDirection direction_from_name(const std::string& s) {
    if (s == "above_upper") return GaugeDirection::AboveUpper;
    if (s == "below_lower") return GaugeDirection::BelowLower;
    throw ConfigError("unknown gauge direction: " + s);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

std::vector<GaugeConfig> default_gauges() {
    std::vector<GaugeConfig> out;
    auto weights = default_gauge_weights();
    GaugeConfig g;
    g.spec = {Variable::Do, 4.0, GaugeDirection::BelowLower, 0.0, 180.0};
    g.weight = weights.at(Variable::Do);
    out.push_back(g);
    g.spec = {Variable::Ph, 8.3, GaugeDirection::AboveUpper, 9.0, 180.0};
    g.weight = weights.at(Variable::Ph);
    out.push_back(g);
    g.spec = {Variable::WaterTemp, 31.0, GaugeDirection::AboveUpper, 36.0, 180.0};
    g.weight = weights.at(Variable::WaterTemp);
    out.push_back(g);
    g.spec = {Variable::Chlorophyll, 60.0, GaugeDirection::AboveUpper, 110.0, 180.0};
    g.weight = weights.at(Variable::Chlorophyll);
    out.push_back(g);
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
    if (!out) throw ConfigError("write failed for " + path);
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---- shared data loading ---------------------------------------------------

struct Corpus {
    std::vector<TimeSeries> all;
    std::map<std::string, std::vector<ForecastIssue>> issues;
    std::vector<std::string> sensors; // pond0..pondN-1, test sensor last
};

std::string pond_id(int i) { return "pond" + std::to_string(i); }

Corpus load_corpus(const RunConfig& cfg) {
    Corpus c;
    for (int i = 0; i < cfg.scenario.ponds; ++i) {
        std::string id = pond_id(i);
        fs::path data = fs::path(cfg.data_dir) / (id + ".csv");
        fs::path airfc = fs::path(cfg.data_dir) / (id + "_airfc.csv");
        if (!fs::exists(data) || !fs::exists(airfc)) {
            throw ConfigError("missing scenario data for " + id + " under " +
                              cfg.data_dir + " (run `synth` first)");
        }
        for (auto& s : load_sensor_csv(data.string())) c.all.push_back(std::move(s));
        c.issues[id] = load_forecast_csv(airfc.string());
        c.sensors.push_back(id);
    }
    return c;
}

Dataset build_dataset(const RunConfig& cfg, const Corpus& corpus, Variable target,
                      std::size_t stride) {
    SplitPlan plan;
    plan.test_sensor = cfg.test_sensor();
    plan.spec = WindowSpec{192, 96, stride, target};
    return leave_one_out_split(corpus.all, corpus.issues, plan);
}

Standardizer fit_standardizer(const RunConfig& cfg, const Corpus& corpus) {
    std::vector<TimeSeries> train_series;
    for (const TimeSeries& s : corpus.all) {
        if (s.sensor_id != cfg.test_sensor()) train_series.push_back(s);
    }
    Standardizer stdz;
    stdz.fit(train_series);
    return stdz;
}

const TimeSeries& find_series(const Corpus& corpus, const std::string& sensor,
                              Variable var) {
    for (const TimeSeries& s : corpus.all) {
        if (s.sensor_id == sensor && s.variable == var) return s;
    }
    throw std::runtime_error("series not found: " + sensor + "/" + variable_name(var));
}

std::vector<Segment> standardized_segments(const Corpus& corpus,
                                           const Standardizer& stdz,
                                           const std::string& sensor, Variable var) {
    std::vector<Segment> segs = impute(find_series(corpus, sensor, var));
    for (Segment& seg : segs) {
        for (double& v : seg.values) v = stdz.apply(var, v);
    }
    return segs;
}

// ---- checkpoints and report paths ------------------------------------------

std::string forecast_ckpt_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.model_dir) / ("forecast_" + name + ".json")).string();
}

std::string gauge_ckpt_path(const RunConfig& cfg, Variable var) {
    return (fs::path(cfg.model_dir) /
            ("forecast_gauge_" + std::string(variable_name(var)) + ".json"))
        .string();
}

std::string detector_ckpt_path(const RunConfig& cfg, DetectorKind kind) {
    return (fs::path(cfg.model_dir) /
            ("detector_" + std::string(detector_kind_name(kind)) + ".json"))
        .string();
}

std::string thresholds_path(const RunConfig& cfg) {
    return (fs::path(cfg.model_dir) / "thresholds.json").string();
}

json load_thresholds(const RunConfig& cfg) {
    std::ifstream in(thresholds_path(cfg));
    if (!in) {
        throw std::runtime_error("missing " + thresholds_path(cfg) +
                                 " (run `train` first)");
    }
    json j = json::parse(in);
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
        throw std::runtime_error("unsupported thresholds schema");
    }
    return j.at("level_100");
}

void require_checkpoint(const std::string& path) {
    if (!fs::exists(path)) {
        throw std::runtime_error("missing checkpoint " + path + " (run `train` first)");
    }
}

Timestamp crash_start(const ScenarioConfig& sc) {
    return static_cast<Timestamp>(std::llround(sc.crash_day * 86400.0));
}

Timestamp crash_end(const ScenarioConfig& sc) {
    return crash_start(sc) + static_cast<Timestamp>(std::llround(sc.crash_hours * 3600.0));
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputeError;
    }
}

} // namespace

// ---- RunConfig ---------------------------------------------------------------

RunConfig::RunConfig() {
    detector_kinds = all_detector_kinds();
    gauges = default_gauges();
    train.seed = seed;
}

std::string RunConfig::test_sensor() const { return pond_id(scenario.ponds - 1); }

void RunConfig::validate() const {
    if (scenario.ponds < 2) throw ConfigError("scenario.ponds must be >= 2");
    if (scenario.days < 4) throw ConfigError("scenario.days must cover a model window");
    if (scenario.forecast_error_std < 0) throw ConfigError("forecast_error_std < 0");
    if (level_fraction <= 0.0 || level_fraction > 1.0) {
        throw ConfigError("level_fraction must be in (0, 1]");
    }
    if (threshold_percentile <= 0.0 || threshold_percentile > 1.0) {
        throw ConfigError("threshold_percentile must be in (0, 1]");
    }
    if (train_stride == 0 || eval_stride == 0 || score_stride == 0) {
        throw ConfigError("strides must be positive");
    }
    if (ticks == 0) throw ConfigError("ticks must be positive");
    if (forecast_kinds.empty()) throw ConfigError("no forecast kinds selected");
    if (gauges.empty()) throw ConfigError("no gauges configured");
    try {
        train.validate();
        for (const GaugeConfig& g : gauges) {
            g.spec.validate();
            if (g.weight < 0) throw std::invalid_argument("negative gauge weight");
        }
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("bad config JSON in " + path + ": " + e.what());
    }
    try {
        RunConfig cfg;
        get_if(j, "data_dir", cfg.data_dir);
        get_if(j, "model_dir", cfg.model_dir);
        get_if(j, "report_dir", cfg.report_dir);
        get_if(j, "seed", cfg.seed);
        if (j.contains("scenario")) {
            const json& s = j.at("scenario");
            get_if(s, "ponds", cfg.scenario.ponds);
            get_if(s, "days", cfg.scenario.days);
            get_if(s, "forecast_error_std", cfg.scenario.forecast_error_std);
            get_if(s, "inject", cfg.scenario.inject);
            get_if(s, "crash_day", cfg.scenario.crash_day);
            get_if(s, "crash_hours", cfg.scenario.crash_hours);
            get_if(s, "crash_severity", cfg.scenario.crash_severity);
            get_if(s, "fouling_day", cfg.scenario.fouling_day);
            get_if(s, "fouling_days", cfg.scenario.fouling_days);
            get_if(s, "fouling_severity", cfg.scenario.fouling_severity);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            get_if(t, "lr_grid", cfg.train.lr_grid);
            get_if(t, "batch_size", cfg.train.batch_size);
            get_if(t, "max_epochs", cfg.train.max_epochs);
            get_if(t, "patience", cfg.train.patience);
            get_if(t, "min_delta", cfg.train.min_delta);
            get_if(t, "val_fraction", cfg.train.val_fraction);
        }
        if (j.contains("forecast_kinds")) {
            cfg.forecast_kinds.clear();
            for (const auto& s : j.at("forecast_kinds")) {
                cfg.forecast_kinds.push_back(model_kind_from_name(s.get<std::string>()));
            }
        }
        if (j.contains("gauge_variables")) {
            cfg.gauge_variables.clear();
            for (const auto& s : j.at("gauge_variables")) {
                cfg.gauge_variables.push_back(variable_from_name(s.get<std::string>()));
            }
        }
        if (j.contains("detector_kinds")) {
            cfg.detector_kinds.clear();
            for (const auto& s : j.at("detector_kinds")) {
                cfg.detector_kinds.push_back(
                    detector_kind_from_name(s.get<std::string>()));
            }
        }
        if (j.contains("pipeline_detector")) {
            cfg.pipeline_detector =
                detector_kind_from_name(j.at("pipeline_detector").get<std::string>());
        }
        get_if(j, "train_stride", cfg.train_stride);
        get_if(j, "eval_stride", cfg.eval_stride);
        get_if(j, "score_stride", cfg.score_stride);
        get_if(j, "threshold_percentile", cfg.threshold_percentile);
        get_if(j, "level_fraction", cfg.level_fraction);
        get_if(j, "ticks", cfg.ticks);
        if (j.contains("gauges")) {
            cfg.gauges.clear();
            for (const auto& g : j.at("gauges")) {
                GaugeConfig gc;
                gc.spec.variable = variable_from_name(g.at("variable").get<std::string>());
                get_if(g, "threshold", gc.spec.threshold);
                gc.spec.direction =
                    direction_from_name(g.at("direction").get<std::string>());
                get_if(g, "v_ext", gc.spec.v_ext);
                get_if(g, "t_norm_min", gc.spec.t_norm_min);
                get_if(g, "weight", gc.weight);
                cfg.gauges.push_back(gc);
            }
        }
        cfg.train.seed = cfg.seed;
        return cfg;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("bad config value in " + path + ": " + e.what());
    }
}

std::string RunConfig::dump() const {
    json gj = json::array();
    for (const GaugeConfig& g : gauges) {
        gj.push_back({{"variable", variable_name(g.spec.variable)},
                      {"threshold", g.spec.threshold},
                      {"direction", direction_name(g.spec.direction)},
                      {"v_ext", g.spec.v_ext},
                      {"t_norm_min", g.spec.t_norm_min},
                      {"weight", g.weight}});
    }
    std::vector<std::string> fks, gvs, dks;
    for (ModelKind k : forecast_kinds) fks.emplace_back(model_kind_name(k));
    for (Variable v : gauge_variables) gvs.emplace_back(variable_name(v));
    for (DetectorKind k : detector_kinds) dks.emplace_back(detector_kind_name(k));
    json j = {
        {"schema_version", kReportSchemaVersion},
        {"data_dir", data_dir},
        {"model_dir", model_dir},
        {"report_dir", report_dir},
        {"seed", seed},
        {"scenario",
         {{"ponds", scenario.ponds},
          {"days", scenario.days},
          {"forecast_error_std", scenario.forecast_error_std},
          {"inject", scenario.inject},
          {"crash_day", scenario.crash_day},
          {"crash_hours", scenario.crash_hours},
          {"crash_severity", scenario.crash_severity},
          {"fouling_day", scenario.fouling_day},
          {"fouling_days", scenario.fouling_days},
          {"fouling_severity", scenario.fouling_severity}}},
        {"train",
         {{"lr_grid", train.lr_grid},
          {"batch_size", train.batch_size},
          {"max_epochs", train.max_epochs},
          {"patience", train.patience},
          {"min_delta", train.min_delta},
          {"val_fraction", train.val_fraction}}},
        {"forecast_kinds", fks},
        {"gauge_variables", gvs},
        {"detector_kinds", dks},
        {"pipeline_detector", detector_kind_name(pipeline_detector)},
        {"train_stride", train_stride},
        {"eval_stride", eval_stride},
        {"score_stride", score_stride},
        {"threshold_percentile", threshold_percentile},
        {"level_fraction", level_fraction},
        {"ticks", ticks},
        {"gauges", gj},
    };
    return j.dump(2) + "\n";
}

// ---- synth -------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
    return guarded([&]() -> int {
        cfg.validate();
        ensure_dir(cfg.data_dir);
        int files = 0;
        for (int i = 0; i < cfg.scenario.ponds; ++i) {
            std::string id = pond_id(i);
            PondParams params = paperlike_pond(i, cfg.seed);
            std::vector<TimeSeries> series = gen_pond(cfg.scenario.days, params, id);
            if (cfg.scenario.inject && id == cfg.test_sensor()) {
                TimeSeries* dox = nullptr;
                for (TimeSeries& s : series) {
                    if (s.variable == Variable::Do) dox = &s;
                }
                AnomalyInjection crash;
                crash.kind = AnomalyInjection::Kind::DoCrash;
                crash.start = crash_start(cfg.scenario);
                crash.duration = crash_end(cfg.scenario) - crash.start;
                crash.severity = cfg.scenario.crash_severity;
                inject_do_crash(*dox, crash);

                AnomalyInjection fouling;
                fouling.kind = AnomalyInjection::Kind::Biofouling;
                fouling.start = static_cast<Timestamp>(
                    std::llround(cfg.scenario.fouling_day * 86400.0));
                fouling.duration = static_cast<Timestamp>(
                    std::llround(cfg.scenario.fouling_days * 86400.0));
                fouling.severity = cfg.scenario.fouling_severity;
                inject_biofouling(*dox, fouling);
            }
            save_sensor_csv((fs::path(cfg.data_dir) / (id + ".csv")).string(), series);
            const TimeSeries& air = *std::find_if(
                series.begin(), series.end(),
                [](const TimeSeries& s) { return s.variable == Variable::AirTemp; });
            std::vector<ForecastIssue> issues = gen_air_forecast(
                air, cfg.scenario.forecast_error_std, cfg.seed * 1000003 + 9000 + i);
            save_forecast_csv((fs::path(cfg.data_dir) / (id + "_airfc.csv")).string(),
                              issues);
            files += 2;
        }
        std::cout << "synth: wrote " << files << " files for " << cfg.scenario.ponds
                  << " ponds x " << cfg.scenario.days << " days to " << cfg.data_dir
                  << "\n";
        return kExitOk;
    });
}

// ---- train -------------------------------------------------------------------

namespace {

json train_log_entry(const LrSearchResult& res) {
    return {{"lr", res.best_lr},
            {"best_val", res.best.best_val},
            {"best_epoch", res.best.best_epoch},
            {"epochs", res.best.val_history.size()},
            {"diverged", res.best.diverged}};
}

} // namespace

int cmd_train(const RunConfig& cfg) {
    return guarded([&]() -> int {
        cfg.validate();
        Corpus corpus = load_corpus(cfg);
        ensure_dir(cfg.model_dir);
        json log = json::object();
        bool any_diverged = false;

        auto train_forecaster = [&](const ForecastModelConfig& fc, const Dataset& ds,
                                    const std::string& ckpt, const std::string& key) {
            ForecastModel model(fc, cfg.seed);
            LossFn loss = [&model, &ds](Tape& tape, const VarMap& p, std::size_t i) {
                return model.loss(tape, p, ds.train[i]);
            };
            LrSearchResult res = lr_search([&] { return model.params(); },
                                           ds.train.size(), loss, cfg.train);
            save_forecast_checkpoint(ckpt, fc, res.best.params);
            log[key] = train_log_entry(res);
            any_diverged = any_diverged || res.best.diverged;
        };

        Dataset ds = build_dataset(cfg, corpus, Variable::Do, cfg.train_stride);
        if (ds.train.size() < 2) throw std::runtime_error("too few training windows");
        for (ModelKind kind : cfg.forecast_kinds) {
            for (bool proposed : {true, false}) {
                ForecastModelConfig fc;
                fc.kind = kind;
                fc.proposed = proposed;
                train_forecaster(fc, ds, forecast_ckpt_path(cfg, fc.name()), fc.name());
            }
        }
        for (Variable var : cfg.gauge_variables) {
            Dataset dsv = build_dataset(cfg, corpus, var, cfg.train_stride);
            ForecastModelConfig fc;
            fc.kind = ModelKind::ForecastNet;
            fc.proposed = true;
            train_forecaster(fc, dsv, gauge_ckpt_path(cfg, var),
                             "gauge_" + std::string(variable_name(var)));
        }

        // Detectors train on the same leave-one-out standardization.
        std::vector<Segment> train_segs;
        for (const std::string& id : corpus.sensors) {
            if (id == cfg.test_sensor()) continue;
            auto segs = standardized_segments(corpus, ds.standardizer, id, Variable::Do);
            train_segs.insert(train_segs.end(), segs.begin(), segs.end());
        }
        json thresholds = json::object();
        for (DetectorKind kind : cfg.detector_kinds) {
            DetectorConfig dc;
            dc.kind = kind;
            Detector det(dc, cfg.seed);
            bool reconstruct = dc.family() == DetectorFamily::Autoencoder;
            std::vector<UniWindow> windows = make_uni_windows(
                train_segs, dc.context(), dc.horizon(), reconstruct, cfg.train_stride);
            if (windows.size() < 2) throw std::runtime_error("too few detector windows");
            LossFn loss = [&det, &windows](Tape& tape, const VarMap& p, std::size_t i) {
                return det.loss(tape, p, windows[i]);
            };
            LrSearchResult res =
                lr_search([&] { return det.params(); }, windows.size(), loss, cfg.train);
            save_detector_checkpoint(detector_ckpt_path(cfg, kind), dc, res.best.params);
            log[dc.name()] = train_log_entry(res);
            any_diverged = any_diverged || res.best.diverged;

            Detector trained(dc, res.best.params);
            ScoreSeries scores = score(trained, train_segs, cfg.score_stride);
            std::vector<double> mses;
            mses.reserve(scores.size());
            for (const ScorePoint& sp : scores) mses.push_back(sp.mse);
            thresholds[dc.name()] = calibrate_threshold(mses, cfg.threshold_percentile);
        }

        write_text(thresholds_path(cfg), json{{"schema_version", kReportSchemaVersion},
                                              {"seed", cfg.seed},
                                              {"percentile", cfg.threshold_percentile},
                                              {"level_100", thresholds}}
                                             .dump(2) +
                                             "\n");
        write_text((fs::path(cfg.model_dir) / "train_log.json").string(),
                   json{{"schema_version", kReportSchemaVersion},
                        {"seed", cfg.seed},
                        {"models", log}}
                           .dump(2) +
                       "\n");
        std::cout << "train: " << log.size() << " models trained, checkpoints in "
                  << cfg.model_dir << (any_diverged ? " (divergence reported)" : "")
                  << "\n";
        return any_diverged ? kExitComputeError : kExitOk;
    });
}

// ---- eval --------------------------------------------------------------------

int cmd_eval(const RunConfig& cfg) {
    return guarded([&]() -> int {
        cfg.validate();
        Corpus corpus = load_corpus(cfg);
        ensure_dir(cfg.report_dir);
        Dataset ds = build_dataset(cfg, corpus, Variable::Do, cfg.eval_stride);
        if (ds.test.empty()) throw std::runtime_error("no test windows");

        EvalReport report;
        for (ModelKind kind : cfg.forecast_kinds) {
            for (bool proposed : {true, false}) {
                ForecastModelConfig fc;
                fc.kind = kind;
                fc.proposed = proposed;
                std::string path = forecast_ckpt_path(cfg, fc.name());
                require_checkpoint(path);
                ForecastModel model = load_forecast_checkpoint(path);
                EvalRow row =
                    evaluate_forecaster(model, ds.test, ds.standardizer, Variable::Do);
                row.model = fc.name();
                report.rows.push_back(row);
            }
        }

        json rows = json::array();
        for (const EvalRow& r : report.rows) {
            rows.push_back({{"model", r.model},
                            {"mape_mean", r.mape_mean},
                            {"mape_std", r.mape_std},
                            {"rmse_mean", r.rmse_mean},
                            {"rmse_std", r.rmse_std},
                            {"runtime_s", r.runtime_s}});
        }
        write_text((fs::path(cfg.report_dir) / "eval.json").string(),
                   json{{"schema_version", kReportSchemaVersion},
                        {"seed", cfg.seed},
                        {"target", variable_name(Variable::Do)},
                        {"test_windows", ds.test.size()},
                        {"rows", rows}}
                           .dump(2) +
                       "\n");

        std::ostringstream table;
        table << "Model            MAPE (%)             RMSE                 Runtime (s)\n";
        for (const EvalRow& r : report.rows) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-16s %8.3f +/- %-8.3f %8.3f +/- %-8.3f %10.3f\n",
                          r.model.c_str(), r.mape_mean, r.mape_std, r.rmse_mean,
                          r.rmse_std, r.runtime_s);
            table << line;
        }
        write_text((fs::path(cfg.report_dir) / "eval.txt").string(), table.str());
        std::cout << table.str();
        return kExitOk;
    });
}

// ---- detect ------------------------------------------------------------------

int cmd_detect(const RunConfig& cfg) {
    return guarded([&]() -> int {
        cfg.validate();
        Corpus corpus = load_corpus(cfg);
        ensure_dir(cfg.report_dir);
        Standardizer stdz = fit_standardizer(cfg, corpus);
        std::vector<Segment> segments =
            standardized_segments(corpus, stdz, cfg.test_sensor(), Variable::Do);
        std::vector<Segment> observed =
            impute(find_series(corpus, cfg.test_sensor(), Variable::Do));
        json thresholds = load_thresholds(cfg);

        Timestamp win_start = crash_start(cfg.scenario);
        Timestamp win_end = crash_end(cfg.scenario);

        json detectors = json::object();
        json leads = json::object();
        for (DetectorKind kind : cfg.detector_kinds) {
            std::string name = detector_kind_name(kind);
            std::string path = detector_ckpt_path(cfg, kind);
            require_checkpoint(path);
            Detector det = load_detector_checkpoint(path);
            ScoreSeries scores = score(det, segments, cfg.score_stride);

            std::ostringstream csv;
            csv << "timestamp,mse\n";
            for (const ScorePoint& sp : scores) {
                csv << format_iso8601(sp.t) << ',' << fmt_double(sp.mse) << '\n';
            }
            write_text((fs::path(cfg.report_dir) / ("scores_" + name + ".csv")).string(),
                       csv.str());

            double theta = thresholds.at(name).get<double>();
            double eff = cfg.level_fraction * theta;
            json evs = json::array();
            for (const AnomalyEvent& e : detect(scores, theta, cfg.level_fraction)) {
                evs.push_back({{"enter", format_iso8601(e.enter)},
                               {"exit", format_iso8601(e.exit)},
                               {"peak_mse", e.peak_mse}});
            }
            detectors[name] = {{"theta_max", theta},
                               {"threshold", eff},
                               {"events", evs}};

            if (cfg.scenario.inject) {
                const Segment* cover = nullptr;
                for (const Segment& seg : observed) {
                    Timestamp seg_end =
                        seg.start + static_cast<Timestamp>(seg.values.size()) * kStepSeconds;
                    if (seg.start <= win_start && win_end <= seg_end) cover = &seg;
                }
                std::optional<double> lt;
                if (cover) {
                    lt = lead_time(scores, eff, *cover, win_start, win_end);
                }
                leads[name] = lt ? json(*lt) : json(nullptr);
            }
        }

        write_text((fs::path(cfg.report_dir) / "events.json").string(),
                   json{{"schema_version", kReportSchemaVersion},
                        {"seed", cfg.seed},
                        {"level_fraction", cfg.level_fraction},
                        {"detectors", detectors}}
                           .dump(2) +
                       "\n");
        if (cfg.scenario.inject) {
            write_text((fs::path(cfg.report_dir) / "leadtime.json").string(),
                       json{{"schema_version", kReportSchemaVersion},
                            {"seed", cfg.seed},
                            {"window",
                             {{"start", format_iso8601(win_start)},
                              {"end", format_iso8601(win_end)}}},
                            {"lead_seconds", leads}}
                               .dump(2) +
                           "\n");
        }

        // Plot panel: the observed DO trace in physical units.
        std::ostringstream panel;
        panel << "timestamp,do\n";
        for (const Segment& seg : observed) {
            for (std::size_t i = 0; i < seg.values.size(); ++i) {
                panel << format_iso8601(seg.time_at(i)) << ','
                      << fmt_double(seg.values[i]) << '\n';
            }
        }
        write_text((fs::path(cfg.report_dir) / "do_panel.csv").string(), panel.str());
        std::cout << "detect: " << cfg.detector_kinds.size() << " detectors scored, reports in "
                  << cfg.report_dir << "\n";
        return kExitOk;
    });
}

// ---- pipeline ------------------------------------------------------------------

int cmd_pipeline(const RunConfig& cfg) {
    return guarded([&]() -> int {
        cfg.validate();
        Corpus corpus = load_corpus(cfg);
        ensure_dir(cfg.report_dir);
        Standardizer stdz = fit_standardizer(cfg, corpus);

        std::vector<ForecastModel> models;
        models.reserve(cfg.gauges.size());
        for (const GaugeConfig& g : cfg.gauges) {
            std::string path = g.spec.variable == Variable::Do
                                   ? forecast_ckpt_path(cfg, "proposed_fn")
                                   : gauge_ckpt_path(cfg, g.spec.variable);
            require_checkpoint(path);
            models.push_back(load_forecast_checkpoint(path));
        }
        std::string det_path = detector_ckpt_path(cfg, cfg.pipeline_detector);
        require_checkpoint(det_path);
        Detector det = load_detector_checkpoint(det_path);
        double theta =
            load_thresholds(cfg).at(detector_kind_name(cfg.pipeline_detector)).get<double>();

        // Aligned multivariate view of the test sensor.
        std::vector<SensorFrame> frames = build_frames(corpus.all);
        const SensorFrame* frame = nullptr;
        for (const SensorFrame& f : frames) {
            if (f.sensor_id == cfg.test_sensor()) frame = &f;
        }
        if (!frame) throw std::runtime_error("test sensor has no data");
        auto issues_it = corpus.issues.find(cfg.test_sensor());
        ExoProvider exo(issues_it == corpus.issues.end() ? std::vector<ForecastIssue>{}
                                                         : issues_it->second);
        std::vector<Segment> segments =
            standardized_segments(corpus, stdz, cfg.test_sensor(), Variable::Do);

        const std::size_t in_len = 192;
        const std::size_t out_len = 96;
        std::vector<double> weights;
        for (const GaugeConfig& g : cfg.gauges) weights.push_back(g.weight);

        std::ofstream out((fs::path(cfg.report_dir) / "pipeline.jsonl").string(),
                          std::ios::binary);
        if (!out) throw ConfigError("cannot write pipeline report");

        Timestamp t0 = frame->start + static_cast<Timestamp>(in_len) * kStepSeconds;
        std::size_t done = 0;
        std::string stop_reason = "completed";
        for (std::size_t tick = 0; tick < cfg.ticks; ++tick) {
            Timestamp now = t0 + static_cast<Timestamp>(tick) * 3600;
            auto wall0 = std::chrono::steady_clock::now();

            // Causality: only samples at or before the tick time are visible.
            std::size_t avail =
                static_cast<std::size_t>((now - frame->start) / kStepSeconds) + 1;
            if (avail > frame->length) {
                stop_reason = "data exhausted";
                break;
            }
            std::size_t lo = avail - in_len;
            bool complete = true;
            for (std::size_t r = lo; r < avail && complete; ++r) {
                for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
                    if (is_missing(frame->data(r, c))) complete = false;
                }
            }
            auto exo_vals = exo.exo_for(now + kStepSeconds, out_len);
            if (!complete || !exo_vals) {
                stop_reason = "data exhausted";
                break;
            }

            Tensor history = Tensor::zeros(in_len, kNumHistoryVariables);
            for (std::size_t r = 0; r < in_len; ++r) {
                for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
                    history(r, c) =
                        stdz.apply(kHistoryVariables[c], frame->data(lo + r, c));
                }
            }
            Tensor exo_col = Tensor::zeros(out_len, 1);
            for (std::size_t i = 0; i < out_len; ++i) {
                exo_col(i, 0) = stdz.apply(Variable::AirTemp, (*exo_vals)[i]);
            }

            json gauge_values = json::object();
            std::vector<GaugeReading> readings;
            for (std::size_t gi = 0; gi < cfg.gauges.size(); ++gi) {
                const GaugeSpec& spec = cfg.gauges[gi].spec;
                std::size_t col = 0;
                for (std::size_t c = 0; c < kNumHistoryVariables; ++c) {
                    if (kHistoryVariables[c] == spec.variable) col = c;
                }
                WindowPair w;
                w.history = history;
                w.exo = exo_col;
                w.target = Tensor::zeros(out_len, 1);
                w.last_target = history(in_len - 1, col);
                w.target_start = now + kStepSeconds;
                w.sensor = cfg.test_sensor();
                ForecastOutput fo = models[gi].predict(w);
                for (double& v : fo.mean) v = stdz.invert(spec.variable, v);
                GaugeReading r = state_gauge(fo, spec);
                readings.push_back(r);
                gauge_values[variable_name(spec.variable)] = r.value;
            }
            GaugeReading overall = overall_gauge(readings, weights);

            // Anomaly score over the latest fully observed detector window.
            const DetectorConfig& dc = det.config();
            std::size_t need = dc.context() + (dc.family() == DetectorFamily::Forecaster
                                                   ? dc.horizon()
                                                   : 0);
            double mse = 0.0;
            bool scored = false;
            for (const Segment& seg : segments) {
                std::size_t seg_avail = 0;
                if (now >= seg.start) {
                    seg_avail = std::min<std::size_t>(
                        seg.values.size(),
                        static_cast<std::size_t>((now - seg.start) / kStepSeconds) + 1);
                }
                if (seg_avail < need) continue;
                std::size_t off = seg_avail - need;
                UniWindow w;
                w.context = Tensor::zeros(dc.context(), 1);
                for (std::size_t i = 0; i < dc.context(); ++i) {
                    w.context(i, 0) = seg.values[off + i];
                }
                std::size_t h = dc.horizon();
                w.target = Tensor::zeros(h, 1);
                std::size_t toff = dc.family() == DetectorFamily::Forecaster
                                       ? off + dc.context()
                                       : off;
                for (std::size_t i = 0; i < h; ++i) w.target(i, 0) = seg.values[toff + i];
                w.scored_end = seg.time_at(off + need - 1);
                std::vector<double> pred = det.predict(w);
                double acc = 0.0;
                for (std::size_t i = 0; i < h; ++i) {
                    double d = pred[i] - w.target(i, 0);
                    acc += d * d;
                }
                mse = acc / static_cast<double>(h);
                scored = true;
            }

            double level = scored ? anomaly_level(mse, theta).value : 0.0;
            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - wall0)
                            .count();
            json line = {{"schema_version", kReportSchemaVersion},
                         {"tick", tick},
                         {"time", format_iso8601(now)},
                         {"gauges", gauge_values},
                         {"overall", overall.value},
                         {"anomaly_mse", scored ? json(mse) : json(nullptr)},
                         {"anomaly_level", level},
                         {"compute_ms", ms}};
            out << line.dump() << '\n';
            ++done;
        }
        out.close();
        std::cout << "pipeline: " << done << "/" << cfg.ticks << " ticks (" << stop_reason
                  << "), report in " << cfg.report_dir << "/pipeline.jsonl\n";
        return kExitOk;
    });
}

} // namespace aqua
