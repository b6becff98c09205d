#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "aqua/pipeline.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out_dir;
    double level = 0.0;
    bool has_level = false;
    std::size_t ticks = 0;
    bool has_ticks = false;
};

aqua::RunConfig make_config(const Overrides& o) {
    aqua::RunConfig cfg;
    if (!o.config_path.empty()) cfg = aqua::RunConfig::load(o.config_path);
    if (o.has_seed) {
        cfg.seed = o.seed;
        cfg.train.seed = o.seed;
    }
    if (o.has_level) cfg.level_fraction = o.level;
    if (o.has_ticks) cfg.ticks = o.ticks;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pond water-quality forecasting and anomaly monitoring"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration file");
    auto* seed_opt = app.add_option("--seed", o.seed, "Override the run seed");
    app.add_option("--out", o.out_dir, "Override the command's output directory");
    auto* level_opt =
        app.add_option("--level", o.level, "Anomaly level fraction of the calibrated max");
    auto* ticks_opt = app.add_option("--ticks", o.ticks, "Number of hourly pipeline ticks");

    auto* synth = app.add_subcommand("synth", "Generate the synthetic scenario CSVs");
    auto* train = app.add_subcommand("train", "Train forecasters and detectors");
    auto* eval = app.add_subcommand("eval", "Evaluate forecasters on the held-out pond");
    auto* detect = app.add_subcommand("detect", "Score detectors and extract events");
    auto* pipeline =
        app.add_subcommand("pipeline", "Run the simulated hourly monitoring loop");
    auto* config = app.add_subcommand("config", "Configuration utilities");
    auto* show = config->add_subcommand("show", "Print the effective configuration");
    config->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return aqua::kExitConfigError;
    }

    o.has_seed = seed_opt->count() > 0;
    o.has_level = level_opt->count() > 0;
    o.has_ticks = ticks_opt->count() > 0;

    aqua::RunConfig cfg;
    try {
        cfg = make_config(o);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return aqua::kExitConfigError;
    }

    if (synth->parsed()) {
        if (!o.out_dir.empty()) cfg.data_dir = o.out_dir;
        return aqua::cmd_synth(cfg);
    }
    if (train->parsed()) {
        if (!o.out_dir.empty()) cfg.model_dir = o.out_dir;
        return aqua::cmd_train(cfg);
    }
    if (eval->parsed()) {
        if (!o.out_dir.empty()) cfg.report_dir = o.out_dir;
        return aqua::cmd_eval(cfg);
    }
    if (detect->parsed()) {
        if (!o.out_dir.empty()) cfg.report_dir = o.out_dir;
        return aqua::cmd_detect(cfg);
    }
    if (pipeline->parsed()) {
        if (!o.out_dir.empty()) cfg.report_dir = o.out_dir;
        return aqua::cmd_pipeline(cfg);
    }
    if (show->parsed()) {
        std::cout << cfg.dump();
        return aqua::kExitOk;
    }
    return aqua::kExitConfigError;
}
