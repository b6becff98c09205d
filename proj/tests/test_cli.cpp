#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("AQUA_CLI");
    REQUIRE_MESSAGE(p != nullptr, "AQUA_CLI must point at the built binary");
    return p;
}

const fs::path kWork = fs::temp_directory_path() / "aqua_cli_test";

int run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " > " + (kWork / "cmd.log").string() +
                      " 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing file " + p.string()).c_str());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Report comparison with wall-clock fields removed.
std::string strip_runtime(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("runtime_s") == std::string::npos &&
            line.find("compute_ms") == std::string::npos) {
            out << line << '\n';
        }
    }
    return out.str();
}

void write_config() {
    json cfg = {
        {"data_dir", (kWork / "data").string()},
        {"model_dir", (kWork / "models").string()},
        {"report_dir", (kWork / "reports").string()},
        {"seed", 11},
        {"scenario",
         {{"ponds", 2},
          {"days", 10},
          {"crash_day", 7.0},
          {"crash_hours", 12.0},
          {"fouling_day", 8.5},
          {"fouling_days", 1.0}}},
        {"train", {{"lr_grid", {1e-3}}, {"max_epochs", 1}, {"patience", 2}}},
        {"detector_kinds", {"deepAe", "forecastNet"}},
        {"pipeline_detector", "forecastNet"},
        {"train_stride", 192},
        {"eval_stride", 96},
        {"score_stride", 16},
        {"ticks", 4},
    };
    std::ofstream out(kWork / "config.json");
    out << cfg.dump(2) << '\n';
}

std::string cfg_arg() { return "--config " + (kWork / "config.json").string() + " "; }

} // namespace

TEST_CASE("cli runs the whole scenario end to end") {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write_config();

    // synth: files appear and a rerun is byte-identical
    REQUIRE(run(cfg_arg() + "synth") == 0);
    std::vector<std::string> data_files = {"pond0.csv", "pond0_airfc.csv", "pond1.csv",
                                           "pond1_airfc.csv"};
    std::vector<std::string> first;
    for (const auto& f : data_files) first.push_back(slurp(kWork / "data" / f));
    REQUIRE(run(cfg_arg() + "synth") == 0);
    for (std::size_t i = 0; i < data_files.size(); ++i) {
        CHECK(slurp(kWork / "data" / data_files[i]) == first[i]);
    }
    CHECK(run(cfg_arg() + "synth --out /proc/no_such_dir/deeper") == 2);

    // train: checkpoints, thresholds and the chosen learning rate
    REQUIRE(run(cfg_arg() + "train") == 0);
    for (const char* name : {"forecast_proposed_fn.json", "forecast_fn.json",
                             "forecast_proposed_att.json", "forecast_att.json",
                             "forecast_proposed_trans.json", "forecast_trans.json",
                             "detector_deepAe.json", "detector_forecastNet.json"}) {
        CHECK(fs::exists(kWork / "models" / name));
    }
    json log = json::parse(slurp(kWork / "models" / "train_log.json"));
    CHECK(log.at("schema_version").get<int>() == 1);
    for (const auto& [name, entry] : log.at("models").items()) {
        CHECK(entry.at("lr").get<double>() == 1e-3);
        CHECK_FALSE(entry.at("diverged").get<bool>());
    }
    json thresholds = json::parse(slurp(kWork / "models" / "thresholds.json"));
    CHECK(thresholds.at("level_100").at("deepAe").get<double>() > 0.0);
    CHECK(thresholds.at("level_100").at("forecastNet").get<double>() > 0.0);

    // eval: six rows (three kinds x two variants), positive runtimes,
    // deterministic modulo the wall-clock column
    REQUIRE(run(cfg_arg() + "eval") == 0);
    std::string eval1 = slurp(kWork / "reports" / "eval.json");
    json eval = json::parse(eval1);
    REQUIRE(eval.at("rows").size() == 6);
    for (const auto& row : eval.at("rows")) {
        CHECK(row.at("mape_mean").get<double>() >= 0.0);
        CHECK(row.at("runtime_s").get<double>() > 0.0);
    }
    REQUIRE(run(cfg_arg() + "eval") == 0);
    CHECK(strip_runtime(slurp(kWork / "reports" / "eval.json")) == strip_runtime(eval1));

    // detect: score series, events and lead-time summary; deterministic rerun
    REQUIRE(run(cfg_arg() + "detect") == 0);
    std::string events1 = slurp(kWork / "reports" / "events.json");
    json events = json::parse(events1);
    CHECK(events.at("detectors").contains("deepAe"));
    CHECK(events.at("detectors").contains("forecastNet"));
    std::string scores = slurp(kWork / "reports" / "scores_forecastNet.csv");
    CHECK(scores.rfind("timestamp,mse\n", 0) == 0);
    CHECK(std::count(scores.begin(), scores.end(), '\n') > 1);
    json leads = json::parse(slurp(kWork / "reports" / "leadtime.json"));
    CHECK(leads.at("lead_seconds").size() == 2);
    CHECK(fs::exists(kWork / "reports" / "do_panel.csv"));
    REQUIRE(run(cfg_arg() + "detect") == 0);
    CHECK(slurp(kWork / "reports" / "events.json") == events1);

    // pipeline: one report line per tick, monotone times, gauges in range
    REQUIRE(run(cfg_arg() + "pipeline") == 0);
    std::istringstream lines(slurp(kWork / "reports" / "pipeline.jsonl"));
    std::string line;
    std::size_t ticks = 0;
    std::string prev_time;
    while (std::getline(lines, line)) {
        json tick = json::parse(line);
        CHECK(tick.at("schema_version").get<int>() == 1);
        CHECK(tick.at("time").get<std::string>() > prev_time);
        prev_time = tick.at("time").get<std::string>();
        for (const auto& [var, v] : tick.at("gauges").items()) {
            CHECK(v.get<double>() >= 0.0);
            CHECK(v.get<double>() <= 100.0);
        }
        CHECK(tick.at("overall").get<double>() >= 0.0);
        CHECK(tick.at("overall").get<double>() <= 100.0);
        CHECK(tick.at("anomaly_level").get<double>() >= 0.0);
        CHECK(tick.at("anomaly_level").get<double>() <= 100.0);
        ++ticks;
    }
    CHECK(ticks == 4);
}

TEST_CASE("cli maps failures onto the documented exit codes") {
    fs::create_directories(kWork);

    // configuration / IO problems
    CHECK(run("--config /tmp/aqua_no_such_config.json synth") == 2);
    CHECK(run("bogus-subcommand") == 2);

    // computation problems: eval without checkpoints (data from the
    // previous case is still in place)
    fs::path empty = kWork / "empty_models";
    fs::remove_all(empty);
    fs::create_directories(empty);
    json cfg = json::parse(slurp(kWork / "config.json"));
    cfg["model_dir"] = empty.string();
    std::ofstream(kWork / "config_nockpt.json") << cfg.dump(2) << '\n';
    CHECK(run("--config " + (kWork / "config_nockpt.json").string() + " eval") == 1);
}

TEST_CASE("config show dumps a complete default configuration") {
    fs::create_directories(kWork);
    REQUIRE(run("config show") == 0);
    json cfg = json::parse(slurp(kWork / "cmd.log"));
    CHECK(cfg.at("seed").get<std::uint64_t>() == 7);
    CHECK(cfg.at("detector_kinds").size() == 8);
    CHECK(cfg.at("gauges").size() == 4);
    CHECK(cfg.at("train").at("lr_grid").size() == 5);
}
