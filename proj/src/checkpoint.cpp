#include "aqua/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace aqua {

namespace {

using nlohmann::json;

const char* head_name(Head h) { return h == Head::Gaussian ? "gaussian" : "linear"; }

Head head_from_name(const std::string& s) {
    if (s == "gaussian") return Head::Gaussian;
    if (s == "linear") return Head::Linear;
    throw std::invalid_argument("checkpoint: unknown head " + s);
}

json params_to_json(const ParamSet& params) {
    json out = json::object();
    for (const auto& [name, t] : params.values()) {
        out[name] = {{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.data()}};
    }
    return out;
}

ParamSet params_from_json(const json& j, std::uint64_t seed) {
    ParamSet ps(seed);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const json& tj = it.value();
        Tensor t = Tensor::zeros(tj.at("rows").get<std::size_t>(),
                                 tj.at("cols").get<std::size_t>());
        auto data = tj.at("data").get<std::vector<double>>();
        if (data.size() != t.size()) {
            throw std::runtime_error("checkpoint: tensor size mismatch for " + it.key());
        }
        t.data() = std::move(data);
        ps.add(it.key(), std::move(t));
    }
    return ps;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path, const std::string& expect_type) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
    json j = json::parse(in);
    if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
        throw std::runtime_error("checkpoint: unsupported schema version in " + path);
    }
    if (j.at("type").get<std::string>() != expect_type) {
        throw std::runtime_error("checkpoint: wrong type in " + path);
    }
    return j;
}

} // namespace

void save_forecast_checkpoint(const std::string& path,
                              const ForecastModelConfig& cfg,
                              const ParamSet& params) {
    json j = {
        {"schema_version", kCheckpointSchemaVersion},
        {"type", "forecast"},
        {"seed", params.seed()},
        {"config",
         {{"kind", model_kind_name(cfg.kind)},
          {"proposed", cfg.proposed},
          {"head", head_name(cfg.head)},
          {"in_len", cfg.in_len},
          {"out_len", cfg.out_len},
          {"n_vars", cfg.n_vars},
          {"fn_layers", cfg.fn_layers},
          {"fn_units", cfg.fn_units},
          {"att_hidden", cfg.att_hidden},
          {"d_model", cfg.d_model},
          {"heads", cfg.heads},
          {"ff_units", cfg.ff_units}}},
        {"params", params_to_json(params)},
    };
    write_json(path, j);
}

ForecastModel load_forecast_checkpoint(const std::string& path) {
    json j = read_json(path, "forecast");
    const json& c = j.at("config");
    ForecastModelConfig cfg;
    cfg.kind = model_kind_from_name(c.at("kind").get<std::string>());
    cfg.proposed = c.at("proposed").get<bool>();
    cfg.head = head_from_name(c.at("head").get<std::string>());
    cfg.in_len = c.at("in_len").get<std::size_t>();
    cfg.out_len = c.at("out_len").get<std::size_t>();
    cfg.n_vars = c.at("n_vars").get<std::size_t>();
    cfg.fn_layers = c.at("fn_layers").get<std::size_t>();
    cfg.fn_units = c.at("fn_units").get<std::size_t>();
    cfg.att_hidden = c.at("att_hidden").get<std::size_t>();
    cfg.d_model = c.at("d_model").get<std::size_t>();
    cfg.heads = c.at("heads").get<std::size_t>();
    cfg.ff_units = c.at("ff_units").get<std::size_t>();
    return {cfg, params_from_json(j.at("params"), j.at("seed").get<std::uint64_t>())};
}

void save_detector_checkpoint(const std::string& path, const DetectorConfig& cfg,
                              const ParamSet& params) {
    json j = {
        {"schema_version", kCheckpointSchemaVersion},
        {"type", "detector"},
        {"seed", params.seed()},
        {"config",
         {{"kind", detector_kind_name(cfg.kind)},
          {"variable", variable_name(cfg.variable)},
          {"context_len", cfg.context_len},
          {"horizon_len", cfg.horizon_len},
          {"hidden", cfg.hidden},
          {"ae_hidden", cfg.ae_hidden},
          {"kernel", cfg.kernel},
          {"channels", cfg.channels},
          {"d_model", cfg.d_model},
          {"heads", cfg.heads},
          {"ff_units", cfg.ff_units},
          {"fn_layers", cfg.fn_layers},
          {"fn_units", cfg.fn_units}}},
        {"params", params_to_json(params)},
    };
    write_json(path, j);
}

Detector load_detector_checkpoint(const std::string& path) {
    json j = read_json(path, "detector");
    const json& c = j.at("config");
    DetectorConfig cfg;
    cfg.kind = detector_kind_from_name(c.at("kind").get<std::string>());
    cfg.variable = variable_from_name(c.at("variable").get<std::string>());
    cfg.context_len = c.at("context_len").get<std::size_t>();
    cfg.horizon_len = c.at("horizon_len").get<std::size_t>();
    cfg.hidden = c.at("hidden").get<std::size_t>();
    cfg.ae_hidden = c.at("ae_hidden").get<std::vector<std::size_t>>();
    cfg.kernel = c.at("kernel").get<std::size_t>();
    cfg.channels = c.at("channels").get<std::size_t>();
    cfg.d_model = c.at("d_model").get<std::size_t>();
    cfg.heads = c.at("heads").get<std::size_t>();
    cfg.ff_units = c.at("ff_units").get<std::size_t>();
    cfg.fn_layers = c.at("fn_layers").get<std::size_t>();
    cfg.fn_units = c.at("fn_units").get<std::size_t>();
    return {cfg, params_from_json(j.at("params"), j.at("seed").get<std::uint64_t>())};
}

} // namespace aqua
