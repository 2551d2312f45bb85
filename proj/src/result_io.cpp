#include "cpl/result_io.hpp"

#include <fstream>

#include <json.hpp>

namespace cpl {

using nlohmann::json;

namespace {

json params_to_json(const ParamVector13& w) {
    json j = json::object();
    for (std::size_t i = 0; i < kParamCount; ++i) j[std::string(kParamNames[i])] = w[i];
    return j;
}

ParamVector13 params_from_json(const json& j) {
    ParamVector13 w;
    for (std::size_t i = 0; i < kParamCount; ++i)
        w[i] = j.at(std::string(kParamNames[i])).get<double>();
    return w;
}

json array13_to_json(const std::array<double, kParamCount>& a) {
    json j = json::object();
    for (std::size_t i = 0; i < kParamCount; ++i) j[std::string(kParamNames[i])] = a[i];
    return j;
}

std::array<double, kParamCount> array13_from_json(const json& j) {
    std::array<double, kParamCount> a{};
    for (std::size_t i = 0; i < kParamCount; ++i)
        a[i] = j.at(std::string(kParamNames[i])).get<double>();
    return a;
}

} // namespace

void write_result(const std::filesystem::path& path, const ResultFile& r) {
    json j{
        {"schema_version", kResultSchemaVersion},
        {"format", "cpl-estimate-result"},
        {"label", r.label},
        {"data_file", r.data_file},
        {"init_mode", r.init_mode},
        {"weighting", r.weighting},
        {"seed", r.seed},
        {"optimizer",
         {{"learning_rate", r.learning_rate},
          {"max_iterations", r.max_iterations},
          {"batch_size", r.batch_size},
          {"perturb_frac", r.perturb_frac}}},
        {"fixed", r.fixed_params},
        {"ground_truth", params_to_json(r.ground_truth)},
        {"init", params_to_json(r.init)},
        {"estimate", params_to_json(r.estimate)},
        {"nmae", array13_to_json(r.nmae)},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"best_loss", r.best_loss},
        {"kink_iterations", r.kink_iterations},
        {"loss_trace", r.loss_trace},
    };
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ResultFile read_result(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        throw SchemaError("malformed result file: " + path.string());
    }
    ResultFile r;
    try {
        if (j.at("format").get<std::string>() != "cpl-estimate-result")
            throw SchemaError("not a result file: " + path.string());
        if (j.at("schema_version").get<int>() != kResultSchemaVersion)
            throw SchemaError("unsupported result schema in " + path.string());
        r.label = j.at("label").get<std::string>();
        r.data_file = j.at("data_file").get<std::string>();
        r.init_mode = j.at("init_mode").get<std::string>();
        r.weighting = j.at("weighting").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        const json& opt = j.at("optimizer");
        r.learning_rate = opt.at("learning_rate").get<double>();
        r.max_iterations = opt.at("max_iterations").get<std::size_t>();
        r.batch_size = opt.at("batch_size").get<std::size_t>();
        r.perturb_frac = opt.at("perturb_frac").get<double>();
        r.fixed_params = j.at("fixed").get<std::vector<std::string>>();
        r.ground_truth = params_from_json(j.at("ground_truth"));
        r.init = params_from_json(j.at("init"));
        r.estimate = params_from_json(j.at("estimate"));
        r.nmae = array13_from_json(j.at("nmae"));
        r.converged = j.at("converged").get<bool>();
        r.iterations = j.at("iterations").get<std::size_t>();
        r.best_loss = j.at("best_loss").get<double>();
        r.kink_iterations = j.at("kink_iterations").get<std::size_t>();
        r.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    } catch (const json::exception&) {
        throw SchemaError("result file missing required fields: " + path.string());
    }
    return r;
}

} // namespace cpl
