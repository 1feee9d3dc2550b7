#pragma once

// Persistence: schedule JSON, model checkpoints, dataset CSV, bias-report
// JSON and run manifests. Numbers are written with 17 significant digits so
// every load reproduces the stored doubles (and therefore model outputs)
// bit-identically. Artifacts are written atomically: content goes to
// <path>.partial first and is renamed into place on success.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omslab/data.hpp"
#include "omslab/metrics.hpp"
#include "omslab/numfmt.hpp"
#include "omslab/schedule.hpp"
#include "omslab/training.hpp"

namespace omslab {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

// ---------------------------------------------------------------- files ----

inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------- schedule ----

inline std::string schedule_to_json(const Schedule& s) {
    std::string out = "{\n  \"kind\": \"" + s.kind_name() + "\",\n  \"T\": " +
                      std::to_string(s.num_steps) + ",\n  \"params\": {";
    bool first = true;
    for (const auto& [k, v] : s.params) {
        if (!first) out += ", ";
        out += "\"" + k + "\": " + fmt_g17(v);
        first = false;
    }
    out += "},\n  \"betas\": [";
    for (std::size_t i = 0; i < s.betas.size(); ++i) {
        if (i) out += ", ";
        out += fmt_g17(s.betas[i]);
    }
    out += "]\n}\n";
    return out;
}

inline Schedule schedule_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Schedule s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind.rfind("rescaled(", 0) == 0 && kind.back() == ')') {
        s.rescaled = true;
        kind = kind.substr(9, kind.size() - 10);
    }
    if (kind == "linear")
        s.base_kind = Schedule::Kind::linear;
    else if (kind == "cosine")
        s.base_kind = Schedule::Kind::cosine;
    else if (kind == "ldm")
        s.base_kind = Schedule::Kind::ldm;
    else
        throw std::invalid_argument("schedule json: unknown kind '" + kind + "'");
    s.num_steps = j.at("T").get<int>();
    if (j.contains("params"))
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
            s.params[it.key()] = it.value().get<double>();
    s.betas = j.at("betas").get<std::vector<double>>();
    detail::finalize_from_betas(s);
    detail::validate_schedule(s);
    return s;
}

// ----------------------------------------------------------- checkpoints ----

namespace detail {

inline void append_matrix_json(std::string& out, const std::vector<double>& flat,
                               std::size_t rows, std::size_t cols) {
    out += "[";
    for (std::size_t r = 0; r < rows; ++r) {
        if (r) out += ",";
        out += "[";
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out += ",";
            out += fmt_g17(flat[r * cols + c]);
        }
        out += "]";
    }
    out += "]";
}

inline std::string net_to_json(const DenseNet& net) {
    std::string out = "{\"widths\": [";
    for (std::size_t i = 0; i < net.widths.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(net.widths[i]);
    }
    out += "], \"time_embed_dim\": " + std::to_string(net.time_embed_dim) +
           ", \"class_embed_dim\": " + std::to_string(net.class_embed_dim) +
           ", \"class_count\": " + std::to_string(net.class_count) +
           ", \"activation\": \"" + activation_name(net.activation) + "\"}";
    return out;
}

inline std::string weights_to_json(const DenseNet& net) {
    std::string out = "{\"layers\": [";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        if (l) out += ",";
        out += "{\"w\": ";
        append_matrix_json(out, net.weights[l], static_cast<std::size_t>(net.widths[l + 1]),
                           static_cast<std::size_t>(net.widths[l]));
        out += ", \"b\": [";
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            if (i) out += ",";
            out += fmt_g17(net.biases[l][i]);
        }
        out += "]}";
    }
    out += "], \"class_embed\": ";
    append_matrix_json(out, net.class_embed, static_cast<std::size_t>(net.class_count),
                       static_cast<std::size_t>(net.class_embed_dim));
    out += "}";
    return out;
}

inline DenseNet net_from_json(const nlohmann::json& arch, const nlohmann::json& weights,
                              std::size_t data_dim) {
    DenseNet net;
    net.data_dim = data_dim;
    net.time_embed_dim = arch.at("time_embed_dim").get<int>();
    net.class_embed_dim = arch.at("class_embed_dim").get<int>();
    net.class_count = arch.at("class_count").get<int>();
    std::string act = arch.at("activation").get<std::string>();
    if (act == "silu")
        net.activation = DenseNet::Activation::silu;
    else if (act == "relu")
        net.activation = DenseNet::Activation::relu;
    else
        throw std::invalid_argument("checkpoint: unknown activation '" + act + "'");
    net.widths = arch.at("widths").get<std::vector<int>>();
    require(net.widths.size() >= 2, "checkpoint: need at least input and output widths");
    require(net.widths.front() == static_cast<int>(net.input_width()),
            "checkpoint: input width inconsistent with embeddings");
    require(net.widths.back() == static_cast<int>(data_dim),
            "checkpoint: output width != data dim");
    const auto& layers = weights.at("layers");
    require(layers.size() == net.widths.size() - 1, "checkpoint: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t rows = static_cast<std::size_t>(net.widths[l + 1]);
        const std::size_t cols = static_cast<std::size_t>(net.widths[l]);
        const auto& w = layers[l].at("w");
        require(w.size() == rows, "checkpoint: weight row count mismatch");
        std::vector<double> flat;
        flat.reserve(rows * cols);
        for (const auto& row : w) {
            require(row.size() == cols, "checkpoint: weight column count mismatch");
            for (const auto& v : row) flat.push_back(v.get<double>());
        }
        net.weights.push_back(std::move(flat));
        auto b = layers[l].at("b").get<std::vector<double>>();
        require(b.size() == rows, "checkpoint: bias size mismatch");
        net.biases.push_back(std::move(b));
    }
    const auto& ce = weights.at("class_embed");
    require(ce.size() == static_cast<std::size_t>(net.class_count),
            "checkpoint: class embed row count mismatch");
    for (const auto& row : ce) {
        require(row.size() == static_cast<std::size_t>(net.class_embed_dim),
                "checkpoint: class embed column count mismatch");
        for (const auto& v : row) net.class_embed.push_back(v.get<double>());
    }
    return net;
}

inline std::string checkpoint_json(const std::string& kind, const std::string& pred_type,
                                   const DenseNet& net, const Schedule& sched) {
    std::string out = "{\n\"format_version\": 1,\n\"kind\": \"" + kind +
                      "\",\n\"pred_type\": \"" + pred_type + "\",\n\"data_dim\": " +
                      std::to_string(net.data_dim) + ",\n\"arch\": " + net_to_json(net) +
                      ",\n\"schedule\": ";
    out += schedule_to_json(sched);
    // schedule_to_json ends with a newline; keep the document tidy
    if (!out.empty() && out.back() == '\n') out.pop_back();
    out += ",\n\"weights\": " + weights_to_json(net) + "\n}\n";
    return out;
}

}  // namespace detail

inline std::string denoiser_to_json(const DenoiserModel& model) {
    return detail::checkpoint_json("denoiser", pred_type_name(model.pred_type),
                                   model.net, model.schedule);
}

inline std::string oms_to_json(const OmsModule& module) {
    return detail::checkpoint_json(
        "oms", module.target == TrainConfig::OmsTarget::v ? "v" : "x0", module.net,
        module.schedule);
}

struct LoadedCheckpoint {
    std::string kind;  // "denoiser" or "oms"
    DenoiserModel denoiser;
    OmsModule oms;
};

inline LoadedCheckpoint checkpoint_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    require(j.at("format_version").get<int>() == 1,
            "checkpoint: unsupported format version");
    LoadedCheckpoint loaded;
    loaded.kind = j.at("kind").get<std::string>();
    const std::size_t data_dim = j.at("data_dim").get<std::size_t>();
    Schedule sched = schedule_from_json(j.at("schedule").dump());
    DenseNet net = detail::net_from_json(j.at("arch"), j.at("weights"), data_dim);
    std::string pred = j.at("pred_type").get<std::string>();
    if (loaded.kind == "denoiser") {
        require(pred == "epsilon" || pred == "v",
                "checkpoint: denoiser pred_type must be epsilon or v");
        loaded.denoiser.net = std::move(net);
        loaded.denoiser.pred_type = pred == "epsilon" ? TrainConfig::PredType::epsilon
                                                      : TrainConfig::PredType::v;
        loaded.denoiser.schedule = std::move(sched);
    } else if (loaded.kind == "oms") {
        require(pred == "v" || pred == "x0",
                "checkpoint: oms pred_type must be v or x0");
        loaded.oms.net = std::move(net);
        loaded.oms.target =
            pred == "v" ? TrainConfig::OmsTarget::v : TrainConfig::OmsTarget::x0;
        loaded.oms.schedule = std::move(sched);
    } else {
        throw std::invalid_argument("checkpoint: unknown kind '" + loaded.kind + "'");
    }
    return loaded;
}

// ----------------------------------------------------------------- batch ----

inline std::string batch_to_csv(const Batch& batch) {
    std::string out = "class_id";
    for (std::size_t j = 1; j <= batch.dim; ++j) out += ",v" + std::to_string(j);
    out += "\n";
    for (const auto& item : batch.items) {
        out += std::to_string(item.class_id);
        for (double v : item.values) out += "," + fmt_g17(v);
        out += "\n";
    }
    return out;
}

inline Batch batch_from_csv(const std::string& text) {
    Batch batch;
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "batch csv: empty file");
    std::size_t dim = 0;
    for (char c : line)
        if (c == ',') ++dim;
    require(dim >= 1 && line.rfind("class_id", 0) == 0, "batch csv: bad header");
    batch.dim = dim;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Batch::Item item;
        item.values.reserve(dim);
        const char* p = line.c_str();
        char* end = nullptr;
        item.class_id = static_cast<int>(std::strtol(p, &end, 10));
        require(end != p, "batch csv: bad class id");
        p = end;
        for (std::size_t j = 0; j < dim; ++j) {
            require(*p == ',', "batch csv: expected comma");
            ++p;
            double v = std::strtod(p, &end);
            require(end != p, "batch csv: bad number");
            item.values.push_back(v);
            p = end;
        }
        batch.items.push_back(std::move(item));
    }
    require(!batch.items.empty(), "batch csv: no rows");
    return batch;
}

// ----------------------------------------------------------- bias report ----

inline std::string bias_report_to_json(const BiasReport& rep) {
    std::string out = "{\n  \"config_digest\": \"" + json_escape(rep.config_digest) +
                      "\",\n  \"n_generated\": " + std::to_string(rep.n_generated) +
                      ",\n  \"n_data\": " + std::to_string(rep.n_data) +
                      ",\n  \"global_wasserstein\": " + fmt_g17(rep.global_wasserstein) +
                      ",\n  \"per_class\": [";
    for (std::size_t i = 0; i < rep.per_class.size(); ++i) {
        const auto& pc = rep.per_class[i];
        if (i) out += ",";
        out += "\n    {\"class_id\": " + std::to_string(pc.class_id) +
               ", \"data_mean\": " + fmt_g17(pc.data_mean) +
               ", \"generated_mean\": " + fmt_g17(pc.generated_mean) +
               ", \"abs_error\": " + fmt_g17(pc.abs_error) +
               ", \"wasserstein_means\": " + fmt_g17(pc.wasserstein_means) + "}";
    }
    out += "\n  ]\n}\n";
    return out;
}

}  // namespace omslab
