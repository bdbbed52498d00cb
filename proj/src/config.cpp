#include "gradebench/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gradebench/error.hpp"

namespace gradebench {

namespace {

ProviderConfig provider_from_json(const nlohmann::json& j, const std::string& origin) {
    ProviderConfig p;
    if (!j.contains("name") || !j["name"].is_string())
        throw Error(ErrorCode::ConfigError, origin + ": provider entry missing 'name'");
    p.name = j["name"].get<std::string>();
    std::string format = j.value("wire_format", std::string("mock"));
    auto wf = wire_format_from_name(format);
    if (!wf)
        throw Error(ErrorCode::ConfigError,
                    origin + ": provider '" + p.name + "' has unknown wire_format '" + format + "'");
    p.wire_format = *wf;
    p.base_url = j.value("base_url", std::string());
    p.model_id = j.value("model_id", std::string());
    p.api_key_env = j.value("api_key_env", std::string());
    p.max_output_tokens = j.value("max_output_tokens", 1024);
    p.request_timeout_s = j.value("request_timeout_s", 120.0);
    p.transport_retries = j.value("transport_retries", 0);
    if (p.request_timeout_s <= 0.0)
        throw Error(ErrorCode::ConfigError, origin + ": provider '" + p.name + "' timeout must be > 0");
    if (j.contains("mock")) {
        const auto& m = j["mock"];
        p.mock.seed = m.value("seed", 0ULL);
        p.mock.perturb_probability = m.value("perturb_probability", 0.3);
        p.mock.noncompliance_probability = m.value("noncompliance_probability", 0.0);
        p.mock.base_latency_s = m.value("base_latency_s", 10.0);
        p.mock.latency_jitter = m.value("latency_jitter", 0.5);
        p.mock.outlier_probability = m.value("outlier_probability", 0.0);
    }
    return p;
}

nlohmann::json provider_to_json(const ProviderConfig& p) {
    nlohmann::json j;
    j["name"] = p.name;
    j["wire_format"] = wire_format_name(p.wire_format);
    if (!p.base_url.empty()) j["base_url"] = p.base_url;
    if (!p.model_id.empty()) j["model_id"] = p.model_id;
    if (!p.api_key_env.empty()) j["api_key_env"] = p.api_key_env;
    j["max_output_tokens"] = p.max_output_tokens;
    j["request_timeout_s"] = p.request_timeout_s;
    j["transport_retries"] = p.transport_retries;
    if (p.wire_format == WireFormat::Mock) {
        j["mock"] = {{"seed", p.mock.seed},
                     {"perturb_probability", p.mock.perturb_probability},
                     {"noncompliance_probability", p.mock.noncompliance_probability},
                     {"base_latency_s", p.mock.base_latency_s},
                     {"latency_jitter", p.mock.latency_jitter},
                     {"outlier_probability", p.mock.outlier_probability}};
    }
    return j;
}

}  // namespace

ProviderConfig provider_config_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "provider JSON is malformed");
    return provider_from_json(j, "<provider>");
}

HarnessConfig parse_config(const std::string& json_text, const std::string& origin) {
    nlohmann::json root = nlohmann::json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw Error(ErrorCode::ConfigError, origin + ": config is not a JSON object");

    HarnessConfig cfg;
    cfg.corpus_path = root.value("corpus", std::string("corpus.json"));
    cfg.cache_dir = root.value("cache_dir", std::string(".gradebench"));
    cfg.log_path = root.value("log", std::string("evaluations.jsonl"));
    cfg.out_dir = root.value("out_dir", std::string("report"));
    if (root.contains("template_dir")) cfg.template_dir = root["template_dir"].get<std::string>();

    if (root.contains("retrieval")) {
        const auto& r = root["retrieval"];
        cfg.retrieval.k = r.value("k", std::size_t{5});
        cfg.retrieval.chunk_size = r.value("chunk_size", std::size_t{500});
        cfg.retrieval.overlap = r.value("overlap", std::size_t{20});
        cfg.retrieval.widen_scope = r.value("widen_scope", false);
    }
    if (cfg.retrieval.k < 1) throw Error(ErrorCode::ConfigError, origin + ": retrieval.k must be >= 1");
    if (cfg.retrieval.overlap >= cfg.retrieval.chunk_size)
        throw Error(ErrorCode::ConfigError, origin + ": retrieval.overlap must be < chunk_size");

    if (root.contains("temperatures"))
        cfg.temperatures = root["temperatures"].get<std::vector<double>>();
    cfg.shots = root.value("shots", std::size_t{10});
    cfg.parallelism = root.value("parallelism", std::size_t{4});

    if (root.contains("embedder")) {
        const auto& e = root["embedder"];
        cfg.embedder.backend = e.value("backend", std::string("hash"));
        cfg.embedder.dimension = e.value("dimension", std::size_t{256});
        cfg.embedder.base_url = e.value("base_url", std::string());
        cfg.embedder.model = e.value("model", std::string());
        cfg.embedder.api_key_env = e.value("api_key_env", std::string());
        cfg.embedder.request_timeout_s = e.value("request_timeout_s", 120.0);
        if (cfg.embedder.backend != "hash" && cfg.embedder.backend != "remote")
            throw Error(ErrorCode::ConfigError,
                        origin + ": embedder.backend must be 'hash' or 'remote'");
    }
    if (root.contains("role")) {
        cfg.role.role = root["role"].value("role", cfg.role.role);
        cfg.role.level = root["role"].value("level", cfg.role.level);
    }
    if (root.contains("providers")) {
        for (const auto& j : root["providers"]) cfg.providers.push_back(provider_from_json(j, origin));
    }
    return cfg;
}

HarnessConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string config_to_json(const HarnessConfig& cfg) {
    nlohmann::json root;
    root["corpus"] = cfg.corpus_path.string();
    root["cache_dir"] = cfg.cache_dir.string();
    root["log"] = cfg.log_path.string();
    root["out_dir"] = cfg.out_dir.string();
    if (cfg.template_dir) root["template_dir"] = cfg.template_dir->string();
    root["retrieval"] = {{"k", cfg.retrieval.k},
                         {"chunk_size", cfg.retrieval.chunk_size},
                         {"overlap", cfg.retrieval.overlap},
                         {"widen_scope", cfg.retrieval.widen_scope}};
    root["temperatures"] = cfg.temperatures;
    root["shots"] = cfg.shots;
    root["parallelism"] = cfg.parallelism;
    root["embedder"] = {{"backend", cfg.embedder.backend}, {"dimension", cfg.embedder.dimension}};
    if (cfg.embedder.backend == "remote") {
        root["embedder"]["base_url"] = cfg.embedder.base_url;
        root["embedder"]["model"] = cfg.embedder.model;
        root["embedder"]["api_key_env"] = cfg.embedder.api_key_env;
        root["embedder"]["request_timeout_s"] = cfg.embedder.request_timeout_s;
    }
    root["role"] = {{"role", cfg.role.role}, {"level", cfg.role.level}};
    root["providers"] = nlohmann::json::array();
    for (const auto& p : cfg.providers) root["providers"].push_back(provider_to_json(p));
    return root.dump(2) + "\n";
}

}  // namespace gradebench
