#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradebench/protocol.hpp"
#include "gradebench/providers.hpp"
#include "gradebench/retrieval.hpp"

namespace gradebench {

struct EmbedderConfig {
    std::string backend = "hash";  // "hash" or "remote"
    std::size_t dimension = 256;   // hash backend
    std::string base_url;          // remote backend
    std::string model;
    std::string api_key_env;
    double request_timeout_s = 120.0;
};

struct HarnessConfig {
    std::filesystem::path corpus_path = "corpus.json";
    std::filesystem::path cache_dir = ".gradebench";
    std::filesystem::path log_path = "evaluations.jsonl";
    std::filesystem::path out_dir = "report";
    std::optional<std::filesystem::path> template_dir;  // builtin template when absent
    RetrievalConfig retrieval;
    std::vector<double> temperatures = {0.0, 0.5};
    std::size_t shots = 10;
    std::size_t parallelism = 4;
    EmbedderConfig embedder;
    PromptRole role;
    std::vector<ProviderConfig> providers;
};

HarnessConfig parse_config(const std::string& json_text, const std::string& origin = "<memory>");
HarnessConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const HarnessConfig& config);

ProviderConfig provider_config_from_json(const std::string& json_text);

}  // namespace gradebench
