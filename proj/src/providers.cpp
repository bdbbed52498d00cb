#include "gradebench/providers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "gradebench/error.hpp"
#include "gradebench/hash.hpp"
#include "gradebench/http.hpp"

namespace gradebench {

const char* wire_format_name(WireFormat format) {
    switch (format) {
        case WireFormat::OpenAiChat: return "openai_chat";
        case WireFormat::AnthropicMessages: return "anthropic_messages";
        case WireFormat::MistralChat: return "mistral_chat";
        case WireFormat::Mock: return "mock";
    }
    return "mock";
}

std::optional<WireFormat> wire_format_from_name(std::string_view name) {
    if (name == "openai_chat") return WireFormat::OpenAiChat;
    if (name == "anthropic_messages") return WireFormat::AnthropicMessages;
    if (name == "mistral_chat") return WireFormat::MistralChat;
    if (name == "mock") return WireFormat::Mock;
    return std::nullopt;
}

void validate_temperature(double temperature) {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw Error(ErrorCode::InvalidArgument,
                    "temperature " + std::to_string(temperature) + " outside [0, 2]");
}

std::uint64_t prompt_hash(const PromptBundle& prompt) {
    std::uint64_t h = fnv1a64(prompt.system_text);
    h = fnv1a64("\x1e", h);
    return fnv1a64(prompt.user_text, h);
}

// ---------------------------------------------------------------------------
// Wire adapters
// ---------------------------------------------------------------------------

namespace wire {

std::string endpoint_path(WireFormat format) {
    switch (format) {
        case WireFormat::OpenAiChat:
        case WireFormat::MistralChat:
            return "/chat/completions";
        case WireFormat::AnthropicMessages:
            return "/messages";
        case WireFormat::Mock:
            return "/mock";
    }
    return "/mock";
}

std::string build_request_body(const ProviderConfig& config, const PromptBundle& prompt,
                               double temperature) {
    nlohmann::json body;
    switch (config.wire_format) {
        case WireFormat::OpenAiChat:
        case WireFormat::MistralChat:
            body["model"] = config.model_id;
            body["messages"] = {{{"role", "system"}, {"content", prompt.system_text}},
                                {{"role", "user"}, {"content", prompt.user_text}}};
            body["temperature"] = temperature;
            body["max_tokens"] = config.max_output_tokens;
            break;
        case WireFormat::AnthropicMessages:
            body["model"] = config.model_id;
            body["system"] = prompt.system_text;
            body["messages"] = {{{"role", "user"}, {"content", prompt.user_text}}};
            body["temperature"] = temperature;
            body["max_tokens"] = config.max_output_tokens;
            break;
        case WireFormat::Mock:
            throw Error(ErrorCode::InvalidArgument, "mock backend has no wire format");
    }
    return body.dump();
}

std::vector<std::pair<std::string, std::string>> request_headers(const ProviderConfig& config,
                                                                 const std::string& api_key) {
    std::vector<std::pair<std::string, std::string>> headers;
    switch (config.wire_format) {
        case WireFormat::OpenAiChat:
        case WireFormat::MistralChat:
            headers.emplace_back("Authorization", "Bearer " + api_key);
            break;
        case WireFormat::AnthropicMessages:
            headers.emplace_back("x-api-key", api_key);
            headers.emplace_back("anthropic-version", "2023-06-01");
            break;
        case WireFormat::Mock:
            break;
    }
    return headers;
}

namespace {

std::optional<long long> usage_field(const nlohmann::json& root, const char* outer,
                                     const char* inner) {
    if (root.contains(outer) && root[outer].is_object() && root[outer].contains(inner) &&
        root[outer][inner].is_number())
        return root[outer][inner].get<long long>();
    return std::nullopt;
}

}  // namespace

ParsedCompletion parse_response_body(WireFormat format, const std::string& body) {
    nlohmann::json root = nlohmann::json::parse(body, nullptr, false);
    if (root.is_discarded())
        throw Error(ErrorCode::ApiError, "response body is not JSON");

    ParsedCompletion parsed;
    switch (format) {
        case WireFormat::OpenAiChat:
        case WireFormat::MistralChat: {
            if (!root.contains("choices") || !root["choices"].is_array() || root["choices"].empty())
                throw Error(ErrorCode::ApiError, "response has no choices");
            const auto& msg = root["choices"][0];
            if (!msg.contains("message") || !msg["message"].contains("content") ||
                !msg["message"]["content"].is_string())
                throw Error(ErrorCode::ApiError, "choices[0].message.content missing");
            parsed.text = msg["message"]["content"].get<std::string>();
            parsed.prompt_tokens = usage_field(root, "usage", "prompt_tokens");
            parsed.completion_tokens = usage_field(root, "usage", "completion_tokens");
            break;
        }
        case WireFormat::AnthropicMessages: {
            if (!root.contains("content") || !root["content"].is_array() || root["content"].empty())
                throw Error(ErrorCode::ApiError, "response has no content blocks");
            const auto& block = root["content"][0];
            if (!block.contains("text") || !block["text"].is_string())
                throw Error(ErrorCode::ApiError, "content[0].text missing");
            parsed.text = block["text"].get<std::string>();
            parsed.prompt_tokens = usage_field(root, "usage", "input_tokens");
            parsed.completion_tokens = usage_field(root, "usage", "output_tokens");
            break;
        }
        case WireFormat::Mock:
            throw Error(ErrorCode::InvalidArgument, "mock backend has no wire format");
    }
    return parsed;
}

}  // namespace wire

// ---------------------------------------------------------------------------
// HttpProvider
// ---------------------------------------------------------------------------

HttpProvider::HttpProvider(ProviderConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()) {
    if (config_.wire_format == WireFormat::Mock)
        throw Error(ErrorCode::InvalidConfig, "HttpProvider cannot serve the mock format");
    if (config_.base_url.empty())
        throw Error(ErrorCode::ConfigError, "provider '" + config_.name + "' has no base_url");
    if (config_.request_timeout_s <= 0.0)
        throw Error(ErrorCode::InvalidConfig, "request_timeout must be > 0");
    if (config_.api_key_env.empty())
        throw Error(ErrorCode::ConfigError, "provider '" + config_.name + "' names no API key variable");
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
        throw Error(ErrorCode::ConfigError,
                    "environment variable '" + config_.api_key_env + "' is not set");
    api_key_ = key;
}

CompletionResult HttpProvider::complete(const PromptBundle& prompt, double temperature) {
    validate_temperature(temperature);

    HttpRequest req;
    req.base_url = config_.base_url;
    req.path = wire::endpoint_path(config_.wire_format);
    req.body = wire::build_request_body(config_, prompt, temperature);
    req.headers = wire::request_headers(config_, api_key_);
    req.timeout_s = config_.request_timeout_s;

    auto start = std::chrono::steady_clock::now();
    HttpResponse resp = http_post_json(req);
    auto end = std::chrono::steady_clock::now();

    if (resp.status < 200 || resp.status >= 300) {
        std::string excerpt = resp.body.substr(0, 200);
        throw Error(ErrorCode::ApiError,
                    "provider '" + config_.name + "' returned " + std::to_string(resp.status) +
                        ": " + excerpt,
                    resp.status == 429 || resp.status >= 500, resp.status);
    }

    auto parsed = wire::parse_response_body(config_.wire_format, resp.body);

    CompletionResult result;
    result.text = std::move(parsed.text);
    result.latency_s = std::chrono::duration<double>(end - start).count();
    result.provider = config_.name;
    result.temperature = temperature;
    result.request_id = resp.request_id;
    result.timestamp = clock_->now_utc();
    result.prompt_tokens = parsed.prompt_tokens;
    result.completion_tokens = parsed.completion_tokens;
    return result;
}

// ---------------------------------------------------------------------------
// MockProvider
// ---------------------------------------------------------------------------

namespace {

// All mock draws hash a readable key string; the acceptance oracle
// reimplements exactly this construction.
std::uint64_t mock_draw(std::uint64_t seed, std::uint64_t prompt_h, long long temp_milli,
                        const std::string& field) {
    std::string key = std::to_string(seed) + "|" + hex64(prompt_h) + "|" +
                      std::to_string(temp_milli) + "|" + field;
    return mix64(fnv1a64(key));
}

double mock_unit(std::uint64_t seed, std::uint64_t prompt_h, long long temp_milli,
                 const std::string& field) {
    return static_cast<double>(mock_draw(seed, prompt_h, temp_milli, field) >> 11) * 0x1.0p-53;
}

int clamp_grade(int v) { return std::clamp(v, 0, kGradeCount - 1); }

}  // namespace

MockProvider::MockProvider(ProviderConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()) {
    if (config_.wire_format != WireFormat::Mock)
        throw Error(ErrorCode::InvalidConfig, "MockProvider requires the mock format");
}

void MockProvider::reset() {
    std::lock_guard<std::mutex> lock(mutex_);
    shot_counters_.clear();
}

CompletionResult MockProvider::complete(const PromptBundle& prompt, double temperature) {
    validate_temperature(temperature);

    const std::uint64_t ph = prompt_hash(prompt);
    const long long temp_milli = std::llround(temperature * 1000.0);
    const MockSettings& m = config_.mock;

    std::uint64_t shot;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        shot = shot_counters_[{ph, temp_milli}]++;
    }
    const std::string shot_tag = "|" + std::to_string(shot);

    // Latency and the noncompliance draw advance with every shot at any
    // temperature; the grade block is shot-independent at temperature 0.
    double latency = m.base_latency_s *
                     (1.0 - m.latency_jitter +
                      2.0 * m.latency_jitter * mock_unit(m.seed, ph, temp_milli, "latency" + shot_tag));
    if (m.outlier_probability > 0.0 &&
        mock_unit(m.seed, ph, temp_milli, "spike" + shot_tag) < m.outlier_probability)
        latency *= 20.0;

    CompletionResult result;
    result.latency_s = latency;
    result.provider = config_.name;
    result.temperature = temperature;
    result.request_id = hex64(mock_draw(m.seed, ph, temp_milli, "reqid" + shot_tag));
    // Synthetic instant from the same draw stream; the shared clock stays
    // untouched so record timestamps do not depend on worker scheduling.
    result.timestamp = format_unix_utc(
        1704067200 + static_cast<std::int64_t>(mock_draw(m.seed, ph, temp_milli, "ts" + shot_tag) %
                                               31536000ULL));

    if (m.noncompliance_probability > 0.0 &&
        mock_unit(m.seed, ph, temp_milli, "noncompliant" + shot_tag) < m.noncompliance_probability) {
        result.text =
            "The student answer engages with the relevant parts of the material and shows a "
            "partial understanding of the topic. Overall it reads as a reasonable attempt that "
            "could be strengthened with more direct references to the source text.";
        return result;
    }

    // Base grades are a function of (seed, prompt) alone; temperature only
    // switches the per-shot perturbation on.
    EvaluationScores scores;
    int final_base = static_cast<int>(mock_draw(m.seed, ph, 0, "final") % kGradeCount);
    auto perturbed = [&](int base, const std::string& field) {
        if (temperature <= 0.0) return clamp_grade(base);
        if (mock_unit(m.seed, ph, temp_milli, "perturb:" + field + shot_tag) >= m.perturb_probability)
            return clamp_grade(base);
        int delta = (mock_draw(m.seed, ph, temp_milli, "delta:" + field + shot_tag) & 1) ? 1 : -1;
        return clamp_grade(base + delta);
    };
    for (auto p : kRubricParameters) {
        const std::string& name = rubric_parameter_name(p);
        int base = clamp_grade(final_base +
                               static_cast<int>(mock_draw(m.seed, ph, 0, "param:" + name) % 3) - 1);
        scores.per_parameter[p] = Grade{perturbed(base, name)};
    }
    scores.final_grade = Grade{perturbed(final_base, "final")};

    result.text =
        "Step-by-step review: each claim in the answer was checked against the numbered "
        "excerpts, every criterion was weighed in turn, and the chosen labels were verified "
        "against the scale before settling on the final grade.\n\n" +
        render_result_block(scores) + "\n";
    return result;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, std::shared_ptr<Clock> clock) {
    if (config.wire_format == WireFormat::Mock)
        return std::make_unique<MockProvider>(config, std::move(clock));
    return std::make_unique<HttpProvider>(config, std::move(clock));
}

}  // namespace gradebench
