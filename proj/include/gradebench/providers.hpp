#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gradebench/clock.hpp"
#include "gradebench/protocol.hpp"

namespace gradebench {

enum class WireFormat {
    OpenAiChat,
    AnthropicMessages,
    MistralChat,
    Mock,
};

const char* wire_format_name(WireFormat format);
std::optional<WireFormat> wire_format_from_name(std::string_view name);

/// Seeded generator knobs for the offline test double.
struct MockSettings {
    std::uint64_t seed = 0;
    double perturb_probability = 0.3;        // per grade, per shot, at temperature > 0
    double noncompliance_probability = 0.0;  // per shot, emits prose with no block
    double base_latency_s = 10.0;
    double latency_jitter = 0.5;       // latency in base * [1 - j, 1 + j)
    double outlier_probability = 0.0;  // per shot, multiplies latency by 20
};

struct ProviderConfig {
    std::string name;
    std::string base_url;
    std::string model_id;
    std::string api_key_env;
    WireFormat wire_format = WireFormat::Mock;
    int max_output_tokens = 1024;
    double request_timeout_s = 120.0;
    int transport_retries = 0;  // transport errors only; format noncompliance is never retried
    MockSettings mock;
};

struct CompletionResult {
    std::string text;
    double latency_s = 0.0;  // wall clock, request send to full response
    std::string provider;
    double temperature = 0.0;
    std::string request_id;
    std::string timestamp;
    std::optional<long long> prompt_tokens;
    std::optional<long long> completion_tokens;
};

/// Chat-completion client. Implementations are immutable after construction
/// and safe for concurrent use.
class Provider {
public:
    virtual ~Provider() = default;
    virtual const ProviderConfig& config() const = 0;
    /// One independent request; no implicit retry of malformed completions.
    virtual CompletionResult complete(const PromptBundle& prompt, double temperature) = 0;
};

// Request/response translation per vendor wire shape, kept as free functions
// so conformance tests can pin the bytes without a network.
namespace wire {

std::string endpoint_path(WireFormat format);
std::string build_request_body(const ProviderConfig& config, const PromptBundle& prompt,
                               double temperature);
std::vector<std::pair<std::string, std::string>> request_headers(const ProviderConfig& config,
                                                                 const std::string& api_key);

struct ParsedCompletion {
    std::string text;
    std::optional<long long> prompt_tokens;
    std::optional<long long> completion_tokens;
};

/// Throws ApiError when the body does not carry completion text where the
/// format says it must be.
ParsedCompletion parse_response_body(WireFormat format, const std::string& body);

}  // namespace wire

class HttpProvider final : public Provider {
public:
    explicit HttpProvider(ProviderConfig config, std::shared_ptr<Clock> clock = nullptr);
    const ProviderConfig& config() const override { return config_; }
    CompletionResult complete(const PromptBundle& prompt, double temperature) override;

private:
    ProviderConfig config_;
    std::string api_key_;
    std::shared_ptr<Clock> clock_;
};

/// Deterministic offline double. At temperature 0 the grade block depends
/// only on (seed, prompt); at temperature > 0 an internal per-prompt shot
/// counter perturbs grades by at most +/-1 with the configured probability.
/// Latency and noncompliance draws always advance with the shot counter so
/// timing statistics stay exercisable.
class MockProvider final : public Provider {
public:
    explicit MockProvider(ProviderConfig config, std::shared_ptr<Clock> clock = nullptr);
    const ProviderConfig& config() const override { return config_; }
    CompletionResult complete(const PromptBundle& prompt, double temperature) override;

    /// Resets shot counters; a fresh instance behaves identically.
    void reset();

private:
    ProviderConfig config_;
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    std::map<std::pair<std::uint64_t, long long>, std::uint64_t> shot_counters_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config,
                                        std::shared_ptr<Clock> clock = nullptr);

/// Stable digest of a prompt, also the mock generator's prompt key.
std::uint64_t prompt_hash(const PromptBundle& prompt);

void validate_temperature(double temperature);

}  // namespace gradebench
