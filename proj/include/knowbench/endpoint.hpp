#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "knowbench/util.hpp"

namespace knowbench {

struct EndpointConfig {
    std::string type = "mock";  // "mock" | "http"
    std::string script;         // mock: path to the script file
    std::string base_url;       // http: e.g. http://localhost:8080/v1
    std::string model = "mock";
    std::string auth_env = "KNOWBENCH_TOKEN";  // token env var, never a flag
    int max_concurrency = 4;
    int timeout_ms = 30000;

    ordered_json to_json() const;
    static EndpointConfig from_json(const json& j);
};

class ModelEndpoint {
public:
    virtual ~ModelEndpoint() = default;
    virtual std::string send(const std::string& prompt) = 0;
    // The harness passes the question id alongside the prompt so hermetic
    // mocks can answer from a script; network endpoints ignore it.
    virtual std::string send_for(const std::string& question_id, const std::string& prompt) {
        (void)question_id;
        return send(prompt);
    }
    virtual std::string label() const = 0;
    virtual int max_concurrency() const { return 4; }
};

// Deterministic scripted endpoint for hermetic runs. Script file schema:
// {
//   "label": "mock",
//   "outputs": {"<id>": "<verbatim completion>"},
//   "oracle":  {"<id>": ["gold", ...]},  // answered "Final answer: [gold0]"
//   "fail":    ["<id>", ...],            // answered with a wrong string
//   "throw":   ["<id>", ...],            // raises an endpoint error
//   "default": "refuse" | "echo" | "fixed:<text>"
// }
class MockEndpoint : public ModelEndpoint {
public:
    MockEndpoint() = default;
    MockEndpoint(MockEndpoint&& other) noexcept;
    MockEndpoint& operator=(MockEndpoint&&) = delete;
    static MockEndpoint from_json(const json& j);
    static MockEndpoint from_file(const std::filesystem::path& path);

    std::string send(const std::string& prompt) override;
    std::string send_for(const std::string& question_id, const std::string& prompt) override;
    std::string label() const override { return label_; }
    int max_concurrency() const override { return max_concurrency_; }

    void set_label(std::string label) { label_ = std::move(label); }
    void set_output(const std::string& id, std::string text);
    void set_oracle(const std::string& id, std::vector<std::string> golds);
    void add_fail(const std::string& id);
    void add_throw(const std::string& id);
    void set_default_action(std::string action) { default_action_ = std::move(action); }

    std::vector<std::string> call_log() const;
    std::size_t call_count() const;

    static std::string wrong_answer_text();

private:
    std::string respond(const std::string& id, const std::string& prompt);

    mutable std::mutex mutex_;
    std::map<std::string, std::string> outputs_;
    std::map<std::string, std::vector<std::string>> oracle_;
    std::set<std::string> fail_ids_;
    std::set<std::string> throw_ids_;
    std::string default_action_ = "refuse";
    std::string label_ = "mock";
    int max_concurrency_ = 4;
    std::vector<std::string> calls_;
};

// JSON-over-HTTP endpoint: POST <base_url>/complete with
// {"model": ..., "prompt": ...}, expecting {"completion": ...}. A bearer
// token is read from the configured environment variable when present.
class HttpEndpoint : public ModelEndpoint {
public:
    explicit HttpEndpoint(EndpointConfig config);

    std::string send(const std::string& prompt) override;
    std::string label() const override { return config_.model; }
    int max_concurrency() const override { return config_.max_concurrency; }

private:
    EndpointConfig config_;
    std::string host_part_;  // scheme://host[:port]
    std::string path_part_;  // leading path, may be empty
};

std::unique_ptr<ModelEndpoint> make_endpoint(const EndpointConfig& config);

}  // namespace knowbench
