#include "knowbench/endpoint.hpp"

#include <cstdlib>

#include "httplib.h"

namespace knowbench {

ordered_json EndpointConfig::to_json() const {
    ordered_json j;
    j["type"] = type;
    if (!script.empty()) j["script"] = script;
    if (!base_url.empty()) j["base_url"] = base_url;
    j["model"] = model;
    j["auth_env"] = auth_env;
    j["max_concurrency"] = max_concurrency;
    j["timeout_ms"] = timeout_ms;
    return j;
}

EndpointConfig EndpointConfig::from_json(const json& j) {
    EndpointConfig c;
    c.type = j.value("type", c.type);
    c.script = j.value("script", c.script);
    c.base_url = j.value("base_url", c.base_url);
    c.model = j.value("model", c.model);
    c.auth_env = j.value("auth_env", c.auth_env);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    if (c.type != "mock" && c.type != "http")
        throw ConfigError("endpoint type must be \"mock\" or \"http\"");
    if (c.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    return c;
}

MockEndpoint::MockEndpoint(MockEndpoint&& other) noexcept
    : outputs_(std::move(other.outputs_)),
      oracle_(std::move(other.oracle_)),
      fail_ids_(std::move(other.fail_ids_)),
      throw_ids_(std::move(other.throw_ids_)),
      default_action_(std::move(other.default_action_)),
      label_(std::move(other.label_)),
      max_concurrency_(other.max_concurrency_),
      calls_(std::move(other.calls_)) {}

MockEndpoint MockEndpoint::from_json(const json& j) {
    MockEndpoint m;
    m.label_ = j.value("label", "mock");
    m.max_concurrency_ = j.value("max_concurrency", 4);
    if (j.contains("outputs")) {
        for (auto it = j["outputs"].begin(); it != j["outputs"].end(); ++it)
            m.outputs_[it.key()] = it.value().get<std::string>();
    }
    if (j.contains("oracle")) {
        for (auto it = j["oracle"].begin(); it != j["oracle"].end(); ++it)
            m.oracle_[it.key()] = it.value().get<std::vector<std::string>>();
    }
    if (j.contains("fail")) {
        for (const auto& id : j["fail"]) m.fail_ids_.insert(id.get<std::string>());
    }
    if (j.contains("throw")) {
        for (const auto& id : j["throw"]) m.throw_ids_.insert(id.get<std::string>());
    }
    m.default_action_ = j.value("default", "refuse");
    return m;
}

MockEndpoint MockEndpoint::from_file(const std::filesystem::path& path) {
    return from_json(load_json_file(path));
}

void MockEndpoint::set_output(const std::string& id, std::string text) {
    std::lock_guard lock(mutex_);
    outputs_[id] = std::move(text);
}

void MockEndpoint::set_oracle(const std::string& id, std::vector<std::string> golds) {
    std::lock_guard lock(mutex_);
    oracle_[id] = std::move(golds);
}

void MockEndpoint::add_fail(const std::string& id) {
    std::lock_guard lock(mutex_);
    fail_ids_.insert(id);
}

void MockEndpoint::add_throw(const std::string& id) {
    std::lock_guard lock(mutex_);
    throw_ids_.insert(id);
}

std::vector<std::string> MockEndpoint::call_log() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t MockEndpoint::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

std::string MockEndpoint::wrong_answer_text() { return "Final answer: [Xyzzyx]"; }

std::string MockEndpoint::send(const std::string& prompt) { return respond("", prompt); }

std::string MockEndpoint::send_for(const std::string& question_id, const std::string& prompt) {
    return respond(question_id, prompt);
}

std::string MockEndpoint::respond(const std::string& id, const std::string& prompt) {
    std::lock_guard lock(mutex_);
    calls_.push_back(id);
    if (throw_ids_.count(id)) throw EndpointError("mock endpoint scripted failure for " + id);
    if (auto it = outputs_.find(id); it != outputs_.end()) return it->second;
    if (fail_ids_.count(id)) return wrong_answer_text();
    if (auto it = oracle_.find(id); it != oracle_.end()) {
        const auto& golds = it->second;
        return "Final answer: [" + (golds.empty() ? std::string() : golds.front()) + "]";
    }
    if (default_action_ == "echo") return prompt;
    if (default_action_.rfind("fixed:", 0) == 0) return default_action_.substr(6);
    return "I don't know.";
}

HttpEndpoint::HttpEndpoint(EndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("http endpoint requires base_url");
    auto scheme_end = config_.base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("base_url must start with http:// or https://");
    auto path_start = config_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_part_ = config_.base_url;
    } else {
        host_part_ = config_.base_url.substr(0, path_start);
        path_part_ = config_.base_url.substr(path_start);
        while (!path_part_.empty() && path_part_.back() == '/') path_part_.pop_back();
    }
}

std::string HttpEndpoint::send(const std::string& prompt) {
    httplib::Client client(host_part_);
    client.set_connection_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    ordered_json body;
    body["model"] = config_.model;
    body["prompt"] = prompt;

    auto res = client.Post(path_part_ + "/complete", headers, body.dump(), "application/json");
    if (!res) throw EndpointError("endpoint unreachable: " + host_part_);
    if (res->status != 200)
        throw EndpointError("endpoint returned HTTP " + std::to_string(res->status));
    try {
        auto j = json::parse(res->body);
        return j.at("completion").get<std::string>();
    } catch (const std::exception& e) {
        throw EndpointError(std::string("bad endpoint response: ") + e.what());
    }
}

std::unique_ptr<ModelEndpoint> make_endpoint(const EndpointConfig& config) {
    if (config.type == "mock") {
        if (config.script.empty()) throw ConfigError("mock endpoint requires a script file");
        return std::make_unique<MockEndpoint>(MockEndpoint::from_file(config.script));
    }
    return std::make_unique<HttpEndpoint>(config);
}

}  // namespace knowbench
