#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace knowbench {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Error taxonomy. The CLI maps these onto distinct exit codes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFoundError : ValidationError {
    using ValidationError::ValidationError;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EndpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool replace_all(std::string& text, std::string_view from, std::string_view to);

// Shortest round-trip formatting; integral magnitudes keep one decimal
// ("500" -> "500.0") so displayed values match the benchmark's style.
std::string format_magnitude(double v);
// "60.0 kg" (unit omitted when empty).
std::string format_quantity(double v, std::string_view unit);

ordered_json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const ordered_json& doc, int indent = 2);

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& lines);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace knowbench
