#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

using Json = nlohmann::ordered_json;

Json to_json(const ParamSpec& param);
Json to_json(const ToolSpec& tool);
Json to_json(const Value& value);
Json to_json(const ToolCall& call);
Json to_json(const Step& step);
Json to_json(const Example& example);

ParamSpec param_from_json(const Json& j);
ToolSpec tool_from_json(const Json& j);
Value value_from_json(const Json& j);
ToolCall call_from_json(const Json& j);
Step step_from_json(const Json& j);
Example example_from_json(const Json& j);

Json steps_to_json(std::span<const Step> steps);
std::vector<Step> steps_from_json(const Json& j);

/// Writes one compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, std::span<const Json> lines);
std::vector<Json> read_jsonl(const std::filesystem::path& path);

void write_tools_jsonl(const std::filesystem::path& path, std::span<const ToolSpec> tools);
std::vector<ToolSpec> read_tools_jsonl(const std::filesystem::path& path);
void write_examples_jsonl(const std::filesystem::path& path, std::span<const Example> examples);
std::vector<Example> read_examples_jsonl(const std::filesystem::path& path);

/// Pretty-printed JSON document with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace toolrft
