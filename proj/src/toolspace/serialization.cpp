#include "toolrft/toolspace/serialization.hpp"

#include <fstream>
#include <sstream>

#include "toolrft/error.hpp"

namespace toolrft {
namespace {

// Enum types travel in the "type" field as `enum[a,b,c]`.
std::string type_field(const ParamSpec& p) {
  if (p.type != ParamType::Enum) return std::string(to_string(p.type));
  std::string out = "enum[";
  for (std::size_t i = 0; i < p.enum_values.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += p.enum_values[i];
  }
  out.push_back(']');
  return out;
}

void parse_type_field(const std::string& s, ParamSpec& p) {
  if (s == "string") { p.type = ParamType::String; return; }
  if (s == "integer") { p.type = ParamType::Integer; return; }
  if (s == "number") { p.type = ParamType::Number; return; }
  if (s == "boolean") { p.type = ParamType::Boolean; return; }
  if (s.size() > 6 && s.starts_with("enum[") && s.back() == ']') {
    p.type = ParamType::Enum;
    std::string body = s.substr(5, s.size() - 6);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) p.enum_values.push_back(item);
    return;
  }
  throw PreconditionError("unknown parameter type: " + s);
}

}  // namespace

Json to_json(const ParamSpec& param) {
  Json j;
  j["name"] = param.name;
  j["type"] = type_field(param);
  j["description"] = param.description;
  j["required"] = param.required;
  return j;
}

Json to_json(const ToolSpec& tool) {
  Json j;
  j["name"] = tool.name;
  j["description"] = tool.description;
  Json params = Json::array();
  for (const auto& p : tool.parameters) params.push_back(to_json(p));
  j["parameters"] = std::move(params);
  return j;
}

Json to_json(const Value& value) {
  return std::visit([](const auto& v) { return Json(v); }, value);
}

Json to_json(const ToolCall& call) {
  Json j;
  j["tool_name"] = call.tool_name;
  Json args = Json::object();
  for (const auto& a : call.arguments) args[a.name] = to_json(a.value);
  j["arguments"] = std::move(args);
  return j;
}

Json to_json(const Step& step) {
  Json j;
  j["kind"] = std::string(to_string(step.kind()));
  if (step.is_call()) j["call"] = to_json(step.as_call());
  if (step.is_text()) j["text"] = step.as_text();
  return j;
}

Json steps_to_json(std::span<const Step> steps) {
  Json arr = Json::array();
  for (const auto& s : steps) arr.push_back(to_json(s));
  return arr;
}

Json to_json(const Example& example) {
  Json j;
  j["id"] = example.id;
  j["query"] = example.query;
  Json tools = Json::array();
  for (const auto& t : example.tools) tools.push_back(to_json(t));
  j["tools"] = std::move(tools);
  j["gold"] = steps_to_json(example.gold);
  return j;
}

ParamSpec param_from_json(const Json& j) {
  ParamSpec p;
  p.name = j.at("name").get<std::string>();
  parse_type_field(j.at("type").get<std::string>(), p);
  p.description = j.value("description", std::string());
  p.required = j.value("required", true);
  return p;
}

ToolSpec tool_from_json(const Json& j) {
  ToolSpec t;
  t.name = j.at("name").get<std::string>();
  t.description = j.value("description", std::string());
  for (const auto& p : j.at("parameters")) t.parameters.push_back(param_from_json(p));
  return t;
}

Value value_from_json(const Json& j) {
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number_integer()) return Value(j.get<std::int64_t>());
  if (j.is_number_float()) return Value(j.get<double>());
  if (j.is_string()) return Value(j.get<std::string>());
  throw PreconditionError("unsupported argument value: " + j.dump());
}

ToolCall call_from_json(const Json& j) {
  ToolCall c;
  c.tool_name = j.at("tool_name").get<std::string>();
  for (const auto& [key, val] : j.at("arguments").items()) {
    c.arguments.push_back(Argument{key, value_from_json(val)});
  }
  return c;
}

Step step_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "call") return Step::call(call_from_json(j.at("call")));
  if (kind == "text") return Step::text(j.at("text").get<std::string>());
  if (kind == "refuse") return Step::refuse();
  if (kind == "terminal") return Step::terminal();
  throw PreconditionError("unknown step kind: " + kind);
}

std::vector<Step> steps_from_json(const Json& j) {
  std::vector<Step> steps;
  for (const auto& s : j) steps.push_back(step_from_json(s));
  return steps;
}

Example example_from_json(const Json& j) {
  Example ex;
  ex.id = j.at("id").get<std::string>();
  ex.query = j.at("query").get<std::string>();
  for (const auto& t : j.at("tools")) ex.tools.push_back(tool_from_json(t));
  ex.gold = steps_from_json(j.at("gold"));
  return ex;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Json> lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& j : lines) out << j.dump() << '\n';
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(Json::parse(line));
  }
  return out;
}

void write_tools_jsonl(const std::filesystem::path& path, std::span<const ToolSpec> tools) {
  std::vector<Json> lines;
  for (const auto& t : tools) lines.push_back(to_json(t));
  write_jsonl(path, lines);
}

std::vector<ToolSpec> read_tools_jsonl(const std::filesystem::path& path) {
  std::vector<ToolSpec> tools;
  for (const auto& j : read_jsonl(path)) tools.push_back(tool_from_json(j));
  return tools;
}

void write_examples_jsonl(const std::filesystem::path& path, std::span<const Example> examples) {
  std::vector<Json> lines;
  for (const auto& e : examples) lines.push_back(to_json(e));
  write_jsonl(path, lines);
}

std::vector<Example> read_examples_jsonl(const std::filesystem::path& path) {
  std::vector<Example> examples;
  for (const auto& j : read_jsonl(path)) examples.push_back(example_from_json(j));
  return examples;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return Json::parse(in);
}

}  // namespace toolrft
