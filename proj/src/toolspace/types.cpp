#include "toolrft/toolspace/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "toolrft/error.hpp"

namespace toolrft {

std::string_view to_string(ParamType type) {
  switch (type) {
    case ParamType::String: return "string";
    case ParamType::Integer: return "integer";
    case ParamType::Number: return "number";
    case ParamType::Boolean: return "boolean";
    case ParamType::Enum: return "enum";
  }
  return "string";
}

std::string_view to_string(Step::Kind kind) {
  switch (kind) {
    case Step::Kind::Call: return "call";
    case Step::Kind::Text: return "text";
    case Step::Kind::Refuse: return "refuse";
    case Step::Kind::Terminal: return "terminal";
  }
  return "terminal";
}

const ParamSpec* ToolSpec::find_param(std::string_view param_name) const {
  auto it = std::find_if(parameters.begin(), parameters.end(),
                         [&](const ParamSpec& p) { return p.name == param_name; });
  return it == parameters.end() ? nullptr : &*it;
}

const Value* ToolCall::find(std::string_view arg_name) const {
  auto it = std::find_if(arguments.begin(), arguments.end(),
                         [&](const Argument& a) { return a.name == arg_name; });
  return it == arguments.end() ? nullptr : &it->value;
}

const ToolSpec* Example::find_tool(std::string_view tool_name) const {
  auto it = std::find_if(tools.begin(), tools.end(),
                         [&](const ToolSpec& t) { return t.name == tool_name; });
  return it == tools.end() ? nullptr : &*it;
}

bool Example::is_irrelevance() const {
  return !gold.empty() && gold.front().is_refuse();
}

std::size_t Example::gold_call_count() const {
  return static_cast<std::size_t>(
      std::count_if(gold.begin(), gold.end(), [](const Step& s) { return s.is_call(); }));
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_';
  });
}

void validate_toolset(std::span<const ToolSpec> tools) {
  std::set<std::string_view> names;
  for (const auto& tool : tools) {
    if (!is_identifier(tool.name)) {
      throw PreconditionError("tool name is not an identifier: '" + tool.name + "'");
    }
    if (!names.insert(tool.name).second) {
      throw PreconditionError("duplicate tool name: " + tool.name);
    }
    std::set<std::string_view> params;
    for (const auto& p : tool.parameters) {
      if (!is_identifier(p.name)) {
        throw PreconditionError("parameter name is not an identifier: '" + p.name + "'");
      }
      if (!params.insert(p.name).second) {
        throw PreconditionError("duplicate parameter " + p.name + " in " + tool.name);
      }
      if (p.type == ParamType::Enum) {
        if (p.enum_values.empty()) {
          throw PreconditionError("enum parameter without values: " + tool.name + "." + p.name);
        }
        for (const auto& v : p.enum_values) {
          if (v.empty() || v.find_first_of(",[]") != std::string::npos) {
            throw PreconditionError("enum value must be non-empty without ',[]': " + v);
          }
        }
      } else if (!p.enum_values.empty()) {
        throw PreconditionError("enum values on non-enum parameter " + p.name);
      }
    }
  }
}

void validate_call(const ToolCall& call) {
  std::set<std::string_view> seen;
  for (const auto& arg : call.arguments) {
    if (!seen.insert(arg.name).second) {
      throw PreconditionError("duplicate argument name: " + arg.name);
    }
  }
}

void validate_example(const Example& example) {
  validate_toolset(example.tools);
  if (example.gold.empty()) throw PreconditionError("example " + example.id + ": empty gold");
  if (!example.gold.back().is_terminal()) {
    throw PreconditionError("example " + example.id + ": gold must end in a terminal step");
  }
  for (std::size_t i = 0; i + 1 < example.gold.size(); ++i) {
    if (example.gold[i].is_terminal()) {
      throw PreconditionError("example " + example.id + ": terminal step before the end");
    }
  }
  if (example.is_irrelevance()) {
    if (example.gold.size() != 2) {
      throw PreconditionError("example " + example.id + ": refusal gold must be [refuse, terminal]");
    }
    return;
  }
  for (const auto& step : example.gold) {
    if (step.is_refuse()) {
      throw PreconditionError("example " + example.id + ": refuse mixed with other steps");
    }
    if (!step.is_call()) continue;
    const auto& call = step.as_call();
    validate_call(call);
    if (example.find_tool(call.tool_name) == nullptr) {
      throw PreconditionError("example " + example.id + ": gold calls unknown tool " +
                              call.tool_name);
    }
  }
}

}  // namespace toolrft
