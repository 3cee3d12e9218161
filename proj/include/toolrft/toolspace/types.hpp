#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace toolrft {

enum class ParamType { String, Integer, Number, Boolean, Enum };

std::string_view to_string(ParamType type);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::String;
  std::vector<std::string> enum_values;  // populated iff type == Enum
  std::string description;
  bool required = true;

  bool operator==(const ParamSpec&) const = default;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;

  const ParamSpec* find_param(std::string_view param_name) const;

  bool operator==(const ToolSpec&) const = default;
};

/// Literal argument value. Integers and reals are kept distinct so that
/// rendering round-trips; grading unifies them numerically.
using Value = std::variant<bool, std::int64_t, double, std::string>;

struct Argument {
  std::string name;
  Value value;

  bool operator==(const Argument&) const = default;
};

struct ToolCall {
  std::string tool_name;
  std::vector<Argument> arguments;  // ordered, names distinct

  const Value* find(std::string_view arg_name) const;

  bool operator==(const ToolCall&) const = default;
};

struct TextStep {
  std::string text;
  bool operator==(const TextStep&) const = default;
};
struct RefuseStep {
  bool operator==(const RefuseStep&) const = default;
};
struct TerminalStep {
  bool operator==(const TerminalStep&) const = default;
};

/// One unit of a response: a tool call, a sentence, a refusal or the end marker.
class Step {
 public:
  enum class Kind { Call = 0, Text = 1, Refuse = 2, Terminal = 3 };
  using Payload = std::variant<ToolCall, TextStep, RefuseStep, TerminalStep>;

  Step() : payload_(TerminalStep{}) {}

  static Step call(ToolCall c) { return Step(Payload(std::move(c))); }
  static Step text(std::string s) { return Step(Payload(TextStep{std::move(s)})); }
  static Step refuse() { return Step(Payload(RefuseStep{})); }
  static Step terminal() { return Step(Payload(TerminalStep{})); }

  Kind kind() const { return static_cast<Kind>(payload_.index()); }
  bool is_call() const { return kind() == Kind::Call; }
  bool is_text() const { return kind() == Kind::Text; }
  bool is_refuse() const { return kind() == Kind::Refuse; }
  bool is_terminal() const { return kind() == Kind::Terminal; }

  const ToolCall& as_call() const { return std::get<ToolCall>(payload_); }
  const std::string& as_text() const { return std::get<TextStep>(payload_).text; }
  const Payload& payload() const { return payload_; }

  bool operator==(const Step&) const = default;

 private:
  explicit Step(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

std::string_view to_string(Step::Kind kind);

struct Example {
  std::string id;
  std::string query;
  std::vector<ToolSpec> tools;
  std::vector<Step> gold;

  const ToolSpec* find_tool(std::string_view tool_name) const;
  /// True iff the gold response is a refusal (no applicable tool).
  bool is_irrelevance() const;
  std::size_t gold_call_count() const;

  bool operator==(const Example&) const = default;
};

/// Throws PreconditionError when a toolset breaks a ToolSpec invariant:
/// duplicate names, enum without values, malformed identifiers.
void validate_toolset(std::span<const ToolSpec> tools);

/// Throws PreconditionError when a call has duplicate argument names.
void validate_call(const ToolCall& call);

/// Throws PreconditionError when an example breaks an Example invariant.
void validate_example(const Example& example);

bool is_identifier(std::string_view s);

}  // namespace toolrft
