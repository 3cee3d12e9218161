#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "toolrft/toolspace/types.hpp"

namespace toolrft {

/// Parses `name(key=literal, ...)`. Literals are double-quoted, single-quoted
/// or typographically quoted strings, integers, reals, true and false.
/// Throws ParseError (with byte offset) on bad syntax or duplicate arguments.
ToolCall parse_tool_call(std::string_view text);

/// Canonical form: `name(k="v", n=3, x=0.5, b=true)`.
std::string render_tool_call(const ToolCall& call);

std::string render_value(const Value& value);

/// Length in bytes of the call expression starting at `pos` (an identifier
/// immediately followed by '('), with string literals protected. Throws
/// ParseError when the expression is malformed.
std::size_t scan_call_expression(std::string_view text, std::size_t pos);

}  // namespace toolrft
