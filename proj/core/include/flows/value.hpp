#pragma once

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace flows {

/// Payload values form a closed set: text, number, boolean, list, map.
/// The JSON representation is reused, but null and binary values are
/// rejected by validate_value().
using Value = nlohmann::json;

/// Message payloads and flow state stores. Keys are non-empty text.
using Payload = std::map<std::string, Value, std::less<>>;

/// Keys starting with '_' are reserved for the runtime (e.g. "_rounds_used").
inline constexpr std::string_view kRoundsUsedKey = "_rounds_used";

bool is_reserved_key(std::string_view key) noexcept;

/// Throws std::invalid_argument when the value (recursively) holds a kind
/// outside the closed set, or a map with an empty key.
void validate_value(const Value& value);

/// Throws std::invalid_argument naming the offending key.
void validate_payload(const Payload& payload);

/// Canonical byte serialization: sorted keys, compact separators, UTF-8.
std::string canonical_dump(const Value& value);

Value to_value(const Payload& payload);
Payload payload_from(const Value& object);

/// Text form used by template rendering: strings verbatim, integers in
/// decimal, floats in shortest round-trip form, booleans as true/false,
/// lists joined by newlines. Maps are not renderable (std::invalid_argument).
std::string text_form(const Value& value);

/// Copy of `payload` without reserved keys.
Payload strip_reserved(const Payload& payload);

/// Writes every entry of `top` into `base`, replacing existing keys.
void overlay(Payload& base, const Payload& top);

}  // namespace flows
