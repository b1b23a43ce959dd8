#include "flows/value.hpp"

#include <charconv>
#include <stdexcept>

namespace flows {

bool is_reserved_key(std::string_view key) noexcept { return !key.empty() && key.front() == '_'; }

void validate_value(const Value& value) {
  switch (value.type()) {
    case Value::value_t::string:
    case Value::value_t::boolean:
    case Value::value_t::number_integer:
    case Value::value_t::number_unsigned:
    case Value::value_t::number_float:
      return;
    case Value::value_t::array:
      for (const auto& item : value) validate_value(item);
      return;
    case Value::value_t::object:
      for (const auto& [key, item] : value.items()) {
        if (key.empty()) throw std::invalid_argument("payload map contains an empty key");
        validate_value(item);
      }
      return;
    default:
      throw std::invalid_argument(std::string("unsupported payload value kind: ") + value.type_name());
  }
}

void validate_payload(const Payload& payload) {
  for (const auto& [key, value] : payload) {
    if (key.empty()) throw std::invalid_argument("payload key must be non-empty");
    try {
      validate_value(value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("payload key '" + key + "': " + e.what());
    }
  }
}

std::string canonical_dump(const Value& value) {
  // nlohmann::json keeps object members in a std::map, so dump() is already
  // key-sorted. Invalid UTF-8 is replaced rather than throwing.
  return value.dump(-1, ' ', false, Value::error_handler_t::replace);
}

Value to_value(const Payload& payload) {
  Value out = Value::object();
  for (const auto& [key, value] : payload) out[key] = value;
  return out;
}

Payload payload_from(const Value& object) {
  if (!object.is_object()) throw std::invalid_argument("payload must be a map");
  Payload out;
  for (const auto& [key, value] : object.items()) out.emplace(key, value);
  validate_payload(out);
  return out;
}

std::string text_form(const Value& value) {
  switch (value.type()) {
    case Value::value_t::string:
      return value.get<std::string>();
    case Value::value_t::boolean:
      return value.get<bool>() ? "true" : "false";
    case Value::value_t::number_integer:
      return std::to_string(value.get<std::int64_t>());
    case Value::value_t::number_unsigned:
      return std::to_string(value.get<std::uint64_t>());
    case Value::value_t::number_float: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value.get<double>());
      if (ec != std::errc{}) throw std::invalid_argument("cannot format number");
      return std::string(buf, end);
    }
    case Value::value_t::array: {
      std::string out;
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += '\n';
        out += text_form(item);
        first = false;
      }
      return out;
    }
    default:
      throw std::invalid_argument(std::string("value of kind ") + value.type_name() + " is not renderable as text");
  }
}

Payload strip_reserved(const Payload& payload) {
  Payload out;
  for (const auto& [key, value] : payload) {
    if (!is_reserved_key(key)) out.emplace(key, value);
  }
  return out;
}

void overlay(Payload& base, const Payload& top) {
  for (const auto& [key, value] : top) base.insert_or_assign(key, value);
}

}  // namespace flows
