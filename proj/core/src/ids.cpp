#include "flows/ids.hpp"

#include <atomic>
#include <cctype>
#include <cstdint>
#include <random>

#include <fmt/format.h>

namespace flows {
namespace {

const std::string& session_tag() {
  static const std::string tag = [] {
    std::random_device rd;
    const std::uint64_t bits = (std::uint64_t{rd()} << 32) ^ rd();
    return fmt::format("{:012x}", bits & 0xffffffffffffULL);
  }();
  return tag;
}

std::string next_id(std::string_view prefix) {
  static std::atomic<std::uint64_t> counter{0};
  return fmt::format("{}-{}-{}", prefix, session_tag(), ++counter);
}

bool all_of(std::string_view s, int (*pred)(int)) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!pred(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

MessageId next_message_id() { return MessageId(next_id("msg")); }
InstanceId next_instance_id() { return InstanceId(next_id("flow")); }

bool looks_like_generated_id(std::string_view text) noexcept {
  std::string_view rest;
  if (text.starts_with("msg-")) {
    rest = text.substr(4);
  } else if (text.starts_with("flow-")) {
    rest = text.substr(5);
  } else {
    return false;
  }
  const auto dash = rest.find('-');
  if (dash != 12) return false;
  return all_of(rest.substr(0, 12), [](int c) { return std::isxdigit(c); }) &&
         all_of(rest.substr(13), [](int c) { return std::isdigit(c); });
}

}  // namespace flows
