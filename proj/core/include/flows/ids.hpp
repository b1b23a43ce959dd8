#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace flows {

template <class Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;

 private:
  std::string value_;
};

struct MessageIdTag {};
struct InstanceIdTag {};

using MessageId = StrongId<MessageIdTag>;
using InstanceId = StrongId<InstanceIdTag>;

/// Fresh identifiers, unique within the process: "<prefix>-<session>-<n>".
/// The session tag is random per process so ids from separate processes
/// writing into one run directory do not collide.
MessageId next_message_id();
InstanceId next_instance_id();

/// True if `text` has the shape produced by next_message_id/next_instance_id.
bool looks_like_generated_id(std::string_view text) noexcept;

}  // namespace flows
