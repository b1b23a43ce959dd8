#pragma once

#include <vector>

#include "flows/date.hpp"
#include "flows/ids.hpp"
#include "flows/value.hpp"

namespace flows {

/// The sole unit of information exchanged between flows. Immutable once
/// constructed; copies are cheap enough for the payload sizes in play.
class Message {
 public:
  Message(MessageId id, Timestamp created_at, InstanceId created_by, Payload payload, std::vector<MessageId> parents);

  const MessageId& id() const noexcept { return id_; }
  Timestamp created_at() const noexcept { return created_at_; }
  const InstanceId& created_by() const noexcept { return created_by_; }
  const Payload& payload() const noexcept { return payload_; }
  const std::vector<MessageId>& parents() const noexcept { return parents_; }

  bool has(std::string_view key) const { return payload_.find(key) != payload_.end(); }
  /// Throws std::out_of_range naming the key.
  const Value& at(std::string_view key) const;

  /// {"id","created_at","created_by","parents","payload"}
  Value to_value() const;
  static Message from_value(const Value& v);

 private:
  MessageId id_;
  Timestamp created_at_;
  InstanceId created_by_;
  Payload payload_;
  std::vector<MessageId> parents_;
};

/// Wraps a payload into a fresh message (new id, current time).
/// Throws std::invalid_argument on an empty key or an unsupported value.
Message package_input(Payload payload, InstanceId created_by, std::vector<MessageId> parents);

}  // namespace flows
