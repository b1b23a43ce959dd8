#include "flows/message.hpp"

#include <stdexcept>

namespace flows {

Message::Message(MessageId id, Timestamp created_at, InstanceId created_by, Payload payload,
                 std::vector<MessageId> parents)
    : id_(std::move(id)),
      created_at_(created_at),
      created_by_(std::move(created_by)),
      payload_(std::move(payload)),
      parents_(std::move(parents)) {
  validate_payload(payload_);
}

const Value& Message::at(std::string_view key) const {
  const auto it = payload_.find(key);
  if (it == payload_.end()) throw std::out_of_range("message has no payload key '" + std::string(key) + "'");
  return it->second;
}

Value Message::to_value() const {
  Value parents = Value::array();
  for (const auto& p : parents_) parents.push_back(p.str());
  return Value{{"id", id_.str()},
               {"created_at", format_timestamp(created_at_)},
               {"created_by", created_by_.str()},
               {"parents", std::move(parents)},
               {"payload", flows::to_value(payload_)}};
}

Message Message::from_value(const Value& v) {
  std::vector<MessageId> parents;
  for (const auto& p : v.at("parents")) parents.emplace_back(p.get<std::string>());
  return Message(MessageId(v.at("id").get<std::string>()), parse_timestamp(v.at("created_at").get<std::string>()),
                 InstanceId(v.at("created_by").get<std::string>()), payload_from(v.at("payload")),
                 std::move(parents));
}

Message package_input(Payload payload, InstanceId created_by, std::vector<MessageId> parents) {
  return Message(next_message_id(), std::chrono::system_clock::now(), std::move(created_by), std::move(payload),
                 std::move(parents));
}

}  // namespace flows
