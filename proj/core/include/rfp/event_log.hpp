#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rfp {

enum class ActorKind : std::uint8_t { Merchant, Monitor, Authority, Proxy, Buyer };

std::string to_string(ActorKind kind);

struct ActorRef {
  ActorKind kind = ActorKind::Monitor;
  std::uint32_t id = 0;

  static ActorRef merchant() { return {ActorKind::Merchant, 0}; }
  static ActorRef monitor() { return {ActorKind::Monitor, 0}; }
  static ActorRef authority() { return {ActorKind::Authority, 0}; }
  static ActorRef proxy(std::size_t id) { return {ActorKind::Proxy, static_cast<std::uint32_t>(id)}; }
  static ActorRef buyer(std::size_t id) { return {ActorKind::Buyer, static_cast<std::uint32_t>(id)}; }

  std::string name() const;
  friend bool operator==(const ActorRef&, const ActorRef&) = default;
};

// One message or state change. `protocol` names the protocol ("REG", "P1",
// "P2", "P3", "P4"); `step` is the step number within it.
struct Event {
  std::uint64_t seq = 0;
  std::uint64_t tick = 0;
  std::string protocol;
  int step = 0;
  ActorRef from;
  ActorRef to;
  std::string kind;
  std::string detail;
};

class EventLog {
 public:
  const Event& record(std::uint64_t tick, std::string protocol, int step, ActorRef from, ActorRef to,
                      std::string kind, std::string detail = {});

  const std::vector<Event>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  std::size_t count_if(const std::function<bool(const Event&)>& pred) const;

  // Newline-delimited JSON, one object per event.
  std::string to_ndjson() const;

 private:
  std::vector<Event> events_;
};

}  // namespace rfp
