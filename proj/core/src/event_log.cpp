#include "rfp/event_log.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace rfp {

std::string to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::Merchant:
      return "merchant";
    case ActorKind::Monitor:
      return "monitor";
    case ActorKind::Authority:
      return "authority";
    case ActorKind::Proxy:
      return "proxy";
    case ActorKind::Buyer:
      return "buyer";
  }
  return "unknown";
}

std::string ActorRef::name() const {
  if (kind == ActorKind::Proxy || kind == ActorKind::Buyer) return to_string(kind) + ":" + std::to_string(id);
  return to_string(kind);
}

const Event& EventLog::record(std::uint64_t tick, std::string protocol, int step, ActorRef from, ActorRef to,
                              std::string kind, std::string detail) {
  Event e;
  e.seq = events_.size();
  e.tick = tick;
  e.protocol = std::move(protocol);
  e.step = step;
  e.from = from;
  e.to = to;
  e.kind = std::move(kind);
  e.detail = std::move(detail);
  events_.push_back(std::move(e));
  return events_.back();
}

std::size_t EventLog::count_if(const std::function<bool(const Event&)>& pred) const {
  return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), pred));
}

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const auto& e : events_) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["tick"] = e.tick;
    j["protocol"] = e.protocol;
    j["step"] = e.step;
    j["from"] = e.from.name();
    j["to"] = e.to.name();
    j["kind"] = e.kind;
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace rfp
