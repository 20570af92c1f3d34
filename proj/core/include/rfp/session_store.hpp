#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rfp/crypto.hpp"
#include "rfp/event_log.hpp"

namespace rfp {

using SessionHandle = std::array<std::uint8_t, 16>;

enum class SessionState : std::uint8_t { Available, Blocked, Removed };

std::string to_string(SessionState s);

struct SessionKeyRecord {
  SessionHandle handle{};
  SessionKey key{};  // zeroed once removed
  SessionState state = SessionState::Available;
  std::uint64_t created = 0;
  std::uint64_t blocked_since = 0;
  std::optional<ActorRef> fetched_by;
  std::vector<SessionState> history;  // every state the record has been in
};

struct FetchResult {
  std::optional<SessionKey> key;
  SessionState observed = SessionState::Available;  // state found before the fetch
  bool detection = false;                           // the record was not available
  std::optional<ActorRef> earlier_fetcher;
};

// The monitor's temporary key database: records are blocked on their first
// fetch and removed `purge_delay` ticks later. Removed records remain as
// tombstones so that late fetches are still reported.
class SessionKeyStore {
 public:
  explicit SessionKeyStore(std::uint64_t purge_delay = 1) : purge_delay_(purge_delay) {}

  // False when the handle is already in use.
  bool store(const SessionHandle& handle, const SessionKey& key, std::uint64_t now);
  FetchResult fetch(const SessionHandle& handle, ActorRef requester, std::uint64_t now);
  // Removes blocked records whose delay has elapsed. Returns how many.
  std::size_t advance(std::uint64_t now);
  // Reinstates a persisted record, scheduling its purge if it is blocked.
  void restore(SessionKeyRecord rec);

  std::optional<SessionState> state(const SessionHandle& handle) const;
  const SessionKeyRecord* find(const SessionHandle& handle) const;
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t count(SessionState s) const;
  std::uint64_t purge_delay() const noexcept { return purge_delay_; }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [h, rec] : records_) f(rec);
  }

 private:
  std::uint64_t purge_delay_;
  std::map<SessionHandle, SessionKeyRecord> records_;
  std::multimap<std::uint64_t, SessionHandle> purge_queue_;  // due tick -> handle
};

}  // namespace rfp
