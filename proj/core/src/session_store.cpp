#include "rfp/session_store.hpp"

#include <algorithm>

namespace rfp {

std::string to_string(SessionState s) {
  switch (s) {
    case SessionState::Available:
      return "available";
    case SessionState::Blocked:
      return "blocked";
    case SessionState::Removed:
      return "removed";
  }
  return "unknown";
}

bool SessionKeyStore::store(const SessionHandle& handle, const SessionKey& key, std::uint64_t now) {
  if (records_.contains(handle)) return false;
  SessionKeyRecord rec;
  rec.handle = handle;
  rec.key = key;
  rec.created = now;
  rec.history.push_back(SessionState::Available);
  records_.emplace(handle, std::move(rec));
  return true;
}

FetchResult SessionKeyStore::fetch(const SessionHandle& handle, ActorRef requester, std::uint64_t now) {
  FetchResult result;
  auto it = records_.find(handle);
  if (it == records_.end()) {
    result.observed = SessionState::Removed;
    result.detection = true;
    return result;
  }
  auto& rec = it->second;
  result.observed = rec.state;
  if (rec.state != SessionState::Available) {
    result.detection = true;
    result.earlier_fetcher = rec.fetched_by;
    return result;
  }
  result.key = rec.key;
  rec.state = SessionState::Blocked;
  rec.blocked_since = now;
  rec.fetched_by = requester;
  rec.history.push_back(SessionState::Blocked);
  purge_queue_.emplace(now + purge_delay_, handle);
  return result;
}

std::size_t SessionKeyStore::advance(std::uint64_t now) {
  std::size_t purged = 0;
  auto end = purge_queue_.upper_bound(now);
  for (auto it = purge_queue_.begin(); it != end; ++it) {
    auto& rec = records_.at(it->second);
    rec.state = SessionState::Removed;
    rec.key.fill(0);
    rec.history.push_back(SessionState::Removed);
    ++purged;
  }
  purge_queue_.erase(purge_queue_.begin(), end);
  return purged;
}

void SessionKeyStore::restore(SessionKeyRecord rec) {
  if (rec.state == SessionState::Blocked) purge_queue_.emplace(rec.blocked_since + purge_delay_, rec.handle);
  const auto handle = rec.handle;
  records_.insert_or_assign(handle, std::move(rec));
}

std::optional<SessionState> SessionKeyStore::state(const SessionHandle& handle) const {
  auto it = records_.find(handle);
  if (it == records_.end()) return std::nullopt;
  return it->second.state;
}

const SessionKeyRecord* SessionKeyStore::find(const SessionHandle& handle) const {
  auto it = records_.find(handle);
  return it == records_.end() ? nullptr : &it->second;
}

std::size_t SessionKeyStore::count(SessionState s) const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [s](const auto& kv) { return kv.second.state == s; }));
}

}  // namespace rfp
