#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfp/code.hpp"
#include "rfp/crypto.hpp"
#include "rfp/event_log.hpp"
#include "rfp/fingerprint.hpp"
#include "rfp/session_store.hpp"
#include "rfp/transaction_db.hpp"

namespace rfp {

enum class ProxyBehavior : std::uint8_t {
  Honest,
  EarlyKeyFetch,  // fetches the session key by handle before the child does
  ForgeFragment,  // substitutes a forged encrypted segment in the group sent to the authority
};

struct SimConfig {
  std::size_t proxies_per_purchase = 5;
  std::size_t proxy_pool = 16;
  std::size_t relays_per_hop = 1;  // >1 chains proxies as pass-through relays
  std::uint32_t min_parents = 2;
  std::uint32_t max_parents = 4;
  std::uint64_t purge_delay = 1;  // ticks between blocking and removing a session record
  bool record_observations = true;
  Seed seed = 1;

  void validate() const;
};

// One content fragment as transferred between buyers: the segment bits
// (carried verbatim in place of a watermarked media fragment), the segment
// encrypted for the authority, and the sender's signature over both.
struct Fragment {
  std::uint32_t index = 0;
  BitVector payload;
  Bytes enc_segment;
  Bytes signer;
  Bytes signature;

  Bytes signed_message() const;
};

struct Buyer {
  std::size_t index = 0;
  std::uint32_t generation = 1;
  bool seed = false;
  std::optional<Pseudonym> pseudonym;  // seeds have none
  std::vector<std::size_t> parents;
  std::vector<Fragment> fragments;
  Fingerprint fingerprint;
};

struct BuyerRecord {
  Pseudonym pseudonym;
  std::string real_identity;
  Bytes agr;         // buyer's signature binding pseudonym and identity
  Bytes public_key;  // verifies agr
};

struct IdentityProof {
  Pseudonym pseudonym;
  std::string real_identity;
  Bytes agr;
  Bytes public_key;

  bool verify(std::string_view content_id) const;
};

Bytes agr_document(const Pseudonym& p, std::string_view identity, std::string_view content_id);

struct Observation {
  std::uint64_t tick = 0;
  std::string kind;  // "handle", "ciphertext", "enc_segment", "signature"
  Bytes data;
};

struct DetectionEvent {
  std::uint64_t tick = 0;
  SessionHandle handle{};
  ActorRef reporter;
  SessionState observed = SessionState::Blocked;
  std::optional<ActorRef> earlier_fetcher;
};

struct TransferOutcome {
  bool delivered = false;
  SessionHandle handle{};
  std::vector<Fragment> fragments;  // as decrypted by the child
  std::optional<DetectionEvent> detection;
};

// In-process simulation of the merchant, monitor, tracing authority, proxies
// and buyers. Actors run sequentially against one logical clock and every
// message is appended to the event log; a run is a pure function of the
// inputs and SimConfig::seed.
class Simulation {
 public:
  Simulation(SimConfig config, FullCode code, AuthorityKeyMaterial keys, PermutationKey sigma);

  // Distribution protocol steps 1-2: one seed buyer per codebook row.
  void bootstrap(std::string content_id, std::size_t seed_buyers);
  bool bootstrapped() const noexcept { return bootstrapped_; }

  // Merchant registration of a new buyer (outside the purchase protocols).
  std::size_t register_buyer(std::uint32_t generation);

  // Distribution protocol steps 3-10 for `child`, choosing parents among
  // buyers [0, eligible_parents). Returns the new register.
  const TransactionRegister& purchase(std::size_t child, std::size_t proxies, std::size_t eligible_parents);

  // Anonymous transfer of `segments` from parent to child through `proxy`.
  TransferOutcome transfer_set(std::size_t parent, std::size_t proxy, std::size_t child,
                               std::span<const std::uint32_t> segments);

  // Grows to `generations` generations, doubling the population each time.
  void grow_population(std::uint32_t generations);

  std::optional<Pseudonym> exact_lookup(const EncryptedFingerprint& enc) const;
  std::vector<IdentityProof> resolve_identity(std::span<const Pseudonym> pseudonyms) const;

  void set_proxy_behavior(std::size_t proxy, ProxyBehavior behavior);

  const SimConfig& config() const noexcept { return config_; }
  const FullCode& code() const noexcept { return code_; }
  const AuthorityKeyMaterial& keys() const noexcept { return keys_; }
  const PermutationKey& sigma() const noexcept { return sigma_; }
  const std::string& content_id() const noexcept { return content_id_; }
  Digest content_hash() const { return digest(content_id_); }
  std::uint32_t generations() const noexcept { return generations_; }
  std::uint64_t clock() const noexcept { return clock_; }

  const std::vector<Buyer>& buyers() const noexcept { return buyers_; }
  const Buyer& buyer(std::size_t i) const { return buyers_.at(i); }
  std::size_t seed_count() const noexcept { return seed_count_; }
  std::optional<std::size_t> buyer_of(const Pseudonym& p) const;

  const TransactionDatabase& database() const noexcept { return database_; }
  const SessionKeyStore& sessions() const noexcept { return sessions_; }
  const std::vector<BuyerRecord>& merchant_records() const noexcept { return merchant_; }
  const EventLog& log() const noexcept { return log_; }
  EventLog& log() noexcept { return log_; }
  const std::vector<Observation>& observations(std::size_t proxy) const { return observations_.at(proxy); }
  const std::vector<DetectionEvent>& detections() const noexcept { return detections_; }

  // Everything except code, keys and the transaction database, which are
  // persisted separately.
  Bytes serialize_state() const;
  static Simulation restore(SimConfig config, FullCode code, AuthorityKeyMaterial keys, PermutationKey sigma,
                            std::span<const std::uint8_t> state, TransactionDatabase database);

 private:
  std::uint64_t tick();
  void observe(std::size_t proxy, std::string kind, std::span<const std::uint8_t> data);
  SigningKey buyer_key(std::size_t buyer) const;
  SigningKey monitor_key() const;
  std::vector<std::size_t> relay_chain(std::size_t proxy) const;

  SimConfig config_;
  FullCode code_;
  AuthorityKeyMaterial keys_;
  PermutationKey sigma_;
  std::string content_id_;
  bool bootstrapped_ = false;
  std::uint32_t generations_ = 0;
  std::size_t seed_count_ = 0;
  std::uint64_t clock_ = 0;
  std::uint64_t transfer_counter_ = 0;

  std::vector<Buyer> buyers_;
  std::vector<BuyerRecord> merchant_;
  std::vector<std::optional<std::size_t>> merchant_index_;  // buyer -> merchant record
  TransactionDatabase database_;
  SessionKeyStore sessions_;
  EventLog log_;
  std::vector<ProxyBehavior> proxy_behavior_;
  std::vector<std::vector<Observation>> observations_;
  std::vector<DetectionEvent> detections_;
};

}  // namespace rfp
