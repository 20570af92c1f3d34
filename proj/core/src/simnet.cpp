#include "rfp/simnet.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

#include "rfp/error.hpp"

namespace rfp {
namespace {

constexpr std::uint32_t kStateVersion = 1;

void write_fragment(ByteWriter& w, const Fragment& f) {
  w.u32(f.index);
  w.bits(f.payload);
  w.blob(f.enc_segment);
  w.blob(f.signer);
  w.blob(f.signature);
}

Fragment read_fragment(ByteReader& r) {
  Fragment f;
  f.index = r.u32();
  f.payload = r.bits();
  f.enc_segment = r.blob();
  f.signer = r.blob();
  f.signature = r.blob();
  return f;
}

Bytes handle_bytes(const SessionHandle& h) { return {h.begin(), h.end()}; }

std::string short_hex(std::span<const std::uint8_t> bytes) {
  return to_hex(bytes.first(std::min<std::size_t>(bytes.size(), 8)));
}

Fingerprint assemble(const std::vector<Fragment>& fragments, std::size_t l0) {
  BitVector bits;
  for (const auto& f : fragments) bits.append(f.payload);
  return Fingerprint(fragments.size(), l0, std::move(bits));
}

}  // namespace

void SimConfig::validate() const {
  if (proxy_pool < 2) throw ParameterError("proxy_pool must be at least 2");
  if (relays_per_hop < 1 || relays_per_hop > proxy_pool) throw ParameterError("relays_per_hop out of range");
  if (min_parents < 2) throw ParameterError("min_parents must be at least 2");
  if (max_parents < min_parents) throw ParameterError("max_parents below min_parents");
}

Bytes Fragment::signed_message() const {
  ByteWriter w;
  w.magic("FRAG");
  w.u32(index);
  w.bits(payload);
  w.blob(enc_segment);
  return w.take();
}

Bytes agr_document(const Pseudonym& p, std::string_view identity, std::string_view content_id) {
  ByteWriter w;
  w.magic("AGR1");
  w.raw(p.bytes);
  w.str(identity);
  w.str(content_id);
  return w.take();
}

bool IdentityProof::verify(std::string_view content_id) const {
  return verify_signature(public_key, agr_document(pseudonym, real_identity, content_id), agr);
}

Simulation::Simulation(SimConfig config, FullCode code, AuthorityKeyMaterial keys, PermutationKey sigma)
    : config_(config),
      code_(std::move(code)),
      keys_(std::move(keys)),
      sigma_(std::move(sigma)),
      sessions_(config.purge_delay),
      proxy_behavior_(config.proxy_pool, ProxyBehavior::Honest),
      observations_(config.proxy_pool) {
  config_.validate();
  if (keys_.length() != code_.total_bits() || sigma_.size() != code_.total_bits()) {
    throw ParameterError("key material length does not match the code length");
  }
}

std::uint64_t Simulation::tick() {
  ++clock_;
  sessions_.advance(clock_);
  return clock_;
}

void Simulation::observe(std::size_t proxy, std::string kind, std::span<const std::uint8_t> data) {
  if (!config_.record_observations) return;
  observations_[proxy].push_back({clock_, std::move(kind), Bytes(data.begin(), data.end())});
}

SigningKey Simulation::buyer_key(std::size_t buyer) const {
  return SigningKey::from_seed(derive_seed(config_.seed, "buyer-key", buyer));
}

SigningKey Simulation::monitor_key() const { return SigningKey::from_seed(derive_seed(config_.seed, "merchant-key")); }

std::vector<std::size_t> Simulation::relay_chain(std::size_t proxy) const {
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i < config_.relays_per_hop; ++i) chain.push_back((proxy + i) % config_.proxy_pool);
  return chain;
}

void Simulation::set_proxy_behavior(std::size_t proxy, ProxyBehavior behavior) {
  proxy_behavior_.at(proxy) = behavior;
}

void Simulation::bootstrap(std::string content_id, std::size_t seed_buyers) {
  if (bootstrapped_) throw ConfigError("content '" + content_id_ + "' is already bootstrapped");
  const auto& params = code_.params();
  if (seed_buyers != params.num_codewords) {
    throw ParameterError("seed buyer count " + std::to_string(seed_buyers) + " differs from M = " +
                         std::to_string(params.num_codewords));
  }
  if (seed_buyers < 2) throw ParameterError("recombination needs at least two seed buyers");

  content_id_ = std::move(content_id);
  const auto signer = monitor_key();
  const auto pk = keys_.public_key();
  Rng rng(derive_seed(config_.seed, "bootstrap"));

  tick();
  log_.record(clock_, "P1", 1, ActorRef::merchant(), ActorRef::merchant(), "generate_seed_copies",
              "M=" + std::to_string(seed_buyers) + " n_s=" + std::to_string(code_.num_segments()));
  for (std::size_t i = 0; i < seed_buyers; ++i) {
    Buyer b;
    b.index = i;
    b.generation = 1;
    b.seed = true;
    b.fingerprint = seed_fingerprint(code_, i);
    b.fragments.reserve(code_.num_segments());
    for (std::size_t j = 0; j < code_.num_segments(); ++j) {
      Fragment f;
      f.index = static_cast<std::uint32_t>(j);
      f.payload = b.fingerprint.segment(j);
      f.enc_segment = encrypt_segment(f.payload, pk, rng);
      f.signer = signer.public_key();
      f.signature = signer.sign(f.signed_message());
      b.fragments.push_back(std::move(f));
    }
    buyers_.push_back(std::move(b));
    merchant_index_.push_back(std::nullopt);
    tick();
    log_.record(clock_, "P1", 2, ActorRef::merchant(), ActorRef::buyer(i), "seed_copy",
                std::to_string(code_.num_segments()) + " fragments");
  }
  seed_count_ = seed_buyers;
  generations_ = 1;
  bootstrapped_ = true;
}

std::size_t Simulation::register_buyer(std::uint32_t generation) {
  const std::size_t idx = buyers_.size();
  Rng rng(derive_seed(config_.seed, "pseudonym", idx));
  BuyerRecord rec;
  do {
    rng.fill(rec.pseudonym.bytes.data(), rec.pseudonym.bytes.size());
  } while (std::any_of(merchant_.begin(), merchant_.end(),
                       [&](const BuyerRecord& o) { return o.pseudonym == rec.pseudonym; }));
  rec.real_identity = "buyer-" + std::to_string(idx);
  const auto key = buyer_key(idx);
  rec.public_key = key.public_key();
  rec.agr = key.sign(agr_document(rec.pseudonym, rec.real_identity, content_id_));

  Buyer b;
  b.index = idx;
  b.generation = generation;
  b.pseudonym = rec.pseudonym;
  buyers_.push_back(std::move(b));
  merchant_index_.push_back(merchant_.size());

  tick();
  log_.record(clock_, "REG", 1, ActorRef::buyer(idx), ActorRef::merchant(), "register", rec.pseudonym.hex());
  merchant_.push_back(std::move(rec));
  return idx;
}

TransferOutcome Simulation::transfer_set(std::size_t parent, std::size_t proxy, std::size_t child,
                                         std::span<const std::uint32_t> segments) {
  if (parent >= buyers_.size() || child >= buyers_.size()) throw LookupError("unknown buyer in transfer");
  if (proxy >= config_.proxy_pool) throw LookupError("unknown proxy " + std::to_string(proxy));
  const auto& source = buyers_[parent];
  for (auto j : segments) {
    if (j >= source.fragments.size()) throw StateError("parent does not hold fragment " + std::to_string(j));
  }
  Rng rng(derive_seed(config_.seed, "transfer", transfer_counter_++));
  const auto chain = relay_chain(proxy);
  const auto from = ActorRef::buyer(parent);
  const auto to = ActorRef::buyer(child);
  TransferOutcome out;

  // Steps 1-3: the parent picks K and a fresh handle r and deposits (r, K) at MO.
  SessionKey key;
  rng.fill(key.data(), key.size());
  // A transfer occupies one tick, so a purge scheduled by a fetch during it
  // cannot fire before the child's own fetch.
  tick();
  log_.record(clock_, "P2", 1, from, from, "choose_session_key");
  do {
    rng.fill(out.handle.data(), out.handle.size());
  } while (!sessions_.store(out.handle, key, clock_));
  const auto handle = handle_bytes(out.handle);
  log_.record(clock_, "P2", 2, from, ActorRef::monitor(), "store_key", to_hex(handle));

  // Step 4: r travels through the proxy chain.
  for (std::size_t hop = 0; hop < chain.size(); ++hop) {
    const auto p = chain[hop];
    log_.record(clock_, "P2", 3, hop == 0 ? from : ActorRef::proxy(chain[hop - 1]), ActorRef::proxy(p), "handle",
                to_hex(handle));
    observe(p, "handle", handle);
    if (proxy_behavior_[p] == ProxyBehavior::EarlyKeyFetch) {
      auto stolen = sessions_.fetch(out.handle, ActorRef::proxy(p), clock_);
      log_.record(clock_, "P2", 4, ActorRef::proxy(p), ActorRef::monitor(), "fetch_key", to_hex(handle));
      if (stolen.key) observe(p, "session_key", *stolen.key);
    }
  }
  log_.record(clock_, "P2", 4, ActorRef::proxy(chain.back()), to, "handle", to_hex(handle));

  // Step 5-6: the child fetches K; MO blocks the record on first fetch.
  auto fetched = sessions_.fetch(out.handle, to, clock_);
  log_.record(clock_, "P2", 5, to, ActorRef::monitor(), "fetch_key", to_hex(handle));
  if (fetched.detection) {
    DetectionEvent ev;
    ev.tick = clock_;
    ev.handle = out.handle;
    ev.reporter = to;
    ev.observed = fetched.observed;
    ev.earlier_fetcher = fetched.earlier_fetcher;
    log_.record(clock_, "P2", 6, ActorRef::monitor(), to, "detection",
                "state=" + to_string(fetched.observed) +
                    (ev.earlier_fetcher ? " earlier=" + ev.earlier_fetcher->name() : std::string{}));
    detections_.push_back(ev);
    out.detection = ev;
    return out;
  }
  log_.record(clock_, "P2", 6, ActorRef::monitor(), to, "key_released", to_hex(handle));

  // Step 7: the parent signs each fragment and sends the K-encrypted payloads;
  // encrypted segments and signatures travel in the clear next to them.
  const auto signer = source.seed ? monitor_key() : buyer_key(parent);
  std::vector<Fragment> sent;
  ByteWriter payloads;
  payloads.u32(static_cast<std::uint32_t>(segments.size()));
  for (auto j : segments) {
    Fragment f = source.fragments[j];
    f.signer = signer.public_key();
    f.signature = signer.sign(f.signed_message());
    payloads.bits(f.payload);
    sent.push_back(std::move(f));
  }
  const auto sealed = session_encrypt(key, 0, payloads.data());
  for (std::size_t hop = 0; hop < chain.size(); ++hop) {
    const auto p = chain[hop];
    log_.record(clock_, "P2", 7, hop == 0 ? from : ActorRef::proxy(chain[hop - 1]), ActorRef::proxy(p),
                "fragments", std::to_string(segments.size()) + " sealed " + short_hex(sealed));
    observe(p, "ciphertext", sealed);
    for (const auto& f : sent) {
      observe(p, "enc_segment", f.enc_segment);
      observe(p, "signature", f.signature);
    }
  }
  log_.record(clock_, "P2", 7, ActorRef::proxy(chain.back()), to, "fragments", std::to_string(segments.size()));

  // Step 8: the child decrypts and checks each signature.
  auto opened = session_decrypt(*fetched.key, 0, sealed);
  if (!opened) throw IntegrityError("session ciphertext failed authentication");
  ByteReader r(*opened);
  if (r.u32() != segments.size()) throw IntegrityError("fragment count mismatch");
  for (auto& f : sent) {
    Fragment g = f;
    g.payload = r.bits();
    if (!verify_signature(g.signer, g.signed_message(), g.signature)) {
      throw MaliciousProxyError(proxy, "fragment " + std::to_string(g.index) + " failed signature check");
    }
    out.fragments.push_back(std::move(g));
  }
  r.expect_done();
  log_.record(clock_, "P2", 8, to, to, "fragments_decrypted", std::to_string(out.fragments.size()));
  out.delivered = true;
  return out;
}

const TransactionRegister& Simulation::purchase(std::size_t child, std::size_t proxies,
                                                std::size_t eligible_parents) {
  if (!bootstrapped_) throw StateError("purchase before bootstrap");
  if (proxies < 2) throw ProtocolViolation("at least two proxies are required, got " + std::to_string(proxies));
  if (proxies > config_.proxy_pool) throw ParameterError("more proxies requested than the pool holds");
  if (child >= buyers_.size() || !buyers_[child].pseudonym) throw LookupError("purchase for unregistered buyer");
  if (!buyers_[child].fragments.empty()) throw StateError("buyer already holds the content");
  eligible_parents = std::min({eligible_parents, buyers_.size(), child});
  if (eligible_parents < 2) throw ProtocolViolation("fewer than two parents reachable");

  const std::size_t ns = code_.num_segments();
  if (proxies > ns) throw ParameterError("more proxies than segments");
  // One proxy per segment set; sets have m = n_s / proxies segments.
  const auto layout = segment_set_layout(ns, ns / proxies);
  if (layout.num_sets() > config_.proxy_pool) throw ParameterError("more segment sets than proxies in the pool");
  Rng rng(derive_seed(config_.seed, "purchase", child));
  const auto to = ActorRef::buyer(child);

  // Proxies are drawn without replacement from the pool.
  std::vector<std::size_t> pool(config_.proxy_pool);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < layout.num_sets(); ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(layout.num_sets());

  // Parents are distinct prior buyers chosen uniformly from the directory.
  const auto want = std::min<std::size_t>(rng.between(config_.min_parents, config_.max_parents), eligible_parents);
  std::vector<std::size_t> parents;
  while (parents.size() < want) {
    const auto cand = static_cast<std::size_t>(rng.below(eligible_parents));
    if (std::find(parents.begin(), parents.end(), cand) == parents.end()) parents.push_back(cand);
  }
  const auto assignment = random_parent_assignment(parents.size(), ns, rng);

  tick();
  log_.record(clock_, "P1", 3, to, ActorRef::monitor(), "request", "proxies=" + std::to_string(proxies));

  std::vector<Fragment> received(ns);
  std::vector<Bytes> groups;
  for (std::size_t s = 0; s < layout.num_sets(); ++s) {
    const auto proxy = pool[s];
    const auto& range = layout.sets[s];
    tick();
    log_.record(clock_, "P1", 3, to, ActorRef::proxy(proxy), "request_set",
                std::to_string(range.begin) + ".." + std::to_string(range.end));

    std::map<std::uint32_t, std::vector<std::uint32_t>> by_parent;
    for (std::size_t j = range.begin; j < range.end; ++j) {
      by_parent[assignment.parent_of[j]].push_back(static_cast<std::uint32_t>(j));
    }
    std::vector<GroupItem> items;
    for (const auto& [slot, segs] : by_parent) {
      const auto parent = parents[slot];
      tick();
      log_.record(clock_, "P1", 4, ActorRef::proxy(proxy), ActorRef::buyer(parent), "request_fragments",
                  std::to_string(segs.size()));
      auto outcome = transfer_set(parent, proxy, child, segs);
      if (!outcome.delivered) {
        throw MaliciousProxyError(outcome.detection && outcome.detection->earlier_fetcher
                                      ? outcome.detection->earlier_fetcher->id
                                      : proxy,
                                  "session key fetched before the child");
      }
      for (auto& f : outcome.fragments) {
        items.push_back({f.index, f.enc_segment, f.signer, f.signature});
        const auto j = f.index;
        received[j] = std::move(f);
      }
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.index < b.index; });

    if (proxy_behavior_[proxy] == ProxyBehavior::ForgeFragment) {
      BitVector forged(code_.segment_length());
      for (std::size_t k = 0; k < forged.size(); ++k) forged.set(k, rng.coin());
      items.front().enc_segment = encrypt_segment(forged, keys_.public_key(), rng);
    }

    // Steps 5-6: the proxy keeps its encrypted segments and seals them as
    // one group for T_A.
    tick();
    log_.record(clock_, "P1", 5, ActorRef::proxy(proxy), ActorRef::proxy(proxy), "store_enc_segments",
                std::to_string(items.size()));
    groups.push_back(encrypt_segment_group(items, keys_.public_key(), rng));
    observe(proxy, "group", groups.back());
    tick();
    log_.record(clock_, "P1", 6, ActorRef::proxy(proxy), ActorRef::authority(), "segment_group",
                short_hex(groups.back()));
  }

  // Step 7: T_A opens every group, checks signatures and reassembles f.
  BitVector bits;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto items = decrypt_segment_group(groups[s], keys_);
    const auto& range = layout.sets[s];
    if (items.size() != range.size() || items.front().index != range.begin) {
      throw MaliciousProxyError(pool[s], "segment group does not match the requested set");
    }
    for (const auto& item : items) {
      Fragment check;
      check.index = item.index;
      check.payload = decrypt_segment(item.enc_segment, keys_);
      check.enc_segment = item.enc_segment;
      if (!verify_signature(item.signer, check.signed_message(), item.signature)) {
        throw MaliciousProxyError(pool[s], "signature on segment " + std::to_string(item.index) + " is invalid");
      }
      bits.append(check.payload);
    }
  }
  tick();
  log_.record(clock_, "P1", 7, ActorRef::authority(), ActorRef::authority(), "reassemble",
              std::to_string(groups.size()) + " groups");
  Fingerprint f(ns, code_.segment_length(), std::move(bits));

  auto& b = buyers_[child];
  b.parents = parents;
  b.fragments = std::move(received);
  b.fingerprint = assemble(b.fragments, code_.segment_length());
  if (!(b.fingerprint == f)) throw IntegrityError("authority view of the fingerprint differs from the buyer's");

  // Steps 8-10: E(sigma(f)) goes to MO, which stores the register.
  TransactionRegister reg;
  reg.pseudonym = *b.pseudonym;
  reg.content_hash = content_hash();
  reg.enc_fp = encrypt_fingerprint(f.bits(), sigma_, keys_);
  tick();
  log_.record(clock_, "P1", 8, ActorRef::authority(), ActorRef::authority(), "encrypt_fingerprint");
  tick();
  log_.record(clock_, "P1", 9, ActorRef::authority(), ActorRef::monitor(), "encrypted_fingerprint",
              reg.pseudonym.hex());
  reg.timestamp = clock_;
  const auto idx = database_.insert(std::move(reg));
  tick();
  log_.record(clock_, "P1", 10, ActorRef::monitor(), ActorRef::monitor(), "register", std::to_string(idx));
  return database_.at(idx);
}

void Simulation::grow_population(std::uint32_t generations) {
  if (!bootstrapped_) throw StateError("grow before bootstrap");
  if (generations < 1) throw ParameterError("generations must be at least 1");
  while (generations_ < generations) {
    const std::size_t prior = buyers_.size();
    const auto gen = generations_ + 1;
    for (std::size_t i = 0; i < prior; ++i) {
      const auto child = register_buyer(gen);
      purchase(child, config_.proxies_per_purchase, prior);
    }
    generations_ = gen;
  }
}

std::optional<Pseudonym> Simulation::exact_lookup(const EncryptedFingerprint& enc) const {
  const auto idx = database_.find(enc);
  if (!idx) return std::nullopt;
  return database_.at(*idx).pseudonym;
}

std::vector<IdentityProof> Simulation::resolve_identity(std::span<const Pseudonym> pseudonyms) const {
  std::vector<IdentityProof> out;
  for (const auto& p : pseudonyms) {
    auto it = std::find_if(merchant_.begin(), merchant_.end(), [&](const BuyerRecord& r) { return r.pseudonym == p; });
    if (it == merchant_.end()) throw LookupError("merchant has no buyer with pseudonym " + p.hex());
    out.push_back({p, it->real_identity, it->agr, it->public_key});
  }
  return out;
}

std::optional<std::size_t> Simulation::buyer_of(const Pseudonym& p) const {
  for (std::size_t i = seed_count_; i < buyers_.size(); ++i) {
    if (buyers_[i].pseudonym == p) return i;
  }
  return std::nullopt;
}

Bytes Simulation::serialize_state() const {
  ByteWriter w;
  w.magic("RFPS");
  w.u32(kStateVersion);
  w.str(content_id_);
  w.u8(bootstrapped_ ? 1 : 0);
  w.u32(generations_);
  w.u64(seed_count_);
  w.u64(clock_);
  w.u64(transfer_counter_);

  w.u64(buyers_.size());
  for (const auto& b : buyers_) {
    w.u32(b.generation);
    w.u8(b.seed ? 1 : 0);
    w.u8(b.pseudonym ? 1 : 0);
    if (b.pseudonym) w.raw(b.pseudonym->bytes);
    w.u32(static_cast<std::uint32_t>(b.parents.size()));
    for (auto p : b.parents) w.u64(p);
    w.u32(static_cast<std::uint32_t>(b.fragments.size()));
    for (const auto& f : b.fragments) write_fragment(w, f);
    w.u8(merchant_index_[b.index] ? 1 : 0);
    if (merchant_index_[b.index]) w.u64(*merchant_index_[b.index]);
  }

  w.u64(merchant_.size());
  for (const auto& rec : merchant_) {
    w.raw(rec.pseudonym.bytes);
    w.str(rec.real_identity);
    w.blob(rec.agr);
    w.blob(rec.public_key);
  }

  w.u64(sessions_.size());
  sessions_.for_each([&](const SessionKeyRecord& rec) {
    w.raw(rec.handle);
    w.raw(rec.key);
    w.u8(static_cast<std::uint8_t>(rec.state));
    w.u64(rec.created);
    w.u64(rec.blocked_since);
    w.u8(rec.fetched_by ? 1 : 0);
    if (rec.fetched_by) {
      w.u8(static_cast<std::uint8_t>(rec.fetched_by->kind));
      w.u32(rec.fetched_by->id);
    }
    w.u32(static_cast<std::uint32_t>(rec.history.size()));
    for (auto s : rec.history) w.u8(static_cast<std::uint8_t>(s));
  });

  w.u64(proxy_behavior_.size());
  for (auto b : proxy_behavior_) w.u8(static_cast<std::uint8_t>(b));
  return w.take();
}

Simulation Simulation::restore(SimConfig config, FullCode code, AuthorityKeyMaterial keys, PermutationKey sigma,
                               std::span<const std::uint8_t> state, TransactionDatabase database) {
  Simulation sim(config, std::move(code), std::move(keys), std::move(sigma));
  ByteReader r(state);
  r.expect_magic("RFPS");
  if (r.u32() != kStateVersion) throw IntegrityError("unsupported simulation state version");
  sim.content_id_ = r.str();
  sim.bootstrapped_ = r.u8() != 0;
  sim.generations_ = r.u32();
  sim.seed_count_ = r.u64();
  sim.clock_ = r.u64();
  sim.transfer_counter_ = r.u64();

  const auto n = r.u64();
  const auto l0 = sim.code_.segment_length();
  for (std::uint64_t i = 0; i < n; ++i) {
    Buyer b;
    b.index = i;
    b.generation = r.u32();
    b.seed = r.u8() != 0;
    if (r.u8() != 0) {
      Pseudonym p;
      auto raw = r.raw(p.bytes.size());
      std::copy(raw.begin(), raw.end(), p.bytes.begin());
      b.pseudonym = p;
    }
    const auto np = r.u32();
    for (std::uint32_t k = 0; k < np; ++k) b.parents.push_back(r.u64());
    const auto nf = r.u32();
    for (std::uint32_t k = 0; k < nf; ++k) b.fragments.push_back(read_fragment(r));
    if (!b.fragments.empty()) b.fingerprint = assemble(b.fragments, l0);
    sim.merchant_index_.push_back(r.u8() != 0 ? std::optional<std::size_t>(r.u64()) : std::nullopt);
    sim.buyers_.push_back(std::move(b));
  }

  const auto nm = r.u64();
  for (std::uint64_t i = 0; i < nm; ++i) {
    BuyerRecord rec;
    auto raw = r.raw(rec.pseudonym.bytes.size());
    std::copy(raw.begin(), raw.end(), rec.pseudonym.bytes.begin());
    rec.real_identity = r.str();
    rec.agr = r.blob();
    rec.public_key = r.blob();
    sim.merchant_.push_back(std::move(rec));
  }

  const auto ns = r.u64();
  for (std::uint64_t i = 0; i < ns; ++i) {
    SessionKeyRecord rec;
    auto h = r.raw(rec.handle.size());
    std::copy(h.begin(), h.end(), rec.handle.begin());
    auto k = r.raw(rec.key.size());
    std::copy(k.begin(), k.end(), rec.key.begin());
    rec.state = static_cast<SessionState>(r.u8());
    rec.created = r.u64();
    rec.blocked_since = r.u64();
    if (r.u8() != 0) {
      ActorRef a;
      a.kind = static_cast<ActorKind>(r.u8());
      a.id = r.u32();
      rec.fetched_by = a;
    }
    const auto nh = r.u32();
    for (std::uint32_t j = 0; j < nh; ++j) rec.history.push_back(static_cast<SessionState>(r.u8()));
    sim.sessions_.restore(std::move(rec));
  }

  const auto nb = r.u64();
  if (nb != sim.proxy_behavior_.size()) throw IntegrityError("proxy pool size differs from the configuration");
  for (auto& b : sim.proxy_behavior_) b = static_cast<ProxyBehavior>(r.u8());
  r.expect_done();

  const auto served = std::count_if(sim.buyers_.begin(), sim.buyers_.end(),
                                    [](const Buyer& b) { return b.pseudonym && !b.fragments.empty(); });
  if (database.size() != static_cast<std::size_t>(served)) {
    throw IntegrityError("transaction database does not match the population");
  }
  sim.database_ = std::move(database);
  return sim;
}

}  // namespace rfp
