#include "rfp/code.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "rfp/error.hpp"

namespace rfp {
namespace {

constexpr std::string_view kCodeMagic = "RFPC";
constexpr std::uint16_t kCodeVersion = 1;

void validate_bias_spec(const BiasSpec& spec) {
  if (const auto* a = std::get_if<ClippedArcsine>(&spec)) {
    if (!(a->cutoff >= 0.0 && a->cutoff < 0.5)) throw ParameterError("arcsine cutoff must lie in [0, 0.5)");
    return;
  }
  const auto& d = std::get<DiscreteBias>(spec);
  if (d.support.empty()) throw ParameterError("discrete bias distribution has no support points");
  double total = 0.0;
  for (const auto& [point, prob] : d.support) {
    if (!(point > 0.0 && point < 1.0)) throw ParameterError("discrete bias support point outside (0,1)");
    if (!(prob > 0.0)) throw ParameterError("discrete bias probability must be positive");
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ParameterError("discrete bias probabilities do not sum to 1");
}

double sample_arcsine(const ClippedArcsine& spec, Rng& rng) {
  // p = sin^2(r) with r uniform maps the uniform law onto the arcsine law;
  // clipping p to [t, 1-t] clips r to [asin(sqrt t), pi/2 - asin(sqrt t)].
  const double lo = std::asin(std::sqrt(spec.cutoff));
  const double hi = std::numbers::pi / 2 - lo;
  for (;;) {
    const double r = lo + (hi - lo) * rng.uniform();
    const double s = std::sin(r);
    const double p = s * s;
    if (p > 0.0 && p < 1.0) return p;
  }
}

double sample_discrete(const DiscreteBias& spec, Rng& rng) {
  double u = rng.uniform();
  for (const auto& [point, prob] : spec.support) {
    if (u < prob) return point;
    u -= prob;
  }
  return spec.support.back().first;
}

void write_params(ByteWriter& w, const CodeParameters& p) {
  w.u32(p.c0);
  w.f64(p.epsilon);
  w.u32(p.num_codewords);
  w.u32(p.codeword_length);
  if (const auto* a = std::get_if<ClippedArcsine>(&p.bias)) {
    w.u8(0);
    w.f64(a->cutoff);
  } else {
    const auto& d = std::get<DiscreteBias>(p.bias);
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(d.support.size()));
    for (const auto& [point, prob] : d.support) {
      w.f64(point);
      w.f64(prob);
    }
  }
}

CodeParameters read_params(ByteReader& r) {
  CodeParameters p;
  p.c0 = r.u32();
  p.epsilon = r.f64();
  p.num_codewords = r.u32();
  p.codeword_length = r.u32();
  switch (r.u8()) {
    case 0:
      p.bias = ClippedArcsine{r.f64()};
      break;
    case 1: {
      DiscreteBias d;
      const auto n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const double point = r.f64();
        const double prob = r.f64();
        d.support.emplace_back(point, prob);
      }
      p.bias = std::move(d);
      break;
    }
    default:
      throw IntegrityError("unknown bias distribution tag");
  }
  return p;
}

}  // namespace

void CodeParameters::validate() const {
  if (c0 < 2) throw ParameterError("c0 must be at least 2");
  if (num_codewords < 1) throw ParameterError("num_codewords (M) must be at least 1");
  if (codeword_length < 1) throw ParameterError("codeword_length (l0) must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0,1)");
  validate_bias_spec(bias);
}

DiscreteBias load_discrete_bias(const std::filesystem::path& path, std::uint32_t c0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bias table " + path.string());
  std::map<std::uint32_t, DiscreteBias> tables;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::uint32_t cmax = 0;
    double point = 0.0;
    double prob = 0.0;
    if (!(fields >> cmax)) continue;
    if (!(fields >> point >> prob)) throw IntegrityError("malformed bias table line: " + line);
    tables[cmax].support.emplace_back(point, prob);
  }
  auto it = tables.lower_bound(c0);
  if (it == tables.end()) throw ParameterError("bias table has no entry for c0=" + std::to_string(c0));
  validate_bias_spec(it->second);
  return it->second;
}

BiasVector::BiasVector(std::vector<double> p) : p_(std::move(p)) {
  for (double x : p_) {
    if (!(x > 0.0 && x < 1.0)) throw ParameterError("bias entries must lie strictly inside (0,1)");
  }
}

BiasVector sample_bias_vector(const CodeParameters& params, Seed seed) {
  params.validate();
  Rng rng(seed);
  std::vector<double> p(params.codeword_length);
  for (auto& x : p) {
    x = std::visit(
        [&](const auto& spec) {
          if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, ClippedArcsine>) {
            return sample_arcsine(spec, rng);
          } else {
            return sample_discrete(spec, rng);
          }
        },
        params.bias);
  }
  return BiasVector(std::move(p));
}

SegmentCodebook generate_codebook(const CodeParameters& params, const BiasVector& bias, Seed seed) {
  params.validate();
  if (bias.size() != params.codeword_length) throw ParameterError("bias vector length differs from l0");
  Rng rng(seed);
  SegmentCodebook book{bias, {}};
  book.codewords.reserve(params.num_codewords);
  for (std::uint32_t i = 0; i < params.num_codewords; ++i) {
    BitVector row(params.codeword_length);
    for (std::size_t k = 0; k < row.size(); ++k) row.set(k, rng.bernoulli(bias[k]));
    book.codewords.push_back(std::move(row));
  }
  return book;
}

FullCode::FullCode(CodeParameters params, std::size_t num_segments, std::vector<SegmentCodebook> codebooks)
    : params_(std::move(params)), num_segments_(num_segments), codebooks_(std::move(codebooks)) {
  params_.validate();
  if (num_segments_ == 0) throw ParameterError("a code needs at least one segment");
  if (codebooks_.size() != 1 && codebooks_.size() != num_segments_) {
    throw ParameterError("expected one shared codebook or one per segment");
  }
  for (const auto& book : codebooks_) {
    if (book.length() != params_.codeword_length || book.size() != params_.num_codewords) {
      throw ParameterError("codebook shape does not match parameters");
    }
    for (const auto& row : book.codewords) {
      if (row.size() != params_.codeword_length) throw ParameterError("codeword length does not match l0");
    }
  }
  bias_.reserve(total_bits());
  for (std::size_t j = 0; j < num_segments_; ++j) {
    const auto values = codebook(j).bias.values();
    bias_.insert(bias_.end(), values.begin(), values.end());
  }
}

Bytes FullCode::serialize() const {
  ByteWriter w;
  w.magic(kCodeMagic);
  w.u16(kCodeVersion);
  write_params(w, params_);
  w.u32(static_cast<std::uint32_t>(num_segments_));
  w.u32(static_cast<std::uint32_t>(codebooks_.size()));
  for (const auto& book : codebooks_) {
    for (double x : book.bias.values()) w.f64(x);
    for (const auto& row : book.codewords) {
      for (auto word : row.words()) w.u64(word);
    }
  }
  return w.take();
}

FullCode FullCode::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kCodeMagic);
  if (r.u16() != kCodeVersion) throw IntegrityError("unsupported codebook version");
  auto params = read_params(r);
  params.validate();
  const auto num_segments = r.u32();
  const auto count = r.u32();
  if (count != 1 && count != num_segments) throw IntegrityError("codebook count does not match segments");
  const std::size_t l0 = params.codeword_length;
  if (static_cast<std::size_t>(count) * l0 * 8 > r.remaining()) throw IntegrityError("codebook file truncated");
  std::vector<SegmentCodebook> books;
  books.reserve(count);
  for (std::uint32_t b = 0; b < count; ++b) {
    std::vector<double> p(l0);
    for (auto& x : p) x = r.f64();
    SegmentCodebook book{BiasVector(std::move(p)), {}};
    for (std::uint32_t i = 0; i < params.num_codewords; ++i) {
      std::vector<std::uint64_t> words((l0 + 63) / 64);
      for (auto& word : words) word = r.u64();
      book.codewords.push_back(BitVector::from_words(l0, std::move(words)));
    }
    books.push_back(std::move(book));
  }
  r.expect_done();
  return FullCode(std::move(params), num_segments, std::move(books));
}

FullCode generate_full_code(const CodeParameters& params, std::size_t num_segments, Seed seed, bool per_position) {
  params.validate();
  const std::size_t count = per_position ? num_segments : 1;
  std::vector<SegmentCodebook> books;
  books.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    auto bias = sample_bias_vector(params, derive_seed(seed, "bias", b));
    books.push_back(generate_codebook(params, bias, derive_seed(seed, "codewords", b)));
  }
  return FullCode(params, num_segments, std::move(books));
}

double phi(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("phi is defined on the open interval (0,1)");
  return std::sqrt((1.0 - x) / x);
}

double cleartext_score(const BitVector& traced, const BitVector& tested, std::span<const double> p) {
  if (traced.size() != tested.size() || traced.size() != p.size()) {
    throw ParameterError("cleartext_score: sequences differ in length");
  }
  if (p.empty()) throw ParameterError("cleartext_score: empty sequences");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool y = traced.get(k);
    const bool x = tested.get(k);
    double s;
    if (y == x) {
      s = y ? phi(p[k]) : phi(1.0 - p[k]);
    } else {
      s = y ? -phi(1.0 - p[k]) : -phi(p[k]);
    }
    sum += s;
  }
  return sum / static_cast<double>(p.size());
}

}  // namespace rfp
