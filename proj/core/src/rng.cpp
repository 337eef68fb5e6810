#include "nsp/rng.hpp"

#include "nsp/errors.hpp"

#include <cmath>
#include <numbers>

namespace nsp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index) {
  // FNV-1a over the stream name, then mixed with root and index.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::uint64_t state = root ^ rotl(h, 17);
  std::uint64_t out = splitmix64(state);
  state ^= index * 0xD1B54A32D192ED03ULL;
  out ^= splitmix64(state);
  return out;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidFrequency: return "invalid-frequency";
    case ErrorKind::Unstable: return "instability";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::TooShort: return "too-short";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::UnknownChannel: return "unknown-channel";
    case ErrorKind::InsufficientSamples: return "insufficient-samples";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::EmptySplit: return "empty-split";
    case ErrorKind::IdMismatch: return "id-mismatch";
    case ErrorKind::MissingSoftTarget: return "missing-soft-target";
    case ErrorKind::ClassTooSmall: return "class-too-small";
    case ErrorKind::CorruptFile: return "corrupt-file";
    case ErrorKind::MissingArtifact: return "missing-artifact";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "Rng::below: n must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace nsp
