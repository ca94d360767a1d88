#include "expmart/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace expmart {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path, std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      path_lo_(static_cast<std::uint32_t>(path)),
      path_hi_sub_(static_cast<std::uint32_t>(path >> 32) ^ (substream << 16)) {
  if ((path >> 48) != 0) throw std::invalid_argument("PathRng: path index too large");
}

std::uint32_t PathRng::next_word() {
  if (pos_ == 4) {
    buf_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_lo_,
                       path_hi_sub_},
                      key_);
    ++block_;
    pos_ = 0;
  }
  return buf_[static_cast<std::size_t>(pos_++)];
}

double PathRng::uniform() {
  const std::uint64_t hi = next_word();
  const std::uint64_t lo = next_word();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double PathRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

double PathRng::exponential(double rate) { return -std::log(uniform()) / rate; }

long PathRng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: mean must be finite and >= 0");
  long total = 0;
  while (mean > 0.0) {
    const double m = std::min(mean, 30.0);
    mean -= m;
    const double u = uniform();
    double p = std::exp(-m);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= m / k;
      cdf += p;
    }
    total += k;
  }
  return total;
}

}  // namespace expmart
