#pragma once

#include <array>
#include <cstdint>

namespace expmart {

/// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Random stream of one path: key from the base seed, counter from
/// (path, substream, draw index). Streams never overlap and do not depend on
/// the order in which paths are generated.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path, std::uint32_t substream = 0);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  double exponential(double rate);
  /// Poisson by inversion, split into chunks of mean at most 30.
  long poisson(double mean);

 private:
  std::uint32_t next_word();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_sub_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace expmart
