#pragma once

#include <span>
#include <string>

#include "expmart/linalg.hpp"

namespace expmart {

enum class TruncationKind {
  StandardCutoff,  ///< h(x) = x 1{|x| <= 1}
  Identity,        ///< h(x) = x
  Zero,            ///< h(x) = 0
};

/// Truncation function fixing the drift convention of a triplet.
struct Truncation {
  TruncationKind kind = TruncationKind::StandardCutoff;
  int dim = 1;

  static Truncation standard(int d = 1) { return {TruncationKind::StandardCutoff, d}; }
  static Truncation identity(int d = 1) { return {TruncationKind::Identity, d}; }
  static Truncation zero(int d = 1) { return {TruncationKind::Zero, d}; }

  /// Weight w(|x|) in {0, 1} with h(x) = w(|x|) x.
  double weight(double norm) const {
    switch (kind) {
      case TruncationKind::StandardCutoff:
        return norm <= 1.0 ? 1.0 : 0.0;
      case TruncationKind::Identity:
        return 1.0;
      case TruncationKind::Zero:
        return 0.0;
    }
    return 0.0;
  }

  Vec apply(std::span<const double> x) const;
  /// <lambda, h(x)>
  double inner(std::span<const double> lambda, std::span<const double> x) const;

  bool operator==(const Truncation&) const = default;
};

std::string to_string(TruncationKind kind);
TruncationKind parse_truncation_kind(const std::string& name);

}  // namespace expmart
