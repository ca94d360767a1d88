#include "expmart/truncation.hpp"

#include <cmath>
#include <stdexcept>

namespace expmart {
namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

Vec Truncation::apply(std::span<const double> x) const {
  Vec out(static_cast<Eigen::Index>(x.size()));
  const double w = weight(norm(x));
  for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<Eigen::Index>(i)] = w * x[i];
  return out;
}

double Truncation::inner(std::span<const double> lambda, std::span<const double> x) const {
  const double w = weight(norm(x));
  if (w == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += lambda[i] * x[i];
  return w * s;
}

std::string to_string(TruncationKind kind) {
  switch (kind) {
    case TruncationKind::StandardCutoff:
      return "standard";
    case TruncationKind::Identity:
      return "identity";
    case TruncationKind::Zero:
      return "zero";
  }
  return "?";
}

TruncationKind parse_truncation_kind(const std::string& name) {
  if (name == "standard" || name == "standard-cutoff") return TruncationKind::StandardCutoff;
  if (name == "identity") return TruncationKind::Identity;
  if (name == "zero") return TruncationKind::Zero;
  throw std::invalid_argument("unknown truncation kind '" + name + "'");
}

}  // namespace expmart
