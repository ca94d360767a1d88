#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "expmart/assetmodel.hpp"
#include "expmart/cumulant.hpp"
#include "expmart/libor.hpp"
#include "expmart/linalg.hpp"
#include "expmart/quadrature.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// Malformed configuration; the message names file, line and key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// key = value text. '#' starts a comment. `driver = other.cfg` pulls the
/// keys of another file (relative to this one) in under the same names;
/// keys in the including file win.
///
/// Values are scalars, words, or bracketed lists; parentheses are accepted
/// as list brackets so that (0, 0.5, [0.3]) reads as a tuple.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<text>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string where(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  Vec get_vec(const std::string& key, int dim) const;
  Mat get_mat(const std::string& key, int dim) const;
  std::vector<std::string> get_words(const std::string& key) const;
  /// Raw JSON text of a bracketed value (parentheses already converted).
  std::string get_json(const std::string& key) const;

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  /// Keys of the top-level file never read by any accessor.
  std::vector<std::string> unused_keys() const;

  /// SHA-256 over the bytes of every file that contributed keys.
  const std::string& sha() const { return sha_; }

 private:
  struct Entry {
    std::string value;
    std::string file;
    int line = 0;
  };
  const Entry& entry(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
  std::string sha_;
  std::string bytes_;
  std::string origin_;
};

std::string sha256_hex(const std::string& bytes);

/// Triplet keys: dimension, truncation, drift, diffusion, levy.family,
/// levy.params.*, activity, horizon (plus optional drift.breaks/drift.values,
/// diffusion.breaks/diffusion.values, levy.breaks/levy.piece.i.*).
CharacteristicTriplet triplet_from_config(const Config& cfg);
/// lambda = vector, optionally lambda.breaks with lambda.values.
StrategyPath strategy_from_config(const Config& cfg, const std::string& key, int dim);
/// asset.* keys on top of a triplet.
AssetModelSpec asset_spec_from_config(const Config& cfg);
/// tenor.maturities, libor.initial, vol.k.pieces, vol.bound, libor.modulator.* on top of a triplet.
LiborModelSpec libor_spec_from_config(const Config& cfg);
/// quad.rel_tol, quad.max_subdivisions, quad.divergence_levels.
QuadratureOptions quadrature_from_config(const Config& cfg);

}  // namespace expmart
