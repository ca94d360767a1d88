#include "expmart/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace expmart {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string to_json_text(std::string v) {
  for (char& ch : v) {
    if (ch == '(') ch = '[';
    if (ch == ')') ch = ']';
  }
  return v;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.bytes_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::optional<std::string> include;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": expected 'key = value', got '" + s + "'");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": empty key or value");
    }
    if (cfg.entries_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key + "' repeated (first at line " +
                        std::to_string(cfg.entries_[key].line) + ")");
    }
    if (key == "driver") {
      include = value;
      cfg.used_.insert(key);
    }
    cfg.entries_[key] = {value, origin, line};
  }
  if (include) {
    namespace fs = std::filesystem;
    fs::path p(*include);
    if (p.is_relative() && origin != "<text>") p = fs::path(origin).parent_path() / p;
    Config sub = Config::load(p.string());
    for (auto& [k, e] : sub.entries_) {
      if (k == "driver") continue;
      if (!cfg.entries_.count(k)) cfg.entries_[k] = e;
    }
    cfg.bytes_ += sub.bytes_;
  }
  cfg.sha_ = sha256_hex(cfg.bytes_);
  return cfg;
}

Config Config::load(const std::string& path) { return parse(read_file(path), path); }

std::string Config::where(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return "key '" + key + "'";
  return it->second.file + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
}

const Config::Entry& Config::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

void Config::fail(const std::string& key, const std::string& why) const { throw ConfigError(where(key) + ": " + why); }

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = entry(key).value;
  if (v == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) fail(key, "expected a number, got '" + v + "'");
  return x;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double x = get_double(key);
  if (x != std::floor(x) || std::abs(x) > 9e15) fail(key, "expected an integer");
  return static_cast<long>(x);
}

std::string Config::get_json(const std::string& key) const { return to_json_text(entry(key).value); }

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string v = get_json(key);
  try {
    const json j = json::parse(v);
    if (j.is_number()) return {j.get<double>()};
    return j.get<std::vector<double>>();
  } catch (const json::exception&) {
    fail(key, "expected a number or a list of numbers, got '" + entry(key).value + "'");
  }
}

Vec Config::get_vec(const std::string& key, int dim) const {
  const auto l = get_list(key);
  if (l.size() == 1 && dim > 1) return Vec::Constant(dim, l[0]);
  if (static_cast<int>(l.size()) != dim) {
    fail(key, "expected " + std::to_string(dim) + " entries, got " + std::to_string(l.size()));
  }
  return Eigen::Map<const Vec>(l.data(), dim);
}

Mat Config::get_mat(const std::string& key, int dim) const {
  const std::string v = get_json(key);
  json j;
  try {
    j = json::parse(v);
  } catch (const json::exception&) {
    fail(key, "expected a number or a matrix, got '" + entry(key).value + "'");
  }
  if (j.is_number()) return Mat::Identity(dim, dim) * j.get<double>();
  Mat m(dim, dim);
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != dim) fail(key, "expected " + std::to_string(dim) + " rows");
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(rows[r].size()) != dim) fail(key, "row " + std::to_string(r) + " has the wrong length");
      for (int c = 0; c < dim; ++c) m(r, c) = rows[r][c];
    }
  } catch (const json::exception&) {
    fail(key, "expected a matrix [[..],..]");
  }
  return m;
}

std::vector<std::string> Config::get_words(const std::string& key) const {
  std::vector<std::string> out;
  std::string v = entry(key).value;
  for (char& ch : v) {
    if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
  }
  std::istringstream in(v);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) {
    if (!used_.count(k) && e.file == origin_) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

LevyMeasureSpec levy_spec_from(const Config& cfg, const std::string& prefix, int dim) {
  const std::string fam_key = prefix + ".family";
  const std::string family = cfg.get_string(fam_key, "none");
  const std::string p = prefix + ".params.";
  auto need = [&](const std::string& name) { return cfg.get_double(p + name); };
  auto one_d = [&] {
    if (dim != 1) throw ConfigError(cfg.where(fam_key) + ": family '" + family + "' is one-dimensional");
  };
  if (family == "none") return LevyMeasureSpec::none(dim);
  if (family == "point_mass") {
    const Vec loc = cfg.get_vec(p + "location", dim);
    return {PointMasses{dim, {PointMass{loc, need("rate")}}}};
  }
  if (family == "points") {
    json j;
    try {
      j = json::parse(cfg.get_json(p + "atoms"));
    } catch (const json::exception&) {
      throw ConfigError(cfg.where(p + "atoms") + ": expected [[x_1, .., x_d, rate], ..]");
    }
    PointMasses pm{dim, {}};
    for (const auto& a : j) {
      const auto row = a.get<std::vector<double>>();
      if (static_cast<int>(row.size()) != dim + 1) {
        throw ConfigError(cfg.where(p + "atoms") + ": each atom needs d locations and a rate");
      }
      pm.atoms.push_back({Eigen::Map<const Vec>(row.data(), dim), row.back()});
    }
    return {pm};
  }
  if (family == "merton") {
    one_d();
    const double rate = need("rate"), mean = cfg.get_double(p + "mean", 0.0), sd = need("sd");
    return LevyMeasureSpec::merton(rate, mean, sd);
  }
  if (family == "kou") {
    one_d();
    const double rate = need("rate"), p_up = need("p_up"), up = need("eta_up"), down = need("eta_down");
    return LevyMeasureSpec::kou(rate, p_up, up, down);
  }
  if (family == "uniform") {
    one_d();
    const double rate = need("rate"), lo = need("lo"), hi = need("hi");
    return LevyMeasureSpec::uniform_jumps(rate, lo, hi);
  }
  if (family == "tempered_stable") {
    one_d();
    TemperedStable ts;
    ts.c_neg = need("c_neg");
    ts.c_pos = need("c_pos");
    ts.g = need("g");
    ts.m = need("m");
    ts.alpha = need("alpha");
    return {ts};
  }
  if (family == "exp_density") {
    // scale * e^{-decay x} on x > 0
    one_d();
    const double scale = cfg.get_double(p + "scale", 1.0);
    const double decay = need("decay");
    return {DensityMeasure{[scale, decay](double x) { return scale * std::exp(-decay * x); }, 0.0,
                           std::numeric_limits<double>::infinity(), "exp_density"}};
  }
  if (family == "product") {
    AxisProduct ax;
    for (int j = 0; j < dim; ++j) ax.components.push_back(levy_spec_from(cfg, prefix + ".axis." + std::to_string(j), 1));
    return {ax};
  }
  throw ConfigError(cfg.where(fam_key) + ": unknown family '" + family +
                    "' (none, point_mass, points, merton, kou, uniform, tempered_stable, exp_density, product)");
}

LevyMeasure levy_from(const Config& cfg, const std::string& prefix, int dim) {
  LevyMeasureSpec spec = levy_spec_from(cfg, prefix, dim);
  try {
    return LevyMeasure::create(std::move(spec));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.where(prefix + ".family") + ": " + e.what());
  }
}

}  // namespace

CharacteristicTriplet triplet_from_config(const Config& cfg) {
  TripletSpec spec;
  const long d = cfg.get_int("dimension", 1);
  if (d < 1 || d > 16) throw ConfigError(cfg.where("dimension") + ": must be in 1..16");
  spec.dim = static_cast<int>(d);
  const int dim = spec.dim;
  try {
    spec.truncation = {parse_truncation_kind(cfg.get_string("truncation", "standard")), dim};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.where("truncation") + ": " + e.what());
  }
  spec.horizon = cfg.get_double("horizon", 1.0);

  if (cfg.has("drift.breaks")) {
    const auto br = cfg.get_list("drift.breaks");
    const json j = json::parse(cfg.get_json("drift.values"));
    std::vector<Vec> vals;
    for (const auto& v : j) {
      const auto x = v.is_number() ? std::vector<double>(dim, v.get<double>()) : v.get<std::vector<double>>();
      if (static_cast<int>(x.size()) != dim) throw ConfigError(cfg.where("drift.values") + ": wrong dimension");
      vals.push_back(Eigen::Map<const Vec>(x.data(), dim));
    }
    spec.drift = TimeFunction<Vec>::piecewise(br, vals);
  } else {
    spec.drift = TimeFunction<Vec>::constant(cfg.has("drift") ? cfg.get_vec("drift", dim) : Vec(Vec::Zero(dim)));
  }

  if (cfg.has("diffusion.breaks")) {
    const auto br = cfg.get_list("diffusion.breaks");
    const json j = json::parse(cfg.get_json("diffusion.values"));
    std::vector<Mat> vals;
    for (const auto& v : j) {
      if (!v.is_number() || dim != 1) {
        throw ConfigError(cfg.where("diffusion.values") + ": piecewise diffusion takes scalars (d = 1)");
      }
      vals.push_back(Mat::Constant(1, 1, v.get<double>()));
    }
    spec.diffusion = TimeFunction<Mat>::piecewise(br, vals);
  } else {
    spec.diffusion =
        TimeFunction<Mat>::constant(cfg.has("diffusion") ? cfg.get_mat("diffusion", dim) : Mat(Mat::Zero(dim, dim)));
  }

  if (cfg.has("levy.breaks")) {
    const auto br = cfg.get_list("levy.breaks");
    std::vector<LevyMeasure> pieces;
    for (std::size_t i = 0; i <= br.size(); ++i) pieces.push_back(levy_from(cfg, "levy.piece." + std::to_string(i), dim));
    spec.levy = PiecewiseLevyMeasure(br, std::move(pieces));
  } else {
    spec.levy = PiecewiseLevyMeasure(levy_from(cfg, "levy", dim));
  }

  spec.activity = TimeFunction<double>::constant(cfg.get_double("activity", 1.0));
  try {
    return CharacteristicTriplet::create(std::move(spec));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("triplet: ") + e.what());
  }
}

StrategyPath strategy_from_config(const Config& cfg, const std::string& key, int dim) {
  if (cfg.has(key + ".breaks")) {
    const auto br = cfg.get_list(key + ".breaks");
    json j;
    try {
      j = json::parse(cfg.get_json(key + ".values"));
    } catch (const json::exception&) {
      throw ConfigError(cfg.where(key + ".values") + ": expected a list of vectors");
    }
    std::vector<Vec> vals;
    for (const auto& v : j) {
      const auto x = v.is_number() ? std::vector<double>(dim, v.get<double>()) : v.get<std::vector<double>>();
      if (static_cast<int>(x.size()) != dim) throw ConfigError(cfg.where(key + ".values") + ": wrong dimension");
      vals.push_back(Eigen::Map<const Vec>(x.data(), dim));
    }
    try {
      return StrategyPath::piecewise(br, vals);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cfg.where(key + ".breaks") + ": " + e.what());
    }
  }
  return StrategyPath::constant(cfg.get_vec(key, dim));
}

AssetModelSpec asset_spec_from_config(const Config& cfg) {
  CharacteristicTriplet driver = triplet_from_config(cfg);
  const int d = driver.dim();
  const int da = static_cast<int>(cfg.get_int("asset.d_asset", d));
  if (da < 1 || da > d) throw ConfigError(cfg.where("asset.d_asset") + ": must be in 1..dimension");
  AssetModelSpec spec{driver, da, StrategyPath::constant(0.0), StrategyPath::constant(Vec(0)), 100.0, 1.0,
                      std::nullopt};
  spec.d_asset = da;
  spec.sigma_s = strategy_from_config(cfg, "asset.sigma_s", da);
  spec.sigma_r = d > da ? strategy_from_config(cfg, "asset.sigma_r", d - da) : StrategyPath::constant(Vec(0));
  spec.S0 = cfg.get_double("asset.S0", 100.0);
  spec.maturity = cfg.get_double("asset.maturity", driver.horizon());
  if (cfg.has("asset.regime.levels")) {
    RegimeModulation rg;
    rg.levels = cfg.get_list("asset.regime.levels");
    rg.rates = cfg.get_mat("asset.regime.rates", static_cast<int>(rg.levels.size()));
    rg.initial = static_cast<std::size_t>(cfg.get_int("asset.regime.initial", 0));
    spec.regime = rg;
  }
  return spec;
}

LiborModelSpec libor_spec_from_config(const Config& cfg) {
  CharacteristicTriplet driver = triplet_from_config(cfg);
  const int d = driver.dim();
  std::vector<double> T = cfg.get_list("tenor.maturities");
  if (T.empty() || T.front() != 0.0) T.insert(T.begin(), 0.0);
  TenorStructure tenor = [&] {
    try {
      return TenorStructure(T);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cfg.where("tenor.maturities") + ": " + e.what());
    }
  }();
  const int n = tenor.n();
  std::vector<std::vector<VolPiece>> pieces(static_cast<std::size_t>(n - 1));
  for (int k = 1; k <= n - 1; ++k) {
    const std::string key = "vol." + std::to_string(k) + ".pieces";
    if (!cfg.has(key)) continue;
    json j;
    try {
      j = json::parse(cfg.get_json(key));
      for (const auto& pc : j) {
        if (!pc.is_array() || pc.size() != 3) throw ConfigError(cfg.where(key) + ": pieces are (t_start, t_end, vector)");
        const auto v = pc[2].is_number() ? std::vector<double>(d, pc[2].get<double>())
                                         : pc[2].get<std::vector<double>>();
        if (static_cast<int>(v.size()) != d) throw ConfigError(cfg.where(key) + ": vector has the wrong dimension");
        pieces[static_cast<std::size_t>(k - 1)].push_back(
            {pc[0].get<double>(), pc[1].get<double>(), Eigen::Map<const Vec>(v.data(), d)});
      }
    } catch (const json::exception&) {
      throw ConfigError(cfg.where(key) + ": expected [(t_start, t_end, vector), ..]");
    }
  }
  for (const auto& k : cfg.keys_with_prefix("vol.")) {
    if (k == "vol.bound" || k == "vol.eps") continue;
    const auto dot = k.find('.', 4);
    const std::string idx = k.substr(4, dot == std::string::npos ? std::string::npos : dot - 4);
    const long kk = std::strtol(idx.c_str(), nullptr, 10);
    if (kk < 1 || kk > n - 1) throw ConfigError(cfg.where(k) + ": rate index outside 1.." + std::to_string(n - 1));
  }
  const double M = cfg.get_double("vol.bound", 1.0);
  std::vector<double> initial = cfg.get_list("libor.initial");
  if (initial.size() == 1 && n > 1) initial.assign(static_cast<std::size_t>(n), initial[0]);
  LiborModelSpec spec{tenor, VolatilitySpec(1, {}, 1.0), initial, driver, std::nullopt};
  try {
    spec.vols = VolatilitySpec(d, pieces, M);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("vol: ") + e.what());
  }
  if (cfg.has("libor.modulator.levels")) {
    spec.modulator = VolModulator{cfg.get_list("libor.modulator.levels"), cfg.get_list("libor.modulator.probs")};
  }
  return spec;
}

QuadratureOptions quadrature_from_config(const Config& cfg) {
  QuadratureOptions q;
  q.rel_tol = cfg.get_double("quad.rel_tol", q.rel_tol);
  q.max_subdivisions = static_cast<int>(cfg.get_int("quad.max_subdivisions", q.max_subdivisions));
  q.divergence_levels = static_cast<int>(cfg.get_int("quad.divergence_levels", q.divergence_levels));
  if (!(q.rel_tol > 0.0) || q.max_subdivisions < 1 || q.divergence_levels < 2) {
    throw ConfigError("quad.*: tolerances must be positive");
  }
  return q;
}

}  // namespace expmart
