#include "colltime/runner/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "colltime/lattice.hpp"

namespace colltime::runner {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 11> kKindNames{{
    {ExperimentKind::rn_asymptotics, "rn-asymptotics"},
    {ExperimentKind::erdos_taylor, "erdos-taylor"},
    {ExperimentKind::gamma_total, "gamma-total"},
    {ExperimentKind::laplace, "laplace"},
    {ExperimentKind::pair_baseline, "pair-baseline"},
    {ExperimentKind::dpre, "dpre"},
    {ExperimentKind::oracle_chain, "oracle-chain"},
    {ExperimentKind::replica_identity, "replica-identity"},
    {ExperimentKind::renewal, "renewal"},
    {ExperimentKind::crude_bounds, "crude-bounds"},
    {ExperimentKind::rewired, "rewired"},
}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = boost::trim_copy(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError("syntax", "config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError("syntax", "config: '" + key + "' expects an integer, got '" + text + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> v;
  for (const auto& p : split_list(text)) v.push_back(to_double(key, p));
  return v;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("syntax", "config: '" + key + "' expects a boolean, got '" + text + "'");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  return std::nullopt;
}

std::vector<ExperimentKind> all_kinds() {
  std::vector<ExperimentKind> v;
  for (const auto& [k, name] : kKindNames) v.push_back(k);
  return v;
}

std::int64_t RadiusPolicy::radius_for(std::int64_t N, double cap) const {
  switch (mode) {
    case Mode::sqrt_scaled:
      return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(value * std::sqrt(static_cast<double>(N)))));
    case Mode::fixed:
      return static_cast<std::int64_t>(value);
    case Mode::tail:
      return tail_radius(N, cap);
  }
  return 1;
}

std::string RadiusPolicy::to_string() const {
  switch (mode) {
    case Mode::sqrt_scaled:
      return "sqrt:" + fmt(value);
    case Mode::fixed:
      return "fixed:" + std::to_string(static_cast<std::int64_t>(value));
    case Mode::tail:
      return "tail";
  }
  return "tail";
}

RadiusPolicy RadiusPolicy::parse(std::string_view text) {
  const std::string t = boost::trim_copy(std::string(text));
  RadiusPolicy p;
  if (t == "tail") {
    p.mode = Mode::tail;
    p.value = 0.0;
    return p;
  }
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ConfigError("radius", "config: radius must be sqrt:<c>, fixed:<r> or tail");
  const std::string head = t.substr(0, colon), arg = t.substr(colon + 1);
  if (head == "sqrt") {
    p.mode = Mode::sqrt_scaled;
    p.value = to_double("radius", arg);
    if (!(p.value > 0.0)) throw ConfigError("radius", "config: sqrt radius factor must be positive");
  } else if (head == "fixed") {
    p.mode = Mode::fixed;
    p.value = static_cast<double>(to_int("radius", arg));
    if (p.value < 1) throw ConfigError("radius", "config: fixed radius must be >= 1");
  } else {
    throw ConfigError("radius", "config: unknown radius policy '" + head + "'");
  }
  return p;
}

BetaMatrix ExperimentConfig::beta_matrix() const {
  if (pair_betas.size() == 1) return BetaMatrix(h, pair_betas.front());
  return BetaMatrix(h, pair_betas);
}

double ExperimentConfig::tol(const std::string& key, double fallback) const {
  const auto it = tolerance.find(key);
  return it == tolerance.end() ? fallback : it->second;
}

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("syntax", std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  ExperimentConfig c;
  std::optional<double> all;  // expanded once h is known
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("syntax", "config: key '" + section + "' outside a section");
    if (section == "experiment") {
      for (const auto& [key, node] : body) {
        const std::string v = node.data();
        if (key == "kind") {
          const auto k = parse_kind(boost::trim_copy(v));
          if (!k) throw ConfigError("kind", "config: unknown experiment kind '" + v + "'");
          c.kind = k;
        } else if (key == "N") {
          for (const auto& p : split_list(v)) c.N.push_back(to_int("N", p));
        } else if (key == "h") {
          c.h = static_cast<int>(to_int(key, v));
        } else if (key == "replicates") {
          c.replicates = to_int(key, v);
        } else if (key == "seed") {
          const std::string t = boost::trim_copy(v);
          try {
            std::size_t used = 0;
            c.seed = std::stoull(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
          } catch (const std::exception&) {
            throw ConfigError("syntax", "config: seed must be an unsigned integer, got '" + v + "'");
          }
        } else if (key == "radius") {
          c.radius = RadiusPolicy::parse(v);
        } else if (key == "r_max") {
          c.r_max = static_cast<int>(to_int(key, v));
        } else if (key == "write_samples") {
          c.write_samples = to_bool(key, v);
        } else if (key == "out") {
          c.output_dir = boost::trim_copy(v);
        } else {
          throw ConfigError("unknown_key", "config: unknown key [experiment] " + key);
        }
      }
    } else if (section == "betas") {
      for (const auto& [key, node] : body) {
        const std::string v = node.data();
        if (key == "pairs") {
          c.pair_betas = to_doubles(key, v);
        } else if (key == "all") {
          all = to_double(key, v);
        } else if (key == "walks") {
          c.walk_betas = to_doubles(key, v);
        } else if (key == "grid") {
          c.beta_grid = to_doubles(key, v);
        } else {
          throw ConfigError("unknown_key", "config: unknown key [betas] " + key);
        }
      }
    } else if (section == "tolerance") {
      for (const auto& [key, node] : body) c.tolerance[key] = to_double(key, node.data());
    } else {
      throw ConfigError("unknown_key", "config: unknown section [" + section + "]");
    }
  }
  if (all) {
    if (c.h < 2) throw ConfigError("h", "config: 'all' needs h >= 2");
    c.pair_betas.assign(static_cast<std::size_t>(c.h * (c.h - 1) / 2), *all);
  }
  return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("io", "config: cannot open " + path);
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n";
  if (c.kind) out << "kind = " << to_string(*c.kind) << '\n';
  if (!c.N.empty()) out << "N = " << join(c.N) << '\n';
  out << "h = " << c.h << '\n';
  out << "replicates = " << c.replicates << '\n';
  out << "seed = " << c.seed << '\n';
  out << "radius = " << c.radius.to_string() << '\n';
  out << "r_max = " << c.r_max << '\n';
  out << "write_samples = " << (c.write_samples ? "true" : "false") << '\n';
  if (!c.output_dir.empty()) out << "out = " << c.output_dir << '\n';
  if (!c.pair_betas.empty() || !c.walk_betas.empty() || !c.beta_grid.empty()) {
    out << "\n[betas]\n";
    if (!c.pair_betas.empty()) out << "pairs = " << join(c.pair_betas) << '\n';
    if (!c.walk_betas.empty()) out << "walks = " << join(c.walk_betas) << '\n';
    if (!c.beta_grid.empty()) out << "grid = " << join(c.beta_grid) << '\n';
  }
  if (!c.tolerance.empty()) {
    out << "\n[tolerance]\n";
    for (const auto& [k, v] : c.tolerance) out << k << " = " << fmt(v) << '\n';
  }
  return out.str();
}

void validate(const ExperimentConfig& c) {
  if (!c.kind) throw ConfigError("kind", "config: no experiment kind given");
  if (c.N.empty()) throw ConfigError("N", "config: N list is empty");
  for (auto n : c.N)
    if (n < 2) throw ConfigError("N", "config: every N must be >= 2, got " + std::to_string(n));
  if (c.h < 2) throw ConfigError("h", "config: h must be >= 2");
  if (c.replicates < 1) throw ConfigError("replicates", "config: replicates must be >= 1");
  if (c.r_max < 0) throw ConfigError("r_max", "config: r_max must be >= 0");
  auto check_beta = [](double b, const char* what) {
    if (!(b < 1.0)) throw ConfigError("beta", std::string("config: every beta must be < 1 (") + what + ")");
  };
  for (double b : c.pair_betas) check_beta(b, "pairs");
  for (double b : c.beta_grid) check_beta(b, "grid");
  for (double b : c.walk_betas) check_beta(b, "walks");
  const std::size_t pairs = static_cast<std::size_t>(c.h * (c.h - 1) / 2);
  if (!c.pair_betas.empty() && c.pair_betas.size() != 1 && c.pair_betas.size() != pairs)
    throw ConfigError("beta", "config: pairs needs " + std::to_string(pairs) + " values for h = " + std::to_string(c.h));
  for (std::size_t i = 0; i < c.walk_betas.size(); ++i)
    for (std::size_t j = i + 1; j < c.walk_betas.size(); ++j)
      if (!(c.walk_betas[i] * c.walk_betas[j] < 1.0))
        throw ConfigError("beta", "config: walk couplings beta_i beta_j must be < 1");

  using K = ExperimentKind;
  const K k = *c.kind;
  const bool needs_pairs = k == K::laplace || k == K::pair_baseline || k == K::oracle_chain || k == K::crude_bounds ||
                           k == K::rewired;
  if (needs_pairs && c.pair_betas.empty()) throw ConfigError("beta", "config: this experiment needs [betas] pairs");
  if (k == K::dpre) {
    if (c.walk_betas.empty() && c.pair_betas.empty())
      throw ConfigError("beta", "config: dpre needs [betas] walks");
    if (!c.walk_betas.empty() && static_cast<int>(c.walk_betas.size()) != c.h)
      throw ConfigError("beta", "config: dpre needs one walk beta per replica (h values)");
  }
  if ((k == K::replica_identity || k == K::renewal) && c.pair_betas.empty() && c.beta_grid.empty())
    throw ConfigError("beta", "config: this experiment needs [betas] grid or pairs");
  if (k == K::erdos_taylor && c.h != 2) throw ConfigError("h", "config: erdos-taylor runs one pair (h = 2)");
  if ((k == K::erdos_taylor || k == K::gamma_total) && c.replicates < 1000)
    throw ConfigError("replicates", "config: goodness-of-fit runs need at least 1000 replicates");
  if ((k == K::laplace || k == K::dpre) && c.replicates < 2)
    throw ConfigError("replicates", "config: a standard error needs at least 2 replicates");
  if (k == K::rewired && c.r_max < 1) throw ConfigError("r_max", "config: rewired needs r_max >= 1");
}

}  // namespace colltime::runner
