#pragma once
// Measure-spec files: flat key = value text, one pair per line, '#' starts
// a comment. The `family` key selects the measure; every other key must be
// consumed by that family or parsing fails. Grammar by family:
//
//   family = gaussian          sigma = 0.5 | sigma_x/sigma_y (2-D)
//   family = quartic_tilted    lambda = 0.25
//   family = even_quartic      c2 = 0.0   c4 = 1.0
//   family = exponential       rate = 1.0
//   family = uniform_interval  lo = 0.0   hi = 1.0
//   family = uniform_body      body = square|disk|ellipse|strip
//                              halfwidth (square/strip), radius (disk),
//                              a, b (ellipse semi-axes), scale (optional)
//   family = nu_model          A = 1.0
//   family = lebesgue_halfline scale = 1.0
//
// Unknown keys, missing required keys, malformed numbers, and out-of-range
// parameters all raise SpecError.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ctlab/measures.hpp"

namespace ctlab {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

class KeyValues {
 public:
  void insert(const std::string& key, const std::string& value, int line) {
    if (pairs_.count(key)) throw SpecError("duplicate key '" + key + "' at line " + std::to_string(line));
    pairs_[key] = value;
  }

  bool has(const std::string& key) const { return pairs_.count(key) != 0; }

  std::string take_string(const std::string& key) {
    auto it = pairs_.find(key);
    if (it == pairs_.end()) throw SpecError("missing required key '" + key + "'");
    std::string v = it->second;
    pairs_.erase(it);
    return v;
  }

  double take_number(const std::string& key) {
    const std::string v = take_string(key);
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw SpecError("key '" + key + "': '" + v + "' is not a number");
    }
    if (pos != v.size()) throw SpecError("key '" + key + "': '" + v + "' is not a number");
    return x;
  }

  double take_number_or(const std::string& key, double fallback) {
    return has(key) ? take_number(key) : fallback;
  }

  void reject_leftovers() const {
    if (pairs_.empty()) return;
    std::string msg = "unknown key(s):";
    for (const auto& kv : pairs_) msg += " '" + kv.first + "'";
    throw SpecError(msg);
  }

 private:
  std::map<std::string, std::string> pairs_;
};

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw SpecError("line " + std::to_string(lineno) + ": empty key or value");
    kv.insert(key, value, lineno);
  }
  return kv;
}

inline ConvexBody body_from_spec(KeyValues& kv) {
  const std::string kind = kv.take_string("body");
  ConvexBody b;
  if (kind == "square") {
    b = make_square(kv.take_number_or("halfwidth", 1.0));
  } else if (kind == "disk") {
    b = make_disk(kv.take_number_or("radius", 1.0));
  } else if (kind == "ellipse") {
    b = make_ellipse(kv.take_number("a"), kv.take_number("b"));
  } else if (kind == "strip") {
    b = make_strip(kv.take_number_or("halfwidth", 1.0));
  } else {
    throw SpecError("unknown body '" + kind + "'");
  }
  const double s = kv.take_number_or("scale", 1.0);
  if (s != 1.0) b = scale_body(b, s);
  return b;
}

}  // namespace detail

inline MeasureSpec measure_from_key_values(detail::KeyValues kv) {
  const std::string family = kv.take_string("family");
  MeasureSpec m;
  if (family == "gaussian") {
    if (kv.has("sigma_x") || kv.has("sigma_y")) {
      const double sx = kv.take_number("sigma_x");
      const double sy = kv.take_number("sigma_y");
      if (!(sx > 0.0 && sy > 0.0)) throw SpecError("gaussian: sigmas must be > 0");
      m = make_gaussian(Vec{sx, sy});
    } else {
      const double s = kv.take_number_or("sigma", 1.0);
      if (!(s > 0.0)) throw SpecError("gaussian: sigma must be > 0");
      const double dim = kv.take_number_or("dim", 1.0);
      if (dim == 1.0)
        m = make_gaussian1(s);
      else if (dim == 2.0)
        m = make_gaussian(Vec{s, s});
      else
        throw SpecError("gaussian: dim must be 1 or 2");
    }
  } else if (family == "quartic_tilted") {
    const double lambda = kv.take_number("lambda");
    if (!(lambda >= 0.0)) throw SpecError("quartic_tilted: lambda must be >= 0");
    m = make_quartic_tilted(lambda);
  } else if (family == "even_quartic") {
    const double c2 = kv.take_number_or("c2", 0.0);
    const double c4 = kv.take_number("c4");
    if (!(c4 > 0.0) || c2 < 0.0) throw SpecError("even_quartic: need c4 > 0 and c2 >= 0");
    m = make_even_quartic(c2, c4);
  } else if (family == "exponential") {
    const double rate = kv.take_number("rate");
    if (!(rate > 0.0)) throw SpecError("exponential: rate must be > 0");
    m = make_exponential(rate);
  } else if (family == "uniform_interval") {
    const double lo = kv.take_number("lo");
    const double hi = kv.take_number("hi");
    if (!(lo < hi)) throw SpecError("uniform_interval: need lo < hi");
    m = make_uniform_interval(lo, hi);
  } else if (family == "uniform_body") {
    m = make_uniform_on_body(detail::body_from_spec(kv));
  } else if (family == "nu_model") {
    const double a = kv.take_number("A");
    if (!(a > 0.0)) throw SpecError("nu_model: A must be > 0");
    m = make_nu_model(a);
  } else if (family == "lebesgue_halfline") {
    const double scale = kv.take_number_or("scale", 1.0);
    if (!(scale > 0.0)) throw SpecError("lebesgue_halfline: scale must be > 0");
    m = make_lebesgue_halfline(scale);
  } else {
    throw SpecError("unknown family '" + family + "'");
  }
  if (kv.has("name")) m.name = kv.take_string("name");
  kv.reject_leftovers();
  return m;
}

inline MeasureSpec parse_measure_spec(std::istream& in) {
  return measure_from_key_values(detail::parse_key_values(in));
}

inline MeasureSpec parse_measure_spec_text(const std::string& text) {
  std::istringstream in(text);
  return parse_measure_spec(in);
}

inline MeasureSpec load_measure_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  return parse_measure_spec(in);
}

}  // namespace ctlab
