#include "curvedbody/scenario.hpp"

#include "curvedbody/quad.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace curvedbody {

namespace {

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_number(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ConfigError("not a number: '" + text + "'");
  }
  return value;
}

const std::vector<KeyValueDocument::Entry> kNoEntries;

}  // namespace

KeyValueDocument KeyValueDocument::parse(std::istream& in) {
  KeyValueDocument doc;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = lower(trim(std::string_view(t).substr(1, t.size() - 2)));
      doc.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = lower(trim(std::string_view(t).substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    }
    doc.sections_[section].emplace_back(key, trim(std::string_view(t).substr(eq + 1)));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse(in);
}

std::vector<std::string> KeyValueDocument::sections() const {
  std::vector<std::string> names;
  for (const auto& [name, entries] : sections_) names.push_back(name);
  return names;
}

bool KeyValueDocument::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

std::optional<std::string> KeyValueDocument::get(const std::string& section,
                                                 const std::string& key) const {
  const auto all = get_all(section, key);
  if (all.empty()) return std::nullopt;
  if (all.size() > 1) throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
  return all.front();
}

std::vector<std::string> KeyValueDocument::get_all(const std::string& section,
                                                   const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries(section)) {
    if (k == key) out.push_back(v);
  }
  return out;
}

const std::vector<KeyValueDocument::Entry>& KeyValueDocument::entries(
    const std::string& section) const {
  const auto it = sections_.find(section);
  return it == sections_.end() ? kNoEntries : it->second;
}

// Accepts plain numbers plus the forms sqrt(x), pi, a*pi, pi/b and a*pi/b.
double parse_real(const std::string& raw) {
  const std::string text = lower(trim(raw));
  if (text.empty()) throw ConfigError("empty number");
  if (text.rfind("sqrt(", 0) == 0 && text.back() == ')') {
    const double x = parse_real(text.substr(5, text.size() - 6));
    if (x < 0.0) throw ConfigError("sqrt of negative value: '" + raw + "'");
    return std::sqrt(x);
  }
  const auto pi_pos = text.find("pi");
  if (pi_pos == std::string::npos) return parse_number(text);

  double value = std::numbers::pi;
  std::string head = trim(std::string_view(text).substr(0, pi_pos));
  std::string tail = trim(std::string_view(text).substr(pi_pos + 2));
  if (!head.empty()) {
    if (head == "-") {
      value = -value;
    } else {
      if (head.back() != '*') throw ConfigError("cannot parse '" + raw + "'");
      value *= parse_number(trim(std::string_view(head).substr(0, head.size() - 1)));
    }
  }
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("cannot parse '" + raw + "'");
    value /= parse_number(trim(std::string_view(tail).substr(1)));
  }
  return value;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  return out;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

std::uint64_t parse_u64(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not an unsigned integer: '" + text + "'");
  }
  return v;
}

namespace {

using Schema = std::map<std::string, std::vector<std::string>>;

void check_schema(const KeyValueDocument& doc, const Schema& schema) {
  for (const std::string& name : doc.sections()) {
    const auto it = schema.find(name);
    if (it == schema.end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : doc.entries(name)) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      }
    }
  }
}

const std::vector<std::string> kIntegratorKeys = {"rel_tol",          "abs_tol",        "max_step",
                                                  "projection_interval", "sample_interval", "precision"};

Precision parse_precision(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "double") return Precision::Double;
  if (t == "quad") return Precision::Quad;
  throw ConfigError("precision must be 'double' or 'quad', got '" + text + "'");
}

IntegratorConfig parse_integrator(const KeyValueDocument& doc) {
  IntegratorConfig cfg;
  if (auto v = doc.get("integrator", "rel_tol")) cfg.rel_tol = parse_real(*v);
  if (auto v = doc.get("integrator", "abs_tol")) cfg.abs_tol = parse_real(*v);
  if (auto v = doc.get("integrator", "max_step")) cfg.max_step = parse_real(*v);
  if (auto v = doc.get("integrator", "projection_interval")) {
    cfg.projection_interval = static_cast<int>(parse_u64(*v));
  }
  if (auto v = doc.get("integrator", "sample_interval")) cfg.sample_interval = parse_real(*v);
  if (auto v = doc.get("integrator", "precision")) cfg.precision = parse_precision(*v);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::optional<double> regular_keyword(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t.rfind("regular", 0) != 0) return std::nullopt;
  const std::string rest = trim(std::string_view(t).substr(7));
  return rest.empty() ? 0.0 : parse_real(rest);
}

std::vector<double> broadcast(std::vector<double> values, std::size_t n, const char* what) {
  if (values.size() == 1 && n > 1) values.assign(n, values.front());
  if (values.size() != n) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " values, got " +
                      std::to_string(values.size()));
  }
  return values;
}

}  // namespace

std::size_t Scenario::body_count() const { return shape ? masses.size() : bodies.size(); }

void Scenario::validate() const {
  const bool has_shape = shape.has_value() || reduced.has_value();
  if (has_shape == !bodies.empty()) {
    throw ConfigError("scenario needs exactly one of [shape]+[reduced] or [bodies]");
  }
  if (has_shape && !(shape && reduced)) {
    throw ConfigError("scenario with a [shape] also needs a [reduced] section (and vice versa)");
  }
  if (!(t_end > t0)) throw ConfigError("t_end must be greater than t0");
  if (body_count() < 2) throw ConfigError("scenario needs at least two bodies");
  try {
    integrator.validate();
    if (shape) {
      if (sigma != CurvatureSign::negative()) {
        throw ConfigError("rotopulsator ansatz scenarios require sigma = -1");
      }
      if (masses.size() != shape->size()) throw ConfigError("masses and shape differ in length");
    }
    const SystemState s = initial_state();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Body& b = s.bodies[i];
      if (!(b.m > 0.0)) throw ConfigError("body " + std::to_string(i + 1) + ": mass must be > 0");
      if (!b.q.allFinite() || !b.v.allFinite()) {
        throw ConfigError("body " + std::to_string(i + 1) + ": non-finite coordinates");
      }
      if (std::abs(constraint_residual(b.q, s.sigma)) > 1e-6) {
        throw ConfigError("body " + std::to_string(i + 1) + ": position is off the manifold");
      }
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        pair_kernel(b.q, s.bodies[j].q, s.sigma, i, j);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const SingularityError& e) {
    throw ConfigError(std::string("initial state: ") + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

SystemState Scenario::initial_state() const {
  if (shape) {
    return assemble_state(*shape, *reduced, masses, t0);
  }
  SystemState s;
  s.sigma = sigma;
  s.t = t0;
  s.bodies = bodies;
  return s;
}

Trajectory integrate_scenario(const Scenario& sc) {
  if (sc.integrator.precision == Precision::Double) {
    return integrate_in<double>(sc.initial_state(), sc.t_end, sc.integrator,
                                sc.ansatz_reference());
  }
  BasicSystemState<Quad> s0;
  if (sc.shape) {
    const std::vector<Quad> alphas =
        sc.regular_offset ? regular_alphas_in<Quad>(sc.shape->size(), *sc.regular_offset)
                          : std::vector<Quad>(sc.shape->alphas.begin(), sc.shape->alphas.end());
    s0 = assemble_state_in<Quad>(*sc.shape, alphas, *sc.reduced, sc.masses, sc.t0);
  } else {
    s0 = convert_state<Quad>(sc.initial_state());
  }
  return integrate_in<Quad>(s0, sc.t_end, sc.integrator, sc.ansatz_reference());
}

std::optional<AnsatzReference> Scenario::ansatz_reference() const {
  if (!shape) return std::nullopt;
  return AnsatzReference{shape->betas.front(), shape->alphas.front()};
}

Scenario parse_scenario(const KeyValueDocument& doc) {
  Scenario sc;
  check_schema(doc, {{"scenario", {"name", "sigma", "t0", "t_end", "seed", "masses"}},
                     {"shape", {"kind", "betas", "alphas"}},
                     {"reduced", {"rho", "rho_dot", "theta", "theta_dot", "phi", "phi_dot"}},
                     {"bodies", {"body"}},
                     {"integrator", kIntegratorKeys},
                     {"outputs", {"trajectory", "diagnostics", "report"}}});
  try {
    if (auto v = doc.get("scenario", "name")) sc.name = *v;
    if (auto v = doc.get("scenario", "sigma")) {
      sc.sigma = CurvatureSign::from_int(static_cast<int>(std::lround(parse_real(*v))));
    }
    if (auto v = doc.get("scenario", "t0")) sc.t0 = parse_real(*v);
    if (auto v = doc.get("scenario", "t_end")) sc.t_end = parse_real(*v);
    if (auto v = doc.get("scenario", "seed")) sc.seed = parse_u64(*v);
    if (auto v = doc.get("scenario", "masses")) sc.masses = parse_real_list(*v);

    if (doc.has_section("shape")) {
      const std::size_t n = sc.masses.size();
      if (n == 0) throw ConfigError("[shape] scenarios need 'masses' in [scenario]");
      RotopulsatorShape shape;
      if (auto v = doc.get("shape", "kind")) shape.kind = parse_rotopulsator_kind(*v);
      shape.betas = broadcast(parse_real_list(doc.get("shape", "betas").value_or("0")), n, "betas");
      const auto alphas = doc.get("shape", "alphas");
      if (!alphas) throw ConfigError("[shape] needs 'alphas'");
      sc.regular_offset = regular_keyword(*alphas);
      shape.alphas = sc.regular_offset ? regular_alphas(n, *sc.regular_offset)
                                       : parse_real_list(*alphas);
      if (shape.alphas.size() != n) throw ConfigError("alphas: expected " + std::to_string(n) + " values");
      sc.shape = shape;
    }
    if (doc.has_section("reduced")) {
      ReducedState red;
      auto get = [&](const char* key, double& out) {
        if (auto v = doc.get("reduced", key)) out = parse_real(*v);
      };
      red.rho = 0.0;
      get("rho", red.rho);
      get("rho_dot", red.rho_dot);
      get("theta", red.theta);
      get("theta_dot", red.theta_dot);
      get("phi", red.phi);
      get("phi_dot", red.phi_dot);
      sc.reduced = red;
    }
    for (const std::string& line : doc.get_all("bodies", "body")) {
      const auto vals = parse_real_list(line);
      if (vals.size() != 9) throw ConfigError("body = m, q1..q4, v1..v4 (9 values)");
      Body b;
      b.m = vals[0];
      b.q << vals[1], vals[2], vals[3], vals[4];
      b.v << vals[5], vals[6], vals[7], vals[8];
      sc.bodies.push_back(b);
    }
    if (!sc.bodies.empty() && !sc.masses.empty()) {
      throw ConfigError("explicit [bodies] carry their own masses; drop 'masses'");
    }
    sc.integrator = parse_integrator(doc);
    if (auto v = doc.get("outputs", "trajectory")) sc.outputs.trajectory = parse_bool(*v);
    if (auto v = doc.get("outputs", "diagnostics")) sc.outputs.diagnostics = parse_bool(*v);
    if (auto v = doc.get("outputs", "report")) sc.outputs.report = parse_bool(*v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(KeyValueDocument::load(path));
}

SweepConfig parse_sweep(const KeyValueDocument& doc) {
  SweepConfig cfg;
  check_schema(doc, {{"sweep",
                      {"name", "kind", "ns", "rhos", "mass", "t_end", "grid_points", "omega_max",
                       "draws", "seed"}},
                     {"integrator", kIntegratorKeys}});
  try {
    if (auto v = doc.get("sweep", "name")) cfg.name = *v;
    const std::string kind = lower(doc.get("sweep", "kind").value_or("equilibrium"));
    if (kind == "equilibrium") {
      cfg.kind = SweepKind::Equilibrium;
    } else if (kind == "beta") {
      cfg.kind = SweepKind::Beta;
    } else {
      throw ConfigError("unknown sweep kind '" + kind + "'");
    }
    if (auto v = doc.get("sweep", "ns")) {
      for (double x : parse_real_list(*v)) {
        if (x < 2.0 || x != std::floor(x)) throw ConfigError("ns must be integers >= 2");
        cfg.ns.push_back(static_cast<std::size_t>(x));
      }
    }
    if (auto v = doc.get("sweep", "rhos")) cfg.rhos = parse_real_list(*v);
    if (auto v = doc.get("sweep", "mass")) cfg.mass = parse_real(*v);
    if (auto v = doc.get("sweep", "t_end")) cfg.t_end = parse_real(*v);
    if (auto v = doc.get("sweep", "grid_points")) cfg.grid_points = parse_u64(*v);
    if (auto v = doc.get("sweep", "omega_max")) cfg.omega_max = parse_real(*v);
    if (auto v = doc.get("sweep", "draws")) cfg.draws = parse_u64(*v);
    if (auto v = doc.get("sweep", "seed")) cfg.seed = parse_u64(*v);
    cfg.integrator = parse_integrator(doc);
    if (!doc.get("integrator", "rel_tol")) cfg.integrator.rel_tol = 1e-12;
    if (!doc.get("integrator", "abs_tol")) cfg.integrator.abs_tol = 1e-13;
    if (!doc.get("integrator", "precision") && cfg.kind == SweepKind::Equilibrium) {
      cfg.integrator.precision = Precision::Quad;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.mass > 0.0)) throw ConfigError("sweep mass must be positive");
  if (cfg.t_end < 0.0) throw ConfigError("sweep t_end must be non-negative");
  if (cfg.grid_points == 0) throw ConfigError("sweep grid_points must be positive");
  for (double rho : cfg.rhos) {
    if (!(rho > 1.0)) throw ConfigError("sweep rhos must exceed 1");
  }
  return cfg;
}

SweepConfig load_sweep(const std::filesystem::path& path) {
  return parse_sweep(KeyValueDocument::load(path));
}

}  // namespace curvedbody
