#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvedbody/integrator.hpp"
#include "curvedbody/rotopulsator.hpp"

namespace curvedbody {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented key = value document with [section] headers. '#' and ';'
/// start comments. Keys may repeat within a section.
class KeyValueDocument {
 public:
  using Entry = std::pair<std::string, std::string>;

  static KeyValueDocument parse(std::istream& in);
  static KeyValueDocument load(const std::filesystem::path& path);

  std::vector<std::string> sections() const;
  bool has_section(const std::string& section) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;
  const std::vector<Entry>& entries(const std::string& section) const;

 private:
  std::map<std::string, std::vector<Entry>> sections_;
};

double parse_real(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);
bool parse_bool(const std::string& text);
std::uint64_t parse_u64(const std::string& text);

struct OutputRequest {
  bool trajectory = true;
  bool diagnostics = true;
  bool report = true;
};

struct Scenario {
  std::string name = "scenario";
  CurvatureSign sigma = CurvatureSign::negative();
  double t0 = 0.0;
  double t_end = 10.0;
  std::uint64_t seed = 0;

  /// Either shape + reduced (with masses) or an explicit body list.
  std::optional<RotopulsatorShape> shape;
  std::optional<ReducedState> reduced;
  std::vector<double> masses;
  std::vector<Body> bodies;
  /// Set when the alphas were given as "regular [offset]"; quad runs then
  /// rebuild the angles in working precision.
  std::optional<double> regular_offset;

  IntegratorConfig integrator;
  OutputRequest outputs;

  bool has_ansatz() const { return shape.has_value(); }
  std::size_t body_count() const;

  /// Throws ConfigError on inconsistent or invalid content, including
  /// initial states with a singular pair.
  void validate() const;
  SystemState initial_state() const;
  std::optional<AnsatzReference> ansatz_reference() const;
};

/// Integrates the scenario in its configured precision. In quad, ansatz
/// scenarios are assembled in quad as well.
Trajectory integrate_scenario(const Scenario& sc);

Scenario parse_scenario(const KeyValueDocument& doc);
Scenario load_scenario(const std::filesystem::path& path);

enum class SweepKind { Equilibrium, Beta };

struct SweepConfig {
  std::string name = "sweep";
  SweepKind kind = SweepKind::Equilibrium;
  std::vector<std::size_t> ns;
  std::vector<double> rhos;
  double mass = 1.0;
  /// Equilibrium rows integrate the solution up to t_end; 0 skips that check.
  double t_end = 10.0;
  std::size_t grid_points = 10000;
  std::optional<double> omega_max;
  /// Beta rows: number of random draws with unequal betas.
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  IntegratorConfig integrator;
};

SweepConfig parse_sweep(const KeyValueDocument& doc);
SweepConfig load_sweep(const std::filesystem::path& path);

}  // namespace curvedbody
