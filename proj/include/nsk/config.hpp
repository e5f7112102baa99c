#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsk/duhamel.hpp"
#include "nsk/params.hpp"

namespace nsk {

struct GridConfig {
  int dim = 3;
  int modes = 32;
  double length = 16.0;
};

enum class Profile { gaussian, mode, random, file };

struct InitialConfig {
  Profile profile = Profile::gaussian;
  double amplitude = 1e-2;
  double width = 1.0;             // Gaussian standard deviation / random envelope width
  bool derivative_form = true;    // m_hat = i xi m~_hat; otherwise every m_j equals the profile
  std::array<int, 3> mode{0, 0, 1};
  std::string file;               // whitespace table: phi m_1 .. m_n per grid point, row-major
  std::optional<double> energy;   // rescale so that E0 equals this value
};

struct AnalysisConfig {
  std::optional<int> s;
  std::optional<double> kappa1;
  double C2 = 1.0;
};

/// Radial-quadrature linear evolution; no box, so the window is free.
struct LinearDecayConfig {
  double t_min = 1.0;
  double t_max = 1e4;
  int samples = 81;
  double fit_t_a = 100.0;
  double fit_t_b = 1e4;
  double tolerance = 0.03;
};

/// Tolerances used by the validate suites; a zero tolerance makes a suite fail.
struct ValidateConfig {
  int grid_modes = 16;
  double grid_length = 4.0 * 3.14159265358979323846;
  int samples = 20;
  double semigroup_tol = 1e-8;
  double composition_tol = 1e-10;
  double continuity_tol = 1e-8;
  double korteweg_tol = 1e-10;
  double oracle_tol = 1e-9;
  double projection_tol = 1e-14;
  double k12_margin = 0.03;
  int energy_samples = 50;
};

struct ExperimentConfig {
  GridConfig grid;
  PhysParams params;
  double r1 = 1.0;
  double r_inf = 2.0;
  StepperConfig stepper;
  InitialConfig initial;
  AnalysisConfig analysis;
  PicardConfig picard;
  LinearDecayConfig linear_decay;
  ValidateConfig validate;
  std::filesystem::path output_dir = "results";
  std::uint64_t seed = 1;
};

/// Parses TOML text. Unknown keys, wrong types and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints (cutoff inside the grid band, window sanity).
void validate(const ExperimentConfig& cfg);

/// The resolved configuration as TOML text; parse_config(to_toml(c)) reproduces c.
std::string to_toml(const ExperimentConfig& cfg);
/// The same content as a JSON object text.
std::string to_json_text(const ExperimentConfig& cfg);

std::string to_string(Profile p);
std::string to_string(Scheme s);

}  // namespace nsk
