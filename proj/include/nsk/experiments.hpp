#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsk/analysis.hpp"
#include "nsk/config.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

/// Outcome of one CLI command: process status plus the files it wrote.
struct RunResult {
  int status = 0;
  std::vector<std::filesystem::path> files;
  std::string summary;  // JSON text of the summary file
};

/// Initial state from the [initial] section. For derivative-form data the
/// antiderivative m~0 is returned through m_tilde (physical space, n fields).
SpectralState make_initial(const ExperimentConfig& cfg, std::vector<RealField>* m_tilde = nullptr);

/// E0 = ||u0||_{H^{s+1} x H^s} + ||(phi0, m~0)||_{L^1}; without derivative
/// form the L^1 part uses phi0 only.
double initial_energy(const SpectralState& u0, const std::vector<RealField>& m_tilde, int s);

/// Target exponent -n/4 - k/2 of the algebraic decay law.
double decay_target(int dim, int k);

/// Writes to a sibling temporary file, then renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

RunResult run_validate(const ExperimentConfig& cfg);
RunResult run_simulate(const ExperimentConfig& cfg);
RunResult run_picard(const ExperimentConfig& cfg);
RunResult run_linear_decay(const ExperimentConfig& cfg);
/// Collects existing outputs in the output directory, checks their CSV
/// headers, and writes report.json plus a plot specification for the plotter.
RunResult run_report(const ExperimentConfig& cfg);

inline const char* kSimulateHeader = "t,l2_u,h1_u,l2_phi_low,l2_m_low,e_high,d_high,f_norm,znorm_partial";
inline const char* kLinearDecayHeader = "t,norm_k0,norm_k1";
inline const char* kPicardHeader = "k,d_k,ratio,z_low,z_high_sup,z_high_l2,z_history";

}  // namespace nsk
