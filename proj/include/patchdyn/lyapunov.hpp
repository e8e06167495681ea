#pragma once

#include <string>
#include <vector>

#include "patchdyn/model.hpp"
#include "patchdyn/sde.hpp"

namespace patchdyn {

enum class RMethod { TimeAverage, LogSlope, ClosedForm };

std::string to_string(RMethod m);

struct LyapunovEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // 0 only for genuinely deterministic closed forms
  RMethod method = RMethod::ClosedForm;
  double horizon = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  int batch_count = 0;
  std::vector<double> batch_means;
  bool converged = true;       // stationarity heuristic over batch halves
  double multistart_gap = 0.0; // degenerate-noise uniqueness cross-check
};

// Growth functional of the linearized total: a'y - y' Sigma y / 2.
double phi_growth(const ModelSpec& spec, const Eigen::VectorXd& y);

// Ergodic average of phi along the proportion process.
LyapunovEstimate r_timeavg(const ModelSpec& spec, const SimConfig& cfg);

// Endpoint slope of the linearized log-total.
LyapunovEstimate r_logslope(const ModelSpec& spec, const SimConfig& cfg);

// Driver-supplied variants for refinement and common-random-number studies;
// these skip the degenerate multistart cross-check.
LyapunovEstimate r_timeavg(const ModelSpec& spec, const SimConfig& cfg,
                           NoiseSource& noise);
LyapunovEstimate r_logslope(const ModelSpec& spec, const SimConfig& cfg,
                            NoiseSource& noise);

// Two-patch closed form: quadrature of phi against the stationary reduction
// density when the reduction diffuses, phi at the deterministic equilibrium
// when it does not.
LyapunovEstimate r_closedform_2patch(const ModelSpec& spec);

// Published expansions, kept behind an explicit switch for the discrepancy
// experiment; never used by the default dispatch.
enum class PrintedForm {
  DiagonalExpansion,  // nondegenerate two-driver expansion
  Rank1Expansion,     // single-driver expansion, sigma1 != sigma2
  EqualSigmaLinear    // single-driver, sigma1 = sigma2, linear in ystar
};

// use_printed_density selects the published density for the moments instead
// of the speed-measure solution (only meaningful for Rank1Expansion).
double r_printed_form(const ModelSpec& spec, PrintedForm form,
                      bool use_printed_density = false);

}  // namespace patchdyn
