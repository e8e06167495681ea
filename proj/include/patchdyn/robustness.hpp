#pragma once

#include <vector>

#include "patchdyn/analysis.hpp"
#include "patchdyn/model.hpp"

namespace patchdyn {

struct PerturbationSpec {
  double theta = 0.0;  // sup-norm size of each targeted component's shift
  bool target_a = true;
  bool target_dispersal = true;
  bool target_gamma = true;
  std::uint64_t seed = 0;  // direction draw
};

// Constant additive perturbation with sup-norm exactly theta per target.
// Dispersal rows are repaired afterwards (off-diagonals clipped at 0, the
// diagonal reset to the negative row sum); a repair that disconnects the
// patch graph is an error.
ModelSpec perturb_spec(const ModelSpec& spec, const PerturbationSpec& pert);

struct ContinuityRow {
  double theta = 0.0;
  int trial = 0;
  double r_base = 0.0;
  double r_pert = 0.0;
  double abs_dev = 0.0;
};

struct ContinuityScan {
  std::vector<ContinuityRow> rows;  // sorted by (theta, trial)
  std::vector<double> thetas;
  std::vector<double> max_dev;
  std::vector<double> mean_dev;
  double r_base = 0.0;
};

// Trial t reuses the same direction seed across every theta so deviation
// envelopes are comparable along the theta axis.
ContinuityScan r_continuity_scan(const ModelSpec& spec,
                                 const std::vector<double>& thetas, int trials,
                                 const SimConfig& cfg, int threads = 0);

struct PerturbationVerdicts {
  int persistent = 0;
  int extinct = 0;
  int inconclusive = 0;
  std::vector<Verdict> verdicts;
};

// Classifies `trials` theta-perturbations of a persistent model.
PerturbationVerdicts persistence_under_perturbation(const ModelSpec& spec,
                                                    double theta, int trials,
                                                    const SimConfig& cfg,
                                                    int threads = 0);

}  // namespace patchdyn
