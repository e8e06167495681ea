#pragma once

#include <string>
#include <vector>

#include "patchdyn/lyapunov.hpp"
#include "patchdyn/model.hpp"
#include "patchdyn/sde.hpp"

namespace patchdyn {

struct OccupationStats {
  double eta = 0.0;
  double fraction = 0.0;  // time fraction with min_i X_i <= eta
  double horizon = 0.0;
};

OccupationStats occupation_fraction(const Path& x_path, double eta);

struct SlopeFit {
  Eigen::VectorXd slope;    // per patch
  Eigen::VectorXd stderr_;  // batched standard errors
  double window_lo = 0.0, window_hi = 0.0;
};

// Least-squares slope of ln X_i over [t_lo, t_hi]; the window must keep every
// patch strictly positive.
SlopeFit extinction_slopes(const Path& x_path, double t_lo, double t_hi);

// Largest time up to which all recorded abundances stay strictly positive.
double positive_prefix_end(const Path& x_path);

enum class Label { Persistent, Extinct, Inconclusive };

std::string to_string(Label label);

struct Verdict {
  Label label = Label::Inconclusive;
  LyapunovEstimate r;
  double band = 0.0;  // |r| <= band reads Inconclusive
};

Verdict classify(const ModelSpec& spec, const SimConfig& cfg,
                 double band_floor = 1e-3);

struct ConvergenceReport {
  std::vector<double> checkpoints;
  std::vector<double> distances;  // sorted-sample L1 between S(t) ensembles
  int replicates = 0;
  double shrink_ratio = 0.0;  // first / last distance
  int increases = 0;          // monotone-trend statistic
};

ConvergenceReport convergence_distance(const ModelSpec& spec,
                                       const SimConfig& cfg,
                                       const Eigen::VectorXd& x0_a,
                                       const Eigen::VectorXd& x0_b,
                                       const std::vector<double>& checkpoints,
                                       int replicates = 500, int threads = 0);

struct SyncReport {
  std::vector<double> times;
  std::vector<double> z;  // X1 / X2
  double terminal_z_gap = 0.0;      // |Z(t_end) - 1|
  double max_z_gap = 0.0;           // max over recorded times
  double ratio_x1_u = 0.0, ratio_x2_u = 0.0;  // terminal patch / U ratios
  double slope_ln_z_gap = 0.0;      // fitted decay rate of ln |Z - 1|
  double slope_bound = 0.0;         // time average of -(alpha Z + beta)
  bool exact_sync = false;          // Z(0) = 1 within 1e-14
};

// Requires a two-patch model with shared linear competition (the regime where
// the diagonal is invariant); U is driven by the same noise increments.
SyncReport sync_diagnostics(const ModelSpec& spec, const SimConfig& cfg,
                            const Eigen::VectorXd& x0);

struct DispersalLimitRow {
  double delta = 0.0;
  Eigen::VectorXd proportions;   // time-averaged patch shares
  double max_abs_error = 0.0;    // against the dominant left eigenvector
  double r_estimate = 0.0;
  double r_stderr = 0.0;
  double r_limit = 0.0;          // aggregated single-patch analogue
};

std::vector<DispersalLimitRow> dispersal_limit_table(
    const ModelSpec& spec, const std::vector<double>& deltas,
    const SimConfig& cfg, int threads = 0);

// Normalized dominant left eigenvector of a dispersal generator, by power
// iteration on its exponential.
Eigen::VectorXd dominant_left_eigenvector(const Eigen::MatrixXd& dispersal);

}  // namespace patchdyn
