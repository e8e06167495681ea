#pragma once

// Shared model builders for the test suites.

#include <Eigen/Dense>

#include "patchdyn/model.hpp"

namespace patchdyn::testing {

// Single patch: dX = X (a - kappa X) dt + vol X dB.
inline ModelSpec single_patch(double a, double vol, double kappa = 1.0) {
  ModelSpec s;
  s.n = 1;
  s.a = Eigen::VectorXd::Constant(1, a);
  s.competition = LinearCompetition{Eigen::VectorXd::Constant(1, kappa)};
  s.dispersal = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd g(1, 1);
  g << vol;
  s.noise = NoiseSpec::explicit_gamma(g);
  return s;
}

// Two patches, explicit rates and a shared single driver (vol1, vol2).
inline ModelSpec two_patch_rank1(double a1, double a2, double alpha, double beta,
                                 double vol1, double vol2, double kappa = 1.0) {
  ModelSpec s;
  s.n = 2;
  s.a = Eigen::Vector2d(a1, a2);
  s.competition = LinearCompetition{Eigen::Vector2d(kappa, kappa)};
  s.dispersal = Eigen::Matrix2d{{-alpha, alpha}, {beta, -beta}};
  Eigen::MatrixXd g(1, 2);
  g << vol1, vol2;
  s.noise = NoiseSpec::explicit_gamma(g);
  return s;
}

// Two patches with independent drivers (diagonal covariance).
inline ModelSpec two_patch_diagonal(double a1, double a2, double alpha,
                                    double beta, double vol1, double vol2,
                                    double kappa = 1.0) {
  ModelSpec s;
  s.n = 2;
  s.a = Eigen::Vector2d(a1, a2);
  s.competition = LinearCompetition{Eigen::Vector2d(kappa, kappa)};
  s.dispersal = Eigen::Matrix2d{{-alpha, alpha}, {beta, -beta}};
  Eigen::MatrixXd g(2, 2);
  g << vol1, 0.0, 0.0, vol2;
  s.noise = NoiseSpec::explicit_gamma(g);
  return s;
}

// The synchronizing slice: vol shared, b1 = b2, 2 (beta - alpha) = a2 - a1.
inline ModelSpec nohorm() { return two_patch_rank1(1.0, 2.0, 0.5, 1.0, 1.0, 1.0); }

// Degenerate equal-volatility benchmark with r = 0.1180339887.
inline ModelSpec degenerate_benchmark() {
  const double vol = std::sqrt(7.0);
  return two_patch_rank1(3.0, 4.0, 1.0, 1.0, vol, vol);
}

// Same rates with independent drivers.
inline ModelSpec diagonal_benchmark() {
  const double vol = std::sqrt(7.0);
  return two_patch_diagonal(3.0, 4.0, 1.0, 1.0, vol, vol);
}

// sigma1 != sigma2 single-driver model used by the expansion arbitration.
inline ModelSpec mixed_rank1_benchmark() {
  return two_patch_rank1(3.0, 4.0, 1.0, 1.0, 1.0, 2.0);
}

// Competition identically zero (linearized dynamics) via a flat table.
inline CompetitionSpec zero_competition(int n) {
  TabulatedCompetition tab;
  tab.tables.assign(static_cast<std::size_t>(n), {{{0.0, 0.0}, {1.0, 0.0}}});
  return tab;
}

}  // namespace patchdyn::testing
