#pragma once

#include <functional>
#include <vector>

#include "patchdyn/model.hpp"

namespace patchdyn {

// Scalar diffusion for the first patch proportion of a two-patch model:
// drift is cubic in y, squared diffusion is v_scale * y^2 (1-y)^2.
struct ScalarDiffusion {
  double mu0 = 0.0, mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
  double v_scale = 0.0;  // sigma11 - 2 sigma12 + sigma22

  double mu(double y) const { return mu0 + y * (mu1 + y * (mu2 + y * mu3)); }
  double mu_prime(double y) const { return mu1 + y * (2.0 * mu2 + 3.0 * y * mu3); }
  double v(double y) const {
    const double w = y * (1.0 - y);
    return v_scale * w * w;
  }
};

ScalarDiffusion reduce_2patch(const ModelSpec& spec);

// Stationary law on (0, 1) solved through the speed measure,
// p(y) ~ (1/v) exp( int_{1/2}^{y} 2 mu / v ).  Values are kept in log space;
// the grid is uniform on [eps, 1-eps] with boundary mass certified < 1e-10.
struct StationaryDensity1D {
  std::vector<double> grid;
  std::vector<double> log_density;  // normalized: integral of exp() is 1
  double eps = 0.0;
  double log_norm = 0.0;    // subtracted normalization constant
  double mass_check = 0.0;  // independent re-quadrature of the mass
  ScalarDiffusion diffusion;

  double h() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
  std::vector<double> density() const;
  // Exact (grid-free) evaluation used by refinement checks.
  double log_density_at(double y) const;
};

// eps = 0 and m = 0 pick certified defaults; m counts grid intervals.
StationaryDensity1D stationary_density(const ScalarDiffusion& diff,
                                       double eps = 0.0, int m = 0);

double density_moment(const StationaryDensity1D& d, int k);

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;  // coarse-vs-fine Simpson difference
};
QuadratureValue density_expectation(const StationaryDensity1D& d,
                                    const std::function<double(double)>& f);

// Root in [0, 1] of (a1 - a2)(1 - y) y + beta - (alpha + beta) y.
double ystar(double a1, double a2, double alpha, double beta);

// Published closed-form densities, retained as cross-check evaluators only.
// Both return a density normalized over the supplied grid.
std::vector<double> printed_density_diagonal(const std::vector<double>& grid,
                                             double a1, double a2, double alpha,
                                             double beta, double s1sq,
                                             double s2sq);
std::vector<double> printed_density_rank1(const std::vector<double>& grid,
                                          double a1, double a2, double alpha,
                                          double beta, double sigma1,
                                          double sigma2);

// Normalizes exp(log_values) over a uniform grid; helper for evaluators.
std::vector<double> normalize_log_density(const std::vector<double>& grid,
                                          std::vector<double> log_values);

// sup |p1 - p2| / sup |p1| over the common grid.
double density_sup_gap(const std::vector<double>& p1,
                       const std::vector<double>& p2);

// k-th stationary moment of dU = U (growth - comp U) dt + vol U dB, by
// quadrature of the speed-measure density on (0, infinity).
double logistic_stationary_moment(double growth, double comp, double vol,
                                  int k);

}  // namespace patchdyn
