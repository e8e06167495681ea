#pragma once

#include <vector>

#include "patchdyn/model.hpp"
#include "patchdyn/sde.hpp"

namespace patchdyn {

// Two patches with symmetric dispersal alpha = beta, growth (3, 4), volatility
// sqrt(7) in both patches, driver correlation rho, and unit linear
// competition.
ModelSpec evans_correlation_model(double alpha, double rho);

struct FigureRow {
  double alpha = 0.0;
  double rho = 0.0;
  double r = 0.0;
  double stderr_ = 0.0;
  std::string method;
};

// Growth-rate-versus-dispersal sweep across correlations {0, 0.5, 0.9, 1.0};
// closed form where available, time average as the fallback.
std::vector<FigureRow> figure_evans_correlation(const SimConfig& cfg,
                                                int threads = 0);

// Default alpha grid of the sweep.
const std::vector<double>& figure_alpha_grid();

}  // namespace patchdyn
