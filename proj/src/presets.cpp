#include "patchdyn/presets.hpp"

#include <cmath>

#include "patchdyn/lyapunov.hpp"
#include "patchdyn/parallel.hpp"

namespace patchdyn {

ModelSpec evans_correlation_model(double alpha, double rho) {
  ModelSpec spec;
  spec.n = 2;
  spec.a = Eigen::Vector2d(3.0, 4.0);
  spec.competition = LinearCompetition{Eigen::Vector2d(1.0, 1.0)};
  spec.dispersal = Eigen::Matrix2d{{-alpha, alpha}, {alpha, -alpha}};
  const double vol = std::sqrt(7.0);
  Eigen::Matrix2d corr{{1.0, rho}, {rho, 1.0}};
  spec.noise = NoiseSpec::sigma_correlation(Eigen::Vector2d(vol, vol), corr);
  return spec;
}

const std::vector<double>& figure_alpha_grid() {
  static const std::vector<double> grid{0.25, 0.5, 1.0,  2.0,  3.0,
                                        5.0,  7.5, 10.0, 15.0, 20.0};
  return grid;
}

std::vector<FigureRow> figure_evans_correlation(const SimConfig& cfg,
                                                int threads) {
  static const std::vector<double> rhos{0.0, 0.5, 0.9, 1.0};
  const auto& alphas = figure_alpha_grid();
  std::vector<FigureRow> rows(rhos.size() * alphas.size());

  parallel_for(static_cast<int>(rows.size()), threads, [&](int flat) {
    const std::size_t ri = static_cast<std::size_t>(flat) / alphas.size();
    const std::size_t ai = static_cast<std::size_t>(flat) % alphas.size();
    FigureRow row;
    row.alpha = alphas[ai];
    row.rho = rhos[ri];
    const ModelSpec spec = evans_correlation_model(row.alpha, row.rho);
    try {
      const LyapunovEstimate est = r_closedform_2patch(spec);
      row.r = est.value;
      row.stderr_ = est.stderr_;
      row.method = to_string(est.method);
    } catch (const std::exception&) {
      SimConfig run = cfg;
      run.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(flat));
      const LyapunovEstimate est = r_timeavg(spec, run);
      row.r = est.value;
      row.stderr_ = est.stderr_;
      row.method = to_string(est.method);
    }
    rows[static_cast<std::size_t>(flat)] = std::move(row);
  });
  return rows;
}

}  // namespace patchdyn
