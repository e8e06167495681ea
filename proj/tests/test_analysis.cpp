#include <doctest.h>

#include <cmath>
#include <sstream>

#include "patchdyn/analysis.hpp"
#include "patchdyn/config.hpp"
#include "patchdyn/reduce1d.hpp"
#include "test_support.hpp"

using namespace patchdyn;

namespace {

Path synthetic_path(const std::vector<double>& times,
                    const std::vector<Eigen::Vector2d>& rows) {
  Path path;
  path.coord = Coord::X;
  path.times = times;
  path.states.resize(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i)
    path.states.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return path;
}

SimConfig mc_cfg(double t_end, std::uint64_t seed, long stride = 0) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = t_end;
  cfg.seed = seed;
  cfg.record_stride = stride;
  return cfg;
}

}  // namespace

TEST_CASE("occupation fraction on constant paths") {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> high, low;
  for (int i = 0; i <= 100; ++i) {
    times.push_back(0.1 * i);
    high.emplace_back(1.0, 1.0);
    low.emplace_back(0.1, 1.0);
  }
  CHECK(occupation_fraction(synthetic_path(times, high), 0.5).fraction == 0.0);
  CHECK(occupation_fraction(synthetic_path(times, low), 0.5).fraction == 1.0);

  // Half the time near the boundary set, half away from it.
  std::vector<Eigen::Vector2d> split;
  for (int i = 0; i <= 100; ++i)
    split.emplace_back(i < 50 ? 0.1 : 1.0, 1.0);
  const double f = occupation_fraction(synthetic_path(times, split), 0.5).fraction;
  CHECK(f == doctest::Approx(0.495).epsilon(1e-12));  // trapezoid boundary row
}

TEST_CASE("occupation fraction is monotone in the threshold") {
  const ModelSpec spec = testing::nohorm();
  const Path path = simulate_x(spec, mc_cfg(200.0, 40, 10), Eigen::Vector2d(1.0, 1.0));
  double previous = 0.0;
  for (double eta : {1e-4, 1e-2, 0.5, 1.0, 5.0}) {
    const double f = occupation_fraction(path, eta).fraction;
    CHECK(f >= previous);
    previous = f;
  }
  CHECK_THROWS_AS(occupation_fraction(Path{}, 0.5), std::invalid_argument);
}

TEST_CASE("extinction slope of a deterministic exponential decay") {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> rows;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.01 * i;
    times.push_back(t);
    rows.emplace_back(std::exp(-t), std::exp(-t));
  }
  const SlopeFit fit = extinction_slopes(synthetic_path(times, rows), 0.0, 10.0);
  CHECK(fit.slope[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(fit.slope[1] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("single-patch extinction slope matches a - vol^2/2") {
  const ModelSpec spec = testing::single_patch(0.5, std::sqrt(2.0));
  const Path path = simulate_x(spec, mc_cfg(1200.0, 41, 10), Eigen::VectorXd::Ones(1));
  const double window_end = std::min(positive_prefix_end(path), 1200.0);
  const SlopeFit fit = extinction_slopes(path, 100.0, window_end);
  CHECK(std::abs(fit.slope[0] - (-0.5)) <= 3.0 * fit.stderr_[0]);
}

TEST_CASE("nonpositive entries in the fit window are an error") {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> rows;
  for (int i = 0; i <= 100; ++i) {
    times.push_back(0.1 * i);
    rows.emplace_back(i == 50 ? 0.0 : 1.0, 1.0);
  }
  Path path = synthetic_path(times, rows);
  CHECK_THROWS_WITH_AS(extinction_slopes(path, 0.0, 10.0),
                       doctest::Contains("numerical zero"), std::runtime_error);
}

TEST_CASE("zero-competition slopes equal the log-growth estimator exactly when noise-free") {
  ModelSpec spec = testing::two_patch_rank1(1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
  spec.noise = NoiseSpec::explicit_gamma(Eigen::MatrixXd::Zero(0, 2));
  spec.competition = testing::zero_competition(2);
  const SimConfig cfg = mc_cfg(10.0, 42, 1);

  const Path path = simulate_x(spec, cfg, Eigen::Vector2d(0.3, 0.7));
  const SlopeFit fit = extinction_slopes(path, 1.0, 10.0);
  const LyapunovEstimate ls = r_logslope(spec, cfg);
  CHECK(std::abs(fit.slope[0] - ls.value) <= 1e-12);
  CHECK(std::abs(fit.slope[1] - ls.value) <= 1e-12);
}

TEST_CASE("with noise, zero-competition slopes agree statistically with the log-growth estimator") {
  // Subcritical rates keep the competition-free system inside floating range
  // over the horizon.
  ModelSpec spec = testing::two_patch_rank1(0.5, 1.5, 1.0, 1.0, 1.0, 2.0);
  spec.competition = testing::zero_competition(2);
  const SimConfig cfg = mc_cfg(2000.0, 43, 10);
  const Path path = simulate_x(spec, cfg, Eigen::Vector2d(1.0, 1.0));
  const double window_end = std::min(positive_prefix_end(path), 2000.0);
  const SlopeFit fit = extinction_slopes(path, 200.0, window_end);
  const LyapunovEstimate ls = r_logslope(spec, cfg);
  for (int i = 0; i < 2; ++i) {
    const double se =
        std::sqrt(fit.stderr_[i] * fit.stderr_[i] + ls.stderr_ * ls.stderr_);
    CHECK(std::abs(fit.slope[i] - ls.value) <= 3.0 * se);
  }
}

TEST_CASE("classification over the benchmark trio") {
  const SimConfig cfg = mc_cfg(100.0, 44);
  SUBCASE("persistent two-patch benchmark") {
    const Verdict v = classify(testing::degenerate_benchmark(), cfg);
    CHECK(v.label == Label::Persistent);
    CHECK(v.band == doctest::Approx(1e-3));
  }
  SUBCASE("subcritical single patch") {
    const Verdict v = classify(testing::single_patch(0.5, std::sqrt(2.0)), cfg);
    CHECK(v.label == Label::Extinct);
    CHECK(v.r.value == doctest::Approx(-0.5).epsilon(1e-14));
    // Same growth rate with an exactly representable variance.
    const Verdict exact = classify(testing::single_patch(1.5, 2.0), cfg);
    CHECK(exact.r.value == -0.5);
  }
  SUBCASE("critical single patch is inconclusive") {
    const Verdict v = classify(testing::single_patch(0.5, 1.0), cfg);
    CHECK(v.label == Label::Inconclusive);
    CHECK(v.r.value == 0.0);
    CHECK((std::abs(v.r.value) <= v.band));
  }
}

TEST_CASE("classification is invariant under patch relabeling") {
  const SimConfig cfg = mc_cfg(100.0, 45);
  for (const ModelSpec& spec :
       {testing::degenerate_benchmark(), testing::mixed_rank1_benchmark(),
        testing::two_patch_diagonal(0.2, 0.1, 1.0, 0.5, 1.4, 1.1)}) {
    ModelSpec swapped;
    swapped.n = 2;
    swapped.a = Eigen::Vector2d(spec.a[1], spec.a[0]);
    const auto& lin = std::get<LinearCompetition>(spec.competition);
    swapped.competition =
        LinearCompetition{Eigen::Vector2d(lin.kappa[1], lin.kappa[0])};
    swapped.dispersal = Eigen::Matrix2d{{spec.dispersal(1, 1), spec.dispersal(1, 0)},
                                        {spec.dispersal(0, 1), spec.dispersal(0, 0)}};
    Eigen::MatrixXd g = spec.noise.gamma();
    Eigen::MatrixXd swapped_g(g.rows(), 2);
    swapped_g.col(0) = g.col(1);
    swapped_g.col(1) = g.col(0);
    swapped.noise = NoiseSpec::explicit_gamma(swapped_g);

    const Verdict base = classify(spec, cfg);
    const Verdict mirrored = classify(swapped, cfg);
    CHECK(base.label == mirrored.label);
    CHECK(base.r.value == doctest::Approx(mirrored.r.value).epsilon(1e-9));
  }
}

TEST_CASE("identical ensembles are at zero distance under shared drivers") {
  const ModelSpec spec = testing::nohorm();
  const ConvergenceReport report = convergence_distance(
      spec, mc_cfg(10.0, 46), Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(1.0, 2.0),
      {1.0, 10.0}, 64, 2);
  CHECK(report.distances[0] == 0.0);
  CHECK(report.distances[1] == 0.0);
}

TEST_CASE("persistent ensembles forget their starting point") {
  const ModelSpec spec = testing::nohorm();
  const ConvergenceReport report = convergence_distance(
      spec, mc_cfg(100.0, 47), Eigen::Vector2d(0.01, 0.01), Eigen::Vector2d(5.0, 5.0),
      {1.0, 100.0}, 128, 2);
  CHECK(report.distances[1] < 0.2 * report.distances[0]);
}

TEST_CASE("synchronization diagnostics on the invariant-diagonal slice") {
  SimConfig cfg = mc_cfg(50.0, 48, 10);
  SUBCASE("distinct starts contract onto the diagonal") {
    const SyncReport rep = sync_diagnostics(testing::nohorm(), cfg, Eigen::Vector2d(2.0, 1.0));
    CHECK_FALSE(rep.exact_sync);
    CHECK(rep.terminal_z_gap < 1e-6);
    CHECK(rep.slope_ln_z_gap < 0.0);
    CHECK(rep.slope_ln_z_gap <= rep.slope_bound + 1e-6);
    CHECK(std::abs(rep.ratio_x1_u - 1.0) < 0.01);
    CHECK(std::abs(rep.ratio_x2_u - 1.0) < 0.01);
  }
  SUBCASE("equal starts never separate") {
    const SyncReport rep = sync_diagnostics(testing::nohorm(), cfg, Eigen::Vector2d(1.0, 1.0));
    CHECK(rep.exact_sync);
    CHECK(rep.max_z_gap <= 4e-16);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(
        sync_diagnostics(testing::nohorm(), cfg, Eigen::Vector2d(0.0, 1.0)),
        std::invalid_argument);
    ModelSpec unequal = testing::nohorm();
    unequal.competition = LinearCompetition{Eigen::Vector2d(1.0, 2.0)};
    CHECK_THROWS_AS(sync_diagnostics(unequal, cfg, Eigen::Vector2d(1.0, 1.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("strong dispersal drives proportions to the dominant left eigenvector") {
  ModelSpec spec;
  spec.n = 2;
  spec.a = Eigen::Vector2d(1.0, 1.2);
  spec.competition = LinearCompetition{Eigen::Vector2d(1.0, 1.0)};
  spec.dispersal = Eigen::Matrix2d{{-1.0, 1.0}, {2.0, -2.0}};
  spec.noise = NoiseSpec::sigma_correlation(Eigen::Vector2d(0.6, 0.8),
                                            Eigen::Matrix2d::Identity());

  const Eigen::VectorXd evec = dominant_left_eigenvector(spec.dispersal);
  CHECK(evec[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(evec[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  const auto rows =
      dispersal_limit_table(spec, {1.0, 10.0, 100.0, 1000.0}, mc_cfg(400.0, 49), 2);
  REQUIRE(rows.size() == 4);
  CHECK(rows.back().max_abs_error < 0.02);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].max_abs_error <= rows[i - 1].max_abs_error + 1e-6);
  // The aggregated single-patch analogue is the delta -> infinity limit.
  CHECK(std::abs(rows.back().r_estimate - rows.back().r_limit) <=
        3.0 * rows.back().r_stderr + 1e-3);

  ModelSpec reducible = spec;
  reducible.dispersal.setZero();
  CHECK_THROWS_AS(dispersal_limit_table(reducible, {1.0}, mc_cfg(10.0, 50), 1),
                  std::invalid_argument);
}

TEST_CASE("symmetric dispersal splits the proportions evenly at large delta") {
  const ModelSpec spec = testing::two_patch_diagonal(1.0, 1.1, 1.0, 1.0, 0.5, 0.5);
  const auto rows = dispersal_limit_table(spec, {1000.0}, mc_cfg(400.0, 51), 1);
  CHECK(std::abs(rows[0].proportions[0] - 0.5) < 0.01);
  CHECK(std::abs(rows[0].proportions[1] - 0.5) < 0.01);

  std::ostringstream os;
  write_dispersal_limit_csv(os, rows, 51);
  CHECK(os.str().find("delta,proportion1,proportion2,max_abs_error,r,r_stderr,r_limit") !=
        std::string::npos);
}

TEST_CASE("convergence CSV export is self-describing") {
  ConvergenceReport report;
  report.checkpoints = {1.0, 10.0};
  report.distances = {0.5, 0.1};
  report.replicates = 8;
  std::ostringstream os;
  write_convergence_csv(os, report, 3);
  const std::string text = os.str();
  CHECK(text.find("t,w1_distance,replicates") != std::string::npos);
  CHECK(text.find("10,") != std::string::npos);
}
