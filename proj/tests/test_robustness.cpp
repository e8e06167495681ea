#include <doctest.h>

#include <cmath>

#include "patchdyn/robustness.hpp"
#include "test_support.hpp"

using namespace patchdyn;

namespace {

SimConfig mc_cfg(std::uint64_t seed) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 100.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("theta = 0 returns the model unchanged, field by field") {
  const ModelSpec spec = testing::degenerate_benchmark();
  PerturbationSpec pert;
  pert.theta = 0.0;
  pert.seed = 9;
  const ModelSpec out = perturb_spec(spec, pert);
  CHECK((out.a - spec.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.dispersal - spec.dispersal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.noise.gamma() - spec.noise.gamma()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("targeting growth rates only moves exactly them, by exactly theta") {
  const ModelSpec spec = testing::degenerate_benchmark();
  PerturbationSpec pert;
  pert.theta = 0.01;
  pert.target_dispersal = false;
  pert.target_gamma = false;
  pert.seed = 10;
  const ModelSpec out = perturb_spec(spec, pert);
  CHECK((out.a - spec.a).cwiseAbs().maxCoeff() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK((out.dispersal - spec.dispersal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.noise.gamma() - spec.noise.gamma()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dispersal repair keeps the dispersal-matrix class") {
  const ModelSpec spec = testing::degenerate_benchmark();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PerturbationSpec pert;
    pert.theta = 0.01;
    pert.seed = seed;
    const ModelSpec out = perturb_spec(spec, pert);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(out.dispersal.row(i).sum()) <= 1e-12);
      for (int j = 0; j < 2; ++j)
        if (i != j) CHECK(out.dispersal(i, j) >= 0.0);
    }
    CHECK(validate_spec(out).ok());
  }
}

TEST_CASE("a perturbation that disconnects the graph is refused") {
  // Tiny off-diagonal rates: clipping at zero can sever the 2-cycle.
  const ModelSpec spec = testing::two_patch_rank1(3.0, 4.0, 1e-4, 1e-4, 1.0, 1.0);
  PerturbationSpec pert;
  pert.theta = 0.05;
  bool refused = false;
  for (std::uint64_t seed = 0; seed < 50 && !refused; ++seed) {
    pert.seed = seed;
    try {
      (void)perturb_spec(spec, pert);
    } catch (const std::runtime_error&) {
      refused = true;
    }
  }
  CHECK(refused);
}

TEST_CASE("continuity scan: deviations vanish at theta 0 and grow with theta") {
  const ModelSpec spec = testing::degenerate_benchmark();
  const ContinuityScan scan =
      r_continuity_scan(spec, {0.0, 0.005, 0.01, 0.02}, 10, mc_cfg(77), 2);
  REQUIRE(scan.rows.size() == 40);
  CHECK(scan.mean_dev[0] == 0.0);
  CHECK(scan.max_dev[0] == 0.0);
  for (std::size_t i = 1; i + 1 < scan.thetas.size(); ++i)
    CHECK(scan.mean_dev[i] <= scan.mean_dev[i + 1] + 1e-9);
  for (const auto& row : scan.rows) CHECK(std::isfinite(row.abs_dev));
}

TEST_CASE("deviation envelope is monotone when directions are shared across theta") {
  const ModelSpec spec = testing::degenerate_benchmark();
  const ContinuityScan scan =
      r_continuity_scan(spec, {0.005, 0.01}, 12, mc_cfg(78), 2);
  CHECK(scan.max_dev[0] <= scan.max_dev[1] + 1e-9);
}

TEST_CASE("a constant shift of the growth rates moves r by exactly the shift") {
  const ModelSpec spec = testing::degenerate_benchmark();
  const double base = r_closedform_2patch(spec).value;
  const double c = 0.01;
  // Both the shift and its negation deviate by |c|: r is exactly linear in a
  // common growth offset because the proportion dynamics never see it.
  for (double sign : {1.0, -1.0}) {
    ModelSpec shifted = spec;
    shifted.a.array() += sign * c;
    const double dev = std::abs(r_closedform_2patch(shifted).value - base);
    CHECK(dev == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("persistence survives small perturbations and flips under a large shift") {
  const ModelSpec spec = testing::degenerate_benchmark();
  const PerturbationVerdicts small =
      persistence_under_perturbation(spec, 0.01, 10, mc_cfg(79), 2);
  CHECK(small.persistent == 10);

  // Shifting every growth rate down by r + 0.1 flips the verdict.
  const double r = r_closedform_2patch(spec).value;
  ModelSpec sunk = spec;
  sunk.a.array() -= (r + 0.1);
  CHECK(classify(sunk, mc_cfg(80)).label == Label::Extinct);

  ModelSpec not_persistent = testing::single_patch(0.5, std::sqrt(2.0));
  CHECK_THROWS_AS(
      persistence_under_perturbation(not_persistent, 0.01, 2, mc_cfg(81), 1),
      std::invalid_argument);
}
