#include <doctest.h>

#include <Eigen/Dense>
#include <set>

#include "patchdyn/config.hpp"
#include "patchdyn/model.hpp"
#include "patchdyn/rng.hpp"
#include "test_support.hpp"

using namespace patchdyn;

namespace {

// Reachability oracle by exhaustive path enumeration: adjacency closure over
// paths of length < n.
bool strongly_connected_oracle(const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(d.rows());
  Eigen::MatrixXi reach = Eigen::MatrixXi::Identity(n, n);
  Eigen::MatrixXi adj(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) adj(i, j) = (i != j && d(i, j) > 1e-12) ? 1 : 0;
  for (int len = 0; len < n; ++len) {
    Eigen::MatrixXi next = reach;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (reach(i, k))
          for (int j = 0; j < n; ++j)
            if (adj(k, j)) next(i, j) = 1;
    reach = next;
  }
  return (reach.array() > 0).all();
}

}  // namespace

TEST_CASE("two-cycle dispersal is irreducible") {
  const ModelSpec spec = testing::two_patch_rank1(3.0, 4.0, 1.0, 1.0, 1.0, 1.0);
  const ValidationReport report = validate_spec(spec);
  CHECK(report.irreducible);
  CHECK(report.ok());
}

TEST_CASE("one-way chain is reducible, matching the path-enumeration oracle") {
  ModelSpec spec;
  spec.n = 3;
  spec.a = Eigen::Vector3d(1.0, 1.0, 1.0);
  spec.competition = LinearCompetition{Eigen::Vector3d(1.0, 1.0, 1.0)};
  spec.dispersal = Eigen::Matrix3d::Zero();
  spec.dispersal(0, 1) = 1.0;
  spec.dispersal(1, 2) = 1.0;
  spec.dispersal(0, 0) = -1.0;
  spec.dispersal(1, 1) = -1.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
  spec.noise = NoiseSpec::explicit_gamma(g);

  CHECK_FALSE(strongly_connected_oracle(spec.dispersal));
  CHECK_FALSE(validate_spec(spec).irreducible);
}

TEST_CASE("random support patterns match the oracle; reversal is an involution") {
  Rng rng(321);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        if (i != j && rng.next_unit() < 0.4) d(i, j) = 0.5 + rng.next_unit();
      d(i, i) = -d.row(i).sum();
    }
    CHECK(dispersal_irreducible(d) == strongly_connected_oracle(d));
    // Strong connectivity is invariant under reversing every edge, and
    // reversing twice restores the support.
    const Eigen::MatrixXd reversed = d.transpose();
    CHECK(dispersal_irreducible(d) == dispersal_irreducible(reversed));
    CHECK((reversed.transpose() - d).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("linear competition certifies the growth condition with its witness") {
  const ModelSpec spec = testing::two_patch_rank1(3.0, 4.0, 1.0, 1.0, 1.0, 1.0);
  const ValidationReport report = validate_spec(spec);
  CHECK(report.competition_ok);
  REQUIRE(report.competition_witness.has_value());
  CHECK(report.competition_witness->first == 1.0);
  CHECK(report.competition_witness->second == doctest::Approx(5.0));
  // Spot-check the certified inequality on a grid beyond M_b.
  for (int k = 0; k <= 32; ++k) {
    const double x = 5.0 + k * (45.0 / 32.0);
    for (int i = 0; i < 2; ++i)
      CHECK(competition_eval(spec.competition, i, x) - spec.a[i] > 1.0 - 1e-12);
  }
}

TEST_CASE("row-sum violations are reported with the row index, not thrown") {
  ModelSpec spec = testing::two_patch_rank1(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  spec.dispersal(1, 1) = -0.5;  // breaks row 2
  const ValidationReport report = validate_spec(spec);
  CHECK_FALSE(report.ok());
  REQUIRE_FALSE(report.violations.empty());
  bool named = false;
  for (const auto& v : report.violations)
    if (v.find("row 2") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("dimension mismatch is a hard error") {
  ModelSpec spec = testing::two_patch_rank1(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
  spec.a = Eigen::Vector3d(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
}

TEST_CASE("build_gamma reproduces the target covariance") {
  SUBCASE("uncorrelated") {
    const Eigen::MatrixXd g =
        build_gamma(Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity());
    CHECK(g.rows() == 2);
    const Eigen::MatrixXd sigma = g.transpose() * g;
    CHECK((sigma - Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("perfectly correlated collapses to one driver") {
    Eigen::Matrix2d ones;
    ones.setOnes();
    const double vol = 1.7;
    const Eigen::MatrixXd g = build_gamma(Eigen::Vector2d(vol, vol), ones);
    CHECK(g.rows() == 1);
    const Eigen::MatrixXd sigma = g.transpose() * g;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(sigma(i, j) == doctest::Approx(vol * vol).epsilon(1e-12));
  }
  SUBCASE("intermediate correlation") {
    Eigen::Matrix2d corr{{1.0, 0.5}, {0.5, 1.0}};
    const Eigen::MatrixXd g = build_gamma(Eigen::Vector2d(1.0, 1.0), corr);
    const Eigen::MatrixXd sigma = g.transpose() * g;
    CHECK(sigma(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("indefinite matrix is rejected") {
    Eigen::Matrix2d bad{{1.0, 2.0}, {2.0, 1.0}};
    CHECK_THROWS_WITH_AS(build_gamma(Eigen::Vector2d(1.0, 1.0), bad),
                         doctest::Contains("not a correlation matrix"),
                         std::invalid_argument);
  }
}

TEST_CASE("build_gamma product identity holds for random correlations") {
  Rng rng(99);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    Eigen::MatrixXd base(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) base(i, j) = rng.next_gauss();
    Eigen::MatrixXd cov = base * base.transpose();
    Eigen::VectorXd scale = cov.diagonal().cwiseSqrt();
    Eigen::MatrixXd corr =
        scale.cwiseInverse().asDiagonal() * cov * scale.cwiseInverse().asDiagonal();
    for (int i = 0; i < n; ++i) corr(i, i) = 1.0;
    Eigen::VectorXd vols(n);
    for (int i = 0; i < n; ++i) vols[i] = 0.5 + rng.next_unit();

    const Eigen::MatrixXd g = build_gamma(vols, corr);
    const Eigen::MatrixXd target = vols.asDiagonal() * corr * vols.asDiagonal();
    CHECK((g.transpose() * g - target).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("effective covariance follows the factor") {
  SUBCASE("diagonal factor") {
    ModelSpec spec = testing::two_patch_diagonal(1.0, 1.0, 1.0, 1.0, 1.0, 2.0);
    const Eigen::MatrixXd sigma = effective_sigma(spec);
    CHECK(sigma(0, 0) == 1.0);
    CHECK(sigma(1, 1) == 4.0);
    CHECK(sigma(0, 1) == 0.0);
  }
  SUBCASE("single driver is a rank-1 outer product") {
    ModelSpec spec = testing::two_patch_rank1(1.0, 1.0, 1.0, 1.0, 0.7, 1.3);
    const Eigen::MatrixXd sigma = effective_sigma(spec);
    CHECK(sigma(0, 0) == doctest::Approx(0.49));
    CHECK(sigma(0, 1) == doctest::Approx(0.91));
    CHECK(sigma(1, 1) == doctest::Approx(1.69));
    const ValidationReport report = validate_spec(spec);
    CHECK(report.sigma_rank == 1);
    CHECK(report.degenerate);
  }
  SUBCASE("zero factor") {
    ModelSpec spec = testing::two_patch_rank1(1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
    CHECK(effective_sigma(spec).cwiseAbs().maxCoeff() == 0.0);
    CHECK(validate_spec(spec).sigma_rank == 0);
  }
}

TEST_CASE("validation is deterministic") {
  const ModelSpec spec = testing::mixed_rank1_benchmark();
  const auto j1 = report_to_json(validate_spec(spec)).dump();
  const auto j2 = report_to_json(validate_spec(spec)).dump();
  CHECK(j1 == j2);
}

TEST_CASE("tabulated competition interpolates and extrapolates by slope") {
  TabulatedCompetition tab;
  tab.tables = {{{0.0, 0.0}, {1.0, 2.0}, {3.0, 4.0}}};
  const CompetitionSpec comp = tab;
  CHECK(competition_eval(comp, 0, 0.0) == 0.0);
  CHECK(competition_eval(comp, 0, 0.5) == doctest::Approx(1.0));
  CHECK(competition_eval(comp, 0, 2.0) == doctest::Approx(3.0));
  CHECK(competition_eval(comp, 0, 5.0) == doctest::Approx(6.0));  // slope 1 past the end
}

TEST_CASE("tabulated table not anchored at zero is a violation") {
  ModelSpec spec = testing::single_patch(1.0, 1.0);
  TabulatedCompetition tab;
  tab.tables = {{{0.0, 0.5}, {1.0, 2.0}}};
  spec.competition = tab;
  const ValidationReport report = validate_spec(spec);
  CHECK_FALSE(report.ok());
}

TEST_CASE("flat tabulated competition cannot be certified") {
  ModelSpec spec = testing::single_patch(1.0, 1.0);
  spec.competition = testing::zero_competition(1);
  const ValidationReport report = validate_spec(spec);
  CHECK(report.ok());  // a valid model, just not certifiably bounded
  CHECK_FALSE(report.competition_ok);
  CHECK_FALSE(report.competition_witness.has_value());
}

TEST_CASE("model JSON round trip preserves every field") {
  const ModelSpec spec = testing::mixed_rank1_benchmark();
  const ModelSpec back = model_from_json(model_to_json(spec), "$.model");
  CHECK(back.n == spec.n);
  CHECK((back.a - spec.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.dispersal - spec.dispersal).cwiseAbs().maxCoeff() == 0.0);
  CHECK((effective_sigma(back) - effective_sigma(spec)).cwiseAbs().maxCoeff() == 0.0);
}
