#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace patchdyn {

// Per-capita competition b_i(x).  All families vanish at 0; Linear and
// PowerLaw are unbounded increasing, Tabulated is linearly interpolated with
// constant-slope extrapolation beyond the last sample.
struct LinearCompetition {
  Eigen::VectorXd kappa;  // b_i(x) = kappa_i * x
};

struct PowerLawCompetition {
  Eigen::VectorXd kappa;  // b_i(x) = kappa_i * x^p
  double exponent = 1.0;  // p >= 1
};

struct TabulatedCompetition {
  // One table per patch; each table is a list of (x, b(x)) points starting at
  // (0, 0) with nondecreasing x and b.
  std::vector<std::vector<std::array<double, 2>>> tables;
};

using CompetitionSpec =
    std::variant<LinearCompetition, PowerLawCompetition, TabulatedCompetition>;

double competition_eval(const CompetitionSpec& comp, int patch, double x);
int competition_patches(const CompetitionSpec& comp);

// Environmental noise factor.  Canonical storage is the k x n matrix G whose
// rows are independent Brownian drivers, so the effective covariance is
// Sigma = G^T G and the per-patch increments are dE = G^T dB.  k < n flags
// degenerate noise (e.g. a single driver shared by all patches).
class NoiseSpec {
 public:
  NoiseSpec() = default;

  static NoiseSpec explicit_gamma(Eigen::MatrixXd gamma);
  // Factorizes diag(sigma) * corr * diag(sigma); k equals the numerical rank
  // of corr, rank-deficient correlations are accepted.
  static NoiseSpec sigma_correlation(const Eigen::VectorXd& sigma,
                                     const Eigen::MatrixXd& corr);

  const Eigen::MatrixXd& gamma() const { return gamma_; }
  int drivers() const { return static_cast<int>(gamma_.rows()); }
  int patches() const { return static_cast<int>(gamma_.cols()); }
  Eigen::MatrixXd sigma() const { return gamma_.transpose() * gamma_; }

 private:
  Eigen::MatrixXd gamma_;  // k x n
};

// Free-function forms of the noise plumbing.
Eigen::MatrixXd build_gamma(const Eigen::VectorXd& sigma,
                            const Eigen::MatrixXd& corr);

struct ModelSpec {
  int n = 0;                  // patch count
  Eigen::VectorXd a;          // per-patch growth rates, 1/time
  CompetitionSpec competition = LinearCompetition{};
  Eigen::MatrixXd dispersal;  // n x n, row sums 0, off-diagonals >= 0
  NoiseSpec noise;
};

Eigen::MatrixXd effective_sigma(const ModelSpec& spec);

// Throws std::invalid_argument when shapes are inconsistent with n.
void check_dimensions(const ModelSpec& spec);

struct ValidationReport {
  bool irreducible = false;
  int sigma_rank = 0;
  bool degenerate = false;
  bool competition_ok = false;
  // Witness (gamma_b, M_b) for the per-patch sufficient growth condition,
  // present only when competition_ok could be certified.
  std::optional<std::pair<double, double>> competition_witness;
  std::vector<std::string> warnings;    // informational
  std::vector<std::string> violations;  // failed invariants
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const ModelSpec& spec);

// Strong connectivity of {i -> j : D_ij > 1e-12, i != j}.
bool dispersal_irreducible(const Eigen::MatrixXd& dispersal);

}  // namespace patchdyn
