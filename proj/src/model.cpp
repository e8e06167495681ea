#include "patchdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace patchdyn {

namespace {

constexpr double kEdgeThreshold = 1e-12;   // structural zero vs rounding
constexpr double kRowSumTol = 1e-10;       // allows decimal-text round trips
constexpr double kRankTol = 1e-10;         // relative singular value cutoff

std::string describe(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

double competition_eval(const CompetitionSpec& comp, int patch, double x) {
  struct Eval {
    int i;
    double x;
    double operator()(const LinearCompetition& c) const { return c.kappa[i] * x; }
    double operator()(const PowerLawCompetition& c) const {
      return c.kappa[i] * std::pow(x, c.exponent);
    }
    double operator()(const TabulatedCompetition& c) const {
      const auto& tab = c.tables.at(static_cast<std::size_t>(i));
      if (tab.empty()) return 0.0;
      if (x <= tab.front()[0]) return tab.front()[1];
      if (x >= tab.back()[0]) {
        if (tab.size() == 1) return tab.back()[1];
        const auto& p0 = tab[tab.size() - 2];
        const auto& p1 = tab.back();
        const double slope = (p1[1] - p0[1]) / (p1[0] - p0[0]);
        return p1[1] + slope * (x - p1[0]);
      }
      auto hi = std::upper_bound(tab.begin(), tab.end(), x,
                                 [](double v, const std::array<double, 2>& p) {
                                   return v < p[0];
                                 });
      const auto& p1 = *hi;
      const auto& p0 = *(hi - 1);
      const double w = (x - p0[0]) / (p1[0] - p0[0]);
      return p0[1] + w * (p1[1] - p0[1]);
    }
  };
  return std::visit(Eval{patch, x}, comp);
}

int competition_patches(const CompetitionSpec& comp) {
  struct Size {
    int operator()(const LinearCompetition& c) const {
      return static_cast<int>(c.kappa.size());
    }
    int operator()(const PowerLawCompetition& c) const {
      return static_cast<int>(c.kappa.size());
    }
    int operator()(const TabulatedCompetition& c) const {
      return static_cast<int>(c.tables.size());
    }
  };
  return std::visit(Size{}, comp);
}

NoiseSpec NoiseSpec::explicit_gamma(Eigen::MatrixXd gamma) {
  NoiseSpec out;
  out.gamma_ = std::move(gamma);
  return out;
}

Eigen::MatrixXd build_gamma(const Eigen::VectorXd& sigma,
                            const Eigen::MatrixXd& corr) {
  const auto n = sigma.size();
  if (corr.rows() != n || corr.cols() != n)
    throw std::invalid_argument("build_gamma: correlation shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(corr(i, i) - 1.0) > 1e-8)
      throw std::invalid_argument("not a correlation matrix: diagonal != 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(corr(i, j)) > 1.0 + 1e-12)
        throw std::invalid_argument("not a correlation matrix: entry outside [-1,1]");
      if (std::abs(corr(i, j) - corr(j, i)) > 1e-12)
        throw std::invalid_argument("not a correlation matrix: not symmetric");
    }
  }

  const Eigen::MatrixXd target =
      sigma.asDiagonal() * corr * sigma.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  if (vals.minCoeff() < -1e-8)
    throw std::invalid_argument("not a correlation matrix: negative eigenvalue " +
                                describe(vals.minCoeff()));

  // Keep drivers above the rank cutoff; eigenvalues come sorted ascending.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigt(
      (target + target.transpose()) / 2.0);
  const Eigen::VectorXd tvals = eigt.eigenvalues();
  const double cutoff = kRankTol * std::max(tvals.cwiseAbs().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (tvals[i] > cutoff && tvals[i] > 0.0) keep.push_back(i);

  Eigen::MatrixXd gamma(static_cast<Eigen::Index>(keep.size()), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    Eigen::VectorXd row =
        std::sqrt(tvals[keep[r]]) * eigt.eigenvectors().col(keep[r]);
    // Deterministic sign: first entry of largest magnitude is positive.
    Eigen::Index imax = 0;
    row.cwiseAbs().maxCoeff(&imax);
    if (row[imax] < 0.0) row = -row;
    gamma.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return gamma;
}

NoiseSpec NoiseSpec::sigma_correlation(const Eigen::VectorXd& sigma,
                                       const Eigen::MatrixXd& corr) {
  return explicit_gamma(build_gamma(sigma, corr));
}

Eigen::MatrixXd effective_sigma(const ModelSpec& spec) {
  return spec.noise.sigma();
}

void check_dimensions(const ModelSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (spec.a.size() != spec.n)
    throw std::invalid_argument("model: growth vector size != n");
  if (spec.dispersal.rows() != spec.n || spec.dispersal.cols() != spec.n)
    throw std::invalid_argument("model: dispersal matrix is not n x n");
  if (spec.noise.patches() != spec.n)
    throw std::invalid_argument("model: noise factor column count != n");
  if (competition_patches(spec.competition) != spec.n)
    throw std::invalid_argument("model: competition spec size != n");
}

bool dispersal_irreducible(const Eigen::MatrixXd& dispersal) {
  const int n = static_cast<int>(dispersal.rows());
  if (n == 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (v == u || seen[static_cast<std::size_t>(v)]) continue;
        const double rate = transpose ? dispersal(v, u) : dispersal(u, v);
        if (rate > kEdgeThreshold) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

namespace {

// Per-patch sufficient condition: b_i(x) - a_i > gamma_b for x >= M_b,
// verified on a sample grid.  Analytic witness for Linear/PowerLaw.
struct CompetitionCheck {
  bool ok = false;
  std::optional<std::pair<double, double>> witness;
  std::vector<std::string> warnings;
};

CompetitionCheck check_competition(const ModelSpec& spec) {
  CompetitionCheck out;
  const double gamma_b = 1.0;
  const int n = spec.n;

  auto grid_holds = [&](double m_b, double upto) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k <= 64; ++k) {
        const double x = m_b + (upto - m_b) * k / 64.0;
        if (!(competition_eval(spec.competition, i, x) - spec.a[i] > gamma_b * (1.0 - 1e-12)))
          return false;
      }
    }
    return true;
  };

  if (const auto* lin = std::get_if<LinearCompetition>(&spec.competition)) {
    double m_b = 1e-6;
    for (int i = 0; i < n; ++i) {
      if (!(lin->kappa[i] > 0.0)) {
        out.warnings.push_back("competition: kappa must be positive in patch " +
                               std::to_string(i + 1));
        return out;
      }
      m_b = std::max(m_b, (spec.a[i] + 1.0) / lin->kappa[i]);
    }
    out.ok = grid_holds(m_b, 10.0 * m_b);
    if (out.ok) out.witness = {gamma_b, m_b};
    return out;
  }
  if (const auto* pow = std::get_if<PowerLawCompetition>(&spec.competition)) {
    double m_b = 1e-6;
    for (int i = 0; i < n; ++i) {
      if (!(pow->kappa[i] > 0.0) || !(pow->exponent >= 1.0)) {
        out.warnings.push_back("competition: power law needs kappa > 0 and p >= 1");
        return out;
      }
      m_b = std::max(m_b, std::pow((spec.a[i] + 1.0) / pow->kappa[i],
                                   1.0 / pow->exponent));
    }
    out.ok = grid_holds(m_b, 10.0 * m_b);
    if (out.ok) out.witness = {gamma_b, m_b};
    return out;
  }

  // Tabulated: sample up to 10x a guessed threshold.  Only the per-patch
  // sufficient condition is examined, which is weaker than the joint bound;
  // flagged as a warning either way.
  double m_guess = 1.0;
  for (int i = 0; i < n; ++i) {
    double x = 1.0;
    bool found = false;
    for (int k = 0; k < 80; ++k) {
      if (competition_eval(spec.competition, i, x) - spec.a[i] > gamma_b) {
        found = true;
        break;
      }
      x *= 2.0;
    }
    if (!found) {
      out.warnings.push_back(
          "competition: tabulated rates never exceed growth + 1 in patch " +
          std::to_string(i + 1));
      return out;
    }
    m_guess = std::max(m_guess, x);
  }
  out.ok = grid_holds(m_guess, 10.0 * m_guess);
  if (out.ok) out.witness = {gamma_b, m_guess};
  out.warnings.push_back(
      "competition: tabulated family checked against the per-patch sufficient "
      "condition only, not the joint average bound");
  return out;
}

}  // namespace

ValidationReport validate_spec(const ModelSpec& spec) {
  check_dimensions(spec);
  ValidationReport report;
  const int n = spec.n;

  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      row_sum += spec.dispersal(i, j);
      if (i != j && spec.dispersal(i, j) < 0.0)
        report.violations.push_back("dispersal: negative off-diagonal entry (" +
                                    std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ")");
    }
    if (std::abs(row_sum) > kRowSumTol)
      report.violations.push_back("dispersal: row " + std::to_string(i + 1) +
                                  " sums to " + describe(row_sum) +
                                  ", expected 0");
  }

  report.irreducible = dispersal_irreducible(spec.dispersal);
  if (!report.irreducible)
    report.warnings.push_back(
        "dispersal: matrix is reducible; restrict to maximal irreducible "
        "patch subsets for the theory to apply");

  const Eigen::MatrixXd sigma = effective_sigma(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const Eigen::VectorXd vals = eig.eigenvalues();
  if (vals.size() > 0 && vals.minCoeff() < -1e-10)
    report.violations.push_back("noise: covariance has negative eigenvalue " +
                                describe(vals.minCoeff()));
  const double vmax = vals.size() > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i] > kRankTol * std::max(vmax, 0.0) && vals[i] > 0.0) ++rank;
  report.sigma_rank = rank;
  report.degenerate = rank < n;

  for (int i = 0; i < n; ++i) {
    const double b0 = competition_eval(spec.competition, i, 0.0);
    if (b0 != 0.0)
      report.violations.push_back("competition: b(0) = " + describe(b0) +
                                  " != 0 in patch " + std::to_string(i + 1));
    if (!std::isfinite(competition_eval(spec.competition, i, 1.0)))
      report.violations.push_back("competition: non-finite value in patch " +
                                  std::to_string(i + 1));
  }

  auto comp = check_competition(spec);
  report.competition_ok = comp.ok;
  report.competition_witness = comp.witness;
  for (auto& w : comp.warnings) report.warnings.push_back(std::move(w));
  if (!report.competition_ok)
    report.warnings.push_back(
        "competition: growth condition could not be certified; trajectories "
        "may explode");

  return report;
}

}  // namespace patchdyn
