#include "patchdyn/reduce1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "quad.hpp"

namespace patchdyn {

namespace {

constexpr double kBoundaryMass = 1e-10;
constexpr int kDefaultGrid = 4096;
constexpr int kMaxGrid = 1 << 20;

double exponent_integrand(const ScalarDiffusion& d, double y) {
  return 2.0 * d.mu(y) / d.v(y);
}

// Integral of 2 mu / v from the central anchor to y.
double exponent_from_anchor(const ScalarDiffusion& d, double y) {
  return quad::adaptive([&](double s) { return exponent_integrand(d, s); }, 0.5,
                        y, 1e-12);
}

double log_unnormalized(const ScalarDiffusion& d, double y) {
  return -std::log(d.v(y)) + exponent_from_anchor(d, y);
}

// Interior zero of the drift; exists when mu(0+) > 0 > mu(1-).
double drift_root(const ScalarDiffusion& d) {
  double lo = 1e-12, hi = 1.0 - 1e-12;
  double flo = d.mu(lo), fhi = d.mu(hi);
  if (!(flo > 0.0 && fhi < 0.0)) return 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = d.mu(mid);
    if (fm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScalarDiffusion reduce_2patch(const ModelSpec& spec) {
  check_dimensions(spec);
  if (spec.n != 2)
    throw std::invalid_argument("reduce_2patch: model must have n = 2");
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  const double alpha = spec.dispersal(0, 1);
  const double beta = spec.dispersal(1, 0);
  const double da = spec.a[0] - spec.a[1];
  const double p = sigma(1, 1) - sigma(0, 1);
  const double c = sigma(0, 0) - 2.0 * sigma(0, 1) + sigma(1, 1);

  // mu(y) = y(1-y) [da + p - c y] + beta - (alpha + beta) y
  ScalarDiffusion d;
  d.mu0 = beta;
  d.mu1 = (da + p) - (alpha + beta);
  d.mu2 = -(da + p) - c;
  d.mu3 = c;
  d.v_scale = c;
  return d;
}

std::vector<double> StationaryDensity1D::density() const {
  std::vector<double> out(log_density.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_density[i]);
  return out;
}

double StationaryDensity1D::log_density_at(double y) const {
  if (y <= 0.0 || y >= 1.0)
    throw std::invalid_argument("log_density_at: y outside (0, 1)");
  return log_unnormalized(diffusion, y) - log_norm;
}

StationaryDensity1D stationary_density(const ScalarDiffusion& diff, double eps,
                                       int m) {
  if (!(diff.v_scale > 0.0) || diff.v_scale < 1e-300)
    throw std::invalid_argument("deterministic reduction: use ystar");

  // Scale and sharpness estimates drive the grid choices.
  const double y_peak = drift_root(diff);
  const double curvature = std::abs(diff.mu_prime(y_peak));
  double width = 0.25;
  if (curvature > 0.0 && diff.v(y_peak) > 0.0)
    width = std::min(0.25, std::sqrt(diff.v(y_peak) / (2.0 * curvature)));

  // Probe the unnormalized log density to get a normalization scale for the
  // truncation certificates.
  std::vector<double> probe_y;
  for (int i = 1; i < 256; ++i) probe_y.push_back(i / 256.0);
  for (int i = -24; i <= 24; ++i) {
    const double y = y_peak + width * i / 3.0;
    if (y > 1e-9 && y < 1.0 - 1e-9) probe_y.push_back(y);
  }
  double log_max = -std::numeric_limits<double>::infinity();
  for (double y : probe_y)
    log_max = std::max(log_max, log_unnormalized(diff, y));

  auto tail_ok = [&](double cand, bool left) {
    const double y0 = left ? cand : 1.0 - cand;
    const double y1 = left ? 0.5 * cand : 1.0 - 0.5 * cand;
    const double l0 = log_unnormalized(diff, y0);
    const double l1 = log_unnormalized(diff, y1);
    if (l1 > l0) return false;  // density not yet decaying toward the boundary
    // Mass beyond the cut is below cand * p(cut) once the tail is monotone;
    // compare against the probe max with a wide safety margin.
    return cand * std::exp(l0 - log_max) < kBoundaryMass * 1e-2 * width;
  };

  double eps_used = eps;
  if (eps_used <= 0.0) {
    bool found = false;
    const double margin = 0.5 * std::min(y_peak, 1.0 - y_peak);
    for (int k = 3; k <= 200; ++k) {
      const double cand = std::pow(2.0, -k);
      if (cand >= margin) continue;
      if (tail_ok(cand, true) && tail_ok(cand, false)) {
        eps_used = cand;
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error(
          "stationary density: boundary mass does not vanish (non-integrable "
          "reduction?)");
  }

  int m_used = m;
  if (m_used <= 0) {
    const double needed = 12.0 * (1.0 - 2.0 * eps_used) / width;
    m_used = kDefaultGrid;
    while (m_used < needed && m_used < kMaxGrid) m_used *= 2;
    if (m_used > kMaxGrid)
      throw std::runtime_error("stationary density: peak too narrow to resolve");
  }
  if (m_used % 2 != 0) ++m_used;

  StationaryDensity1D out;
  out.diffusion = diff;
  out.eps = eps_used;
  const int points = m_used + 1;
  const double h = (1.0 - 2.0 * eps_used) / m_used;
  out.grid.resize(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) out.grid[static_cast<std::size_t>(j)] = eps_used + h * j;

  // Cumulative exponent outward from the anchor; adjacent panels are short,
  // so the adaptive rule is effectively exact on each.
  std::vector<double> expo(static_cast<std::size_t>(points));
  int j0 = static_cast<int>(std::llround((0.5 - eps_used) / h));
  j0 = std::clamp(j0, 0, points - 1);
  auto integrand = [&](double s) { return exponent_integrand(diff, s); };
  expo[static_cast<std::size_t>(j0)] =
      quad::adaptive(integrand, 0.5, out.grid[static_cast<std::size_t>(j0)], 1e-13);
  for (int j = j0 + 1; j < points; ++j)
    expo[static_cast<std::size_t>(j)] =
        expo[static_cast<std::size_t>(j - 1)] +
        quad::adaptive(integrand, out.grid[static_cast<std::size_t>(j - 1)],
                       out.grid[static_cast<std::size_t>(j)], 1e-13);
  for (int j = j0 - 1; j >= 0; --j)
    expo[static_cast<std::size_t>(j)] =
        expo[static_cast<std::size_t>(j + 1)] +
        quad::adaptive(integrand, out.grid[static_cast<std::size_t>(j + 1)],
                       out.grid[static_cast<std::size_t>(j)], 1e-13);

  out.log_density.resize(static_cast<std::size_t>(points));
  double peak = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < points; ++j) {
    const double y = out.grid[static_cast<std::size_t>(j)];
    out.log_density[static_cast<std::size_t>(j)] =
        -std::log(diff.v(y)) + expo[static_cast<std::size_t>(j)];
    peak = std::max(peak, out.log_density[static_cast<std::size_t>(j)]);
  }

  std::vector<double> scaled(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j)
    scaled[static_cast<std::size_t>(j)] =
        std::exp(out.log_density[static_cast<std::size_t>(j)] - peak);
  const double z = quad::simpson_uniform(scaled, h);
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::runtime_error("stationary density: normalization failed");
  out.log_norm = std::log(z) + peak;
  for (auto& v : out.log_density) v -= out.log_norm;

  for (auto& v : scaled) v /= z;
  out.mass_check = quad::trapezoid_uniform(scaled, h);

  const double left_bound = eps_used * std::exp(out.log_density.front());
  const double right_bound = eps_used * std::exp(out.log_density.back());
  if (left_bound > kBoundaryMass || right_bound > kBoundaryMass)
    throw std::runtime_error(
        "stationary density: truncated boundary mass above certificate");

  return out;
}

double density_moment(const StationaryDensity1D& d, int k) {
  if (k < 0) throw std::invalid_argument("density_moment: order must be >= 0");
  return density_expectation(d, [k](double y) { return std::pow(y, k); }).value;
}

QuadratureValue density_expectation(const StationaryDensity1D& d,
                                    const std::function<double(double)>& f) {
  const std::size_t n = d.grid.size();
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i)
    vals[i] = f(d.grid[i]) * std::exp(d.log_density[i]);
  const double fine = quad::simpson_uniform(vals, d.h());
  std::vector<double> coarse;
  coarse.reserve(n / 2 + 1);
  for (std::size_t i = 0; i < n; i += 2) coarse.push_back(vals[i]);
  const double rough = quad::simpson_uniform(coarse, 2.0 * d.h());
  QuadratureValue out;
  out.value = fine;
  out.error = std::abs(fine - rough) + kBoundaryMass;
  return out;
}

double ystar(double a1, double a2, double alpha, double beta) {
  const double da = a1 - a2;
  if (!(alpha + beta > 0.0) && da == 0.0)
    throw std::invalid_argument("ystar: need alpha + beta > 0 or a1 != a2");
  auto residual = [&](double y) {
    return da * (1.0 - y) * y + beta - (alpha + beta) * y;
  };
  double root;
  if (da == 0.0) {
    root = beta / (alpha + beta);
  } else {
    // da y^2 - (da - alpha - beta) y - beta = 0, stable two-root form.
    const double b_coef = -(da - alpha - beta);
    const double disc = b_coef * b_coef + 4.0 * da * beta;
    if (disc < 0.0) throw std::runtime_error("ystar: no real root");
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b_coef + std::copysign(sq, b_coef));
    const double r1 = q / da;
    const double r2 = q != 0.0 ? -beta / q : r1;
    auto stable = [&](double y) {
      return da * (1.0 - 2.0 * y) - (alpha + beta) < 0.0;
    };
    const bool ok1 = r1 >= -1e-12 && r1 <= 1.0 + 1e-12;
    const bool ok2 = r2 >= -1e-12 && r2 <= 1.0 + 1e-12;
    if (ok1 && (!ok2 || stable(r1)))
      root = r1;
    else if (ok2)
      root = r2;
    else
      throw std::runtime_error("ystar: no root inside [0, 1]");
  }
  root = std::clamp(root, 0.0, 1.0);
  const double scale =
      std::max({1.0, std::abs(da), alpha + beta, std::abs(beta)});
  if (std::abs(residual(root)) > 1e-12 * scale)
    throw std::runtime_error("ystar: residual check failed");
  return root;
}

std::vector<double> normalize_log_density(const std::vector<double>& grid,
                                          std::vector<double> log_values) {
  if (grid.size() != log_values.size() || grid.size() < 3)
    throw std::invalid_argument("normalize_log_density: bad grid");
  const double h = grid[1] - grid[0];
  const double peak = *std::max_element(log_values.begin(), log_values.end());
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::exp(log_values[i] - peak);
  const double z = quad::simpson_uniform(out, h);
  for (auto& v : out) v /= z;
  return out;
}

std::vector<double> printed_density_diagonal(const std::vector<double>& grid,
                                             double a1, double a2, double alpha,
                                             double beta, double s1sq,
                                             double s2sq) {
  const double ssum = s1sq + s2sq;
  const double a_hat1 = 2.0 * s1sq / ssum;
  const double a_hat2 = 2.0 * s2sq / ssum;
  const double b_hat = 2.0 / ssum * (a1 - a2 + beta - alpha);
  std::vector<double> logs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    logs[i] = (b_hat - a_hat1) * std::log(y) +
              (-b_hat - a_hat2) * std::log(1.0 - y) -
              2.0 / ssum * (beta / y + alpha / (1.0 - y));
  }
  return normalize_log_density(grid, std::move(logs));
}

std::vector<double> printed_density_rank1(const std::vector<double>& grid,
                                          double a1, double a2, double alpha,
                                          double beta, double sigma1,
                                          double sigma2) {
  const double d = sigma1 - sigma2;
  if (d == 0.0)
    throw std::invalid_argument("printed_density_rank1: needs sigma1 != sigma2");
  const double a_hat1 = -2.0 * sigma1 / d;
  const double a_hat2 = 2.0 * sigma2 / d;
  const double b_hat = 2.0 / (d * d) * (a1 - a2 + beta - alpha);
  std::vector<double> logs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    logs[i] = (b_hat - a_hat1) * std::log(y) +
              (-b_hat - a_hat2) * std::log(1.0 - y) -
              2.0 / (d * d) * (beta / y + alpha / (1.0 - y));
  }
  return normalize_log_density(grid, std::move(logs));
}

double density_sup_gap(const std::vector<double>& p1,
                       const std::vector<double>& p2) {
  if (p1.size() != p2.size() || p1.empty())
    throw std::invalid_argument("density_sup_gap: size mismatch");
  double gap = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    gap = std::max(gap, std::abs(p1[i] - p2[i]));
    peak = std::max(peak, std::abs(p1[i]));
  }
  if (peak == 0.0) return 0.0;
  return gap / peak;
}

double logistic_stationary_moment(double growth, double comp, double vol,
                                  int k) {
  if (!(comp > 0.0)) throw std::invalid_argument("logistic moment: comp > 0");
  if (!(vol > 0.0)) throw std::invalid_argument("logistic moment: vol > 0");
  const double shape = 2.0 * growth / (vol * vol) - 1.0;  // u^(shape-1) e^(-c u)
  const double rate = 2.0 * comp / (vol * vol);
  if (!(shape > 0.0))
    throw std::invalid_argument(
        "logistic moment: not positive recurrent (growth <= vol^2 / 2)");

  // Substitute u = e^w; integrands e^((shape + k) w - rate e^w) are smooth
  // and compactly concentrated.
  const double mode = shape / rate;
  const double w_lo = std::log(mode) - std::max(80.0 / shape, 40.0);
  const double w_hi = std::log((shape + k + 60.0 + 10.0 * std::sqrt(shape + k)) / rate);
  const int points = (1 << 15) + 1;
  const double h = (w_hi - w_lo) / (points - 1);
  std::vector<double> num(static_cast<std::size_t>(points)),
      den(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double w = w_lo + h * i;
    const double base = -rate * std::exp(w);
    den[static_cast<std::size_t>(i)] = std::exp(shape * w + base);
    num[static_cast<std::size_t>(i)] = std::exp((shape + k) * w + base);
  }
  const double z = quad::simpson_uniform(den, h);
  if (!(z > 0.0)) throw std::runtime_error("logistic moment: normalization failed");
  return quad::simpson_uniform(num, h) / z;
}

}  // namespace patchdyn
