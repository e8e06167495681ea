#include "patchdyn/lyapunov.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "patchdyn/reduce1d.hpp"
#include "quad.hpp"

namespace patchdyn {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  bool all_equal = true;
  for (double x : v) {
    acc += (x - m) * (x - m);
    all_equal = all_equal && x == v.front();
  }
  if (all_equal) return 0.0;
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// First-half vs second-half drift check on batch statistics.
bool halves_agree(const std::vector<double>& batches) {
  const std::size_t half = batches.size() / 2;
  if (half < 2) return true;
  std::vector<double> first(batches.begin(), batches.begin() + static_cast<long>(half));
  std::vector<double> second(batches.begin() + static_cast<long>(half), batches.end());
  const double pooled =
      std::sqrt(sd_of(first) * sd_of(first) / static_cast<double>(first.size()) +
                sd_of(second) * sd_of(second) / static_cast<double>(second.size()));
  return std::abs(mean_of(first) - mean_of(second)) <= 5.0 * pooled + 1e-12;
}

Eigen::VectorXd uniform_simplex(int n) {
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

Eigen::VectorXd corner_simplex(int n) {
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, n > 1 ? 0.1 / (n - 1) : 1.0);
  if (n > 1) y[0] = 0.9;
  return y;
}

LyapunovEstimate timeavg_single(const ModelSpec& spec, const SimConfig& cfg,
                                const Eigen::VectorXd& y0, NoiseSource& noise) {
  cfg.validate();
  constexpr int kBatches = 50;
  SimplexStepper stepper(spec, cfg, y0);
  const Eigen::MatrixXd sigma = effective_sigma(spec);

  const long steps = cfg.steps();
  const long burn = cfg.burn_steps();
  const long usable = steps - burn;
  const long per_batch = std::max<long>(1, usable / kBatches);
  const long used = per_batch * kBatches;

  std::vector<double> batch_sums(kBatches, 0.0);
  auto phi_at = [&](const Eigen::VectorXd& y) {
    return spec.a.dot(y) - 0.5 * y.dot(sigma * y);
  };
  for (long k = 0; k < steps; ++k) {
    const long offset = k - burn;
    if (offset >= 0 && offset < used)
      batch_sums[static_cast<std::size_t>(offset / per_batch)] += phi_at(stepper.y());
    stepper.step(noise);
  }

  LyapunovEstimate est;
  est.method = RMethod::TimeAverage;
  est.horizon = cfg.t_end;
  est.dt = cfg.dt;
  est.seed = cfg.seed;
  est.batch_count = kBatches;
  est.batch_means.resize(kBatches);
  for (int b = 0; b < kBatches; ++b)
    est.batch_means[static_cast<std::size_t>(b)] =
        batch_sums[static_cast<std::size_t>(b)] / static_cast<double>(per_batch);
  est.value = mean_of(est.batch_means);
  est.stderr_ = sd_of(est.batch_means) / std::sqrt(static_cast<double>(kBatches));
  est.converged = halves_agree(est.batch_means);
  return est;
}

}  // namespace

std::string to_string(RMethod m) {
  switch (m) {
    case RMethod::TimeAverage: return "timeavg";
    case RMethod::LogSlope: return "logslope";
    case RMethod::ClosedForm: return "closedform";
  }
  return "unknown";
}

double phi_growth(const ModelSpec& spec, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  return spec.a.dot(y) - 0.5 * y.dot(sigma * y);
}

LyapunovEstimate r_timeavg(const ModelSpec& spec, const SimConfig& cfg) {
  check_dimensions(spec);
  GaussianSource noise(cfg.seed);
  LyapunovEstimate est = timeavg_single(spec, cfg, uniform_simplex(spec.n), noise);

  // Degenerate noise relies on uniqueness of the proportion process's
  // stationary law; cross-check with a second start as a heuristic.
  if (spec.n > 1 && validate_spec(spec).degenerate) {
    SimConfig alt = cfg;
    alt.seed = derive_seed(cfg.seed, 0x6d756c7469ull);
    GaussianSource alt_noise(alt.seed);
    const LyapunovEstimate other =
        timeavg_single(spec, alt, corner_simplex(spec.n), alt_noise);
    est.multistart_gap = std::abs(est.value - other.value);
    const double tol =
        3.0 * std::sqrt(est.stderr_ * est.stderr_ + other.stderr_ * other.stderr_) +
        1e-9;
    if (est.multistart_gap > tol) est.converged = false;
  }
  return est;
}

LyapunovEstimate r_timeavg(const ModelSpec& spec, const SimConfig& cfg,
                           NoiseSource& noise) {
  check_dimensions(spec);
  return timeavg_single(spec, cfg, uniform_simplex(spec.n), noise);
}

LyapunovEstimate r_logslope(const ModelSpec& spec, const SimConfig& cfg) {
  GaussianSource noise(cfg.seed);
  return r_logslope(spec, cfg, noise);
}

LyapunovEstimate r_logslope(const ModelSpec& spec, const SimConfig& cfg,
                            NoiseSource& noise) {
  check_dimensions(spec);
  cfg.validate();
  constexpr int kWindows = 20;
  SimplexStepper stepper(spec, cfg, uniform_simplex(spec.n));

  const long steps = cfg.steps();
  const long burn = cfg.burn_steps();
  const long usable = steps - burn;
  const long per_window = std::max<long>(1, usable / kWindows);
  const long used = per_window * kWindows;

  std::vector<double> marks(kWindows + 1, 0.0);
  for (long k = 0; k < steps; ++k) {
    const long offset = k - burn;
    if (offset >= 0 && offset <= used && offset % per_window == 0)
      marks[static_cast<std::size_t>(offset / per_window)] = stepper.log_s();
    stepper.step(noise);
    if (k + 1 == steps && used == usable)
      marks[kWindows] = stepper.log_s();
  }

  LyapunovEstimate est;
  est.method = RMethod::LogSlope;
  est.horizon = cfg.t_end;
  est.dt = cfg.dt;
  est.seed = cfg.seed;
  est.batch_count = kWindows;
  est.batch_means.resize(kWindows);
  const double window_time = static_cast<double>(per_window) * cfg.dt;
  for (int w = 0; w < kWindows; ++w)
    est.batch_means[static_cast<std::size_t>(w)] =
        (marks[static_cast<std::size_t>(w + 1)] - marks[static_cast<std::size_t>(w)]) /
        window_time;
  est.value = (marks[kWindows] - marks[0]) /
              (static_cast<double>(used) * cfg.dt);
  est.stderr_ = sd_of(est.batch_means) / std::sqrt(static_cast<double>(kWindows));
  est.converged = halves_agree(est.batch_means);
  return est;
}

LyapunovEstimate r_closedform_2patch(const ModelSpec& spec) {
  check_dimensions(spec);
  if (spec.n != 2)
    throw std::invalid_argument("r_closedform_2patch: model must have n = 2");
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  const ScalarDiffusion diff = reduce_2patch(spec);

  LyapunovEstimate est;
  est.method = RMethod::ClosedForm;

  auto phi_scalar = [&](double y) {
    const double q = sigma(0, 0) * y * y + 2.0 * sigma(0, 1) * y * (1.0 - y) +
                     sigma(1, 1) * (1.0 - y) * (1.0 - y);
    return spec.a[0] * y + spec.a[1] * (1.0 - y) - 0.5 * q;
  };

  const double scale = std::max(1.0, sigma(0, 0) + sigma(1, 1));
  if (diff.v_scale <= 1e-10 * scale) {
    // Deterministic reduction: the proportion settles at the drift root.
    const double ys = ystar(spec.a[0], spec.a[1], spec.dispersal(0, 1),
                            spec.dispersal(1, 0));
    est.value = phi_scalar(ys);
    est.stderr_ = 0.0;
    return est;
  }

  // Nearly deterministic reductions concentrate in a peak too narrow for any
  // affordable grid; a Laplace evaluation at the drift root is then accurate
  // to O(width^2), which is reported as the error.
  const double ys = ystar(spec.a[0], spec.a[1], spec.dispersal(0, 1),
                          spec.dispersal(1, 0));
  const double curvature = std::abs(diff.mu_prime(ys));
  const double width =
      curvature > 0.0 ? std::sqrt(diff.v(ys) / (2.0 * curvature)) : 1.0;
  if (width < 1e-4) {
    const double dphi = std::abs(spec.a[0] - spec.a[1]) + sigma.cwiseAbs().sum();
    est.value = phi_scalar(ys);
    est.stderr_ = width * width * 10.0 * (dphi + diff.v_scale) + 1e-12;
    return est;
  }

  const StationaryDensity1D dens = stationary_density(diff);
  const QuadratureValue q = density_expectation(dens, phi_scalar);
  est.value = q.value;
  est.stderr_ = q.error;
  return est;
}

double r_printed_form(const ModelSpec& spec, PrintedForm form,
                      bool use_printed_density) {
  check_dimensions(spec);
  if (spec.n != 2)
    throw std::invalid_argument("r_printed_form: model must have n = 2");
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  const double a1 = spec.a[0], a2 = spec.a[1];
  const double alpha = spec.dispersal(0, 1), beta = spec.dispersal(1, 0);
  const double s1sq = sigma(0, 0), s2sq = sigma(1, 1);

  if (form == PrintedForm::EqualSigmaLinear) {
    const double ys = ystar(a1, a2, alpha, beta);
    return a2 - 0.5 * s2sq + (a1 - a2 + s2sq) * ys;
  }

  double m1 = 0.0, m2 = 0.0;
  if (use_printed_density) {
    const StationaryDensity1D ref = stationary_density(reduce_2patch(spec));
    std::vector<double> printed;
    if (form == PrintedForm::DiagonalExpansion)
      printed = printed_density_diagonal(ref.grid, a1, a2, alpha, beta, s1sq, s2sq);
    else
      printed = printed_density_rank1(ref.grid, a1, a2, alpha, beta,
                                      std::sqrt(s1sq), std::sqrt(s2sq));
    std::vector<double> w1(printed.size()), w2(printed.size());
    for (std::size_t i = 0; i < printed.size(); ++i) {
      w1[i] = ref.grid[i] * printed[i];
      w2[i] = ref.grid[i] * ref.grid[i] * printed[i];
    }
    const double h = ref.h();
    m1 = quad::simpson_uniform(w1, h);
    m2 = quad::simpson_uniform(w2, h);
  } else {
    const StationaryDensity1D dens = stationary_density(reduce_2patch(spec));
    m1 = density_moment(dens, 1);
    m2 = density_moment(dens, 2);
  }

  if (form == PrintedForm::DiagonalExpansion)
    return a2 - 0.5 * s2sq + (a1 - a2 + s2sq) * m1 - 0.5 * (s1sq + s2sq) * m2;
  // Rank1Expansion as printed: first-moment coefficient (a1 - a2 + sigma2^2).
  const double dsig = std::sqrt(s1sq) - std::sqrt(s2sq);
  return a2 - 0.5 * s2sq + (a1 - a2 + s2sq) * m1 - 0.5 * dsig * dsig * m2;
}

}  // namespace patchdyn
