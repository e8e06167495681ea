#include "patchdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "patchdyn/parallel.hpp"
#include "patchdyn/reduce1d.hpp"

namespace patchdyn {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  const std::size_t n = t.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  w[0] = 0.5 * (t[1] - t[0]);
  w[n - 1] = 0.5 * (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (t[i + 1] - t[i - 1]);
  return w;
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
};

OlsFit ols(const std::vector<double>& t, const std::vector<double>& v) {
  const double n = static_cast<double>(t.size());
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mv += v[i];
  }
  mt /= n;
  mv /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (v[i] - mv);
    den += (t[i] - mt) * (t[i] - mt);
  }
  OlsFit fit;
  fit.slope = num / den;
  fit.intercept = mv - fit.slope * mt;
  return fit;
}

// Matrix exponential of a small generator by scaled Taylor squaring.
Eigen::MatrixXd expm_small(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXd b = a * scale;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 16; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

OccupationStats occupation_fraction(const Path& x_path, double eta) {
  if (x_path.times.empty())
    throw std::invalid_argument("occupation_fraction: empty path");
  const auto w = trapezoid_weights(x_path.times);
  double hit = 0.0, total = 0.0;
  for (std::size_t i = 0; i < x_path.times.size(); ++i) {
    total += w[i];
    if (x_path.states.row(static_cast<Eigen::Index>(i)).minCoeff() <= eta)
      hit += w[i];
  }
  OccupationStats out;
  out.eta = eta;
  out.fraction = total > 0.0 ? hit / total : (x_path.states.row(0).minCoeff() <= eta);
  out.horizon = x_path.times.back() - x_path.times.front();
  return out;
}

double positive_prefix_end(const Path& x_path) {
  double last = x_path.times.empty() ? 0.0 : x_path.times.front();
  for (std::size_t i = 0; i < x_path.times.size(); ++i) {
    if (x_path.states.row(static_cast<Eigen::Index>(i)).minCoeff() <= 0.0) break;
    last = x_path.times[i];
  }
  return last;
}

SlopeFit extinction_slopes(const Path& x_path, double t_lo, double t_hi) {
  constexpr int kBatches = 10;
  const int n = static_cast<int>(x_path.states.cols());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < x_path.times.size(); ++i)
    if (x_path.times[i] >= t_lo && x_path.times[i] <= t_hi) idx.push_back(i);
  if (idx.size() < static_cast<std::size_t>(2 * kBatches))
    throw std::invalid_argument("extinction_slopes: window holds too few samples");

  SlopeFit fit;
  fit.window_lo = x_path.times[idx.front()];
  fit.window_hi = x_path.times[idx.back()];
  fit.slope.resize(n);
  fit.stderr_.resize(n);

  std::vector<double> t(idx.size()), v(idx.size());
  for (int patch = 0; patch < n; ++patch) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double x = x_path.states(static_cast<Eigen::Index>(idx[j]), patch);
      if (!(x > 0.0))
        throw std::runtime_error("patch hit numerical zero inside the fit window");
      t[j] = x_path.times[idx[j]];
      v[j] = std::log(x);
    }
    fit.slope[patch] = ols(t, v).slope;

    // Autocorrelation-robust spread from contiguous batch refits.
    const std::size_t per = idx.size() / kBatches;
    std::vector<double> batch_slopes;
    for (int b = 0; b < kBatches; ++b) {
      std::vector<double> tb(t.begin() + static_cast<long>(b * per),
                             t.begin() + static_cast<long>((b + 1) * per));
      std::vector<double> vb(v.begin() + static_cast<long>(b * per),
                             v.begin() + static_cast<long>((b + 1) * per));
      batch_slopes.push_back(ols(tb, vb).slope);
    }
    double m = 0.0;
    for (double s : batch_slopes) m += s;
    m /= kBatches;
    double acc = 0.0;
    for (double s : batch_slopes) acc += (s - m) * (s - m);
    fit.stderr_[patch] = std::sqrt(acc / (kBatches - 1)) / std::sqrt(double(kBatches));
  }
  return fit;
}

std::string to_string(Label label) {
  switch (label) {
    case Label::Persistent: return "Persistent";
    case Label::Extinct: return "Extinct";
    case Label::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify(const ModelSpec& spec, const SimConfig& cfg, double band_floor) {
  Verdict verdict;
  verdict.r = spec.n == 2 ? r_closedform_2patch(spec) : r_timeavg(spec, cfg);
  verdict.band = std::max(3.0 * verdict.r.stderr_, band_floor);
  if (verdict.r.value > verdict.band)
    verdict.label = Label::Persistent;
  else if (verdict.r.value < -verdict.band)
    verdict.label = Label::Extinct;
  else
    verdict.label = Label::Inconclusive;
  return verdict;
}

ConvergenceReport convergence_distance(const ModelSpec& spec,
                                       const SimConfig& cfg,
                                       const Eigen::VectorXd& x0_a,
                                       const Eigen::VectorXd& x0_b,
                                       const std::vector<double>& checkpoints,
                                       int replicates, int threads) {
  if (checkpoints.empty())
    throw std::invalid_argument("convergence_distance: no checkpoints");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("convergence_distance: checkpoints must increase");
  SimConfig base = cfg;
  base.t_end = checkpoints.back();
  base.validate();

  const std::size_t nc = checkpoints.size();
  std::vector<long> mark_steps(nc);
  for (std::size_t c = 0; c < nc; ++c)
    mark_steps[c] = std::llround(checkpoints[c] / base.dt);

  std::vector<std::vector<double>> s_a(nc), s_b(nc);
  for (auto& v : s_a) v.resize(static_cast<std::size_t>(replicates));
  for (auto& v : s_b) v.resize(static_cast<std::size_t>(replicates));

  auto run_one = [&](const Eigen::VectorXd& x0, std::uint64_t seed,
                     std::vector<std::vector<double>>& sink, int rep) {
    GaussianSource noise(seed);
    XStepper stepper(spec, base, x0);
    std::size_t next = 0;
    const long last = mark_steps.back();
    for (long k = 1; k <= last && next < nc; ++k) {
      stepper.step(noise);
      while (next < nc && mark_steps[next] == k) {
        sink[next][static_cast<std::size_t>(rep)] = stepper.x().sum();
        ++next;
      }
    }
  };

  parallel_for(replicates, threads, [&](int rep) {
    // Common random numbers: both ensembles replay the same driver stream.
    const std::uint64_t seed = derive_seed(base.seed, static_cast<std::uint64_t>(rep));
    run_one(x0_a, seed, s_a, rep);
    run_one(x0_b, seed, s_b, rep);
  });

  ConvergenceReport report;
  report.checkpoints = checkpoints;
  report.replicates = replicates;
  report.distances.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::sort(s_a[c].begin(), s_a[c].end());
    std::sort(s_b[c].begin(), s_b[c].end());
    double acc = 0.0;
    for (int r = 0; r < replicates; ++r)
      acc += std::abs(s_a[c][static_cast<std::size_t>(r)] -
                      s_b[c][static_cast<std::size_t>(r)]);
    report.distances[c] = acc / replicates;
  }
  for (std::size_t c = 0; c + 1 < nc; ++c)
    if (report.distances[c + 1] > report.distances[c]) ++report.increases;
  const double first = report.distances.front();
  const double last = report.distances.back();
  if (last > 0.0)
    report.shrink_ratio = first / last;
  else
    report.shrink_ratio = first > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return report;
}

SyncReport sync_diagnostics(const ModelSpec& spec, const SimConfig& cfg,
                            const Eigen::VectorXd& x0) {
  check_dimensions(spec);
  cfg.validate();
  if (spec.n != 2)
    throw std::invalid_argument("sync_diagnostics: model must have n = 2");
  if (x0.size() != 2 || !(x0[0] > 0.0) || !(x0[1] > 0.0))
    throw std::invalid_argument("sync_diagnostics: both patches must start positive");
  const auto* lin = std::get_if<LinearCompetition>(&spec.competition);
  if (lin == nullptr || lin->kappa[0] != lin->kappa[1])
    throw std::invalid_argument(
        "sync_diagnostics: requires shared linear competition (b1 = b2)");

  const double alpha = spec.dispersal(0, 1);
  const double beta = spec.dispersal(1, 0);
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  const double growth_u = spec.a[0] - alpha + beta;
  const double vol_u = std::sqrt(sigma(1, 1));

  // X and its scalar comparison share one driver stream: replay the same
  // seed and give U the patch-2 increment each step.
  GaussianSource noise_x(cfg.seed);
  GaussianSource noise_u(cfg.seed);
  XStepper xsim(spec, cfg, x0);
  LogisticStepper usim(growth_u, lin->kappa[0], vol_u, cfg, x0[1]);
  const int k = spec.noise.drivers();
  Eigen::VectorXd z(k);
  const Eigen::MatrixXd gamma = spec.noise.gamma();
  const double sqrt_dt = std::sqrt(cfg.dt);

  SyncReport report;
  report.exact_sync = std::abs(x0[0] / x0[1] - 1.0) <= 1e-14;
  const long steps = cfg.steps();
  const long stride = cfg.stride();
  double bound_acc = 0.0;

  report.times.push_back(0.0);
  report.z.push_back(x0[0] / x0[1]);
  for (long step = 1; step <= steps; ++step) {
    xsim.step(noise_x);
    noise_u.fill(z.data(), k);
    const double de2 = (gamma.transpose() * z)[1] * sqrt_dt;
    usim.step_with_noise(de2);
    const double ratio = std::exp(xsim.log_x()[0] - xsim.log_x()[1]);
    bound_acc += alpha * ratio + beta;
    if (step % stride == 0 || step == steps) {
      report.times.push_back(static_cast<double>(step) * cfg.dt);
      report.z.push_back(ratio);
    }
  }

  report.terminal_z_gap = std::abs(report.z.back() - 1.0);
  for (double v : report.z)
    report.max_z_gap = std::max(report.max_z_gap, std::abs(v - 1.0));
  report.ratio_x1_u = xsim.x()[0] / usim.u();
  report.ratio_x2_u = xsim.x()[1] / usim.u();
  report.slope_bound = -bound_acc / static_cast<double>(steps);

  if (!report.exact_sync) {
    // Fit the decay of ln |Z - 1| over the stretch still clear of the
    // floating-point floor.
    std::vector<double> t, v;
    for (std::size_t i = 0; i < report.z.size(); ++i) {
      const double gap = std::abs(report.z[i] - 1.0);
      if (gap > 1e-12) {
        t.push_back(report.times[i]);
        v.push_back(std::log(gap));
      } else {
        break;
      }
    }
    if (t.size() >= 2) report.slope_ln_z_gap = ols(t, v).slope;
  }
  return report;
}

Eigen::VectorXd dominant_left_eigenvector(const Eigen::MatrixXd& dispersal) {
  const int n = static_cast<int>(dispersal.rows());
  if (!dispersal_irreducible(dispersal))
    throw std::invalid_argument("dominant_left_eigenvector: reducible dispersal");
  const double max_rate = dispersal.cwiseAbs().maxCoeff();
  const double h = max_rate > 0.0 ? 0.5 / max_rate : 1.0;
  const Eigen::MatrixXd pt = expm_small(dispersal * h).transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = pt * v;
    next /= next.sum();
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (delta < 1e-15) break;
  }
  return v;
}

std::vector<DispersalLimitRow> dispersal_limit_table(
    const ModelSpec& spec, const std::vector<double>& deltas,
    const SimConfig& cfg, int threads) {
  check_dimensions(spec);
  if (!std::holds_alternative<LinearCompetition>(spec.competition))
    throw std::invalid_argument("dispersal_limit_table: linear competition only");
  if (!std::is_sorted(deltas.begin(), deltas.end()))
    throw std::invalid_argument("dispersal_limit_table: deltas must increase");
  const Eigen::VectorXd evec = dominant_left_eigenvector(spec.dispersal);
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  const double r_limit = spec.a.dot(evec) - 0.5 * evec.dot(sigma * evec);

  std::vector<DispersalLimitRow> rows(deltas.size());
  parallel_for(static_cast<int>(deltas.size()), threads, [&](int i) {
    const double delta = deltas[static_cast<std::size_t>(i)];
    ModelSpec scaled = spec;
    scaled.dispersal = spec.dispersal * delta;

    SimConfig run = cfg;
    run.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    // Explicit Euler needs dt below the fastest dispersal time scale.
    const double max_rate = scaled.dispersal.cwiseAbs().maxCoeff();
    if (max_rate > 0.0) run.dt = std::min(run.dt, 0.1 / max_rate);

    SimplexStepper stepper(scaled, run,
                           Eigen::VectorXd::Constant(spec.n, 1.0 / spec.n));
    GaussianSource noise(run.seed);
    const long steps = run.steps();
    const long burn = run.burn_steps();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.n);
    for (long k = 0; k < steps; ++k) {
      if (k >= burn) acc += stepper.y();
      stepper.step(noise);
    }
    acc /= static_cast<double>(steps - burn);

    DispersalLimitRow row;
    row.delta = delta;
    row.proportions = acc;
    row.max_abs_error = (acc - evec).cwiseAbs().maxCoeff();
    const LyapunovEstimate est = r_timeavg(scaled, run);
    row.r_estimate = est.value;
    row.r_stderr = est.stderr_;
    row.r_limit = r_limit;
    rows[static_cast<std::size_t>(i)] = std::move(row);
  });
  return rows;
}

}  // namespace patchdyn
