#include "patchdyn/sde.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace patchdyn {

namespace {

constexpr double kExplosionLimit = 1e300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long auto_stride(long steps) {
  const long max_rows = 1000000;
  return std::max<long>(1, (steps + max_rows - 1) / max_rows);
}

struct Recorder {
  long stride;
  long steps;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> rows;
  std::vector<Eigen::VectorXd> noise_rows;
  bool record_noise;

  Recorder(const SimConfig& cfg, bool noise)
      : stride(cfg.stride()), steps(cfg.steps()), record_noise(noise) {}

  bool wants(long k) const { return k % stride == 0 || k == steps; }

  void push(double t, const Eigen::VectorXd& state, const Eigen::VectorXd& de) {
    times.push_back(t);
    rows.push_back(state);
    if (record_noise) noise_rows.push_back(de);
  }

  Path finish(Coord coord, std::uint64_t seed) const {
    Path path;
    path.coord = coord;
    path.seed = seed;
    path.times = times;
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? rows.front().size() : 0;
    path.states.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      path.states.row(i) = rows[static_cast<std::size_t>(i)].transpose();
    if (record_noise && !noise_rows.empty()) {
      path.noise.resize(r, noise_rows.front().size());
      for (Eigen::Index i = 0; i < r; ++i)
        path.noise.row(i) = noise_rows[static_cast<std::size_t>(i)].transpose();
    }
    return path;
  }
};

}  // namespace

long SimConfig::steps() const { return std::llround(t_end / dt); }

long SimConfig::burn_steps() const {
  return std::llround(burn_in * static_cast<double>(steps()));
}

long SimConfig::stride() const {
  return record_stride > 0 ? record_stride : auto_stride(steps());
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(dt <= t_end))
    throw std::invalid_argument("sim: need 0 < dt <= t_end");
  if (!(burn_in >= 0.0) || !(burn_in < 1.0))
    throw std::invalid_argument("sim: burn_in must lie in [0, 1)");
  if (record_stride < 0)
    throw std::invalid_argument("sim: record_stride must be positive");
  if (steps() < 1) throw std::invalid_argument("sim: horizon shorter than dt");
}

XStepper::XStepper(const ModelSpec& spec, const SimConfig& cfg,
                   Eigen::VectorXd x0)
    : spec_(spec),
      n_(spec.n),
      k_(spec.noise.drivers()),
      dt_(cfg.dt),
      sqrt_dt_(std::sqrt(cfg.dt)),
      scheme_(cfg.scheme),
      gamma_(spec.noise.gamma()) {
  check_dimensions(spec);
  if (x0.size() != n_) throw std::invalid_argument("simulate_x: x0 size != n");
  if ((x0.array() < 0.0).any())
    throw std::invalid_argument("simulate_x: x0 must be componentwise >= 0");
  const Eigen::MatrixXd sigma = effective_sigma(spec);
  growth_const_ = spec.a + spec.dispersal.diagonal();
  half_var_ = 0.5 * sigma.diagonal();
  x_ = std::move(x0);
  log_x_.resize(n_);
  for (int i = 0; i < n_; ++i)
    log_x_[i] = x_[i] > 0.0 ? std::log(x_[i]) : kNegInf;
  de_ = Eigen::VectorXd::Zero(n_);
  z_ = Eigen::VectorXd::Zero(k_);
  new_log_x_.resize(n_);
}

void XStepper::step(NoiseSource& noise) {
  noise.fill(z_.data(), k_);
  de_.noalias() = gamma_.transpose() * z_;
  de_ *= sqrt_dt_;

  if (scheme_ == Scheme::EulerClamp) {
    Eigen::VectorXd next(n_);
    for (int i = 0; i < n_; ++i) {
      double inflow = 0.0;
      for (int j = 0; j < n_; ++j) inflow += spec_.dispersal(j, i) * x_[j];
      const double drift =
          x_[i] * (spec_.a[i] - competition_eval(spec_.competition, i, x_[i])) +
          inflow;
      next[i] = x_[i] + drift * dt_ + x_[i] * de_[i];
      if (next[i] < 0.0) next[i] = 0.0;
    }
    x_ = next;
    for (int i = 0; i < n_; ++i)
      log_x_[i] = x_[i] > 0.0 ? std::log(x_[i]) : kNegInf;
  } else {
    for (int i = 0; i < n_; ++i) {
      if (log_x_[i] == kNegInf) {
        // Zero patch: only dispersal inflow can seed it.
        double inflow = 0.0;
        for (int j = 0; j < n_; ++j)
          if (j != i && log_x_[j] != kNegInf)
            inflow += spec_.dispersal(j, i) * std::exp(log_x_[j]);
        new_log_x_[i] = inflow > 0.0 ? std::log(inflow * dt_) : kNegInf;
        continue;
      }
      double ratio = 0.0;  // sum_j!=i D_ji X_j / X_i, in natural units
      for (int j = 0; j < n_; ++j)
        if (j != i && log_x_[j] != kNegInf)
          ratio += spec_.dispersal(j, i) * std::exp(log_x_[j] - log_x_[i]);
      if (ratio * dt_ > 1.0) {
        // Inflow dwarfs the current abundance; the log step would overshoot
        // exp(ratio*dt)-fold, so restart the patch at the Euler inflow level.
        double m = kNegInf;
        for (int j = 0; j < n_; ++j)
          if (j != i && log_x_[j] != kNegInf) m = std::max(m, log_x_[j]);
        double scaled = 0.0;
        for (int j = 0; j < n_; ++j)
          if (j != i && log_x_[j] != kNegInf)
            scaled += spec_.dispersal(j, i) * std::exp(log_x_[j] - m);
        new_log_x_[i] = m + std::log(scaled * dt_);
        continue;
      }
      const double drift = growth_const_[i] + ratio -
                           competition_eval(spec_.competition, i, x_[i]) -
                           half_var_[i];
      new_log_x_[i] = log_x_[i] + drift * dt_ + de_[i];
    }
    log_x_ = new_log_x_;
    for (int i = 0; i < n_; ++i)
      x_[i] = log_x_[i] == kNegInf ? 0.0 : std::exp(log_x_[i]);
  }

  for (int i = 0; i < n_; ++i) {
    if (!(x_[i] < kExplosionLimit) && x_[i] > 0.0)
      throw std::runtime_error("explosion: check Assumption 1.1 inputs");
    if (std::isnan(x_[i]))
      throw std::runtime_error("explosion: check Assumption 1.1 inputs");
  }
}

SimplexStepper::SimplexStepper(const ModelSpec& spec, const SimConfig& cfg,
                               Eigen::VectorXd y0)
    : n_(spec.n),
      k_(spec.noise.drivers()),
      dt_(cfg.dt),
      sqrt_dt_(std::sqrt(cfg.dt)),
      a_(spec.a),
      dispersal_t_(spec.dispersal.transpose()),
      sigma_(effective_sigma(spec)),
      gamma_(spec.noise.gamma()) {
  check_dimensions(spec);
  if (y0.size() != n_)
    throw std::invalid_argument("simulate_simplex: y0 size != n");
  if ((y0.array() < -1e-9).any() || std::abs(y0.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("simulate_simplex: y0 not on the simplex");
  y_ = std::move(y0);
  y_ = y_.cwiseMax(0.0);
  y_ /= y_.sum();
  de_ = Eigen::VectorXd::Zero(n_);
  z_ = Eigen::VectorXd::Zero(k_);
  u_.resize(n_);
  drift_.resize(n_);
}

void SimplexStepper::step(NoiseSource& noise) {
  noise.fill(z_.data(), k_);
  de_.noalias() = gamma_.transpose() * z_;
  de_ *= sqrt_dt_;

  // Growth functional of the linearized total, evaluated at the pre-step
  // state: d ln S = (a'y - y'Sigma y / 2) dt + y' dE.
  u_.noalias() = sigma_ * y_;
  const double quad = y_.dot(u_);
  dlog_s_ = (a_.dot(y_) - 0.5 * quad) * dt_ + y_.dot(de_);
  log_s_ += dlog_s_;

  if (n_ == 1) {
    y_[0] = 1.0;
    return;
  }

  // dY = D'Y dt + M (a - Sigma Y) dt + M dE with M = diag(y) - y y';
  // M v = y .* (v - (y'v) 1).
  u_ = a_ - u_;
  const double mean_u = y_.dot(u_);
  const double mean_de = y_.dot(de_);
  drift_.noalias() = dispersal_t_ * y_;
  for (int i = 0; i < n_; ++i) {
    drift_[i] += y_[i] * (u_[i] - mean_u);
    y_[i] += drift_[i] * dt_ + y_[i] * (de_[i] - mean_de);
    if (y_[i] < 0.0) y_[i] = 0.0;  // projection, O(dt) under refinement
  }
  const double total = y_.sum();
  if (!(total > 0.0))
    throw std::runtime_error("simplex step collapsed to the zero vector");
  y_ /= total;
}

LogisticStepper::LogisticStepper(double growth, double comp, double vol,
                                 const SimConfig& cfg, double u0)
    : growth_(growth),
      comp_(comp),
      vol_(vol),
      dt_(cfg.dt),
      sqrt_dt_(std::sqrt(cfg.dt)) {
  if (u0 < 0.0) throw std::invalid_argument("logistic: u0 must be >= 0");
  log_u_ = u0 > 0.0 ? std::log(u0) : kNegInf;
}

void LogisticStepper::step(NoiseSource& noise) {
  double z = 0.0;
  noise.fill(&z, 1);
  step_with_noise(vol_ * z * sqrt_dt_);
}

void LogisticStepper::step_with_noise(double dw) {
  if (log_u_ == kNegInf) return;
  const double u_now = std::exp(log_u_);
  log_u_ += (growth_ - comp_ * u_now - 0.5 * vol_ * vol_) * dt_ + dw;
  if (!(log_u_ < 700.0))
    throw std::runtime_error("explosion: check Assumption 1.1 inputs");
}

double LogisticStepper::u() const {
  return log_u_ == kNegInf ? 0.0 : std::exp(log_u_);
}

Path simulate_x(const ModelSpec& spec, const SimConfig& cfg,
                const Eigen::VectorXd& x0) {
  GaussianSource noise(cfg.seed);
  return simulate_x(spec, cfg, x0, noise);
}

Path simulate_x(const ModelSpec& spec, const SimConfig& cfg,
                const Eigen::VectorXd& x0, NoiseSource& noise) {
  cfg.validate();
  XStepper stepper(spec, cfg, x0);
  Recorder rec(cfg, cfg.record_noise);
  rec.push(0.0, stepper.x(), Eigen::VectorXd::Zero(spec.n));
  const long steps = cfg.steps();
  for (long k = 1; k <= steps; ++k) {
    stepper.step(noise);
    if (rec.wants(k))
      rec.push(static_cast<double>(k) * cfg.dt, stepper.x(), stepper.last_de());
  }
  return rec.finish(Coord::X, cfg.seed);
}

Path simulate_simplex(const ModelSpec& spec, const SimConfig& cfg,
                      const Eigen::VectorXd& y0) {
  GaussianSource noise(cfg.seed);
  return simulate_simplex(spec, cfg, y0, noise);
}

Path simulate_simplex(const ModelSpec& spec, const SimConfig& cfg,
                      const Eigen::VectorXd& y0, NoiseSource& noise) {
  cfg.validate();
  SimplexStepper stepper(spec, cfg, y0);
  Recorder rec(cfg, cfg.record_noise);
  rec.push(0.0, stepper.y(), Eigen::VectorXd::Zero(spec.n));
  const long steps = cfg.steps();
  for (long k = 1; k <= steps; ++k) {
    stepper.step(noise);
    if (rec.wants(k))
      rec.push(static_cast<double>(k) * cfg.dt, stepper.y(), stepper.last_de());
  }
  return rec.finish(Coord::Simplex, cfg.seed);
}

LinearizedLogS simulate_linearized_logs(const ModelSpec& spec,
                                        const SimConfig& cfg,
                                        const Eigen::VectorXd& y0) {
  GaussianSource noise(cfg.seed);
  return simulate_linearized_logs(spec, cfg, y0, noise);
}

LinearizedLogS simulate_linearized_logs(const ModelSpec& spec,
                                        const SimConfig& cfg,
                                        const Eigen::VectorXd& y0,
                                        NoiseSource& noise) {
  cfg.validate();
  SimplexStepper stepper(spec, cfg, y0);
  Recorder rec(cfg, cfg.record_noise);
  LinearizedLogS out;
  rec.push(0.0, stepper.y(), Eigen::VectorXd::Zero(spec.n));
  out.log_s.push_back(0.0);
  const long steps = cfg.steps();
  for (long k = 1; k <= steps; ++k) {
    stepper.step(noise);
    if (rec.wants(k)) {
      rec.push(static_cast<double>(k) * cfg.dt, stepper.y(), stepper.last_de());
      out.log_s.push_back(stepper.log_s());
    }
  }
  out.simplex = rec.finish(Coord::Simplex, cfg.seed);
  return out;
}

Path simulate_logistic_1d(double growth, double comp, double vol,
                          const SimConfig& cfg, double u0) {
  GaussianSource noise(cfg.seed);
  return simulate_logistic_1d(growth, comp, vol, cfg, u0, noise);
}

Path simulate_logistic_1d(double growth, double comp, double vol,
                          const SimConfig& cfg, double u0, NoiseSource& noise) {
  cfg.validate();
  LogisticStepper stepper(growth, comp, vol, cfg, u0);
  Recorder rec(cfg, false);
  Eigen::VectorXd state(1), none(1);
  none.setZero();
  state[0] = stepper.u();
  rec.push(0.0, state, none);
  const long steps = cfg.steps();
  for (long k = 1; k <= steps; ++k) {
    stepper.step(noise);
    if (rec.wants(k)) {
      state[0] = stepper.u();
      rec.push(static_cast<double>(k) * cfg.dt, state, none);
    }
  }
  return rec.finish(Coord::Scalar, cfg.seed);
}

Path path_to_ys(const Path& x_path) {
  if (x_path.coord != Coord::X)
    throw std::invalid_argument("path_to_ys: expected an abundance path");
  Path out;
  out.coord = Coord::YS;
  out.seed = x_path.seed;
  out.times = x_path.times;
  const auto r = x_path.states.rows();
  const auto n = x_path.states.cols();
  out.states.resize(r, n + 1);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double s = x_path.states.row(i).sum();
    if (s > 0.0)
      out.states.row(i).head(n) = x_path.states.row(i) / s;
    else
      out.states.row(i).head(n).setConstant(1.0 / static_cast<double>(n));
    out.states(i, n) = s;
  }
  return out;
}

}  // namespace patchdyn
