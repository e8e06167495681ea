#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "patchdyn/model.hpp"
#include "patchdyn/rng.hpp"

namespace patchdyn {

enum class Scheme {
  EulerLog,   // per-patch log coordinates, positivity by construction
  EulerClamp  // natural coordinates, clamp at 0 (cross-validation scheme)
};

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1e4;
  double burn_in = 0.1;        // fraction of the horizon discarded
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerLog;
  long record_stride = 0;      // 0: auto, keeps at most ~1e6 rows
  bool record_noise = false;   // store per-patch dE at recorded steps

  long steps() const;
  long burn_steps() const;
  long stride() const;
  void validate() const;  // throws std::invalid_argument
};

enum class Coord { X, YS, Simplex, Scalar };

struct Path {
  Coord coord = Coord::X;
  std::vector<double> times;
  Eigen::MatrixXd states;  // row per recorded time
  std::uint64_t seed = 0;
  Eigen::MatrixXd noise;   // recorded dE rows when requested, else 0 x 0
};

// Source of per-step standard normal drivers.  Swappable so common-random-
// number comparisons and step-refinement checks can share one Brownian path.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual void fill(double* z, int k) = 0;
};

class GaussianSource final : public NoiseSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
  void fill(double* z, int k) override {
    for (int i = 0; i < k; ++i) z[i] = rng_.next_gauss();
  }

 private:
  Rng rng_;
};

// Incremental steppers.  One step consumes exactly `drivers()` normals from
// the source, so two sims built from equal seeds stay increment-aligned.

class XStepper {
 public:
  XStepper(const ModelSpec& spec, const SimConfig& cfg, Eigen::VectorXd x0);
  void step(NoiseSource& noise);
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& log_x() const { return log_x_; }
  const Eigen::VectorXd& last_de() const { return de_; }
  int drivers() const { return k_; }

 private:
  const ModelSpec& spec_;
  int n_, k_;
  double dt_, sqrt_dt_;
  Scheme scheme_;
  Eigen::MatrixXd gamma_;
  Eigen::VectorXd growth_const_;  // a_i + D_ii
  Eigen::VectorXd half_var_;      // Sigma_ii / 2
  Eigen::VectorXd x_, log_x_, de_, z_, new_log_x_;
};

class SimplexStepper {
 public:
  SimplexStepper(const ModelSpec& spec, const SimConfig& cfg,
                 Eigen::VectorXd y0);
  void step(NoiseSource& noise);
  const Eigen::VectorXd& y() const { return y_; }
  // Log-abundance increment of the linearized total over the last step.
  double last_dlog_s() const { return dlog_s_; }
  double log_s() const { return log_s_; }
  int drivers() const { return k_; }
  const Eigen::VectorXd& last_de() const { return de_; }

 private:
  int n_, k_;
  double dt_, sqrt_dt_;
  Eigen::VectorXd a_;
  Eigen::MatrixXd dispersal_t_, sigma_, gamma_;
  Eigen::VectorXd y_, de_, z_, u_, drift_;
  double dlog_s_ = 0.0, log_s_ = 0.0;
};

class LogisticStepper {
 public:
  LogisticStepper(double growth, double comp, double vol, const SimConfig& cfg,
                  double u0);
  void step(NoiseSource& noise);
  // Advance using an externally supplied noise increment (already * sqrt(dt)).
  void step_with_noise(double dw);
  double u() const;
  double log_u() const { return log_u_; }

 private:
  double growth_, comp_, vol_, dt_, sqrt_dt_;
  double log_u_;
};

// Recorded-trajectory fronts over the steppers.

Path simulate_x(const ModelSpec& spec, const SimConfig& cfg,
                const Eigen::VectorXd& x0);
Path simulate_x(const ModelSpec& spec, const SimConfig& cfg,
                const Eigen::VectorXd& x0, NoiseSource& noise);

Path simulate_simplex(const ModelSpec& spec, const SimConfig& cfg,
                      const Eigen::VectorXd& y0);
Path simulate_simplex(const ModelSpec& spec, const SimConfig& cfg,
                      const Eigen::VectorXd& y0, NoiseSource& noise);

struct LinearizedLogS {
  Path simplex;                // proportions of the linearized system
  std::vector<double> log_s;   // ln of total linearized abundance, ln S(0)=0
};

LinearizedLogS simulate_linearized_logs(const ModelSpec& spec,
                                        const SimConfig& cfg,
                                        const Eigen::VectorXd& y0);
LinearizedLogS simulate_linearized_logs(const ModelSpec& spec,
                                        const SimConfig& cfg,
                                        const Eigen::VectorXd& y0,
                                        NoiseSource& noise);

Path simulate_logistic_1d(double growth, double comp, double vol,
                          const SimConfig& cfg, double u0);
Path simulate_logistic_1d(double growth, double comp, double vol,
                          const SimConfig& cfg, double u0, NoiseSource& noise);

// X path rewritten as proportions plus total: columns y_1..y_n, s.
Path path_to_ys(const Path& x_path);

}  // namespace patchdyn
