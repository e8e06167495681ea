#include "patchdyn/robustness.hpp"

#include <cmath>
#include <stdexcept>

#include "patchdyn/parallel.hpp"
#include "patchdyn/rng.hpp"

namespace patchdyn {

namespace {

// Uniform direction rescaled so the largest magnitude is exactly theta.
std::vector<double> scaled_direction(Rng& rng, std::size_t count, double theta) {
  std::vector<double> dir(count);
  double peak = 0.0;
  for (auto& d : dir) {
    d = 2.0 * rng.next_unit() - 1.0;
    peak = std::max(peak, std::abs(d));
  }
  if (peak == 0.0) {
    dir.assign(count, 0.0);
    if (!dir.empty()) dir[0] = theta;
    return dir;
  }
  for (auto& d : dir) d = d / peak * theta;
  return dir;
}

LyapunovEstimate estimate_r(const ModelSpec& spec, const SimConfig& cfg) {
  return spec.n == 2 ? r_closedform_2patch(spec) : r_timeavg(spec, cfg);
}

}  // namespace

ModelSpec perturb_spec(const ModelSpec& spec, const PerturbationSpec& pert) {
  check_dimensions(spec);
  if (pert.theta < 0.0)
    throw std::invalid_argument("perturb_spec: theta must be >= 0");
  ModelSpec out = spec;
  if (pert.theta == 0.0) return out;

  Rng rng(pert.seed);
  const int n = spec.n;

  if (pert.target_a) {
    const auto dir = scaled_direction(rng, static_cast<std::size_t>(n), pert.theta);
    for (int i = 0; i < n; ++i) out.a[i] += dir[static_cast<std::size_t>(i)];
  }

  if (pert.target_dispersal && n > 1) {
    const auto dir =
        scaled_direction(rng, static_cast<std::size_t>(n) * (n - 1), pert.theta);
    std::size_t at = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        out.dispersal(i, j) = std::max(0.0, out.dispersal(i, j) + dir[at++]);
      }
    }
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) off += out.dispersal(i, j);
      out.dispersal(i, i) = -off;
    }
  }

  if (pert.target_gamma) {
    Eigen::MatrixXd gamma = out.noise.gamma();
    const auto dir = scaled_direction(
        rng, static_cast<std::size_t>(gamma.size()), pert.theta);
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < gamma.rows(); ++r)
      for (Eigen::Index c = 0; c < gamma.cols(); ++c) gamma(r, c) += dir[at++];
    out.noise = NoiseSpec::explicit_gamma(std::move(gamma));
  }

  const ValidationReport report = validate_spec(out);
  if (!report.irreducible && dispersal_irreducible(spec.dispersal))
    throw std::runtime_error(
        "perturb_spec: dispersal repair disconnected the patch graph");
  if (!report.ok())
    throw std::runtime_error("perturb_spec: perturbed model fails validation: " +
                             report.violations.front());
  return out;
}

ContinuityScan r_continuity_scan(const ModelSpec& spec,
                                 const std::vector<double>& thetas, int trials,
                                 const SimConfig& cfg, int threads) {
  if (trials < 1) throw std::invalid_argument("r_continuity_scan: trials >= 1");
  ContinuityScan scan;
  scan.thetas = thetas;
  scan.r_base = estimate_r(spec, cfg).value;
  scan.rows.resize(thetas.size() * static_cast<std::size_t>(trials));

  const int total = static_cast<int>(scan.rows.size());
  parallel_for(total, threads, [&](int flat) {
    const int ti = flat / trials;
    const int trial = flat % trials;
    PerturbationSpec pert;
    pert.theta = thetas[static_cast<std::size_t>(ti)];
    // Directions keyed by trial only: the same draw is swept across thetas.
    pert.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const ModelSpec hat = perturb_spec(spec, pert);
    SimConfig run = cfg;
    run.seed = derive_seed(cfg.seed, 0x517u + static_cast<std::uint64_t>(flat));
    ContinuityRow row;
    row.theta = pert.theta;
    row.trial = trial;
    row.r_base = scan.r_base;
    row.r_pert = estimate_r(hat, run).value;
    row.abs_dev = std::abs(row.r_pert - row.r_base);
    scan.rows[static_cast<std::size_t>(flat)] = row;
  });

  scan.max_dev.assign(thetas.size(), 0.0);
  scan.mean_dev.assign(thetas.size(), 0.0);
  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    for (int tr = 0; tr < trials; ++tr) {
      const auto& row = scan.rows[ti * static_cast<std::size_t>(trials) +
                                  static_cast<std::size_t>(tr)];
      scan.max_dev[ti] = std::max(scan.max_dev[ti], row.abs_dev);
      scan.mean_dev[ti] += row.abs_dev;
    }
    scan.mean_dev[ti] /= trials;
  }
  return scan;
}

PerturbationVerdicts persistence_under_perturbation(const ModelSpec& spec,
                                                    double theta, int trials,
                                                    const SimConfig& cfg,
                                                    int threads) {
  const Verdict base = classify(spec, cfg);
  if (base.label != Label::Persistent)
    throw std::invalid_argument(
        "persistence_under_perturbation: base model must classify Persistent");

  PerturbationVerdicts out;
  out.verdicts.resize(static_cast<std::size_t>(trials));
  parallel_for(trials, threads, [&](int trial) {
    PerturbationSpec pert;
    pert.theta = theta;
    pert.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    SimConfig run = cfg;
    run.seed = derive_seed(cfg.seed, 0x9e5u + static_cast<std::uint64_t>(trial));
    out.verdicts[static_cast<std::size_t>(trial)] =
        classify(perturb_spec(spec, pert), run);
  });
  for (const auto& v : out.verdicts) {
    if (v.label == Label::Persistent)
      ++out.persistent;
    else if (v.label == Label::Extinct)
      ++out.extinct;
    else
      ++out.inconclusive;
  }
  return out;
}

}  // namespace patchdyn
