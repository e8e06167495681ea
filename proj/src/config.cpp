#include "patchdyn/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>

namespace patchdyn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items())
    if (allowed.find(item.key()) == allowed.end())
      fail(where + "." + item.key(), "unknown key");
}

double need_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Eigen::VectorXd need_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        need_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Eigen::MatrixXd need_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected an array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(where, "expected non-empty rows");
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(where + "[" + std::to_string(r) + "]", "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = need_number(
          j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

CompetitionSpec competition_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where, {"type", "kappa", "exponent", "tables"});
  const std::string type = j.value("type", "");
  if (type == "linear") {
    LinearCompetition lin;
    lin.kappa = need_vector(j.at("kappa"), where + ".kappa");
    return lin;
  }
  if (type == "power_law") {
    PowerLawCompetition pow;
    pow.kappa = need_vector(j.at("kappa"), where + ".kappa");
    pow.exponent = need_number(j.at("exponent"), where + ".exponent");
    return pow;
  }
  if (type == "tabulated") {
    TabulatedCompetition tab;
    const json& tables = j.at("tables");
    if (!tables.is_array()) fail(where + ".tables", "expected an array");
    for (std::size_t p = 0; p < tables.size(); ++p) {
      std::vector<std::array<double, 2>> one;
      for (std::size_t q = 0; q < tables[p].size(); ++q) {
        const json& pt = tables[p][q];
        if (!pt.is_array() || pt.size() != 2)
          fail(where + ".tables", "points must be [x, b] pairs");
        one.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      tab.tables.push_back(std::move(one));
    }
    return tab;
  }
  fail(where + ".type", "expected linear | power_law | tabulated");
}

NoiseSpec noise_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where, {"type", "factor", "sigma", "correlation"});
  const std::string type = j.value("type", "");
  if (type == "gamma")
    return NoiseSpec::explicit_gamma(need_matrix(j.at("factor"), where + ".factor"));
  if (type == "sigma_correlation")
    return NoiseSpec::sigma_correlation(
        need_vector(j.at("sigma"), where + ".sigma"),
        need_matrix(j.at("correlation"), where + ".correlation"));
  fail(where + ".type", "expected gamma | sigma_correlation");
}

json competition_to_json(const CompetitionSpec& comp) {
  json j;
  if (const auto* lin = std::get_if<LinearCompetition>(&comp)) {
    j["type"] = "linear";
    j["kappa"] = std::vector<double>(lin->kappa.begin(), lin->kappa.end());
  } else if (const auto* pow = std::get_if<PowerLawCompetition>(&comp)) {
    j["type"] = "power_law";
    j["kappa"] = std::vector<double>(pow->kappa.begin(), pow->kappa.end());
    j["exponent"] = pow->exponent;
  } else if (const auto* tab = std::get_if<TabulatedCompetition>(&comp)) {
    j["type"] = "tabulated";
    json tables = json::array();
    for (const auto& one : tab->tables) {
      json pts = json::array();
      for (const auto& pt : one) pts.push_back({pt[0], pt[1]});
      tables.push_back(pts);
    }
    j["tables"] = tables;
  }
  return j;
}

}  // namespace

ModelSpec model_from_json(const json& j, const std::string& where) {
  reject_unknown(j, where, {"n", "a", "competition", "dispersal", "noise"});
  ModelSpec spec;
  if (!j.contains("n") || !j.at("n").is_number_integer())
    fail(where + ".n", "expected an integer patch count");
  spec.n = j.at("n").get<int>();
  spec.a = need_vector(j.at("a"), where + ".a");
  spec.competition = competition_from_json(j.at("competition"), where + ".competition");
  spec.dispersal = need_matrix(j.at("dispersal"), where + ".dispersal");
  spec.noise = noise_from_json(j.at("noise"), where + ".noise");
  check_dimensions(spec);
  return spec;
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["a"] = std::vector<double>(spec.a.begin(), spec.a.end());
  j["competition"] = competition_to_json(spec.competition);
  json rows = json::array();
  for (int r = 0; r < spec.n; ++r) {
    json row = json::array();
    for (int c = 0; c < spec.n; ++c) row.push_back(spec.dispersal(r, c));
    rows.push_back(row);
  }
  j["dispersal"] = rows;
  json factor = json::array();
  const Eigen::MatrixXd& gamma = spec.noise.gamma();
  for (Eigen::Index r = 0; r < gamma.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < gamma.cols(); ++c) row.push_back(gamma(r, c));
    factor.push_back(row);
  }
  j["noise"] = {{"type", "gamma"}, {"factor", factor}};
  return j;
}

ConfigDocument parse_config(const json& doc) {
  reject_unknown(doc, "$", {"model", "sim", "analysis"});
  if (!doc.contains("model")) fail("$", "missing model block");
  ConfigDocument out;
  out.model = model_from_json(doc.at("model"), "$.model");

  if (doc.contains("sim")) {
    const json& sim = doc.at("sim");
    reject_unknown(sim, "$.sim",
                   {"dt", "t_end", "burn_in", "seed", "scheme", "record_stride",
                    "record_noise", "x0", "y0"});
    if (sim.contains("dt")) out.sim.dt = need_number(sim.at("dt"), "$.sim.dt");
    if (sim.contains("t_end"))
      out.sim.t_end = need_number(sim.at("t_end"), "$.sim.t_end");
    if (sim.contains("burn_in"))
      out.sim.burn_in = need_number(sim.at("burn_in"), "$.sim.burn_in");
    if (sim.contains("seed")) out.sim.seed = sim.at("seed").get<std::uint64_t>();
    if (sim.contains("record_stride"))
      out.sim.record_stride = sim.at("record_stride").get<long>();
    if (sim.contains("record_noise"))
      out.sim.record_noise = sim.at("record_noise").get<bool>();
    if (sim.contains("scheme")) {
      const std::string scheme = sim.at("scheme").get<std::string>();
      if (scheme == "euler_log")
        out.sim.scheme = Scheme::EulerLog;
      else if (scheme == "euler_clamp")
        out.sim.scheme = Scheme::EulerClamp;
      else
        fail("$.sim.scheme", "expected euler_log | euler_clamp");
    }
    if (sim.contains("x0")) out.x0 = need_vector(sim.at("x0"), "$.sim.x0");
    if (sim.contains("y0")) out.y0 = need_vector(sim.at("y0"), "$.sim.y0");
    out.sim.validate();
  }

  if (doc.contains("analysis")) {
    const json& an = doc.at("analysis");
    reject_unknown(an, "$.analysis", {"eta", "band", "checkpoints"});
    if (an.contains("eta")) out.analysis.eta = need_number(an.at("eta"), "$.analysis.eta");
    if (an.contains("band"))
      out.analysis.band_floor = need_number(an.at("band"), "$.analysis.band");
    if (an.contains("checkpoints")) {
      const Eigen::VectorXd cp = need_vector(an.at("checkpoints"), "$.analysis.checkpoints");
      out.analysis.checkpoints.assign(cp.begin(), cp.end());
    }
  }

  if (out.x0.size() == 0) out.x0 = Eigen::VectorXd::Ones(out.model.n);
  if (out.y0.size() == 0)
    out.y0 = Eigen::VectorXd::Constant(out.model.n, 1.0 / out.model.n);
  if (out.x0.size() != out.model.n) fail("$.sim.x0", "size != n");
  if (out.y0.size() != out.model.n) fail("$.sim.y0", "size != n");
  return out;
}

ConfigDocument load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("config: cannot open " + file);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw std::invalid_argument("config: " + file + ": " + err.what());
  }
  return parse_config(doc);
}

json report_to_json(const ValidationReport& report) {
  json j;
  j["ok"] = report.ok();
  j["irreducible"] = report.irreducible;
  j["sigma_rank"] = report.sigma_rank;
  j["degenerate"] = report.degenerate;
  j["competition_ok"] = report.competition_ok;
  if (report.competition_witness) {
    j["competition_witness"] = {{"gamma_b", report.competition_witness->first},
                                {"M_b", report.competition_witness->second}};
  }
  j["warnings"] = report.warnings;
  j["violations"] = report.violations;
  return j;
}

json estimate_to_json(const LyapunovEstimate& est) {
  json j;
  j["value"] = est.value;
  j["stderr"] = est.stderr_;
  j["method"] = to_string(est.method);
  j["horizon"] = est.horizon;
  j["dt"] = est.dt;
  j["seed"] = est.seed;
  j["diagnostics"] = {{"batches", est.batch_count},
                      {"converged", est.converged},
                      {"multistart_gap", est.multistart_gap}};
  return j;
}

json verdict_to_json(const Verdict& verdict) {
  json j;
  j["label"] = to_string(verdict.label);
  j["band"] = verdict.band;
  j["r"] = estimate_to_json(verdict.r);
  return j;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& os, const std::string& subcommand,
                     std::uint64_t seed)
    : os_(os) {
  os_ << "# patchdyn " << subcommand << " seed=" << seed << " schema=1\n";
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i)
    os_ << names[i] << (i + 1 < names.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    os_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void write_density_csv(std::ostream& os, const StationaryDensity1D& density,
                       std::uint64_t seed) {
  CsvWriter csv(os, "density", seed);
  csv.header({"y", "log_density", "density"});
  for (std::size_t i = 0; i < density.grid.size(); ++i)
    csv.row({density.grid[i], density.log_density[i],
             std::exp(density.log_density[i])});
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report,
                           std::uint64_t seed) {
  CsvWriter csv(os, "convergence", seed);
  csv.header({"t", "w1_distance", "replicates"});
  for (std::size_t i = 0; i < report.checkpoints.size(); ++i)
    csv.row({report.checkpoints[i], report.distances[i],
             static_cast<double>(report.replicates)});
}

void write_dispersal_limit_csv(std::ostream& os,
                               const std::vector<DispersalLimitRow>& rows,
                               std::uint64_t seed) {
  CsvWriter csv(os, "dispersal-limit", seed);
  std::vector<std::string> names{"delta"};
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().proportions.size());
  for (int i = 0; i < n; ++i) names.push_back("proportion" + std::to_string(i + 1));
  names.insert(names.end(), {"max_abs_error", "r", "r_stderr", "r_limit"});
  csv.header(names);
  for (const auto& row : rows) {
    std::vector<double> vals{row.delta};
    for (int i = 0; i < n; ++i) vals.push_back(row.proportions[i]);
    vals.insert(vals.end(),
                {row.max_abs_error, row.r_estimate, row.r_stderr, row.r_limit});
    csv.row(vals);
  }
}

void write_path_csv(std::ostream& os, const Path& path,
                    const std::string& subcommand) {
  CsvWriter csv(os, subcommand, path.seed);
  std::vector<std::string> names{"t"};
  const auto cols = path.states.cols();
  switch (path.coord) {
    case Coord::X:
      for (Eigen::Index i = 0; i < cols; ++i)
        names.push_back("x" + std::to_string(i + 1));
      break;
    case Coord::YS:
      for (Eigen::Index i = 0; i + 1 < cols; ++i)
        names.push_back("y" + std::to_string(i + 1));
      names.push_back("s");
      break;
    case Coord::Simplex:
      for (Eigen::Index i = 0; i < cols; ++i)
        names.push_back("y" + std::to_string(i + 1));
      break;
    case Coord::Scalar:
      names.push_back("u");
      break;
  }
  csv.header(names);
  std::vector<double> row(static_cast<std::size_t>(cols) + 1);
  for (std::size_t r = 0; r < path.times.size(); ++r) {
    row[0] = path.times[r];
    for (Eigen::Index c = 0; c < cols; ++c)
      row[static_cast<std::size_t>(c) + 1] =
          path.states(static_cast<Eigen::Index>(r), c);
    csv.row(row);
  }
}

}  // namespace patchdyn
