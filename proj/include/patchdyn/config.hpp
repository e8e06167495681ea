#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "patchdyn/analysis.hpp"
#include "patchdyn/model.hpp"
#include "patchdyn/reduce1d.hpp"
#include "patchdyn/sde.hpp"

namespace patchdyn {

struct AnalysisOptions {
  double eta = 1e-4;
  double band_floor = 1e-3;
  std::vector<double> checkpoints{1.0, 10.0, 100.0};
};

struct ConfigDocument {
  ModelSpec model;
  SimConfig sim;
  AnalysisOptions analysis;
  Eigen::VectorXd x0;  // defaults to all ones
  Eigen::VectorXd y0;  // defaults to the uniform simplex point
};

// Strict schema: unknown keys raise std::invalid_argument naming the path.
ConfigDocument parse_config(const nlohmann::json& doc);
ConfigDocument load_config(const std::string& file);

ModelSpec model_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json model_to_json(const ModelSpec& spec);
nlohmann::json report_to_json(const ValidationReport& report);
nlohmann::json estimate_to_json(const LyapunovEstimate& est);
nlohmann::json verdict_to_json(const Verdict& verdict);

// CSV output, RFC-4180 style with 17 significant digits.  Every file starts
// with "# patchdyn <subcommand> seed=<s> schema=1".
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::string& subcommand, std::uint64_t seed);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);

 private:
  std::ostream& os_;
};

std::string format_double(double v);

void write_path_csv(std::ostream& os, const Path& path,
                    const std::string& subcommand);

void write_density_csv(std::ostream& os, const StationaryDensity1D& density,
                       std::uint64_t seed = 0);

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report,
                           std::uint64_t seed);

void write_dispersal_limit_csv(std::ostream& os,
                               const std::vector<DispersalLimitRow>& rows,
                               std::uint64_t seed);

}  // namespace patchdyn
