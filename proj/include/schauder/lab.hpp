#pragma once

// Experiment orchestration: JSON config, the pipeline stages behind the CLI
// subcommands, the mollification-stability constant report, and the
// sensitivity-lemma suite.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "schauder/besov.hpp"
#include "schauder/feynman_kac.hpp"
#include "schauder/model.hpp"
#include "schauder/report.hpp"
#include "schauder/scaling.hpp"
#include "schauder/solver.hpp"

namespace schauder {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field_path, const std::string& msg)
        : std::runtime_error(field_path + ": " + msg), field(field_path) {}
    std::string field;
};

struct ExperimentConfig {
    std::string problem = "l0";
    ChainDims dims;
    CatalogParams params;
    std::string terminal;  // empty = catalog default
    std::string source;
    Eigen::VectorXd box_lo, box_hi;
    int samples = 256;
    std::uint64_t seed = 42;
    std::vector<std::string> pipeline = {"check"};
    std::vector<int> mollify_levels;
    int mollify_quad = 8;
    SolverGrid grid;
    SolverOptions solver;
    McConfig mc;
    double c0 = 0.25;
    double lambda = 0.5;
    int besov_level = 2;
    std::vector<int> besov_theta;
    int besov_k_lo = 3;
    int besov_k_hi = 9;
    std::string out_dir = "out";
    bool strict = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    ChainProblem build_problem() const;
    Box box() const { return Box{box_lo, box_hi}; }
};

TerminalData make_terminal(const std::string& name, const ChainDims& dims);
SourceData make_source(const std::string& name, const ChainDims& dims);

struct ExperimentOutcome {
    nlohmann::json summary;
    bool any_fail = false;
    std::vector<DiagnosticReport> reports;
};

// Executes the configured pipeline and writes summary.json plus CSV tables
// into cfg.out_dir. Throws ConfigError / runtime errors for invalid input.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Anisotropic C^{2+gamma} norm of one time row of a sampled field, built from
// the grid's own finite differences (direction 1) and pair ratios.
double field_space_norm_order2(const SampledField& field, const ChainDims& dims, int time_index);

struct SchauderRow {
    int m = 0;
    double solution_norm = 0.0;
    double data_norm = 0.0;
    double ratio = 0.0;
};

struct SchauderReport {
    std::vector<SchauderRow> rows;
    double ratio_spread = 0.0;  // (max - min) / max
    bool stable = false;        // spread within 5%
};

SchauderReport schauder_constant_report(const ChainProblem& problem,
                                        const std::vector<int>& mollify_levels,
                                        const SolverGrid& grid, const SolverOptions& options,
                                        int norm_samples, std::uint64_t seed);

struct SensitivityRow {
    std::string name;
    double constant = 0.0;
    double refined = 0.0;  // at 2x samples
    bool stable = false;   // within 30%
};

struct SensitivityReport {
    std::vector<SensitivityRow> rows;
    double discontinuity_slope = 0.0;
    double discontinuity_predicted = 0.0;  // gamma / (2n - 1)
    bool discontinuity_ok = false;         // within 0.3
    bool all_stable = false;
};

// u_field: solved field for the discontinuity row; solved internally on a
// small grid when null.
SensitivityReport sensitivity_suite(const ChainProblem& problem, const Box& box, int samples,
                                    std::uint64_t seed, double c0,
                                    const SampledField* u_field, const SolverOptions& options);

}  // namespace schauder
