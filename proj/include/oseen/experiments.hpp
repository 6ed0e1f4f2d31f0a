#pragma once

#include "oseen/config.hpp"
#include "oseen/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace oseen {

/// One line of the run summary.
struct SummaryRow {
    std::string experiment;
    std::string tag;  ///< estimate the row gates on
    std::string quantity;
    double predicted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

nlohmann::json to_json(const SummaryRow& r);
SummaryRow row_from_json(const nlohmann::json& j);

struct ExperimentResult {
    std::string id;  ///< NN-name, also the artifact subdirectory
    std::string kind;
    std::vector<SummaryRow> rows;
    std::string error;  ///< set when the experiment threw
};

/// Build the problem of a run on its mesh. The boundary data are sampled on a time
/// grid four times finer than the slabs, with derivatives and ambient gradients.
ProblemSpec make_problem(const RunConfig& cfg);

/// Run every experiment and write per-experiment artifacts plus summary.json and
/// summary.csv under cfg.output_dir. Returns 0 when every row passes, 1 otherwise.
int run_experiments(const RunConfig& cfg, std::ostream& log);

/// Re-aggregate the per-experiment result files of an output directory into
/// summary.json/summary.csv and return the rendered table.
std::string render_report(const std::filesystem::path& dir, int* failed = nullptr);

}  // namespace oseen
