#ifndef IRK_EXPERIMENT_HPP
#define IRK_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "irk/problems.hpp"
#include "irk/solvers.hpp"

namespace irk {

struct OutputFlags {
  bool history_csv = true;
  bool reconstruction_pgm = true;
  bool reconstruction_raw = true;
  bool summary_table = true;
};

struct ExperimentSpec {
  ProblemParams problem;
  std::vector<std::uint64_t> seeds{0};
  std::vector<SolverConfig> solvers;
  std::filesystem::path output_dir = "results";
  OutputFlags output;
};

/// One validation finding: JSON pointer of the offending value, its 1-based
/// line in the source (0 when unknown), and a message.
struct Diagnostic {
  std::string path;
  int line = 0;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<Diagnostic> diagnostics_;
};

/// Parses and fully validates an experiment config, filling defaults.
/// Throws ConfigError listing every problem found.
ExperimentSpec parse_experiment(std::string_view json_text, const std::string& source = "<config>");
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// The config with all defaults made explicit, as pretty-printed JSON.
std::string effective_config_json(const ExperimentSpec& spec);

/// Human-readable list of problem kinds and their parameters.
std::string describe_problems();

/// Parses "a..b" (inclusive range) or "a,b,c".
std::optional<std::vector<std::uint64_t>> parse_seed_list(const std::string& text);

struct RunOptions {
  int jobs = 1;
};

struct SummaryRow {
  std::uint64_t seed = 0;
  std::string label;
  Method method = Method::ir_flsqr;
  SolveStatus status = SolveStatus::max_iterations;
  double final_rel_error = 0.0;
  double final_residual_norm = 0.0;
  double final_lambda = 0.0;
  Index iterations = 0;
  Index restarts = 0;
  Index peak_basis_columns = 0;
};

/// Runs every (seed, solver) pair and writes all artifacts under
/// spec.output_dir. Returns the summary rows ordered by seed, then solver.
std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options,
                                       std::ostream& log);

/// History CSV text (iter,rel_error,res_norm,lambda,subspace_dim,restarted,
/// functional_T) with numbers printed to 17 significant digits.
std::string history_csv(const RunHistory& history);

/// 16-bit binary PGM of a column-major image, min-max scaled.
std::string pgm16(const Vector& image, Index rows, Index cols, double* min_out = nullptr,
                  double* max_out = nullptr);

}  // namespace irk

#endif  // IRK_EXPERIMENT_HPP
