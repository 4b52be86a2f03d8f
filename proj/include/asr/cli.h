#ifndef ASR_CLI_H
#define ASR_CLI_H

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "asr/optimizer.h"

namespace asr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,
  kExitIo = 2,
  kExitInfeasible = 3,
};

enum class LogLevel { kError, kInfo, kDebug };

// From ASR_LOG (error, info, debug); error when unset or unrecognized.
LogLevel LogLevelFromEnv();

int RunValidate(const std::string& config_path, std::ostream& out,
                std::ostream& err);

struct SolveArgs {
  std::string config_path;
  std::string perturbation = "baseline";
  std::optional<std::string> out_csv;
};
int RunSolve(const SolveArgs& args, std::ostream& out, std::ostream& err);

struct SimulateArgs {
  std::string config_path;
  std::vector<std::string> traces;
  std::optional<std::uint64_t> seed;
  std::string perturbation = "baseline";
  std::string out_dir = "sim_out";
};
int RunSimulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct SensitivityArgs {
  std::string config_path;
  std::string grid;
  std::optional<std::string> out_csv;
};
int RunSensitivity(const SensitivityArgs& args, std::ostream& out,
                   std::ostream& err);

// Text block printed by `solve` for a constraint report.
std::string FormatConstraintReport(const ConstraintReport& report);

// CSV written by `solve --out`.
std::string AssignmentCsv(const Assignment& a);
// Reads the user -> path columns back. Throws Error(kParse).
std::map<std::string, Path> ReadAssignmentCsv(std::istream& in);

}  // namespace asr::cli

#endif
