#ifndef MUCS_TOOLS_CLI_HPP
#define MUCS_TOOLS_CLI_HPP

#include <string>
#include <vector>

#include "mucs/csv.hpp"
#include "mucs/replica.hpp"

namespace mucs::cli {

enum ExitCode : int { kOk = 0, kBadArguments = 2, kNumericalFailure = 3, kIoFailure = 4 };

/// Parses argv (argv[0] is the program name), runs the subcommand and maps
/// errors to exit codes. Diagnostics go to stderr as "mucs: error[kind]: ...".
int run(int argc, const char* const* argv);
/// Arguments after the program name.
int run(const std::vector<std::string>& args);

/// Exit code and stderr line for the exception currently being handled.
int report_current_exception();

csv::Header base_header(const std::string& command);
void append_params(csv::Header& header, const ReplicaParams& p);
/// Short decimal form used in generated file names.
std::string tag(double x);

struct ReproduceArgs {
  std::string figure;
  std::string scale = "desk";
  std::string out_dir;
  unsigned threads = 0;
};

int cmd_reproduce(const ReproduceArgs& args);

}  // namespace mucs::cli

#endif
