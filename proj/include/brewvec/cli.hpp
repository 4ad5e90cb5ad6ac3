#ifndef BREWVEC_CLI_HPP
#define BREWVEC_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace brewvec {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitData = 3,
    kExitIo = 4,
};

/**
 * Runs one subcommand: train, synth, similar, recommend, profile, describe,
 * arith, pca-baseline, export-2d or serve. Results go to @p out, diagnostics
 * to @p err. Returns an ExitCode.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace brewvec

#endif  // BREWVEC_CLI_HPP
