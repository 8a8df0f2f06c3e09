#ifndef NLCH_APP_HPP
#define NLCH_APP_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlch/config.hpp"

namespace nlch::app {

/// Integrates the configured model; writes snapshots, diagnostics.csv and a
/// manifest into out_dir. Returns 0 on completion or equilibration.
int run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// Verification presets: energy-identity | separation | contraction |
/// convergence | kernel-oracle | hypotheses. Prints one PASS/FAIL line per
/// criterion with measured values; returns 0 iff all pass.
int verify(const RunConfig& cfg, const std::string& preset, std::ostream& out);

/// Mass-constrained stationary solve (closed-form degenerate fixed point when
/// stationary.degenerate is set); writes phi_star.bin and summary.txt.
int equilibrate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Independent runs over one overridden key, one subdirectory per value plus
/// an index.csv. Results are bit-identical regardless of `threads`.
int sweep(const RunConfig& base, const std::string& axis_key,
          const std::vector<std::string>& values,
          const std::filesystem::path& out_dir, int threads, std::ostream& log);

/// Snapshot -> CSV grid dump (x[,y],phi).
int export_csv(const std::filesystem::path& snapshot,
               const std::filesystem::path& out_csv, std::ostream& log);

/// "key=v1,v2,..." -> (key, values); rejects empty lists.
std::pair<std::string, std::vector<std::string>> parse_axis(const std::string& spec);

} // namespace nlch::app

#endif
