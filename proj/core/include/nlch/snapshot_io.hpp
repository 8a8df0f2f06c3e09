#ifndef NLCH_SNAPSHOT_IO_HPP
#define NLCH_SNAPSHOT_IO_HPP

#include <filesystem>

#include "nlch/grid.hpp"
#include "nlch/trajectory.hpp"

namespace nlch {

/// Binary snapshot: magic "NLCH1", u16 version, u16 dim, u64 counts per
/// axis, f64 lengths per axis, f64 time, then row-major little-endian f64
/// payload. Round-trips bit-exactly.
void write_snapshot(const std::filesystem::path& path, const Field& f, double time);

struct SnapshotData {
  Field field;
  double time = 0.0;
};

SnapshotData read_snapshot(const std::filesystem::path& path);

/// diagnostics.csv: one row per accepted step with the documented column
/// schema; every acceptance quantity is computable from this file plus the
/// snapshots. Values print with 17 significant digits so reruns are
/// byte-comparable.
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj);

extern const char* const kDiagnosticsHeader;

} // namespace nlch

#endif
