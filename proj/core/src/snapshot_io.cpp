#include "nlch/snapshot_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "nlch/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot payload is little-endian; big-endian hosts need byte swaps");

namespace nlch {

namespace {
constexpr char kMagic[5] = {'N', 'L', 'C', 'H', '1'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
} // namespace

void write_snapshot(const std::filesystem::path& path, const Field& f, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(f.grid.dim));
  for (int a = 0; a < f.grid.dim; ++a)
    put<std::uint64_t>(out, static_cast<std::uint64_t>(f.grid.count[a]));
  for (int a = 0; a < f.grid.dim; ++a) put<double>(out, f.grid.length[a]);
  put<double>(out, time);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw IoError("short write on snapshot " + path.string());
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot " + path.string());
  char magic[5];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a snapshot file: " + path.string());
  auto version = get<std::uint16_t>(in);
  if (version != kVersion)
    throw IoError("unsupported snapshot version " + std::to_string(version));
  int dim = get<std::uint16_t>(in);
  if (dim != 1 && dim != 2) throw IoError("snapshot has invalid dim");
  std::vector<int> counts(dim);
  for (int a = 0; a < dim; ++a)
    counts[a] = static_cast<int>(get<std::uint64_t>(in));
  std::vector<double> lengths(dim);
  for (int a = 0; a < dim; ++a) lengths[a] = get<double>(in);
  double time = get<double>(in);

  SnapshotData snap;
  snap.time = time;
  snap.field = Field(make_grid(dim, lengths, counts), 0.0, FieldTag::order_parameter);
  in.read(reinterpret_cast<char*>(snap.field.values.data()),
          static_cast<std::streamsize>(snap.field.values.size() * sizeof(double)));
  if (!in) throw IoError("truncated snapshot " + path.string());
  return snap;
}

const char* const kDiagnosticsHeader =
    "step,t,dt_used,energy,dissipation_increment,cumulative_dissipation,"
    "identity_residual,mass,phi_min,phi_max,newton_iters,dphi_vprime";

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write diagnostics " + path.string());
  out << kDiagnosticsHeader << "\n";
  const double e0 = traj.ledger.empty() ? 0.0 : traj.ledger.front().energy_before;
  double cum = 0.0;
  char buf[512];
  for (const auto& d : traj.ledger) {
    cum += d.dissipation_increment;
    const double identity = std::fabs(d.energy_after + cum - e0);
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                  d.step, d.t, d.dt_used, d.energy_after, d.dissipation_increment,
                  cum, identity, d.mass, d.phi_min, d.phi_max, d.newton_iters,
                  d.dphi_vprime);
    out << buf;
  }
  if (!out) throw IoError("short write on diagnostics " + path.string());
}

} // namespace nlch
