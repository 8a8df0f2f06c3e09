#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "nlch/config.hpp"
#include "nlch/errors.hpp"
#include "nlch/snapshot_io.hpp"
#include "test_util.hpp"

using namespace nlch;
using namespace nlch::test;

namespace {
const char* kBase =
    "grid.dim=1\n"
    "grid.n=256\n"
    "grid.length=1.0\n"
    "kernel.type=gaussian\n"
    "kernel.xi=100\n"
    "kernel.cj=auto\n"
    "potential.type=double_well\n"
    "dynamics.variant=A\n"
    "dynamics.dt=1e-4\n"
    "dynamics.t_end=1.0\n";
}

TEST_CASE("the canonical config parses with documented defaults") {
  RunConfig cfg = parse_config(kBase);
  CHECK(cfg.grid_dim == 1);
  CHECK(cfg.grid_n == std::vector<int>{256});
  CHECK(cfg.kernel_cj_auto);
  CHECK(cfg.kernel_xi == 100.0);
  CHECK(cfg.potential_type == Potential::Kind::double_well);
  CHECK(cfg.dynamics.variant == Variant::A);
  CHECK(cfg.dynamics.dt == 1e-4);
  CHECK(cfg.ic_type == RunConfig::IcType::constant);
  CHECK(cfg.ic_value == 0.0);

  Grid g = cfg.make_grid();
  CHECK(g.nx() == 256);
  Kernel k = build_kernel(cfg.make_kernel_spec(), g);
  CHECK(k.l1_norm() == doctest::Approx(1.0).epsilon(1e-12)); // cj=auto
}

TEST_CASE("missing required keys name the key") {
  std::string text = kBase;
  auto cut = text.find("dynamics.dt=1e-4\n");
  text.erase(cut, std::strlen("dynamics.dt=1e-4\n"));
  try {
    parse_config(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("dynamics.dt") != std::string::npos);
  }
}

TEST_CASE("variant B with zero viscosity is a validation error") {
  std::string text = kBase;
  text += "dynamics.alpha=0\n";
  text.replace(text.find("dynamics.variant=A"), std::strlen("dynamics.variant=A"),
               "dynamics.variant=B");
  text.replace(text.find("potential.type=double_well"),
               std::strlen("potential.type=double_well"),
               "potential.type=logarithmic\n# pad");
  try {
    parse_config(text);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }

  // without an explicit alpha, variant B picks the documented default 0.1
  std::string text2 = kBase;
  text2.replace(text2.find("dynamics.variant=A"), std::strlen("dynamics.variant=A"),
                "dynamics.variant=B");
  RunConfig cfg = parse_config(text2);
  CHECK(cfg.dynamics.alpha == 0.1);
}

TEST_CASE("unknown keys, duplicates and type mismatches carry line numbers") {
  try {
    parse_config(std::string(kBase) + "grid.m=12\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 11);
    CHECK(std::string(e.what()).find("grid.m") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::string(kBase) + "grid.dim=2\n"), ParseError);
  CHECK_THROWS_AS(parse_config(std::string(kBase) + "ic.value=abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config(std::string(kBase) + "broken line\n"), ParseError);
}

TEST_CASE("noise and cosine initial data have the exact requested mean") {
  std::string text = std::string(kBase) +
                     "ic.type=noise\nic.value=0.15\nic.amplitude=0.5\nic.seed=42\n";
  RunConfig cfg = parse_config(text);
  Grid g = cfg.make_grid();
  Field f = cfg.make_initial_field(g);
  CHECK(std::fabs(mean(f) - 0.15) <= 1e-14);
  CHECK(max_abs(f) <= 0.15 + 0.5 * 1.01);

  // same seed, same field
  Field f2 = cfg.make_initial_field(g);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.values[i] == f2.values[i]);

  std::string cos_text = std::string(kBase) +
                         "ic.type=cosine\nic.value=0.5\nic.amplitude=0.2\nic.mode=3\n";
  Field fc = parse_config(cos_text).make_initial_field(g);
  CHECK(std::fabs(mean(fc) - 0.5) <= 1e-14);
}

TEST_CASE("snapshots round-trip bit-exactly and feed file initial data") {
  namespace fs = std::filesystem;
  Grid g = grid2d(12, 8, 2.0, 1.0);
  Field f = random_field(g, 19, -0.9, 0.9);
  fs::path tmp = fs::temp_directory_path() / "nlch_snap_test.bin";
  write_snapshot(tmp, f, 1.75);
  SnapshotData snap = read_snapshot(tmp);
  CHECK(snap.time == 1.75);
  CHECK(snap.field.grid == g);
  CHECK(std::memcmp(snap.field.values.data(), f.values.data(),
                    f.size() * sizeof(double)) == 0);

  std::string text =
      "grid.dim=2\ngrid.n=12,8\ngrid.length=2.0,1.0\nkernel.type=gaussian\n"
      "kernel.xi=50\npotential.type=double_well\ndynamics.variant=A\n"
      "dynamics.dt=1e-3\ndynamics.t_end=0.1\nic.type=file\nic.path=" +
      tmp.string() + "\n";
  RunConfig cfg = parse_config(text);
  Field loaded = cfg.make_initial_field(cfg.make_grid());
  CHECK(std::memcmp(loaded.values.data(), f.values.data(),
                    f.size() * sizeof(double)) == 0);
  fs::remove(tmp);
}

TEST_CASE("override_entry rewrites exactly one key") {
  RunConfig cfg = parse_config(kBase);
  std::string text = override_entry(cfg.entries, "kernel.xi", "250");
  RunConfig cfg2 = parse_config(text);
  CHECK(cfg2.kernel_xi == 250.0);
  CHECK(cfg2.dynamics.dt == cfg.dynamics.dt);

  std::string text2 = override_entry(cfg.entries, "ic.seed", "7");
  CHECK(parse_config(text2).ic_seed == 7);
}
