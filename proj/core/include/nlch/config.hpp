#ifndef NLCH_CONFIG_HPP
#define NLCH_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlch/kernel.hpp"
#include "nlch/model.hpp"
#include "nlch/potential.hpp"

namespace nlch {

/// Flat dotted-key run configuration. Keys are grouped by section:
/// grid.*, kernel.*, potential.*, dynamics.*, solver.*, ic.*, stationary.*,
/// output.*. Unknown keys are rejected with the offending line number.
struct RunConfig {
  // grid
  int grid_dim = 1;
  std::vector<double> grid_length;
  std::vector<int> grid_n;

  // kernel
  KernelSpec::Type kernel_type = KernelSpec::Type::gaussian;
  bool kernel_cj_auto = true; // kernel.cj = auto normalizes ||J||_L1 to 1
  double kernel_cj = 1.0;
  double kernel_xi = 1.0;
  std::optional<double> kernel_cutoff;
  bool kernel_regularize = true;
  std::string kernel_file;

  // potential
  Potential::Kind potential_type = Potential::Kind::double_well;
  double potential_lambda = 1.0;
  std::string potential_file;

  // dynamics + solver
  ModelConfig dynamics;
  std::string mobility_file;

  // initial condition
  enum class IcType { constant, noise, cosine, file };
  IcType ic_type = IcType::constant;
  double ic_value = 0.0;
  double ic_amplitude = 0.0;
  unsigned long long ic_seed = 0;
  std::vector<int> ic_mode;
  std::string ic_path;

  // stationary solves (equilibrate command)
  double stationary_tol = 1e-8;
  int stationary_max_outer = 500;
  double stationary_damping = 0.5;
  std::optional<double> stationary_mass;
  bool stationary_degenerate = false;

  std::string output_dir = "out";

  /// Parsed key/value pairs in file order (sweep substitution, manifests).
  std::vector<std::pair<std::string, std::string>> entries;

  Grid make_grid() const;
  KernelSpec make_kernel_spec() const;
  Potential make_potential() const;
  /// Builds the initial order parameter; noise is zero-mean so the mean is
  /// exactly ic.value, and cell-centered cosines have zero mean exactly.
  Field make_initial_field(const Grid& g) const;
  ModelConfig make_model_config() const;

  /// Every key with its resolved value (defaults filled in), fixed order.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Re-serializes entries with one key overridden (appended if absent).
std::string override_entry(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::string& key, const std::string& value);

/// Deterministic uniform variates in [0,1) (splitmix64 stream); the noise
/// initial condition must reproduce bit-identically across platforms.
class NoiseStream {
public:
  explicit NoiseStream(unsigned long long seed) : state_(seed) {}
  double next_unit();

private:
  unsigned long long state_;
};

} // namespace nlch

#endif
