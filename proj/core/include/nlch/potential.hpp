#ifndef NLCH_POTENTIAL_HPP
#define NLCH_POTENTIAL_HPP

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "nlch/kernel.hpp"

namespace nlch {

/// The potential families:
///   double_well   F(s) = (s^2-1)^2                 on (-inf, inf)
///   logarithmic   F(s) = (1+s)log(1+s)+(1-s)log(1-s) - lambda s^2   on (-1, 1)
///   entropy       F(s) = s log s + (1-s)log(1-s)   on (0, 1)
///   custom        tabulated (s, F, F', F''), cubic Hermite interpolation
///
/// Each carries a convex/expansive split F = Fc + Fe with Fc'' >= 0 on the
/// admissible interval; implicit-in-Fc stepping then decreases the discrete
/// energy unconditionally.
class Potential {
public:
  enum class Kind { double_well, logarithmic, entropy, custom };

  static Potential double_well();
  static Potential logarithmic(double lambda);
  static Potential entropy();
  /// rows: (s, F, F', F'') with strictly increasing s.
  static Potential custom(std::vector<std::array<double, 4>> rows);
  static Potential custom_from_file(const std::filesystem::path& path);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  /// Open admissible interval (lo, hi); +-inf for double_well.
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool singular() const { return std::isfinite(lo_) || std::isfinite(hi_); }
  std::string name() const;

  struct Value {
    double F, dF, d2F;
  };
  /// Closed-form F, F', F''. Throws PotentialDomainError for s outside the
  /// admissible interval or within 1e-14 of a singular endpoint.
  Value eval(double s) const;
  double F(double s) const { return eval(s).F; }
  double dF(double s) const { return eval(s).dF; }
  double d2F(double s) const { return eval(s).d2F; }

  // Convex part (treated implicitly by the schemes).
  double Fc(double s) const;
  double dFc(double s) const;
  double d2Fc(double s) const;
  // Expansive part; F = Fc + Fe identically.
  double Fe(double s) const;
  double dFe(double s) const;
  double d2Fe(double s) const;

  /// True when s is strictly admissible with the given margin to the endpoints.
  bool admissible(double s, double margin = 0.0) const;

private:
  Potential() = default;
  void check_domain(double s) const;

  Kind kind_ = Kind::double_well;
  double lambda_ = 0.0;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 4>> rows_; // custom table
  double custom_shift_ = 0.0;               // Fe = -custom_shift_/2 * s^2
};

/// Evaluator bundle for one side of the splitting.
struct PotentialPart {
  const Potential* p;
  bool convex;
  double F(double s) const { return convex ? p->Fc(s) : p->Fe(s); }
  double dF(double s) const { return convex ? p->dFc(s) : p->dFe(s); }
  double d2F(double s) const { return convex ? p->d2Fc(s) : p->d2Fe(s); }
};

struct ConvexSplit {
  PotentialPart convex;
  PotentialPart expansive;
};

ConvexSplit convex_split(const Potential& p);

/// Sampled audit of the structural hypotheses the long-time theory needs.
/// Failures are reported, never thrown: probing hypothesis-violating regimes
/// is a legitimate use of the simulator.
struct HypothesisReport {
  // coercivity: inf F'' + min a >= c0 > 0
  double c0 = 0.0;
  bool h2 = false;
  // quadratic growth: F(s) >= c1 s^2 - c2 with c1 > ||J||_L1 / 2
  double c1 = 1.0;
  double c2 = 0.0;
  double c1_margin = 0.0;
  bool h3 = false;
  // |F'|^p <= c3 |F| + c4; largest passing p in {1.1, ..., 2.0}, 0 if none
  double h4_p = 0.0;
  double h4_c3 = 0.0;
  bool h4 = false;
  // F''(s) + inf a >= c5 s^{2q} - c6; largest passing q in {0.5, 1, 1.5, 2}
  double h5_q = 0.0;
  bool h5 = false;
  // viscous/singular coercivity margin: alpha + beta + min F_e''
  double h10_margin = 0.0;
  double h10_f1_min = 0.0; // sampled inf of the convex part's 2nd derivative
  bool h10 = false;
  // smallest C_F with F'(s) s >= F(s) - C_F on the samples
  double lbbb_cf = 0.0;

  double min_ambient = 0.0;
  double kernel_l1 = 0.0;
};

HypothesisReport check_hypotheses(const Potential& p, const Kernel& k, double alpha);

/// The audit's sample lattice: ~1e4 points, geometrically refined toward
/// singular endpoints (down to 1e-12 of the interval width).
std::vector<double> hypothesis_samples(const Potential& p);

} // namespace nlch

#endif
