#include "nlch/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlch/errors.hpp"

namespace nlch {

namespace {
constexpr double kEdge = 1e-14; // singular endpoints are fenced at this distance
}

Potential Potential::double_well() {
  Potential p;
  p.kind_ = Kind::double_well;
  return p;
}

Potential Potential::logarithmic(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("logarithmic potential needs lambda >= 0");
  Potential p;
  p.kind_ = Kind::logarithmic;
  p.lambda_ = lambda;
  p.lo_ = -1.0;
  p.hi_ = 1.0;
  return p;
}

Potential Potential::entropy() {
  Potential p;
  p.kind_ = Kind::entropy;
  p.lo_ = 0.0;
  p.hi_ = 1.0;
  return p;
}

Potential Potential::custom(std::vector<std::array<double, 4>> rows) {
  if (rows.size() < 4)
    throw ConfigError("custom potential table needs at least 4 rows");
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i][0] > rows[i - 1][0]))
      throw ConfigError("custom potential table needs strictly increasing s");
  Potential p;
  p.kind_ = Kind::custom;
  p.lo_ = rows.front()[0];
  p.hi_ = rows.back()[0];
  double min_d2 = rows.front()[3];
  for (const auto& r : rows) min_d2 = std::min(min_d2, r[3]);
  p.custom_shift_ = std::max(0.0, -min_d2);
  p.rows_ = std::move(rows);
  return p;
}

Potential Potential::custom_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open potential table " + path.string());
  std::vector<std::array<double, 4>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::array<double, 4> row{};
    if (!(ss >> row[0])) continue;
    if (!(ss >> row[1] >> row[2] >> row[3]))
      throw ParseError("potential table needs four columns (s F F' F'')", lineno);
    rows.push_back(row);
  }
  return custom(std::move(rows));
}

std::string Potential::name() const {
  switch (kind_) {
    case Kind::double_well: return "double_well";
    case Kind::logarithmic: return "logarithmic";
    case Kind::entropy: return "entropy";
    case Kind::custom: return "custom";
  }
  return "?";
}

bool Potential::admissible(double s, double margin) const {
  if (!std::isfinite(s)) return false;
  return s > lo_ + margin && s < hi_ - margin;
}

void Potential::check_domain(double s) const {
  if (!std::isfinite(s))
    throw PotentialDomainError("potential evaluated at non-finite value", s);
  if (kind_ == Kind::double_well) return;
  if (!(s - lo_ >= kEdge) || !(hi_ - s >= kEdge))
    throw PotentialDomainError(
        "value " + std::to_string(s) + " outside the admissible interval (" +
            std::to_string(lo_) + ", " + std::to_string(hi_) + ") of the " +
            name() + " potential",
        s);
}

Potential::Value Potential::eval(double s) const {
  check_domain(s);
  switch (kind_) {
    case Kind::double_well: {
      double u = s * s - 1.0;
      return {u * u, 4.0 * s * u, 12.0 * s * s - 4.0};
    }
    case Kind::logarithmic: {
      double F = (1.0 + s) * std::log1p(s) + (1.0 - s) * std::log1p(-s) -
                 lambda_ * s * s;
      double dF = std::log1p(s) - std::log1p(-s) - 2.0 * lambda_ * s;
      double d2F = 1.0 / (1.0 + s) + 1.0 / (1.0 - s) - 2.0 * lambda_;
      return {F, dF, d2F};
    }
    case Kind::entropy: {
      double F = s * std::log(s) + (1.0 - s) * std::log1p(-s);
      double dF = std::log(s) - std::log1p(-s);
      double d2F = 1.0 / s + 1.0 / (1.0 - s);
      return {F, dF, d2F};
    }
    case Kind::custom: {
      // F by cubic Hermite on (F, F'); F' by cubic Hermite on (F', F'');
      // F'' linear. Consistent slopes keep the audits meaningful.
      auto it = std::upper_bound(rows_.begin(), rows_.end(), s,
                                 [](double v, const std::array<double, 4>& r) {
                                   return v < r[0];
                                 });
      if (it == rows_.begin()) ++it;
      if (it == rows_.end()) --it;
      const auto& b = *it;
      const auto& a = *(it - 1);
      double h = b[0] - a[0];
      double t = (s - a[0]) / h;
      auto hermite = [&](double fa, double fb, double da, double db) {
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * fa + (t3 - 2 * t2 + t) * h * da +
               (-2 * t3 + 3 * t2) * fb + (t3 - t2) * h * db;
      };
      double F = hermite(a[1], b[1], a[2], b[2]);
      double dF = hermite(a[2], b[2], a[3], b[3]);
      double d2F = a[3] + t * (b[3] - a[3]);
      return {F, dF, d2F};
    }
  }
  return {0, 0, 0};
}

double Potential::Fc(double s) const {
  switch (kind_) {
    case Kind::double_well: {
      double s2 = s * s;
      return s2 * s2 + 1.0;
    }
    case Kind::logarithmic:
      check_domain(s);
      return (1.0 + s) * std::log1p(s) + (1.0 - s) * std::log1p(-s);
    case Kind::entropy:
      return eval(s).F;
    case Kind::custom:
      return eval(s).F + 0.5 * custom_shift_ * s * s;
  }
  return 0.0;
}

double Potential::dFc(double s) const {
  switch (kind_) {
    case Kind::double_well:
      return 4.0 * s * s * s;
    case Kind::logarithmic:
      check_domain(s);
      return std::log1p(s) - std::log1p(-s);
    case Kind::entropy:
      return eval(s).dF;
    case Kind::custom:
      return eval(s).dF + custom_shift_ * s;
  }
  return 0.0;
}

double Potential::d2Fc(double s) const {
  switch (kind_) {
    case Kind::double_well:
      return 12.0 * s * s;
    case Kind::logarithmic:
      check_domain(s);
      return 1.0 / (1.0 + s) + 1.0 / (1.0 - s);
    case Kind::entropy:
      return eval(s).d2F;
    case Kind::custom:
      return eval(s).d2F + custom_shift_;
  }
  return 0.0;
}

double Potential::Fe(double s) const {
  switch (kind_) {
    case Kind::double_well:
      return -2.0 * s * s;
    case Kind::logarithmic:
      return -lambda_ * s * s;
    case Kind::entropy:
      return 0.0;
    case Kind::custom:
      return -0.5 * custom_shift_ * s * s;
  }
  return 0.0;
}

double Potential::dFe(double s) const {
  switch (kind_) {
    case Kind::double_well:
      return -4.0 * s;
    case Kind::logarithmic:
      return -2.0 * lambda_ * s;
    case Kind::entropy:
      return 0.0;
    case Kind::custom:
      return -custom_shift_ * s;
  }
  return 0.0;
}

double Potential::d2Fe([[maybe_unused]] double s) const {
  switch (kind_) {
    case Kind::double_well:
      return -4.0;
    case Kind::logarithmic:
      return -2.0 * lambda_;
    case Kind::entropy:
      return 0.0;
    case Kind::custom:
      return -custom_shift_;
  }
  return 0.0;
}

ConvexSplit convex_split(const Potential& p) {
  return {PotentialPart{&p, true}, PotentialPart{&p, false}};
}

std::vector<double> hypothesis_samples(const Potential& p) {
  std::vector<double> s;
  if (!p.singular()) {
    const double R = 10.0;
    const int n = 10000;
    s.reserve(n);
    for (int i = 0; i < n; ++i)
      s.push_back(-R + (2.0 * R) * (i + 0.5) / n);
    return s;
  }
  const double lo = p.lo(), hi = p.hi(), w = hi - lo;
  const int ncore = 9600;
  s.reserve(ncore + 400);
  const double inset = 1e-3 * w;
  for (int i = 0; i < ncore; ++i)
    s.push_back(lo + inset + (w - 2 * inset) * (i + 0.5) / ncore);
  // geometric refinement toward both endpoints, 10^-3 .. 10^-12 of the width
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < 200; ++i) {
      double expo = 3.0 + 9.0 * i / 199.0;
      double d = w * std::pow(10.0, -expo);
      s.push_back(side == 0 ? lo + d : hi - d);
    }
  std::sort(s.begin(), s.end());
  return s;
}

HypothesisReport check_hypotheses(const Potential& p, const Kernel& k, double alpha) {
  HypothesisReport rep;
  const auto samples = hypothesis_samples(p);
  rep.min_ambient = min_value(k.ambient());
  rep.kernel_l1 = k.l1_norm();

  double minF = std::numeric_limits<double>::infinity();
  double mind2 = std::numeric_limits<double>::infinity();
  double mind2c = std::numeric_limits<double>::infinity();
  double mind2e = std::numeric_limits<double>::infinity();
  double lbbb = -std::numeric_limits<double>::infinity();
  double minFm1s2 = std::numeric_limits<double>::infinity(); // F - c1 s^2
  for (double s : samples) {
    auto v = p.eval(s);
    minF = std::min(minF, v.F);
    mind2 = std::min(mind2, v.d2F);
    mind2c = std::min(mind2c, p.d2Fc(s));
    mind2e = std::min(mind2e, p.d2Fe(s));
    lbbb = std::max(lbbb, v.F - v.dF * s);
    minFm1s2 = std::min(minFm1s2, v.F - rep.c1 * s * s);
  }

  rep.c0 = mind2 + rep.min_ambient;
  rep.h2 = rep.c0 > 0.0;

  rep.c2 = std::max(0.0, -minFm1s2);
  rep.c1_margin = rep.c1 - 0.5 * rep.kernel_l1;
  rep.h3 = rep.c1_margin > 0.0;

  rep.lbbb_cf = lbbb;

  rep.h10_f1_min = mind2c;
  rep.h10_margin = alpha + rep.min_ambient + mind2e;
  rep.h10 = rep.h10_margin > 0.0;

  // inner samples anchor the constants; the full lattice validates them, so
  // exponents whose growth outruns the potential fail at the range edge
  const double half = p.singular() ? 0.25 * (p.hi() - p.lo()) : 5.0;
  const double mid = p.singular() ? 0.5 * (p.hi() + p.lo()) : 0.0;
  auto inner = [&](double s) { return std::fabs(s - mid) <= half; };

  for (double pe = 2.0; pe >= 1.05; pe -= 0.1) {
    double c3 = 0.0;
    for (double s : samples)
      if (inner(s)) {
        auto v = p.eval(s);
        c3 = std::max(c3, std::pow(std::fabs(v.dF), pe) / (std::fabs(v.F) + 1.0));
      }
    c3 *= 1.05;
    bool ok = true;
    for (double s : samples) {
      auto v = p.eval(s);
      if (std::pow(std::fabs(v.dF), pe) > c3 * std::fabs(v.F) + c3 + 1e-9) {
        ok = false;
        break;
      }
    }
    if (ok) {
      rep.h4_p = pe;
      rep.h4_c3 = c3;
      rep.h4 = true;
      break;
    }
  }

  const double c6 = std::max(0.0, -(mind2 + rep.min_ambient)) + 1.0;
  for (double q : {2.0, 1.5, 1.0, 0.5}) {
    double anchor = 0.0, anchor_num = 0.0;
    for (double s : samples)
      if (inner(s) && std::fabs(s - mid) > anchor) {
        anchor = std::fabs(s - mid);
        anchor_num = p.eval(s).d2F + rep.min_ambient + c6;
      }
    if (!(anchor > 0.0) || !(anchor_num > 0.0)) continue;
    double c5 = 0.95 * anchor_num / std::pow(anchor, 2.0 * q);
    bool ok = true;
    for (double s : samples) {
      auto v = p.eval(s);
      if (v.d2F + rep.min_ambient <
          c5 * std::pow(std::fabs(s - mid), 2.0 * q) - c6 - 1e-9) {
        ok = false;
        break;
      }
    }
    if (ok) {
      rep.h5_q = q;
      rep.h5 = true;
      break;
    }
  }

  return rep;
}

} // namespace nlch
