#include "specflow/path.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "specflow/error.hpp"

namespace specflow::path {

namespace {

bool near(double t, double b) { return std::abs(t - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// Number of breakpoints that lie to the left of t, where a breakpoint
// coinciding with t counts as "left" when approaching from the right.
int region(double t, Side side, std::span<const double> sorted_bps) {
  int r = 0;
  for (double b : sorted_bps) {
    if (near(t, b)) {
      if (side == Side::Right) ++r;
    } else if (b < t) {
      ++r;
    }
  }
  return r;
}

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return near(b, a); }), v.end());
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::TanhSigmoid: return "tanh-sigmoid";
    case ProfileKind::SmoothstepCompact: return "smoothstep-compact";
    case ProfileKind::LinearRamp: return "piecewise-linear-ramp";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
  if (name == "tanh-sigmoid") return ProfileKind::TanhSigmoid;
  if (name == "smoothstep-compact") return ProfileKind::SmoothstepCompact;
  if (name == "piecewise-linear-ramp") return ProfileKind::LinearRamp;
  throw Error(ErrorCode::InvalidArgument, "unknown profile kind '" + std::string(name) + "'");
}

Profile::Profile(ProfileKind kind, double center, double width) : kind_(kind), center_(center), width_(width) {
  if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(center))
    throw Error(ErrorCode::InvalidArgument, "profile needs finite center and width > 0");
}

double Profile::base_value(double t) const {
  const double s = (t - center_ + width_) / (2.0 * width_);
  switch (kind_) {
    case ProfileKind::TanhSigmoid: return 0.5 * (1.0 + std::tanh((t - center_) / width_));
    case ProfileKind::SmoothstepCompact:
      if (s <= 0.0) return 0.0;
      if (s >= 1.0) return 1.0;
      return s * s * (3.0 - 2.0 * s);
    case ProfileKind::LinearRamp: return std::clamp(s, 0.0, 1.0);
  }
  return 0.0;
}

double Profile::base_derivative(double t, Side side) const {
  switch (kind_) {
    case ProfileKind::TanhSigmoid: {
      const double ch = std::cosh((t - center_) / width_);
      return 0.5 / (width_ * ch * ch);
    }
    case ProfileKind::SmoothstepCompact: {
      const double s = (t - center_ + width_) / (2.0 * width_);
      if (s <= 0.0 || s >= 1.0) return 0.0;
      return 6.0 * s * (1.0 - s) / (2.0 * width_);
    }
    case ProfileKind::LinearRamp: {
      const std::array<double, 2> bps{center_ - width_, center_ + width_};
      return region(t, side, bps) == 1 ? 0.5 / width_ : 0.0;
    }
  }
  return 0.0;
}

double Profile::value_at_level(double t, std::size_t level) const {
  if (level == 0) return base_value(t);
  const double n = truncations_[level - 1];
  if (t <= -n - 1.0) return 0.0;
  if (t >= n + 1.0) return 1.0;
  if (t < -n) return (t + n + 1.0) * value_at_level(-n, level - 1);
  if (t > n) return (t - n) + (n + 1.0 - t) * value_at_level(n, level - 1);
  return value_at_level(t, level - 1);
}

double Profile::derivative_at_level(double t, Side side, std::size_t level) const {
  if (level == 0) return base_derivative(t, side);
  const double n = truncations_[level - 1];
  const std::array<double, 4> bps{-n - 1.0, -n, n, n + 1.0};
  switch (region(t, side, bps)) {
    case 1: return value_at_level(-n, level - 1);
    case 2: return derivative_at_level(t, side, level - 1);
    case 3: return 1.0 - value_at_level(n, level - 1);
    default: return 0.0;
  }
}

double Profile::value(double t) const { return value_at_level(t, truncations_.size()); }

double Profile::derivative(double t, Side side) const {
  return derivative_at_level(t, side, truncations_.size());
}

bool Profile::exactly_compact() const { return kind_ != ProfileKind::TanhSigmoid || !truncations_.empty(); }

double Profile::support_radius(double deriv_floor) const {
  double r;
  if (kind_ == ProfileKind::TanhSigmoid) {
    // (1/2w) sech^2(x/w) <= (2/w) e^{-2x/w} < floor
    const double x = std::max(0.0, 0.5 * width_ * std::log(2.0 / (width_ * deriv_floor)));
    r = std::abs(center_) + x;
  } else {
    r = std::max(std::abs(center_ - width_), std::abs(center_ + width_));
  }
  for (double n : truncations_) r = std::min(r, n + 1.0);
  return r;
}

std::vector<double> Profile::breakpoints() const {
  std::vector<double> bps;
  if (kind_ != ProfileKind::TanhSigmoid) bps = {center_ - width_, center_ + width_};
  for (double n : truncations_) {
    std::erase_if(bps, [n](double b) { return b <= -n || b >= n; });
    bps.insert(bps.end(), {-n - 1.0, -n, n, n + 1.0});
  }
  sort_unique(bps);
  return bps;
}

Profile Profile::truncated(double n) const {
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::InvalidArgument, "truncation radius must be > 0");
  Profile p = *this;
  p.truncations_.push_back(n);
  return p;
}

Profile Profile::reflected() const {
  Profile p = *this;
  p.center_ = -center_;
  return p;
}

OperatorPath::OperatorPath(HermitianMatrix a_minus, std::vector<PathTerm> terms)
    : a_minus_(std::move(a_minus)), terms_(std::move(terms)) {
  for (const auto& term : terms_)
    if (term.coefficient.dim() != a_minus_.dim())
      throw Error(ErrorCode::DimensionMismatch, "path coefficient dimension differs from A_minus");
}

HermitianMatrix OperatorPath::eval(double t) const {
  CMatrix m = a_minus_.matrix();
  for (const auto& term : terms_) m += term.profile.value(t) * term.coefficient.matrix();
  return HermitianMatrix(m);
}

HermitianMatrix OperatorPath::deriv(double t, Side side) const {
  CMatrix m = CMatrix::Zero(dim(), dim());
  for (const auto& term : terms_) {
    const double d = term.profile.derivative(t, side);
    if (d != 0.0) m += d * term.coefficient.matrix();
  }
  return HermitianMatrix(m);
}

HermitianMatrix OperatorPath::deriv_toward(double t, double toward) const {
  return deriv(t, toward >= t ? Side::Right : Side::Left);
}

std::pair<HermitianMatrix, HermitianMatrix> OperatorPath::endpoints() const {
  HermitianMatrix plus = a_minus_;
  for (const auto& term : terms_) plus = plus + term.coefficient;
  return {a_minus_, plus};
}

std::pair<HermitianMatrix, HermitianMatrix> OperatorPath::potentials(double t, Side side) const {
  const CMatrix a = eval(t).matrix();
  const CMatrix da = deriv(t, side).matrix();
  const CMatrix a2 = a * a;
  return {HermitianMatrix(a2 - da), HermitianMatrix(a2 + da)};
}

double OperatorPath::support_radius() const {
  double r = 0.0;
  for (const auto& term : terms_) {
    const double scale = herm::trace_norm(term.coefficient.matrix());
    if (scale == 0.0) continue;
    r = std::max(r, term.profile.support_radius(1e-14 / scale));
  }
  return r;
}

bool OperatorPath::exactly_compact() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const PathTerm& t) { return t.profile.exactly_compact(); });
}

std::vector<double> OperatorPath::breakpoints() const {
  std::vector<double> bps;
  for (const auto& term : terms_) {
    const auto b = term.profile.breakpoints();
    bps.insert(bps.end(), b.begin(), b.end());
  }
  sort_unique(bps);
  return bps;
}

OperatorPath OperatorPath::truncate(double n) const {
  std::vector<PathTerm> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) out.push_back({term.profile.truncated(n), term.coefficient});
  return OperatorPath(a_minus_, std::move(out));
}

OperatorPath OperatorPath::compress(const CMatrix& projection) const {
  if (projection.rows() != dim() || !herm::is_projection(projection))
    throw Error(ErrorCode::NotProjection, "compression requires P^2 = P = P* to 1e-10");
  std::vector<PathTerm> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) out.push_back({term.profile, term.coefficient.conjugated(projection)});
  return OperatorPath(a_minus_.conjugated(projection), std::move(out));
}

OperatorPath OperatorPath::reversed() const {
  std::vector<PathTerm> out;
  out.reserve(terms_.size());
  for (const auto& term : terms_) out.push_back({term.profile.reflected(), -term.coefficient});
  return OperatorPath(a_plus(), std::move(out));
}

double total_variation(const OperatorPath& p) {
  if (p.terms().empty()) return 0.0;
  const double r = p.support_radius();
  std::vector<double> knots{-r};
  for (double b : p.breakpoints())
    if (b > -r && b < r) knots.push_back(b);
  knots.push_back(r);

  const double tol = 1e-10 / static_cast<double>(knots.size() - 1);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    auto f = [&](double t) { return herm::trace_norm(p.deriv_toward(t, mid).matrix()); };
    // Seed the recursion with panels no wider than 1/4 so narrow peaks are seen.
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.25)));
    for (int j = 0; j < panels; ++j) {
      const double lo = a + (b - a) * j / panels;
      const double hi = j + 1 == panels ? b : a + (b - a) * (j + 1) / panels;
      const double flo = f(lo);
      const double fmid = f(0.5 * (lo + hi));
      const double fhi = f(hi);
      const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
      total += adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol / panels, 50);
    }
  }
  return total;
}

double gap_bound(const OperatorPath& p) {
  const auto [minus, plus] = p.endpoints();
  double a = std::numeric_limits<double>::infinity();
  for (const auto* m : {&minus, &plus}) {
    const RVector ev = herm::eigenvalues(*m);
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (std::abs(ev(k)) <= 1e-10) {
        std::ostringstream os;
        os << "endpoint has eigenvalue " << ev(k) << " within 1e-10 of 0";
        throw Error(ErrorCode::NotInvertibleAtInfinity, os.str());
      }
      a = std::min(a, ev(k) * ev(k));
    }
  }
  return a;
}

}  // namespace specflow::path
