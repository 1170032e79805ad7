#include "ehap/bspline.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ehap/error.hpp"

namespace ehap {

double bspline_basis(int i, int p, double u, const std::vector<double>& knots) {
  const int m = static_cast<int>(knots.size()) - 1;
  if (p < 0 || i < 0 || i + p + 1 > m) {
    throw ValidationError("bspline_basis: index " + std::to_string(i) + " out of range");
  }
  if (u < knots.front() || u > knots.back()) {
    throw ValidationError("bspline_basis: u outside the knot range");
  }
  if (p == 0) {
    if (knots[i] <= u && u < knots[i + 1]) return 1.0;
    // Close the last non-empty span at u_max.
    return (u == knots.back() && knots[i] < knots[i + 1] && knots[i + 1] == knots.back()) ? 1.0
                                                                                        : 0.0;
  }
  double left = 0.0, right = 0.0;
  const double dl = knots[i + p] - knots[i];
  if (dl > 0.0) left = (u - knots[i]) / dl * bspline_basis(i, p - 1, u, knots);
  const double dr = knots[i + p + 1] - knots[i + 1];
  if (dr > 0.0) right = (knots[i + p + 1] - u) / dr * bspline_basis(i + 1, p - 1, u, knots);
  return left + right;
}

std::vector<double> uniform_clamped_knots(int n_ctrl, int degree) {
  if (degree < 1 || n_ctrl < degree + 1) {
    throw ValidationError("uniform_clamped_knots: need at least degree+1 control points");
  }
  std::vector<double> k(static_cast<std::size_t>(n_ctrl + degree + 1));
  const int interior = n_ctrl - degree - 1;
  for (int i = 0; i <= degree; ++i) {
    k[i] = 0.0;
    k[k.size() - 1 - i] = 1.0;
  }
  for (int j = 1; j <= interior; ++j) k[degree + j] = static_cast<double>(j) / (interior + 1);
  return k;
}

BSplineCurve::BSplineCurve(int degree, std::vector<double> knots, std::vector<Vec3> control_points,
                           std::vector<double> weights)
    : p_(degree), knots_(std::move(knots)), ctrl_(std::move(control_points)),
      weights_(std::move(weights)) {
  if (p_ < 1) throw ValidationError("bspline: degree must be >= 1");
  const std::size_t n = ctrl_.size();
  if (n < static_cast<std::size_t>(p_ + 1)) {
    throw ValidationError("bspline: need at least degree+1 control points");
  }
  if (knots_.size() != n + p_ + 1) {
    throw ValidationError("bspline: knot count must equal control points + degree + 1");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] >= knots_[i - 1])) throw ValidationError("bspline: knots must be non-decreasing");
  }
  for (int i = 0; i <= p_; ++i) {
    if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back()) {
      throw ValidationError("bspline: knot vector must be clamped");
    }
  }
  if (!(knots_.back() > knots_.front())) throw ValidationError("bspline: empty parameter domain");
  if (!weights_.empty()) {
    if (weights_.size() != n) throw ValidationError("bspline: weight count mismatch");
    for (double w : weights_) {
      if (!(w > 0.0)) throw ValidationError("bspline: weights must be positive");
    }
  }
  for (const auto& c : ctrl_) {
    if (!c.allFinite()) throw ValidationError("bspline: non-finite control point");
  }
}

void BSplineCurve::check_domain(double u) const {
  if (!(u >= u_min() && u <= u_max())) throw ValidationError("bspline: u outside the domain");
}

int BSplineCurve::find_span(double u) const {
  const int n = static_cast<int>(ctrl_.size()) - 1;
  if (u >= knots_[n + 1]) return n;
  const auto it = std::upper_bound(knots_.begin() + p_, knots_.begin() + n + 1, u);
  return static_cast<int>(it - knots_.begin()) - 1;
}

namespace {

// Basis function values and derivatives up to `order` on span `span`
// (standard triangular-table algorithm). ders[k][j] is the k-th
// derivative of N_{span-p+j, p}.
std::array<std::vector<double>, 3> basis_derivatives(int span, double u, int p, int order,
                                                     const std::vector<double>& U) {
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1), right(p + 1);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::array<std::vector<double>, 3> ders;
  for (auto& d : ders) d.assign(p + 1, 0.0);
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= order; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= order; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
    factor *= (p - k);
  }
  return ders;
}

}  // namespace

std::vector<Vec3> BSplineCurve::derivatives(double u, int order) const {
  check_domain(u);
  if (order < 0 || order > 2) throw ValidationError("bspline: derivative order must be 0..2");
  const int span = find_span(u);
  const int eff = std::min(order, p_);
  const auto N = basis_derivatives(span, u, p_, eff, knots_);
  std::vector<Vec3> A(order + 1, Vec3::Zero());
  std::array<double, 3> w{0.0, 0.0, 0.0};
  for (int k = 0; k <= eff; ++k) {
    for (int j = 0; j <= p_; ++j) {
      const int idx = span - p_ + j;
      const double wi = is_rational() ? weights_[idx] : 1.0;
      A[k] += N[k][j] * wi * ctrl_[idx];
      w[k] += N[k][j] * wi;
    }
  }
  if (!is_rational()) return A;
  // Quotient rule for C = A / w.
  std::vector<Vec3> C(order + 1, Vec3::Zero());
  C[0] = A[0] / w[0];
  if (order >= 1) C[1] = (A[1] - w[1] * C[0]) / w[0];
  if (order >= 2) C[2] = (A[2] - 2.0 * w[1] * C[1] - w[2] * C[0]) / w[0];
  return C;
}

Vec3 BSplineCurve::eval(double u) const { return derivatives(u, 0)[0]; }

double BSplineCurve::curvature(double u) const {
  const auto d = derivatives(u, 2);
  const double speed = d[1].norm();
  if (speed == 0.0) return 0.0;
  return d[1].cross(d[2]).norm() / (speed * speed * speed);
}

std::vector<double> BSplineCurve::breakpoints() const {
  std::vector<double> b;
  for (double k : knots_) {
    if (b.empty() || k > b.back()) b.push_back(k);
  }
  return b;
}

double BSplineCurve::arc_length() const {
  static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};
  constexpr int kSub = 16;
  const auto b = breakpoints();
  double L = 0.0;
  for (std::size_t s = 1; s < b.size(); ++s) {
    const double h = (b[s] - b[s - 1]) / kSub;
    for (int j = 0; j < kSub; ++j) {
      const double mid = b[s - 1] + (j + 0.5) * h;
      for (int q = 0; q < 5; ++q) L += 0.5 * h * w[q] * tangent(mid + 0.5 * h * x[q]).norm();
    }
  }
  return L;
}

BSplineCurve BSplineCurve::transformed(const Eigen::Matrix3d& R, const Vec3& t) const {
  std::vector<Vec3> c;
  c.reserve(ctrl_.size());
  for (const auto& P : ctrl_) c.push_back(R * P + t);
  return BSplineCurve(p_, knots_, std::move(c), weights_);
}

}  // namespace ehap
