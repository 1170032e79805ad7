#pragma once

// Clamped B-spline curves in 3-D, optionally rational (NURBS).

#include <vector>

#include "ehap/mesh.hpp"

namespace ehap {

// Cox-de Boor recursion for N_{i,p}(u). The last non-empty span is closed
// on the right so the basis still sums to one at u = u_max. 0/0 terms are 0.
double bspline_basis(int i, int p, double u, const std::vector<double>& knots);

class BSplineCurve {
 public:
  // Throws ValidationError unless the knot vector is non-decreasing, clamped
  // (end multiplicity p+1) and has control_points + p + 1 entries. Weights,
  // when given, must be positive and match the control points.
  BSplineCurve(int degree, std::vector<double> knots, std::vector<Vec3> control_points,
               std::vector<double> weights = {});

  int degree() const { return p_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Vec3>& control_points() const { return ctrl_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_rational() const { return !weights_.empty(); }
  double u_min() const { return knots_.front(); }
  double u_max() const { return knots_.back(); }

  Vec3 eval(double u) const;
  // Derivatives d^k C / du^k for k = 0..order (order <= 2).
  std::vector<Vec3> derivatives(double u, int order) const;
  Vec3 tangent(double u) const { return derivatives(u, 1)[1]; }
  // |C' x C''| / |C'|^3
  double curvature(double u) const;

  // Distinct knot values, i.e. the parameter breakpoints of the pieces.
  std::vector<double> breakpoints() const;
  // Arc length by Gauss-Legendre quadrature per knot span.
  double arc_length() const;

  BSplineCurve transformed(const Eigen::Matrix3d& R, const Vec3& t) const;

 private:
  int find_span(double u) const;
  void check_domain(double u) const;

  int p_;
  std::vector<double> knots_;
  std::vector<Vec3> ctrl_;
  std::vector<double> weights_;
};

// Clamped knot vector with uniformly spaced interior knots on [0, 1].
std::vector<double> uniform_clamped_knots(int n_ctrl, int degree);

}  // namespace ehap
