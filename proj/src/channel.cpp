#include "ehap/channel.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "ehap/error.hpp"
#include "ehap/text.hpp"

namespace ehap::channel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGeomTol = 1e-9;

constexpr std::array<double, 5> kGaussX{-0.9061798459386640, -0.5384693101056831, 0.0,
                                        0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.2369268850561891, 0.4786286704993665,
                                        0.5688888888888889, 0.4786286704993665,
                                        0.2369268850561891};

// Integrates f(u) * |C'(u)| du over [u0, u1].
template <typename F>
double integrate_ds(const BSplineCurve& c, double u0, double u1, int sub, F&& f) {
  double sum = 0.0;
  const double h = (u1 - u0) / sub;
  for (int j = 0; j < sub; ++j) {
    const double mid = u0 + (j + 0.5) * h;
    for (int q = 0; q < 5; ++q) {
      const double u = mid + 0.5 * h * kGaussX[q];
      sum += 0.5 * h * kGaussW[q] * f(u) * c.tangent(u).norm();
    }
  }
  return sum;
}

void check_distinct(const Port& a, const Port& b) {
  a.validate();
  b.validate();
  if ((a.position - b.position).norm() <= kGeomTol) {
    throw ValidationError("route: ports are coincident");
  }
}

double chord_param_knots(const std::vector<Vec3>& pts, std::vector<double>& out) {
  double total = 0.0;
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    total += (pts[i] - pts[i - 1]).norm();
    cum.push_back(total);
  }
  out.clear();
  out.push_back(0.0);
  out.push_back(0.0);
  for (std::size_t i = 1; i + 1 < cum.size(); ++i) out.push_back(cum[i] / total);
  out.push_back(1.0);
  out.push_back(1.0);
  return total;
}

// Corner points of the axis-following polyline between two ports.
std::vector<Vec3> manhattan_polyline(const Port& a, const Port& b) {
  const Vec3 u = a.normal;
  const Vec3 w = -b.normal;
  const Vec3 d = b.position - a.position;
  const double along = d.dot(u);
  const double scale = d.norm();
  if (std::abs(u.dot(w) - 1.0) < kGeomTol) {
    const Vec3 lateral = d - along * u;
    if (along <= kGeomTol * scale) {
      throw ValidationError("straight route: port b lies behind port a");
    }
    if (lateral.norm() <= kGeomTol * scale) return {a.position, b.position};
    const Vec3 c1 = a.position + 0.5 * along * u;
    return {a.position, c1, c1 + lateral, b.position};
  }
  if (std::abs(u.dot(w)) < kGeomTol) {
    const Vec3 c = a.position + along * u;
    const Vec3 rest = b.position - c;
    const double back = rest.dot(w);
    if (along <= kGeomTol * scale || back <= kGeomTol * scale ||
        (rest - back * w).norm() > kGeomTol * scale) {
      throw ValidationError("straight route: perpendicular ports are not reachable with one corner");
    }
    return {a.position, c, b.position};
  }
  throw ValidationError(
      "straight route: port normals must be parallel or perpendicular");
}

}  // namespace

void Port::validate() const {
  if (!position.allFinite()) throw ValidationError("port: non-finite position");
  if (!(std::abs(normal.norm() - 1.0) <= 1e-12)) throw ValidationError("port: normal must be unit length");
  if (!(diameter > 0.0)) throw ValidationError("port: diameter must be > 0");
}

std::string_view route_kind_name(RouteKind kind) {
  switch (kind) {
    case RouteKind::kBSpline: return "bspline";
    case RouteKind::kStraight: return "straight";
    case RouteKind::kArcFillet: return "arc";
    case RouteKind::kBezier3: return "bezier3";
  }
  return "?";
}

RouteKind parse_route_kind(std::string_view name) {
  for (RouteKind k :
       {RouteKind::kBSpline, RouteKind::kStraight, RouteKind::kArcFillet, RouteKind::kBezier3}) {
    if (route_kind_name(k) == name) return k;
  }
  if (name == "arc_fillet") return RouteKind::kArcFillet;
  throw ValidationError("unknown route kind '" + std::string(name) + "'");
}

Route route_channel(const Port& a, const Port& b, int n_ctrl, double stiffness) {
  check_distinct(a, b);
  if (n_ctrl < 4) throw ValidationError("route_channel: n_ctrl must be >= 4");
  if (!(stiffness > 0.0)) throw ValidationError("route_channel: stiffness must be > 0");
  const Vec3 p1 = a.position + stiffness * a.normal;
  const Vec3 pn = b.position + stiffness * b.normal;
  std::vector<Vec3> ctrl;
  ctrl.push_back(a.position);
  ctrl.push_back(p1);
  const int inner = n_ctrl - 4;
  for (int i = 1; i <= inner; ++i) {
    const double s = static_cast<double>(i) / (inner + 1);
    ctrl.push_back((1.0 - s) * p1 + s * pn);
  }
  ctrl.push_back(pn);
  ctrl.push_back(b.position);
  return {BSplineCurve(3, uniform_clamped_knots(n_ctrl, 3), std::move(ctrl)), a.diameter,
          RouteKind::kBSpline};
}

Route straight_route(const Port& a, const Port& b) {
  check_distinct(a, b);
  auto pts = manhattan_polyline(a, b);
  std::vector<double> knots;
  chord_param_knots(pts, knots);
  return {BSplineCurve(1, std::move(knots), std::move(pts)), a.diameter, RouteKind::kStraight};
}

Route arc_fillet_route(const Port& a, const Port& b, double radius) {
  check_distinct(a, b);
  if (!(radius > 0.0)) throw ValidationError("arc_fillet: radius must be > 0");
  const auto P = manhattan_polyline(a, b);
  const std::size_t n = P.size();
  std::vector<double> setback(n, 0.0), turn(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec3 din = (P[i] - P[i - 1]).normalized();
    const Vec3 dout = (P[i + 1] - P[i]).normalized();
    turn[i] = std::acos(std::clamp(din.dot(dout), -1.0, 1.0));
    setback[i] = radius * std::tan(0.5 * turn[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (setback[i] + setback[i + 1] > (P[i + 1] - P[i]).norm() + kGeomTol) {
      throw ValidationError("arc_fillet: fillet radius larger than the shortest segment allows");
    }
  }
  // Piecewise quadratic NURBS: straight pieces have a midpoint control
  // point, arcs use the corner with weight cos(turn / 2).
  std::vector<Vec3> ctrl{P[0]};
  std::vector<double> weights{1.0};
  std::vector<double> piece_len;
  auto add_piece = [&](const Vec3& mid, double w, const Vec3& end, double len) {
    ctrl.push_back(mid);
    weights.push_back(w);
    ctrl.push_back(end);
    weights.push_back(1.0);
    piece_len.push_back(len);
  };
  Vec3 cur = P[0];
  for (std::size_t i = 1; i < n; ++i) {
    const Vec3 din = (P[i] - P[i - 1]).normalized();
    const Vec3 line_end = P[i] - setback[i] * din;
    const double len = (line_end - cur).norm();
    if (len > 1e-15) add_piece(0.5 * (cur + line_end), 1.0, line_end, len);
    cur = line_end;
    if (i + 1 < n && turn[i] > 0.0) {
      const Vec3 dout = (P[i + 1] - P[i]).normalized();
      const Vec3 arc_end = P[i] + setback[i] * dout;
      add_piece(P[i], std::cos(0.5 * turn[i]), arc_end, radius * turn[i]);
      cur = arc_end;
    }
  }
  const double total = [&] {
    double t = 0.0;
    for (double l : piece_len) t += l;
    return t;
  }();
  std::vector<double> knots{0.0, 0.0, 0.0};
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < piece_len.size(); ++k) {
    acc += piece_len[k];
    knots.push_back(acc / total);
    knots.push_back(acc / total);
  }
  knots.insert(knots.end(), {1.0, 1.0, 1.0});
  return {BSplineCurve(2, std::move(knots), std::move(ctrl), std::move(weights)), a.diameter,
          RouteKind::kArcFillet};
}

Route bezier3_route(const Port& a, const Port& b, double handle) {
  check_distinct(a, b);
  if (!(handle > 0.0)) throw ValidationError("bezier3: handle length must be > 0");
  std::vector<Vec3> ctrl{a.position, a.position + handle * a.normal,
                         b.position + handle * b.normal, b.position};
  return {BSplineCurve(3, uniform_clamped_knots(4, 3), std::move(ctrl)), a.diameter,
          RouteKind::kBezier3};
}

Route make_route(RouteKind kind, const Port& a, const Port& b, const RouteOptions& opt) {
  const double D = a.diameter;
  switch (kind) {
    case RouteKind::kBSpline:
      return route_channel(a, b, opt.n_ctrl, opt.stiffness > 0.0 ? opt.stiffness : 3.0 * D);
    case RouteKind::kStraight: return straight_route(a, b);
    case RouteKind::kArcFillet:
      return arc_fillet_route(a, b, opt.fillet_radius > 0.0 ? opt.fillet_radius : 2.0 * D);
    case RouteKind::kBezier3:
      return bezier3_route(
          a, b, opt.handle > 0.0 ? opt.handle : (b.position - a.position).norm() / 3.0);
  }
  throw ValidationError("unknown route kind");
}

std::vector<double> sharp_corner_angles(const BSplineCurve& curve) {
  std::vector<double> out;
  const auto& U = curve.knots();
  const auto& P = curve.control_points();
  const int p = curve.degree();
  std::size_t s = static_cast<std::size_t>(p) + 1;
  const std::size_t end = U.size() - static_cast<std::size_t>(p) - 1;
  while (s < end) {
    std::size_t mult = 1;
    while (s + mult < end && U[s + mult] == U[s]) ++mult;
    if (mult >= static_cast<std::size_t>(p)) {
      const std::size_t j = s - 1;  // interpolated control point
      const Vec3 left = P[j] - P[j - 1];
      const Vec3 right = P[j + 1] - P[j];
      if (left.norm() > 0.0 && right.norm() > 0.0) {
        const double ang =
            std::acos(std::clamp(left.normalized().dot(right.normalized()), -1.0, 1.0));
        if (ang > 1e-9) out.push_back(ang);
      }
    }
    s += mult;
  }
  return out;
}

std::vector<CurvatureSample> curvature_profile(const Route& route, int n_samples) {
  if (n_samples < 16) throw ValidationError("curvature_profile: n_samples must be >= 16");
  const auto& c = route.curve;
  std::vector<CurvatureSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  double s = 0.0;
  double prev_u = c.u_min();
  for (int i = 0; i < n_samples; ++i) {
    const double u = (i + 1 == n_samples)
                         ? c.u_max()
                         : c.u_min() + (c.u_max() - c.u_min()) * i / (n_samples - 1);
    if (i > 0) s += integrate_ds(c, prev_u, u, 1, [](double) { return 1.0; });
    out.push_back({s, c.curvature(u)});
    prev_u = u;
  }
  return out;
}

double bend_coefficient(double kappa_D) {
  const double x2 = kappa_D * kappa_D;
  return kMiterCoefficient * x2 / (1.0 + x2);
}

double darcy_friction_factor(double reynolds) {
  if (!(reynolds > 0.0)) throw ValidationError("friction factor: Reynolds number must be > 0");
  return reynolds < 2300.0 ? 64.0 / reynolds : 0.316 * std::pow(reynolds, -0.25);
}

LossEstimate pressure_loss_estimate(const Route& route, double Q,
                                    const hydraulics::FluidProps& fluid) {
  if (!(Q > 0.0) || !std::isfinite(Q)) throw ValidationError("pressure loss: Q must be > 0");
  fluid.validate();
  const double D = route.diameter;
  const auto& c = route.curve;
  LossEstimate e;
  e.velocity = Q / (0.25 * kPi * D * D);
  e.reynolds = e.velocity * D / fluid.kinematic_viscosity;
  e.friction_factor = darcy_friction_factor(e.reynolds);
  e.arc_length = c.arc_length();
  const double dyn = 0.5 * fluid.density * e.velocity * e.velocity;
  e.friction_loss = e.friction_factor * e.arc_length / D * dyn;

  double turns = 0.0;  // equivalent number of 90-degree bends
  const auto corners = sharp_corner_angles(c);
  for (double ang : corners) turns += kMiterCoefficient * ang / (0.5 * kPi);
  double kmax = 0.0;
  const auto b = c.breakpoints();
  for (std::size_t k = 1; k < b.size(); ++k) {
    turns += integrate_ds(c, b[k - 1], b[k], 32, [&](double u) {
      const double kap = c.curvature(u);
      kmax = std::max(kmax, kap);
      return bend_coefficient(kap * D) * kap / (0.5 * kPi);
    });
    for (int j = 0; j <= 64; ++j) kmax = std::max(kmax, c.curvature(b[k - 1] + (b[k] - b[k - 1]) * j / 64.0));
  }
  e.bend_loss = turns * dyn;
  e.total = e.friction_loss + e.bend_loss;
  if (!corners.empty()) {
    e.min_bend_radius = 0.0;
  } else {
    e.min_bend_radius = kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::infinity();
  }
  return e;
}

// ---- clearance ------------------------------------------------------------------

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

std::vector<Vec3> polyline(const Route& r) {
  std::vector<Vec3> pts;
  for (const auto& s : sample_centerline(r)) pts.push_back(s.point);
  return pts;
}

}  // namespace

ClearanceResult check_clearance(const Route& route, const std::vector<Obstacle>& obstacles,
                                double wall, const std::vector<Route>& others, int n_samples) {
  if (!(wall >= 0.0)) throw ValidationError("check_clearance: wall must be >= 0");
  if (n_samples < 2) throw ValidationError("check_clearance: n_samples must be >= 2");
  const double r = 0.5 * route.diameter;
  std::vector<std::vector<Vec3>> other_lines;
  for (const auto& o : others) other_lines.push_back(polyline(o));
  const auto& c = route.curve;
  for (int i = 0; i < n_samples; ++i) {
    const double u = (i + 1 == n_samples) ? c.u_max()
                                          : c.u_min() + (c.u_max() - c.u_min()) * i / (n_samples - 1);
    const Vec3 p = c.eval(u);
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      double dist = 0.0;
      if (const auto* sph = std::get_if<SphereObstacle>(&obstacles[k])) {
        dist = (p - sph->center).norm() - sph->radius;
      } else {
        const auto& cap = std::get<CapsuleObstacle>(obstacles[k]);
        dist = point_segment_distance(p, cap.a, cap.b) - cap.radius;
      }
      if (dist < r + wall) {
        return {false, ClearanceViolation{u, p, dist, r + wall, "obstacle " + std::to_string(k)}};
      }
    }
    for (std::size_t k = 0; k < others.size(); ++k) {
      const auto& line = other_lines[k];
      double dist = std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j < line.size(); ++j) {
        dist = std::min(dist, point_segment_distance(p, line[j - 1], line[j]));
      }
      const double need = r + 0.5 * others[k].diameter + 2.0 * wall;
      if (dist < need) {
        return {false, ClearanceViolation{u, p, dist, need, "route " + std::to_string(k)}};
      }
    }
  }
  return {};
}

// ---- export -----------------------------------------------------------------------

std::vector<CenterlineSample> sample_centerline(const Route& route, int per_span) {
  if (per_span < 1) throw ValidationError("sample_centerline: per_span must be >= 1");
  const auto& c = route.curve;
  const int sub = c.degree() == 1 ? 1 : per_span;
  const auto b = c.breakpoints();
  std::vector<CenterlineSample> out;
  double s = 0.0;
  for (std::size_t k = 1; k < b.size(); ++k) {
    for (int j = (k == 1 ? 0 : 1); j <= sub; ++j) {
      const double u = (j == sub) ? b[k] : b[k - 1] + (b[k] - b[k - 1]) * j / sub;
      if (!out.empty()) s += integrate_ds(c, out.back().u, u, 1, [](double) { return 1.0; });
      const Vec3 p = c.eval(u);
      if (!out.empty() && (p - out.back().point).norm() < 1e-15) continue;
      // Degree-1 corners carry no defined curvature; report 0.
      out.push_back({u, s, p, c.degree() == 1 ? 0.0 : c.curvature(u)});
    }
  }
  return out;
}

TriMesh tube_mesh(const Route& route, int segments, int per_span) {
  if (segments < 3) throw ValidationError("tube_mesh: need at least 3 segments");
  const auto samples = sample_centerline(route, per_span);
  const std::size_t n = samples.size();
  if (n < 2) throw ValidationError("tube_mesh: degenerate centreline");
  const double R = 0.5 * route.diameter;
  std::vector<Vec3> dir(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    dir[k] = (samples[k + 1].point - samples[k].point).normalized();
  }
  // Rotation-minimising frame per segment.
  std::vector<Vec3> e1(n - 1);
  {
    const Vec3& d = dir[0];
    Eigen::Index least = 0;
    d.cwiseAbs().minCoeff(&least);
    const Vec3 axis = Vec3::Unit(least);
    e1[0] = (axis - axis.dot(d) * d).normalized();
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec3 axis = dir[k - 1].cross(dir[k]);
    Vec3 v = e1[k - 1];
    const double sn = axis.norm();
    if (sn > 1e-15) {
      const double ang = std::atan2(sn, dir[k - 1].dot(dir[k]));
      v = Eigen::AngleAxisd(ang, axis / sn) * v;
    }
    e1[k] = (v - v.dot(dir[k]) * dir[k]).normalized();
  }

  TriMesh mesh;
  mesh.vertices.reserve(n * segments + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kin = i == 0 ? 0 : i - 1;
    const std::size_t kout = i + 1 == n ? n - 2 : i;
    const Vec3& din = dir[kin];
    const Vec3 m = (din + dir[kout]).normalized();
    const Vec3 a1 = e1[kin];
    const Vec3 a2 = din.cross(a1);
    const Vec3& p = samples[i].point;
    for (int j = 0; j < segments; ++j) {
      const double phi = 2.0 * kPi * j / segments;
      const Vec3 q = p + R * (std::cos(phi) * a1 + std::sin(phi) * a2);
      const double lambda = -(q - p).dot(m) / din.dot(m);
      mesh.vertices.push_back(q + lambda * din);
    }
  }
  const auto idx = [segments](std::size_t ring, int j) {
    return static_cast<std::uint32_t>(ring * segments + ((j % segments + segments) % segments));
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < segments; ++j) {
      mesh.triangles.push_back({idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)});
      mesh.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)});
    }
  }
  const auto c0 = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(samples.front().point);
  const auto c1 = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(samples.back().point);
  for (int j = 0; j < segments; ++j) {
    mesh.triangles.push_back({c0, idx(0, j + 1), idx(0, j)});
    mesh.triangles.push_back({c1, idx(n - 1, j), idx(n - 1, j + 1)});
  }
  return mesh;
}

RouteFiles export_route(const Route& route, const std::filesystem::path& stem) {
  RouteFiles files{stem, stem};
  files.csv += ".csv";
  files.stl += ".stl";
  std::ofstream out(files.csv, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + files.csv.string() + "'");
  out << kRouteCsvHeader << '\n';
  for (const auto& s : sample_centerline(route)) {
    out << text::format_double(s.s) << ',' << text::format_double(s.point.x()) << ','
        << text::format_double(s.point.y()) << ',' << text::format_double(s.point.z()) << ','
        << text::format_double(s.kappa) << '\n';
  }
  if (!out) throw NumericError("write failed for '" + files.csv.string() + "'");
  write_stl(files.stl, tube_mesh(route),
            "ehap channel route " + std::string(route_kind_name(route.kind)));
  return files;
}

std::vector<PortPair> preset_port_pairs(double diameter) {
  return {
      {"perpendicular", Port{Vec3(0, 0, 0), Vec3::UnitX(), diameter},
       Port{Vec3(0.04, 0.04, 0), -Vec3::UnitY(), diameter}},
      {"parallel", Port{Vec3(0, 0, 0), Vec3::UnitX(), diameter},
       Port{Vec3(0.06, 0.03, 0), -Vec3::UnitX(), diameter}},
  };
}

}  // namespace ehap::channel
