#pragma once

// Flow-channel routing between manifold ports and a 1-D pressure-loss
// surrogate (Darcy-Weisbach friction plus a curvature-dependent bend loss).
//
// A port normal points from the port face into the channel: a route leaves
// port a along +a.normal and arrives at port b travelling along -b.normal.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ehap/bspline.hpp"
#include "ehap/hydraulics.hpp"

namespace ehap::channel {

struct Port {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  double diameter = 3.2e-3;

  void validate() const;
};

enum class RouteKind { kBSpline, kStraight, kArcFillet, kBezier3 };

std::string_view route_kind_name(RouteKind kind);
RouteKind parse_route_kind(std::string_view name);  // bspline|straight|arc|bezier3

struct Route {
  BSplineCurve curve;
  double diameter;
  RouteKind kind;
};

struct RouteOptions {
  int n_ctrl = 6;
  // Distance of the second and second-to-last control points from the
  // ports; <= 0 selects 3 * diameter.
  double stiffness = 0.0;
  // Fillet radius for arc routes; <= 0 selects 2 * diameter.
  double fillet_radius = 0.0;
  // Bezier handle length; <= 0 selects |b - a| / 3.
  double handle = 0.0;
};

Route route_channel(const Port& a, const Port& b, int n_ctrl, double stiffness);
// Axis-aligned polyline with sharp corners (degree-1 spline). Supports
// coaxial, perpendicular (one corner) and offset-parallel (two corners)
// port layouts.
Route straight_route(const Port& a, const Port& b);
// Straight route with each corner replaced by an exact circular arc.
Route arc_fillet_route(const Port& a, const Port& b, double radius);
Route bezier3_route(const Port& a, const Port& b, double handle);

Route make_route(RouteKind kind, const Port& a, const Port& b, const RouteOptions& opt = {});

// Turning angles (rad) at parameter values where the curve is only C0.
std::vector<double> sharp_corner_angles(const BSplineCurve& curve);

struct CurvatureSample {
  double s;      // m
  double kappa;  // 1/m
};

// n_samples points uniform in parameter over each knot span.
std::vector<CurvatureSample> curvature_profile(const Route& route, int n_samples);

struct LossEstimate {
  double friction_loss = 0.0;  // Pa
  double bend_loss = 0.0;      // Pa
  double total = 0.0;          // Pa
  double arc_length = 0.0;     // m
  double min_bend_radius = 0.0;  // m; infinity for a straight segment, 0 with sharp corners
  double reynolds = 0.0;
  double velocity = 0.0;       // m/s
  double friction_factor = 0.0;
};

inline constexpr double kMiterCoefficient = 1.1;

// Loss coefficient per 90 degrees of turning as a function of kappa * D.
double bend_coefficient(double kappa_D);
double darcy_friction_factor(double reynolds);

LossEstimate pressure_loss_estimate(const Route& route, double Q,
                                    const hydraulics::FluidProps& fluid);

// ---- clearance --------------------------------------------------------------

struct SphereObstacle {
  Vec3 center;
  double radius;
};
struct CapsuleObstacle {
  Vec3 a, b;
  double radius;
};
using Obstacle = std::variant<SphereObstacle, CapsuleObstacle>;

struct ClearanceViolation {
  double u;             // parameter of the offending centerline sample
  Vec3 point;
  double distance;      // centre-to-surface (obstacle) or centre-to-centre (route), m
  double required;      // m
  std::string against;  // "obstacle <i>" or "route <i>"
};

struct ClearanceResult {
  bool ok = true;
  std::optional<ClearanceViolation> first_violation;
};

// Obstacles need route radius + wall; other routes need r1 + r2 + 2 wall
// between centrelines.
ClearanceResult check_clearance(const Route& route, const std::vector<Obstacle>& obstacles,
                                double wall, const std::vector<Route>& others = {},
                                int n_samples = 512);

// ---- export -----------------------------------------------------------------

inline constexpr std::string_view kRouteCsvHeader = "s_m,x_m,y_m,z_m,kappa_per_m";

// Centreline samples shared by the CSV and the tube mesh.
struct CenterlineSample {
  double u;
  double s;
  Vec3 point;
  double kappa;
};
std::vector<CenterlineSample> sample_centerline(const Route& route, int per_span = 64);

// Closed swept tube with end caps.
TriMesh tube_mesh(const Route& route, int segments = 64, int per_span = 64);

struct RouteFiles {
  std::filesystem::path csv;
  std::filesystem::path stl;
};
RouteFiles export_route(const Route& route, const std::filesystem::path& stem);

// ---- presets ------------------------------------------------------------------

struct PortPair {
  std::string name;
  Port a, b;
};
// "perpendicular": 40 mm offset with orthogonal normals;
// "parallel": 30 mm lateral offset, parallel flow direction.
std::vector<PortPair> preset_port_pairs(double diameter = 3.2e-3);

}  // namespace ehap::channel
