#pragma once

// Implicit P-surface lattices with a spatially varying period, field
// booleans, marching-cubes meshing and density targeting.
//
// Solids are scalar fields with value >= 0 inside material. Fields built
// here are approximately signed distances in metres so they can be mixed
// freely with min/max booleans.

#include <array>
#include <functional>
#include <vector>

#include "ehap/bspline.hpp"
#include "ehap/channel.hpp"
#include "ehap/error.hpp"
#include "ehap/mesh.hpp"

namespace ehap::lattice {

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  Vec3 extent() const { return hi - lo; }
  bool contains(const Vec3& p) const;
  void validate() const;
};

using GridDims = std::array<int, 3>;

// Values at the nx*ny*nz corner lattice of bbox, x fastest.
struct ScalarGrid {
  Aabb bbox;
  GridDims dims{2, 2, 2};
  std::vector<double> values;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  Vec3 spacing() const;
  Vec3 point(int i, int j, int k) const;
  std::size_t size() const { return values.size(); }
  void validate() const;
};

// ---- period field ----------------------------------------------------------

// Wendland C2 kernel (1-d)^4 (4d+1) on [0, 1], zero beyond.
double wendland_c2(double d);

// t(r) = sum_i w_i psi(|r - p_i| / support) + q0 + q . r, floored at t_min.
// Units: cells per metre.
struct PeriodField {
  std::vector<Vec3> centers;
  std::vector<double> weights;
  double support_radius = 1.0;
  double q0 = 1000.0;
  Vec3 q = Vec3::Zero();
  double t_min = 1.0;

  static PeriodField constant(double t, double t_min = 1.0);
  void validate() const;
};

double eval_period_field(const PeriodField& t, const Vec3& r);

struct PeriodSample {
  Vec3 point;
  double t;
};

// Interpolates the samples exactly with the affine side conditions
// sum w_i = 0 and sum w_i p_i = 0. Needs >= 4 distinct, non-coplanar points.
PeriodField fit_period_field(const std::vector<PeriodSample>& samples, double support_radius,
                             double t_min);

// cos(2 pi x t) + cos(2 pi y t) + cos(2 pi z t) with t = t(r).
double phi_p(const Vec3& r, const PeriodField& t);

// Distance from r to the zero sheet along the gradient line: |phi|/|grad phi|
// refined by Newton steps on phi. The largest double where the gradient
// vanishes.
double sheet_distance(const PeriodField& t, const Vec3& r);

// ---- implicit solids ----------------------------------------------------------

struct ImplicitSolid {
  std::function<double(const Vec3&)> eval;

  double operator()(const Vec3& r) const { return eval(r); }
  bool inside(const Vec3& r) const { return eval(r) >= 0.0; }
};

ImplicitSolid everywhere();
ImplicitSolid nowhere();
ImplicitSolid sphere_solid(const Vec3& center, double radius);
ImplicitSolid box_solid(const Aabb& box);

ImplicitSolid boolean_intersect(ImplicitSolid a, ImplicitSolid b);
ImplicitSolid boolean_union(ImplicitSolid a, ImplicitSolid b);
ImplicitSolid boolean_subtract(ImplicitSolid a, ImplicitSolid b);
ImplicitSolid boolean_complement(ImplicitSolid a);

// Point-to-centreline distance with a precomputed polyline for culling and
// Newton refinement on the exact curve.
class CenterlineDistance {
 public:
  explicit CenterlineDistance(std::vector<BSplineCurve> curves, int per_span = 32);

  double operator()(const Vec3& r) const { return distance(r); }
  double distance(const Vec3& r) const;
  // Exact below `cap`; otherwise some value >= cap.
  double distance_capped(const Vec3& r, double cap) const;

 private:
  struct Segment {
    Vec3 a, b;
    double ua, ub;
    double span_lo, span_hi;
    std::size_t curve;
  };
  struct Chunk {
    Aabb box;
    std::size_t first, last;
  };

  double refine(const Vec3& r, const Segment& s, double u0) const;

  std::vector<BSplineCurve> curves_;
  std::vector<Segment> segments_;
  std::vector<Chunk> chunks_;
  Aabb all_;
  double slack_ = 0.0;  // bound on curve-to-chord deviation
};

double distance_to_centerlines(const Vec3& r, const std::vector<BSplineCurve>& curves);

// Annular wall bore_radius <= d <= bore_radius + wall around each centreline.
ImplicitSolid pipe_wall_solid(const std::vector<BSplineCurve>& curves, double bore_radius,
                              double wall);
// d <= radius around each centreline.
ImplicitSolid tube_solid(const std::vector<BSplineCurve>& curves, double radius);

inline constexpr double kMinWallThickness = 0.4e-3;  // m

// Sheet of thickness w centred on phi_p = 0: value w/2 - sheet_distance.
ImplicitSolid thicken_tpms(const PeriodField& t, double w, bool allow_below_floor = false);

// union(keep, intersect(design, thicken_tpms(t, w)))
ImplicitSolid fill_region(const ImplicitSolid& design, const ImplicitSolid& keep,
                          const PeriodField& t, double w, bool allow_below_floor = false);

// ---- sampling and meshing -------------------------------------------------------

ScalarGrid sample_grid(const ImplicitSolid& solid, const Aabb& bbox, const GridDims& dims);

// Triangulates {value = iso} with outward normals pointing away from the
// {value >= iso} side. Vertices on shared grid edges are shared; vertices
// within weld_tol (or 1e-5 of a cell edge) of a grid point are welded onto it
// and collapsed triangles are dropped.
TriMesh marching_cubes(const ScalarGrid& grid, double iso, double weld_tol = 1e-9);

// Fraction of grid points with value >= iso.
double volume_fraction(const ScalarGrid& grid, double iso);

class DensityTargetError : public ValidationError {
 public:
  DensityTargetError(const std::string& what, double fraction_at_floor)
      : ValidationError(what), fraction_at_floor_(fraction_at_floor) {}
  double fraction_at_floor() const { return fraction_at_floor_; }

 private:
  double fraction_at_floor_;
};

struct ThicknessSolution {
  double wall = 0.0;      // m
  double fraction = 0.0;  // achieved on the grid
  int iterations = 0;
};

// Bisection on w so that volume_fraction(sample_grid(thicken_tpms(t, w))) hits
// target within tol. Throws DensityTargetError when the target needs a wall
// below the manufacturing floor.
ThicknessSolution solve_thickness_for_density(const PeriodField& t, double target,
                                              const Aabb& bbox, const GridDims& dims,
                                              double tol = 0.005,
                                              bool allow_below_floor = false);

// Same, reusing a grid of sheet_distance values.
ThicknessSolution solve_thickness_for_density(const ScalarGrid& sheet_distances, double target,
                                              double tol = 0.005, bool allow_below_floor = false);

ScalarGrid sample_sheet_distance(const PeriodField& t, const Aabb& bbox, const GridDims& dims);

// Binary STL; rejects empty meshes.
void export_stl(const TriMesh& mesh, const std::filesystem::path& path);

// ---- demonstration block ------------------------------------------------------------

// Rectangular block with routed channels: a solid skin and pipe walls are
// kept, bores are open and the remaining interior is P-lattice.
struct DemoConfig {
  Aabb bbox;
  GridDims dims{128, 128, 128};       // density solve grid over bbox
  GridDims mesh_dims{128, 128, 128};  // meshing grid (padded around bbox)
  std::vector<PeriodSample> period_samples;
  double support_radius = 0.04;  // m
  double t_min = 50.0;           // 1/m
  double target_density = 0.512;
  double density_tol = 0.005;
  double pipe_wall = 1.0e-3;  // m
  double skin = 1.5e-3;       // m
  std::vector<channel::Route> routes;
  bool allow_below_floor = false;

  void validate() const;
};

DemoConfig default_demo_config();

struct DemoResult {
  PeriodField period;
  ThicknessSolution thickness;
  double part_fraction = 0.0;  // solid share of the block on the mesh grid
  TriMesh mesh;
};

// Solid for a given lattice wall.
ImplicitSolid demo_part(const DemoConfig& config, const PeriodField& t, double w);
DemoResult run_demo(const DemoConfig& config, bool build_mesh = true);

}  // namespace ehap::lattice
