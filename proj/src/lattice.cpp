#include "ehap/lattice.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <unordered_map>

#include "mc_tables.hpp"

namespace ehap::lattice {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSnapFraction = 1e-5;

double box_distance(const Aabb& b, const Vec3& p) {
  const Vec3 d = (b.lo - p).cwiseMax(p - b.hi).cwiseMax(0.0);
  return d.norm();
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b, double& s) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

}  // namespace

// ---- grid ------------------------------------------------------------------------

bool Aabb::contains(const Vec3& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

void Aabb::validate() const {
  if (!lo.allFinite() || !hi.allFinite() || !((hi - lo).array() > 0.0).all()) {
    throw ValidationError("bbox must have positive extent on every axis");
  }
}

Vec3 ScalarGrid::spacing() const {
  const Vec3 e = bbox.extent();
  return {e.x() / (dims[0] - 1), e.y() / (dims[1] - 1), e.z() / (dims[2] - 1)};
}

Vec3 ScalarGrid::point(int i, int j, int k) const {
  // Exact ends so nested grids share coincident points bit for bit.
  auto coord = [&](int axis, int n) {
    if (n == 0) return bbox.lo[axis];
    if (n == dims[axis] - 1) return bbox.hi[axis];
    return bbox.lo[axis] + bbox.extent()[axis] * (static_cast<double>(n) / (dims[axis] - 1));
  };
  return {coord(0, i), coord(1, j), coord(2, k)};
}

void ScalarGrid::validate() const {
  bbox.validate();
  for (int d : dims) {
    if (d < 2) throw ValidationError("grid dims must be >= 2 on every axis");
  }
  if (values.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]) {
    throw ValidationError("grid value count does not match dims");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("grid contains non-finite values");
  }
}

// ---- period field ----------------------------------------------------------------

double wendland_c2(double d) {
  if (d >= 1.0) return 0.0;
  const double a = 1.0 - d;
  return a * a * a * a * (4.0 * d + 1.0);
}

PeriodField PeriodField::constant(double t, double t_min) {
  PeriodField f;
  f.q0 = t;
  f.t_min = t_min;
  return f;
}

void PeriodField::validate() const {
  if (!(support_radius > 0.0)) throw ValidationError("period field: support_radius must be > 0");
  if (!(t_min > 0.0)) throw ValidationError("period field: t_min must be > 0");
  if (centers.size() != weights.size()) {
    throw ValidationError("period field: centers and weights differ in length");
  }
}

double eval_period_field(const PeriodField& t, const Vec3& r) {
  double v = t.q0 + t.q.dot(r);
  const double inv = 1.0 / t.support_radius;
  for (std::size_t i = 0; i < t.centers.size(); ++i) {
    v += t.weights[i] * wendland_c2((r - t.centers[i]).norm() * inv);
  }
  return std::max(v, t.t_min);
}

PeriodField fit_period_field(const std::vector<PeriodSample>& samples, double support_radius,
                             double t_min) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 4) throw ValidationError("fit_period_field: need at least 4 samples");
  if (!(support_radius > 0.0)) throw ValidationError("fit_period_field: support must be > 0");
  // [Psi P; P^T 0] [w; q] = [t; 0]
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 4, n + 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& pi = samples[i].point;
    for (Eigen::Index j = 0; j < n; ++j) {
      A(i, j) = wendland_c2((pi - samples[j].point).norm() / support_radius);
    }
    A(i, n) = 1.0;
    A.block<1, 3>(i, n + 1) = pi.transpose();
    A(n, i) = 1.0;
    A.block<3, 1>(n + 1, i) = pi;
    rhs(i) = samples[i].t;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw ValidationError("fit_period_field: singular system (duplicate or coplanar points)");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  PeriodField f;
  f.support_radius = support_radius;
  f.t_min = t_min;
  for (Eigen::Index i = 0; i < n; ++i) {
    f.centers.push_back(samples[i].point);
    f.weights.push_back(x(i));
  }
  f.q0 = x(n);
  f.q = x.segment<3>(n + 1);
  f.validate();
  return f;
}

double phi_p(const Vec3& r, const PeriodField& t) {
  const double s = kTwoPi * eval_period_field(t, r);
  return std::cos(s * r.x()) + std::cos(s * r.y()) + std::cos(s * r.z());
}

double sheet_distance(const PeriodField& t, const Vec3& r) {
  const double tr = eval_period_field(t, r);
  const double h = 1e-3 / tr;
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = h;
    g[k] = (phi_p(r + e, t) - phi_p(r - e, t)) / (2.0 * h);
  }
  const double gn = g.norm();
  if (!(gn > 0.0)) return std::numeric_limits<double>::max();
  const double phi0 = phi_p(r, t);
  const double first = std::abs(phi0) / gn;
  if (phi0 == 0.0 || first > 0.5 / tr) return first;
  // Newton on phi along the descent line; the first-order estimate is too
  // short where |grad phi| varies across the sheet.
  const Vec3 dir = (phi0 > 0.0 ? -1.0 : 1.0) * g / gn;
  double s = first;
  for (int it = 0; it < 8; ++it) {
    const Vec3 p = r + s * dir;
    const double v = phi_p(p, t);
    const double dv = (phi_p(p + h * dir, t) - phi_p(p - h * dir, t)) / (2.0 * h);
    if (!(std::abs(dv) > 0.0)) return first;
    const double next = s - v / dv;
    if (!(next > 0.0) || next > 4.0 * first) return first;
    const bool done = std::abs(next - s) < 1e-6 * h;
    s = next;
    if (done) break;
  }
  return s;
}

// ---- solids ----------------------------------------------------------------------

ImplicitSolid everywhere() {
  return {[](const Vec3&) { return 1.0; }};
}

ImplicitSolid nowhere() {
  return {[](const Vec3&) { return -1.0; }};
}

ImplicitSolid sphere_solid(const Vec3& center, double radius) {
  return {[center, radius](const Vec3& r) { return radius - (r - center).norm(); }};
}

ImplicitSolid box_solid(const Aabb& box) {
  box.validate();
  return {[box](const Vec3& r) { return (r - box.lo).cwiseMin(box.hi - r).minCoeff(); }};
}

ImplicitSolid boolean_intersect(ImplicitSolid a, ImplicitSolid b) {
  return {[a = std::move(a), b = std::move(b)](const Vec3& r) { return std::min(a(r), b(r)); }};
}

ImplicitSolid boolean_union(ImplicitSolid a, ImplicitSolid b) {
  return {[a = std::move(a), b = std::move(b)](const Vec3& r) { return std::max(a(r), b(r)); }};
}

ImplicitSolid boolean_subtract(ImplicitSolid a, ImplicitSolid b) {
  return {[a = std::move(a), b = std::move(b)](const Vec3& r) { return std::min(a(r), -b(r)); }};
}

ImplicitSolid boolean_complement(ImplicitSolid a) {
  return {[a = std::move(a)](const Vec3& r) { return -a(r); }};
}

// ---- centreline distance -------------------------------------------------------------

CenterlineDistance::CenterlineDistance(std::vector<BSplineCurve> curves, int per_span)
    : curves_(std::move(curves)) {
  if (curves_.empty()) throw ValidationError("centreline distance: no curves");
  if (per_span < 1) throw ValidationError("centreline distance: per_span must be >= 1");
  constexpr std::size_t kChunk = 8;
  all_ = {Vec3::Constant(kInf), Vec3::Constant(-kInf)};
  for (std::size_t c = 0; c < curves_.size(); ++c) {
    const auto& curve = curves_[c];
    const auto bp = curve.breakpoints();
    const int sub = curve.degree() == 1 ? 1 : per_span;
    for (std::size_t s = 1; s < bp.size(); ++s) {
      for (int j = 0; j < sub; ++j) {
        const double ua = bp[s - 1] + (bp[s] - bp[s - 1]) * j / sub;
        const double ub = j + 1 == sub ? bp[s] : bp[s - 1] + (bp[s] - bp[s - 1]) * (j + 1) / sub;
        segments_.push_back({curve.eval(ua), curve.eval(ub), ua, ub, bp[s - 1], bp[s], c});
      }
    }
  }
  for (std::size_t i = 0; i < segments_.size(); i += kChunk) {
    Chunk ch{{Vec3::Constant(kInf), Vec3::Constant(-kInf)}, i, std::min(i + kChunk, segments_.size())};
    double sag = 0.0;
    for (std::size_t k = ch.first; k < ch.last; ++k) {
      const auto& s = segments_[k];
      const Vec3 mid = curves_[s.curve].eval(0.5 * (s.ua + s.ub));
      double t;
      sag = std::max(sag, segment_distance(mid, s.a, s.b, t));
      ch.box.lo = ch.box.lo.cwiseMin(s.a).cwiseMin(s.b);
      ch.box.hi = ch.box.hi.cwiseMax(s.a).cwiseMax(s.b);
    }
    // The curve bulges past its chord by about the midpoint sag; pad generously.
    slack_ = std::max(slack_, 2.0 * sag);
    ch.box.lo.array() -= 2.0 * sag;
    ch.box.hi.array() += 2.0 * sag;
    all_.lo = all_.lo.cwiseMin(ch.box.lo);
    all_.hi = all_.hi.cwiseMax(ch.box.hi);
    chunks_.push_back(ch);
  }
}

double CenterlineDistance::refine(const Vec3& r, const Segment& s, double u0) const {
  const auto& c = curves_[s.curve];
  double best = std::min((s.a - r).norm(), (s.b - r).norm());
  double u = u0;
  for (int it = 0; it < 12; ++it) {
    const auto d = c.derivatives(u, 2);
    const Vec3 diff = d[0] - r;
    best = std::min(best, diff.norm());
    const double g = diff.dot(d[1]);
    const double dg = d[1].squaredNorm() + diff.dot(d[2]);
    if (!(dg > 0.0)) break;
    const double next = std::clamp(u - g / dg, s.span_lo, s.span_hi);
    if (std::abs(next - u) < 1e-15 * (1.0 + std::abs(u))) break;
    u = next;
  }
  return std::min(best, (c.eval(u) - r).norm());
}

double CenterlineDistance::distance_capped(const Vec3& r, double cap) const {
  const double lower = box_distance(all_, r);
  if (lower >= cap) return lower;
  // Nearest chunks first so the chord bound tightens early.
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) order.emplace_back(box_distance(chunks_[i].box, r), i);
  std::sort(order.begin(), order.end());
  double best_chord = kInf;
  std::vector<std::pair<double, std::size_t>> cand;
  for (const auto& [bd, i] : order) {
    if (bd > best_chord + slack_) break;
    for (std::size_t k = chunks_[i].first; k < chunks_[i].last; ++k) {
      double t;
      const double d = segment_distance(r, segments_[k].a, segments_[k].b, t);
      cand.emplace_back(d, k);
      best_chord = std::min(best_chord, d);
    }
  }
  if (best_chord - slack_ >= cap) return best_chord - slack_;
  std::sort(cand.begin(), cand.end());
  double best = kInf;
  for (const auto& [d, k] : cand) {
    if (d > best_chord + slack_) break;
    const auto& s = segments_[k];
    double t;
    segment_distance(r, s.a, s.b, t);
    best = std::min(best, refine(r, s, s.ua + t * (s.ub - s.ua)));
  }
  return best;
}

double CenterlineDistance::distance(const Vec3& r) const { return distance_capped(r, kInf); }

double distance_to_centerlines(const Vec3& r, const std::vector<BSplineCurve>& curves) {
  return CenterlineDistance(curves).distance(r);
}

ImplicitSolid pipe_wall_solid(const std::vector<BSplineCurve>& curves, double bore_radius,
                              double wall) {
  if (!(bore_radius > 0.0)) throw ValidationError("pipe wall: bore radius must be > 0");
  if (!(wall > 0.0)) throw ValidationError("pipe wall: wall must be > 0");
  auto dist = std::make_shared<const CenterlineDistance>(curves);
  const double outer = bore_radius + wall;
  return {[dist, bore_radius, outer](const Vec3& r) {
    const double d = dist->distance_capped(r, 2.0 * outer);
    return std::min(d - bore_radius, outer - d);
  }};
}

ImplicitSolid tube_solid(const std::vector<BSplineCurve>& curves, double radius) {
  if (!(radius > 0.0)) throw ValidationError("tube: radius must be > 0");
  auto dist = std::make_shared<const CenterlineDistance>(curves);
  return {[dist, radius](const Vec3& r) { return radius - dist->distance_capped(r, 2.0 * radius); }};
}

ImplicitSolid thicken_tpms(const PeriodField& t, double w, bool allow_below_floor) {
  t.validate();
  if (!(w > 0.0) || (!allow_below_floor && w < kMinWallThickness)) {
    throw ValidationError("thicken_tpms: wall " + std::to_string(w) +
                          " m is below the 0.4 mm manufacturing floor");
  }
  return {[t, half = 0.5 * w](const Vec3& r) { return half - sheet_distance(t, r); }};
}

ImplicitSolid fill_region(const ImplicitSolid& design, const ImplicitSolid& keep,
                          const PeriodField& t, double w, bool allow_below_floor) {
  return boolean_union(keep, boolean_intersect(design, thicken_tpms(t, w, allow_below_floor)));
}

// ---- sampling ---------------------------------------------------------------------

namespace {

template <class F>
ScalarGrid sample_with(const Aabb& bbox, const GridDims& dims, F&& f) {
  bbox.validate();
  for (int d : dims) {
    if (d < 2) throw ValidationError("grid dims must be >= 2 on every axis");
  }
  ScalarGrid g{bbox, dims, {}};
  g.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 p = g.point(i, j, k);
        const double v = f(p);
        if (!std::isfinite(v)) {
          throw NumericError("sample_grid: non-finite value at (" + std::to_string(p.x()) + ", " +
                             std::to_string(p.y()) + ", " + std::to_string(p.z()) + ")");
        }
        g.values[g.index(i, j, k)] = v;
      }
    }
  }
  return g;
}

}  // namespace

ScalarGrid sample_grid(const ImplicitSolid& solid, const Aabb& bbox, const GridDims& dims) {
  return sample_with(bbox, dims, [&](const Vec3& p) { return solid(p); });
}

ScalarGrid sample_sheet_distance(const PeriodField& t, const Aabb& bbox, const GridDims& dims) {
  t.validate();
  return sample_with(bbox, dims, [&](const Vec3& p) { return sheet_distance(t, p); });
}

double volume_fraction(const ScalarGrid& grid, double iso) {
  if (grid.values.empty()) throw ValidationError("volume_fraction: empty grid");
  const auto n = std::count_if(grid.values.begin(), grid.values.end(),
                               [iso](double v) { return v >= iso; });
  return static_cast<double>(n) / static_cast<double>(grid.values.size());
}

// ---- marching cubes ------------------------------------------------------------------

TriMesh marching_cubes(const ScalarGrid& grid, double iso, double weld_tol) {
  grid.validate();
  static constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                        {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  static constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                       {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  const auto [nx, ny, nz] = grid.dims;
  const std::uint64_t n_points = grid.values.size();

  TriMesh mesh;
  // Keys: 3 * point + axis for edge vertices, 3 * n_points + point for
  // vertices snapped onto a grid point.
  std::unordered_map<std::uint64_t, std::uint32_t> vertex_of;
  auto vertex_id = [&](std::uint64_t key, const Vec3& p) {
    const auto [it, fresh] = vertex_of.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (fresh) mesh.vertices.push_back(p);
    return it->second;
  };

  std::size_t collapsed = 0;
  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        std::size_t gi[8];
        double val[8];
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          gi[c] = grid.index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          val[c] = grid.values[gi[c]];
          if (val[c] < iso) cube |= 1 << c;
        }
        const int edges = detail::kMcEdgeTable[cube];
        if (edges == 0) continue;
        std::uint32_t vid[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int c0 = kEdge[e][0], c1 = kEdge[e][1];
          if (gi[c0] > gi[c1]) std::swap(c0, c1);
          const int axis = kCorner[c0][0] != kCorner[c1][0] ? 0 : (kCorner[c0][1] != kCorner[c1][1] ? 1 : 2);
          const Vec3 p0 = grid.point(i + kCorner[c0][0], j + kCorner[c0][1], k + kCorner[c0][2]);
          const Vec3 p1 = grid.point(i + kCorner[c1][0], j + kCorner[c1][1], k + kCorner[c1][2]);
          const double mu = std::clamp((iso - val[c0]) / (val[c1] - val[c0]), 0.0, 1.0);
          // Snap to the grid point when closer than weld_tol or 1e-5 of the
          // edge; this removes slivers of area ~1e-18 m^2 at cell corners.
          const double snap = std::max(weld_tol / (p1 - p0).norm(), kSnapFraction);
          if (mu <= snap) {
            vid[e] = vertex_id(3 * n_points + gi[c0], p0);
          } else if (1.0 - mu <= snap) {
            vid[e] = vertex_id(3 * n_points + gi[c1], p1);
          } else {
            vid[e] = vertex_id(3 * static_cast<std::uint64_t>(gi[c0]) + axis, p0 + mu * (p1 - p0));
          }
        }
        const int* tri = detail::kMcTriTable[cube];
        for (int t = 0; tri[t] != -1; t += 3) {
          // Table winding puts the normal on the below-iso side.
          const std::array<std::uint32_t, 3> f{vid[tri[t]], vid[tri[t + 1]], vid[tri[t + 2]]};
          if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            ++collapsed;
            continue;
          }
          mesh.triangles.push_back(f);
        }
      }
    }
  }
  if (collapsed > 0) {
    // Snapping can leave coincident opposite-facing pairs; drop both.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_key;
    auto key = [&](std::array<std::uint32_t, 3> f) {
      std::sort(f.begin(), f.end());
      std::uint64_t h = 1469598103934665603ULL;
      for (auto v : f) h = (h ^ v) * 1099511628211ULL;
      return h;
    };
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) by_key[key(mesh.triangles[t])].push_back(t);
    std::vector<bool> drop(mesh.triangles.size(), false);
    for (const auto& [h, list] : by_key) {
      for (std::size_t a = 0; a < list.size(); ++a) {
        for (std::size_t b = a + 1; b < list.size(); ++b) {
          auto fa = mesh.triangles[list[a]], fb = mesh.triangles[list[b]];
          std::sort(fa.begin(), fa.end());
          std::sort(fb.begin(), fb.end());
          if (fa == fb && !drop[list[a]] && !drop[list[b]]) drop[list[a]] = drop[list[b]] = true;
        }
      }
    }
    std::vector<std::array<std::uint32_t, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (!drop[t]) kept.push_back(mesh.triangles[t]);
    }
    mesh.triangles = std::move(kept);
  }
  return mesh;
}

// ---- density target ----------------------------------------------------------------------

ThicknessSolution solve_thickness_for_density(const ScalarGrid& sheet, double target, double tol,
                                              bool allow_below_floor) {
  if (!(target > 0.0 && target < 1.0)) {
    throw ValidationError("target density must lie strictly between 0 and 1");
  }
  if (!(tol > 0.0)) throw ValidationError("density tolerance must be > 0");
  if (sheet.values.empty()) throw ValidationError("empty sheet-distance grid");
  auto fraction = [&](double w) {
    const double half = 0.5 * w;
    const auto n = std::count_if(sheet.values.begin(), sheet.values.end(),
                                 [half](double s) { return half - s >= 0.0; });
    return static_cast<double>(n) / static_cast<double>(sheet.values.size());
  };
  double lo = allow_below_floor ? 0.0 : kMinWallThickness;
  const double f_floor = fraction(lo);
  if (f_floor > target + tol) {
    throw DensityTargetError("density target " + std::to_string(target) +
                                 " needs a wall below the 0.4 mm floor (fraction at floor " +
                                 std::to_string(f_floor) + ")",
                             f_floor);
  }
  double s_max = 0.0;
  for (double s : sheet.values) {
    if (s < std::numeric_limits<double>::max()) s_max = std::max(s_max, s);
  }
  double hi = std::max(2.0 * s_max, lo);
  if (fraction(hi) < target - tol) {
    throw DensityTargetError("density target " + std::to_string(target) + " is unreachable",
                             f_floor);
  }
  ThicknessSolution sol;
  while (sol.iterations < 200 && hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (fraction(mid) < target ? lo : hi) = mid;
    ++sol.iterations;
  }
  const double f_lo = fraction(lo), f_hi = fraction(hi);
  const bool use_lo = std::abs(f_lo - target) < std::abs(f_hi - target) &&
                      (allow_below_floor || lo >= kMinWallThickness);
  sol.wall = use_lo ? lo : hi;
  sol.fraction = use_lo ? f_lo : f_hi;
  if (std::abs(sol.fraction - target) > tol) {
    throw NumericError("density bisection stalled at fraction " + std::to_string(sol.fraction));
  }
  return sol;
}

ThicknessSolution solve_thickness_for_density(const PeriodField& t, double target,
                                              const Aabb& bbox, const GridDims& dims, double tol,
                                              bool allow_below_floor) {
  return solve_thickness_for_density(sample_sheet_distance(t, bbox, dims), target, tol,
                                     allow_below_floor);
}

void export_stl(const TriMesh& mesh, const std::filesystem::path& path) {
  if (mesh.triangles.empty()) throw ValidationError("export_stl: mesh is empty");
  write_stl(path, mesh, "ehap lattice");
}

// ---- demonstration block --------------------------------------------------------------

void DemoConfig::validate() const {
  bbox.validate();
  for (const auto& d : {dims, mesh_dims}) {
    for (int n : d) {
      if (n < 8) throw ValidationError("lattice demo: grid dims must be >= 8");
    }
  }
  if (period_samples.size() < 4) throw ValidationError("lattice demo: need >= 4 period samples");
  if (!(target_density > 0.0 && target_density < 1.0)) {
    throw ValidationError("lattice demo: target_density must lie in (0, 1)");
  }
  if (!(pipe_wall > 0.0) || !(skin > 0.0)) {
    throw ValidationError("lattice demo: pipe_wall and skin must be > 0");
  }
  if (!((bbox.extent().array() > 2.0 * skin).all())) {
    throw ValidationError("lattice demo: skin thicker than half the block");
  }
}

DemoConfig default_demo_config() {
  DemoConfig c;
  c.mesh_dims = {96, 96, 96};
  c.bbox = {Vec3(0.0, -0.008, -0.008), Vec3(0.06, 0.04, 0.02)};
  // Coarser cells at the block corners, finer in the middle.
  for (int i = 0; i < 8; ++i) {
    const Vec3 p((i & 1) ? c.bbox.hi.x() : c.bbox.lo.x(), (i & 2) ? c.bbox.hi.y() : c.bbox.lo.y(),
                 (i & 4) ? c.bbox.hi.z() : c.bbox.lo.z());
    c.period_samples.push_back({p, 190.0});
  }
  c.period_samples.push_back({0.5 * (c.bbox.lo + c.bbox.hi), 220.0});
  const auto pairs = channel::preset_port_pairs();
  c.routes.push_back(channel::make_route(channel::RouteKind::kBSpline, pairs[0].a, pairs[0].b));
  auto lifted = pairs[1];
  lifted.a.position.z() += 0.012;
  lifted.b.position.z() += 0.012;
  c.routes.push_back(channel::make_route(channel::RouteKind::kBSpline, lifted.a, lifted.b));
  return c;
}

ImplicitSolid demo_part(const DemoConfig& config, const PeriodField& t, double w) {
  const Aabb inner{config.bbox.lo + Vec3::Constant(config.skin),
                   config.bbox.hi - Vec3::Constant(config.skin)};
  ImplicitSolid block = box_solid(config.bbox);
  ImplicitSolid keep = boolean_subtract(block, box_solid(inner));
  if (config.routes.empty()) {
    return boolean_intersect(fill_region(box_solid(inner), keep, t, w, config.allow_below_floor),
                             block);
  }
  std::vector<BSplineCurve> curves;
  double bore = 0.0;
  for (const auto& r : config.routes) {
    curves.push_back(r.curve);
    bore = std::max(bore, 0.5 * r.diameter);
  }
  keep = boolean_union(std::move(keep), pipe_wall_solid(curves, bore, config.pipe_wall));
  ImplicitSolid filled = fill_region(box_solid(inner), keep, t, w, config.allow_below_floor);
  return boolean_subtract(boolean_intersect(std::move(filled), std::move(block)),
                          tube_solid(curves, bore));
}

DemoResult run_demo(const DemoConfig& config, bool build_mesh) {
  config.validate();
  DemoResult out;
  out.period = fit_period_field(config.period_samples, config.support_radius, config.t_min);
  out.thickness = solve_thickness_for_density(out.period, config.target_density, config.bbox,
                                              config.dims, config.density_tol,
                                              config.allow_below_floor);
  if (!build_mesh) return out;
  // Pad by 1.5 cells so the block faces fall mid-cell and the mesh closes.
  Aabb padded = config.bbox;
  for (int a = 0; a < 3; ++a) {
    const double h = config.bbox.extent()[a] / (config.mesh_dims[a] - 4);
    padded.lo[a] -= 1.5 * h;
    padded.hi[a] += 1.5 * h;
  }
  const ScalarGrid grid =
      sample_grid(demo_part(config, out.period, out.thickness.wall), padded, config.mesh_dims);
  std::size_t inside = 0, in_block = 0;
  for (int k = 0; k < grid.dims[2]; ++k) {
    for (int j = 0; j < grid.dims[1]; ++j) {
      for (int i = 0; i < grid.dims[0]; ++i) {
        if (!config.bbox.contains(grid.point(i, j, k))) continue;
        ++in_block;
        if (grid.values[grid.index(i, j, k)] >= 0.0) ++inside;
      }
    }
  }
  out.part_fraction = static_cast<double>(inside) / static_cast<double>(in_block);
  out.mesh = marching_cubes(grid, 0.0);
  return out;
}

}  // namespace ehap::lattice
