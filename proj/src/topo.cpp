#include "ehap/topo.hpp"

#include <png.h>

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <string>

#include "ehap/error.hpp"
#include "ehap/text.hpp"

namespace ehap::topo {

namespace {

int dof(int node, Axis a) { return 2 * node + static_cast<int>(a); }

// Free-dof numbering plus a Cholesky solver whose sparsity pattern is
// analysed once and refactorised per density field.
class FeSystem {
 public:
  explicit FeSystem(const TopoProblem& p) : p_(p), ke_(element_stiffness(p.nu)) {
    const int ndof = 2 * p.n_nodes();
    free_index_.assign(ndof, 0);
    for (const auto& f : p.fixed) free_index_[dof(f.node, f.dir)] = -1;
    n_free_ = 0;
    for (int d = 0; d < ndof; ++d) {
      if (free_index_[d] == 0) free_index_[d] = n_free_++;
    }
    f_ = Eigen::VectorXd::Zero(ndof);
    for (const auto& l : p.loads) f_[dof(l.node, l.dir)] += l.force;
  }

  SolveResult solve(const std::vector<double>& rho) {
    const int ne = p_.n_elements();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ne) * 64);
    for (int e = 0; e < ne; ++e) {
      const double s = p_.Emin + std::pow(rho[e], p_.penalty) * (p_.E0 - p_.Emin);
      const auto d = element_dofs(p_, e);
      for (int a = 0; a < 8; ++a) {
        const int ia = free_index_[d[a]];
        if (ia < 0) continue;
        for (int b = 0; b < 8; ++b) {
          const int ib = free_index_[d[b]];
          if (ib >= 0) trip.emplace_back(ia, ib, s * ke_(a, b));
        }
      }
    }
    Eigen::SparseMatrix<double> K(n_free_, n_free_);
    K.setFromTriplets(trip.begin(), trip.end());
    if (!analysed_) {
      llt_.analyzePattern(K);
      analysed_ = true;
    }
    llt_.factorize(K);
    if (llt_.info() != Eigen::Success) {
      throw NumericError("topo: stiffness matrix is singular (insufficient constraints)");
    }
    // A rigid-body mode shows up as a vanishing pivot rather than a failure.
    const Eigen::VectorXd piv = Eigen::SparseMatrix<double>(llt_.matrixL()).diagonal();
    const double pmin = piv.cwiseAbs2().minCoeff(), pmax = piv.cwiseAbs2().maxCoeff();
    if (!(pmin > 1e-14 * pmax)) {
      throw NumericError("topo: stiffness matrix is singular (insufficient constraints)");
    }
    Eigen::VectorXd rhs(n_free_);
    for (std::size_t d = 0; d < free_index_.size(); ++d) {
      if (free_index_[d] >= 0) rhs[free_index_[d]] = f_[static_cast<Eigen::Index>(d)];
    }
    const Eigen::VectorXd uf = llt_.solve(rhs);
    SolveResult r;
    r.u = Eigen::VectorXd::Zero(f_.size());
    for (std::size_t d = 0; d < free_index_.size(); ++d) {
      if (free_index_[d] >= 0) r.u[static_cast<Eigen::Index>(d)] = uf[free_index_[d]];
    }
    r.compliance = f_.dot(r.u);
    r.strain_energy.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const auto d = element_dofs(p_, e);
      Eigen::Matrix<double, 8, 1> ue;
      for (int a = 0; a < 8; ++a) ue[a] = r.u[d[a]];
      r.strain_energy[e] = ue.dot(ke_ * ue);
    }
    return r;
  }

 private:
  const TopoProblem& p_;
  Eigen::Matrix<double, 8, 8> ke_;
  std::vector<int> free_index_;
  int n_free_ = 0;
  Eigen::VectorXd f_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  bool analysed_ = false;
};

void check_node(const TopoProblem& p, int node, const char* what) {
  if (node < 0 || node >= p.n_nodes()) {
    throw ValidationError(std::string("topo: ") + what + " node " + std::to_string(node) +
                          " out of range");
  }
}

}  // namespace

void TopoProblem::validate() const {
  if (nelx < 1 || nely < 1 || nelx * nely < 4) {
    throw ValidationError("topo: need nelx, nely >= 1 and at least 4 elements");
  }
  if (!(volfrac > 0.0 && volfrac <= 1.0)) throw ValidationError("topo: volfrac must lie in (0, 1]");
  if (!(penalty >= 1.0)) throw ValidationError("topo: penalty must be >= 1");
  if (!(rmin >= 1.0)) throw ValidationError("topo: rmin must be >= 1");
  if (!(E0 > 0.0) || !(Emin >= 0.0 && Emin < E0)) {
    throw ValidationError("topo: need E0 > 0 and 0 <= Emin < E0");
  }
  if (!(nu > -1.0 && nu < 0.5)) throw ValidationError("topo: Poisson ratio must lie in (-1, 0.5)");
  if (!(move >= 0.0 && move <= 1.0)) throw ValidationError("topo: move must lie in [0, 1]");
  if (!(rho_min > 0.0 && rho_min < 1.0)) throw ValidationError("topo: rho_min must lie in (0, 1)");
  if (fixed.empty()) throw ValidationError("topo: no fixed dofs");
  for (const auto& l : loads) {
    check_node(*this, l.node, "load");
    if (!std::isfinite(l.force)) throw ValidationError("topo: non-finite load");
  }
  for (const auto& f : fixed) check_node(*this, f.node, "fixed");
  std::set<int> solid;
  for (int e : passive_solid) {
    if (e < 0 || e >= n_elements()) throw ValidationError("topo: passive element out of range");
    solid.insert(e);
  }
  std::set<int> vd;
  for (int e : passive_void) {
    if (e < 0 || e >= n_elements()) throw ValidationError("topo: passive element out of range");
    if (solid.count(e)) throw ValidationError("topo: passive solid and void sets overlap");
    vd.insert(e);
  }
  const double n = n_elements();
  const double ns = static_cast<double>(solid.size()), nv = static_cast<double>(vd.size());
  const double lo = (ns + rho_min * (n - ns)) / n;
  const double hi = (n - nv + rho_min * nv) / n;
  if (volfrac < lo - 1e-12 || volfrac > hi + 1e-12) {
    throw ValidationError("topo: volfrac unreachable with the passive zones");
  }
}

Eigen::Matrix<double, 8, 8> element_stiffness(double nu) {
  const double k[8] = {0.5 - nu / 6.0,          0.125 + nu / 8.0,  -0.25 - nu / 12.0,
                       -0.125 + 3.0 * nu / 8.0, -0.25 + nu / 12.0, -0.125 - nu / 8.0,
                       nu / 6.0,                0.125 - 3.0 * nu / 8.0};
  static constexpr int idx[8][8] = {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2},
                                    {2, 7, 0, 5, 6, 3, 4, 1}, {3, 6, 5, 0, 7, 2, 1, 4},
                                    {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
                                    {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
  Eigen::Matrix<double, 8, 8> ke;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) ke(a, b) = k[idx[a][b]] / (1.0 - nu * nu);
  }
  return ke;
}

std::array<int, 8> element_dofs(const TopoProblem& p, int e) {
  const int ex = e % p.nelx, ey = e / p.nelx;
  const int n0 = p.node_id(ex, ey), n1 = p.node_id(ex + 1, ey);
  const int n2 = p.node_id(ex + 1, ey + 1), n3 = p.node_id(ex, ey + 1);
  return {2 * n0, 2 * n0 + 1, 2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1, 2 * n3, 2 * n3 + 1};
}

SolveResult assemble_and_solve(const TopoProblem& p, const std::vector<double>& rho) {
  p.validate();
  if (rho.size() != static_cast<std::size_t>(p.n_elements())) {
    throw ValidationError("topo: density count does not match the mesh");
  }
  FeSystem sys(p);
  return sys.solve(rho);
}

std::vector<double> sensitivity_filter(int nelx, int nely, const std::vector<double>& rho,
                                       const std::vector<double>& dc, double rmin) {
  if (!(rmin >= 1.0)) throw ValidationError("sensitivity_filter: rmin must be >= 1");
  const auto n = static_cast<std::size_t>(nelx) * nely;
  if (rho.size() != n || dc.size() != n) {
    throw ValidationError("sensitivity_filter: field size mismatch");
  }
  const int reach = static_cast<int>(std::ceil(rmin)) - 1;
  std::vector<double> out(n);
  for (int ey = 0; ey < nely; ++ey) {
    for (int ex = 0; ex < nelx; ++ex) {
      double sum = 0.0, wsum = 0.0;
      for (int fy = std::max(ey - reach, 0); fy <= std::min(ey + reach, nely - 1); ++fy) {
        for (int fx = std::max(ex - reach, 0); fx <= std::min(ex + reach, nelx - 1); ++fx) {
          const double h = rmin - std::hypot(ex - fx, ey - fy);
          if (h <= 0.0) continue;
          const std::size_t f = static_cast<std::size_t>(fy) * nelx + fx;
          sum += h * rho[f] * dc[f];
          wsum += h;
        }
      }
      const std::size_t e = static_cast<std::size_t>(ey) * nelx + ex;
      out[e] = sum / (std::max(1e-3, rho[e]) * wsum);
    }
  }
  return out;
}

std::vector<double> oc_update(const TopoProblem& p, const std::vector<double>& rho,
                              const std::vector<double>& dc, double move) {
  const auto n = static_cast<std::size_t>(p.n_elements());
  if (rho.size() != n || dc.size() != n) throw ValidationError("oc_update: field size mismatch");
  double dmax = 0.0;
  for (double d : dc) {
    if (!(d <= 0.0)) {
      throw ValidationError("oc_update: sensitivities must be <= 0 for compliance minimisation");
    }
    dmax = std::max(dmax, -d);
  }
  auto candidate = [&](double lambda) {
    std::vector<double> x(n);
    for (std::size_t e = 0; e < n; ++e) {
      const double trial = lambda > 0.0 ? rho[e] * std::sqrt(-dc[e] / lambda) : 1.0;
      x[e] = std::clamp(trial, std::max(p.rho_min, rho[e] - move), std::min(1.0, rho[e] + move));
    }
    for (int e : p.passive_solid) x[e] = 1.0;
    for (int e : p.passive_void) x[e] = p.rho_min;
    return x;
  };
  auto mean = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
  };
  // Bisection on the multiplier; the mean density decreases with lambda.
  double l1 = 0.0, l2 = std::max(dmax, 1e-300) * 1e12;
  for (int it = 0; it < 400 && l2 - l1 > 1e-14 * l2; ++it) {
    const double mid = 0.5 * (l1 + l2);
    (mean(candidate(mid)) > p.volfrac ? l1 : l2) = mid;
  }
  auto x = candidate(l2);
  if (std::abs(mean(x) - p.volfrac) > 1e-4) {
    const auto x1 = candidate(l1);
    if (std::abs(mean(x1) - p.volfrac) < std::abs(mean(x) - p.volfrac)) x = x1;
  }
  if (std::abs(mean(x) - p.volfrac) > 1e-4) {
    throw NumericError("oc_update: volume constraint unreachable within the move limit (mean " +
                       std::to_string(mean(x)) + ")");
  }
  return x;
}

double DensityField::mean() const {
  if (rho.empty()) return 0.0;
  double s = 0.0;
  for (double v : rho) s += v;
  return s / static_cast<double>(rho.size());
}

DensityField run_topo(const TopoProblem& p, int max_iters, double tol) {
  p.validate();
  if (max_iters < 1) throw ValidationError("topo: max_iters must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("topo: tol must be > 0");
  DensityField f;
  f.nelx = p.nelx;
  f.nely = p.nely;
  f.rho.assign(p.n_elements(), std::max(p.volfrac, p.rho_min));
  for (int e : p.passive_solid) f.rho[e] = 1.0;
  for (int e : p.passive_void) f.rho[e] = p.rho_min;
  FeSystem sys(p);
  std::vector<double> dc(f.rho.size());
  for (int it = 1; it <= max_iters; ++it) {
    const SolveResult s = sys.solve(f.rho);
    for (std::size_t e = 0; e < f.rho.size(); ++e) {
      dc[e] = -p.penalty * std::pow(f.rho[e], p.penalty - 1.0) * (p.E0 - p.Emin) *
              s.strain_energy[e];
    }
    const auto filtered = sensitivity_filter(p.nelx, p.nely, f.rho, dc, p.rmin);
    const auto next = oc_update(p, f.rho, filtered, p.move);
    double change = 0.0;
    for (std::size_t e = 0; e < next.size(); ++e) change = std::max(change, std::abs(next[e] - f.rho[e]));
    f.rho = next;
    f.iterations = it;
    f.compliance_history.push_back(s.compliance);
    f.mean_history.push_back(f.mean());
    f.change_history.push_back(change);
    if (change < tol) {
      f.converged = true;
      break;
    }
  }
  f.final_compliance = sys.solve(f.rho).compliance;
  return f;
}

// ---- presets -----------------------------------------------------------------------

TopoProblem cantilever_preset(int nelx, int nely, double volfrac, double penalty, double rmin) {
  TopoProblem p;
  p.nelx = nelx;
  p.nely = nely;
  p.volfrac = volfrac;
  p.penalty = penalty;
  p.rmin = rmin;
  for (int j = 0; j <= nely; ++j) {
    p.fixed.push_back({p.node_id(0, j), Axis::kX});
    p.fixed.push_back({p.node_id(0, j), Axis::kY});
  }
  p.loads.push_back({p.node_id(nelx, nely / 2), Axis::kY, -1.0});
  p.validate();
  return p;
}

TopoProblem bracket_preset(int nelx, int nely, double volfrac, double penalty, double rmin) {
  TopoProblem p;
  p.nelx = nelx;
  p.nely = nely;
  p.volfrac = volfrac;
  p.penalty = penalty;
  p.rmin = rmin;
  for (int i = 0; i <= nelx; ++i) {
    p.fixed.push_back({p.node_id(i, 0), Axis::kX});
    p.fixed.push_back({p.node_id(i, 0), Axis::kY});
  }
  const double cx = 0.75 * nelx, cy = 0.75 * nely;
  const double bore = std::max(1.0, 0.08 * std::min(nelx, nely));
  const double ring = 2.0 * bore;
  for (int ey = 0; ey < nely; ++ey) {
    for (int ex = 0; ex < nelx; ++ex) {
      const double d = std::hypot(ex + 0.5 - cx, ey + 0.5 - cy);
      if (d <= bore) {
        p.passive_void.push_back(p.element_id(ex, ey));
      } else if (d <= ring) {
        p.passive_solid.push_back(p.element_id(ex, ey));
      }
    }
  }
  // Pin bearing load spread over the bore-edge nodes of the solid ring.
  std::set<int> edge_nodes;
  for (int e : p.passive_solid) {
    const int ex = e % nelx, ey = e / nelx;
    for (auto [i, j] : {std::pair{ex, ey}, {ex + 1, ey}, {ex + 1, ey + 1}, {ex, ey + 1}}) {
      if (std::hypot(i - cx, j - cy) <= bore + 0.75) edge_nodes.insert(p.node_id(i, j));
    }
  }
  const double angle = -std::numbers::pi / 3.0;
  const double share = 1.0 / static_cast<double>(edge_nodes.size());
  for (int node : edge_nodes) {
    p.loads.push_back({node, Axis::kX, share * std::cos(angle)});
    p.loads.push_back({node, Axis::kY, share * std::sin(angle)});
  }
  p.validate();
  return p;
}

TopoProblem make_preset(std::string_view name, int nelx, int nely, double volfrac, double penalty,
                        double rmin) {
  if (name == "cantilever") return cantilever_preset(nelx, nely, volfrac, penalty, rmin);
  if (name == "bracket") return bracket_preset(nelx, nely, volfrac, penalty, rmin);
  throw ValidationError("unknown topo preset '" + std::string(name) +
                        "' (expected cantilever or bracket)");
}

// ---- export --------------------------------------------------------------------------

void write_density_csv(const DensityField& f, const std::filesystem::path& path) {
  if (f.rho.empty() || f.rho.size() != static_cast<std::size_t>(f.nelx) * f.nely) {
    throw ValidationError("density CSV: empty or inconsistent field");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  for (int r = 0; r < f.nely; ++r) {
    const int ey = f.nely - 1 - r;
    for (int ex = 0; ex < f.nelx; ++ex) {
      if (ex) out << ',';
      out << text::format_double(f.rho[static_cast<std::size_t>(ey) * f.nelx + ex]);
    }
    out << '\n';
  }
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

DensityField read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    std::vector<double> row;
    for (auto field : text::split(line, ',')) {
      double v;
      if (!text::parse_double(field, v)) {
        throw ValidationError("density CSV '" + path.string() + "': bad value on row " +
                              std::to_string(rows.size() + 1));
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("density CSV '" + path.string() + "': ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("density CSV '" + path.string() + "' is empty");
  DensityField f;
  f.nely = static_cast<int>(rows.size());
  f.nelx = static_cast<int>(rows.front().size());
  f.rho.resize(static_cast<std::size_t>(f.nelx) * f.nely);
  for (int r = 0; r < f.nely; ++r) {
    const int ey = f.nely - 1 - r;
    for (int ex = 0; ex < f.nelx; ++ex) f.rho[static_cast<std::size_t>(ey) * f.nelx + ex] = rows[r][ex];
  }
  return f;
}

void write_density_png(const DensityField& f, const std::filesystem::path& path, int scale) {
  if (f.rho.empty() || f.rho.size() != static_cast<std::size_t>(f.nelx) * f.nely) {
    throw ValidationError("density PNG: empty or inconsistent field");
  }
  if (scale < 1) throw ValidationError("density PNG: scale must be >= 1");
  const int w = f.nelx * scale, h = f.nely * scale;
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw ValidationError("cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw NumericError("libpng initialisation failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(w));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw NumericError("libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    const int ey = f.nely - 1 - y / scale;
    for (int x = 0; x < w; ++x) {
      const double rho = std::clamp(f.rho[static_cast<std::size_t>(ey) * f.nelx + x / scale], 0.0, 1.0);
      row[x] = static_cast<png_byte>(std::lround(255.0 * (1.0 - rho)));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_history_csv(const DensityField& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "iteration,compliance,mean_density,change\n";
  for (std::size_t i = 0; i < f.compliance_history.size(); ++i) {
    out << i + 1 << ',' << text::format_double(f.compliance_history[i]) << ','
        << text::format_double(f.mean_history[i]) << ',' << text::format_double(f.change_history[i])
        << '\n';
  }
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

}  // namespace ehap::topo
