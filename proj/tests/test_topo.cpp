#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ehap/error.hpp"
#include "ehap/topo.hpp"

using namespace ehap::topo;
namespace fs = std::filesystem;

namespace {

// Plane-stress bilinear quad stiffness by 2x2 Gauss quadrature, E = 1.
Eigen::Matrix<double, 8, 8> gauss_stiffness(double nu) {
  Eigen::Matrix3d D;
  D << 1, nu, 0, nu, 1, 0, 0, 0, (1 - nu) / 2;
  D /= 1 - nu * nu;
  const double xi[4] = {-1, 1, 1, -1}, eta[4] = {-1, -1, 1, 1};
  const double g = 1.0 / std::sqrt(3.0);
  Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
  for (double gx : {-g, g}) {
    for (double gy : {-g, g}) {
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        // Unit square: x = (1 + xi) / 2, so d/dx = 2 d/dxi.
        const double dx = 2.0 * 0.25 * xi[a] * (1 + eta[a] * gy);
        const double dy = 2.0 * 0.25 * eta[a] * (1 + xi[a] * gx);
        B(0, 2 * a) = dx;
        B(1, 2 * a + 1) = dy;
        B(2, 2 * a) = dy;
        B(2, 2 * a + 1) = dx;
      }
      K += B.transpose() * D * B * 0.25;  // det J = 1/4, unit weights
    }
  }
  return K;
}

// nelx x 1 strip, left edge held in x, one node held in y, unit axial pull.
TopoProblem strip(int nelx) {
  TopoProblem p;
  p.nelx = nelx;
  p.nely = 1;
  p.fixed = {{p.node_id(0, 0), Axis::kX}, {p.node_id(0, 1), Axis::kX}, {p.node_id(0, 0), Axis::kY}};
  p.loads = {{p.node_id(nelx, 0), Axis::kX, 0.5}, {p.node_id(nelx, 1), Axis::kX, 0.5}};
  return p;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("ehap_topo_" + name); }

const DensityField& cantilever_run() {
  static const DensityField f = run_topo(cantilever_preset(), 200, 0.01);
  return f;
}

}  // namespace

TEST(Stiffness, MatchesGaussQuadrature) {
  for (double nu : {0.0, 0.25, 0.3, 0.45}) {
    EXPECT_LT((element_stiffness(nu) - gauss_stiffness(nu)).cwiseAbs().maxCoeff(), 1e-14) << nu;
  }
}

TEST(Stiffness, SymmetricWithRigidModesInNullSpace) {
  const auto K = element_stiffness(0.3);
  EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::Matrix<double, 8, 1> tx, ty, rot;
  const double x[4] = {0, 1, 1, 0}, y[4] = {0, 0, 1, 1};
  for (int a = 0; a < 4; ++a) {
    tx.segment<2>(2 * a) << 1, 0;
    ty.segment<2>(2 * a) << 0, 1;
    rot.segment<2>(2 * a) << -y[a], x[a];
  }
  EXPECT_LT((K * tx).norm(), 1e-14);
  EXPECT_LT((K * ty).norm(), 1e-14);
  EXPECT_LT((K * rot).norm(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(K);
  EXPECT_GT(es.eigenvalues()[3], 1e-3);  // exactly three zero modes
}

TEST(Solve, UniaxialStripIsExact) {
  // Constant stress is in the bilinear space: u_tip = F L / (E A).
  for (int n : {4, 5, 7}) {
    const auto p = strip(n);
    const auto r = assemble_and_solve(p, std::vector<double>(p.n_elements(), 1.0));
    EXPECT_NEAR(r.compliance, static_cast<double>(n), 1e-9 * n) << n;
    EXPECT_NEAR(r.u[2 * p.node_id(n, 1) + 1], -0.3, 1e-9);  // lateral contraction nu * h
  }
}

TEST(Solve, MatchesDenseReference) {
  auto p = cantilever_preset(6, 3, 0.5, 3.0, 1.5);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> rho(p.n_elements());
  for (double& v : rho) v = u(rng);
  const auto r = assemble_and_solve(p, rho);

  const int ndof = 2 * p.n_nodes();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ndof, ndof);
  const auto ke = gauss_stiffness(p.nu);
  for (int e = 0; e < p.n_elements(); ++e) {
    const auto d = element_dofs(p, e);
    const double s = p.Emin + std::pow(rho[e], p.penalty) * (p.E0 - p.Emin);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) K(d[a], d[b]) += s * ke(a, b);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
  for (const auto& l : p.loads) f[2 * l.node + static_cast<int>(l.dir)] += l.force;
  std::vector<int> freed;
  std::vector<bool> fixed(ndof, false);
  for (const auto& fx : p.fixed) fixed[2 * fx.node + static_cast<int>(fx.dir)] = true;
  for (int d = 0; d < ndof; ++d)
    if (!fixed[d]) freed.push_back(d);
  const int nf = static_cast<int>(freed.size());
  Eigen::MatrixXd Kf(nf, nf);
  Eigen::VectorXd ff(nf);
  for (int a = 0; a < nf; ++a) {
    ff[a] = f[freed[a]];
    for (int b = 0; b < nf; ++b) Kf(a, b) = K(freed[a], freed[b]);
  }
  const Eigen::VectorXd uf = Kf.partialPivLu().solve(ff);
  EXPECT_NEAR(r.compliance, ff.dot(uf), 1e-9 * ff.dot(uf));
  for (int a = 0; a < nf; ++a) EXPECT_NEAR(r.u[freed[a]], uf[a], 1e-9 * uf.cwiseAbs().maxCoeff());
  for (int d = 0; d < ndof; ++d)
    if (fixed[d]) EXPECT_EQ(r.u[d], 0.0);
  double se = 0;
  for (int e = 0; e < p.n_elements(); ++e)
    se += (p.Emin + std::pow(rho[e], p.penalty) * (p.E0 - p.Emin)) * r.strain_energy[e];
  EXPECT_NEAR(se, r.compliance, 1e-9 * r.compliance);
}

TEST(Solve, ZeroLoadAndLinearity) {
  auto p = cantilever_preset(12, 4, 0.5, 3.0, 1.5);
  const std::vector<double> rho(p.n_elements(), 0.5);
  const double c1 = assemble_and_solve(p, rho).compliance;
  for (auto& l : p.loads) l.force *= 2.0;
  EXPECT_NEAR(assemble_and_solve(p, rho).compliance, 4.0 * c1, 1e-9 * c1);
  p.loads.clear();
  const auto r = assemble_and_solve(p, rho);
  EXPECT_EQ(r.compliance, 0.0);
  EXPECT_EQ(r.u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, UnderConstrainedThrows) {
  auto p = strip(4);
  p.fixed.pop_back();  // rigid vertical translation left
  EXPECT_THROW(assemble_and_solve(p, std::vector<double>(4, 1.0)), ehap::NumericError);
}

TEST(Validate, RejectsBadProblems) {
  auto bad = [](auto mutate) {
    auto p = cantilever_preset(12, 4, 0.5, 3.0, 1.5);
    mutate(p);
    EXPECT_THROW(p.validate(), ehap::ValidationError);
  };
  bad([](TopoProblem& p) { p.volfrac = 0.0; });
  bad([](TopoProblem& p) { p.volfrac = 1.2; });
  bad([](TopoProblem& p) { p.penalty = 0.5; });
  bad([](TopoProblem& p) { p.rmin = 0.5; });
  bad([](TopoProblem& p) { p.nu = 0.5; });
  bad([](TopoProblem& p) { p.fixed.clear(); });
  bad([](TopoProblem& p) { p.loads.push_back({p.n_nodes(), Axis::kX, 1.0}); });
  bad([](TopoProblem& p) {
    p.passive_solid = {0};
    p.passive_void = {0};
  });
  bad([](TopoProblem& p) {
    for (int e = 0; e < 40; ++e) p.passive_solid.push_back(e);  // 40 of 48 > volfrac
  });
  bad([](TopoProblem& p) {
    p.nelx = 1;
    p.nely = 2;
  });
  EXPECT_THROW(make_preset("truss", 10, 10, 0.5, 3, 1.5), ehap::ValidationError);
}

TEST(Filter, UnitRadiusIsIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.001, 1.0), d(-5.0, 0.0);
  std::vector<double> rho(30), dc(30);
  for (int i = 0; i < 30; ++i) {
    rho[i] = u(rng);
    dc[i] = d(rng);
  }
  const auto out = sensitivity_filter(6, 5, rho, dc, 1.0);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(out[i], dc[i], 1e-12 * std::abs(dc[i]));
}

TEST(Filter, UniformFieldUnchangedAndCheckerboardSmoothed) {
  const int nx = 8, ny = 6;
  const std::vector<double> rho(nx * ny, 0.4), dc(nx * ny, -2.5);
  for (double v : sensitivity_filter(nx, ny, rho, dc, 2.5)) EXPECT_NEAR(v, -2.5, 1e-12);

  std::vector<double> board(nx * ny);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) board[y * nx + x] = (x + y) % 2 ? -1.0 : -3.0;
  const std::vector<double> ones(nx * ny, 1.0);
  const auto out = sensitivity_filter(nx, ny, ones, board, 1.5);
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  EXPECT_LT(spread(out), 0.5 * spread(board));
  // Interior weights: self 1.5, edge neighbours 0.5, diagonals 1.5 - sqrt 2.
  const double wd = 1.5 - std::sqrt(2.0);
  EXPECT_NEAR(out[2 * nx + 2], (1.5 * -3.0 + 4 * 0.5 * -1.0 + 4 * wd * -3.0) / (3.5 + 4 * wd), 1e-12);
}

TEST(Oc, UniformSensitivitiesGiveUniformVolfrac) {
  auto p = cantilever_preset(10, 5, 0.4, 3.0, 1.5);
  const std::vector<double> rho(p.n_elements(), 0.5), dc(p.n_elements(), -1.0);
  for (double v : oc_update(p, rho, dc, 0.2)) EXPECT_NEAR(v, 0.4, 1e-6);
}

TEST(Oc, RespectsBoundsMoveAndVolume) {
  auto p = cantilever_preset(10, 5, 0.5, 3.0, 1.5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.2, 0.8), d(-10.0, -0.01);
  std::vector<double> rho(p.n_elements()), dc(p.n_elements());
  for (auto& v : rho) v = u(rng);
  for (auto& v : dc) v = d(rng);
  const double m0 = mean_of(rho);
  for (auto& v : rho) v += 0.5 - m0;
  const auto out = oc_update(p, rho, dc, 0.1);
  EXPECT_NEAR(mean_of(out), 0.5, 1e-4);
  for (std::size_t e = 0; e < out.size(); ++e) {
    EXPECT_LE(std::abs(out[e] - rho[e]), 0.1 + 1e-12);
    EXPECT_GE(out[e], p.rho_min);
    EXPECT_LE(out[e], 1.0);
  }
  EXPECT_EQ(oc_update(p, rho, dc, 0.0), rho);
}

TEST(Oc, RejectsPositiveSensitivityAndUnreachableVolume) {
  auto p = cantilever_preset(10, 5, 0.5, 3.0, 1.5);
  std::vector<double> rho(p.n_elements(), 0.5), dc(p.n_elements(), -1.0);
  dc[3] = 0.1;
  EXPECT_THROW(oc_update(p, rho, dc, 0.2), ehap::ValidationError);
  dc[3] = -1.0;
  std::fill(rho.begin(), rho.end(), 0.1);
  EXPECT_THROW(oc_update(p, rho, dc, 0.05), ehap::NumericError);
}

TEST(Oc, PassiveElementsReimposed) {
  auto p = cantilever_preset(10, 5, 0.5, 3.0, 1.5);
  p.passive_solid = {0, 1};
  p.passive_void = {49};
  const std::vector<double> rho(p.n_elements(), 0.5), dc(p.n_elements(), -1.0);
  const auto out = oc_update(p, rho, dc, 0.2);
  EXPECT_EQ(out[0], 1.0);
  EXPECT_EQ(out[1], 1.0);
  EXPECT_EQ(out[49], p.rho_min);
  EXPECT_NEAR(mean_of(out), 0.5, 1e-4);
}

TEST(Run, FullVolumeIsAFixedPoint) {
  const auto f = run_topo(cantilever_preset(12, 4, 1.0, 3.0, 1.5), 50, 0.01);
  EXPECT_TRUE(f.converged);
  EXPECT_EQ(f.iterations, 1);
  for (double v : f.rho) EXPECT_EQ(v, 1.0);
}

TEST(Run, CantileverBeatsUniformAndKeepsVolume) {
  const auto& f = cantilever_run();
  const auto p = cantilever_preset();
  EXPECT_TRUE(f.converged);
  EXPECT_LE(f.iterations, 200);
  const double uniform = assemble_and_solve(p, std::vector<double>(p.n_elements(), 0.5)).compliance;
  EXPECT_LT(f.final_compliance, 0.5 * uniform);
  for (double m : f.mean_history) EXPECT_NEAR(m, 0.5, 0.005);
  for (std::size_t i = 10; i < f.compliance_history.size(); ++i) {
    EXPECT_LE(f.compliance_history[i], 1.01 * f.compliance_history[i - 1]) << i;
  }
  EXPECT_LT(f.change_history.back(), 0.01);
  // Gray level mean 4 rho (1 - rho) is 1 for the uniform start and 0 for pure 0/1.
  double gray = 0;
  for (double v : f.rho) gray += 4 * v * (1 - v);
  EXPECT_LT(gray / f.rho.size(), 0.3);
}

TEST(Run, CantileverIsMirrorSymmetric) {
  const auto& f = cantilever_run();
  // The load sits on the mid node of an even-height beam.
  double worst = 0;
  for (int y = 0; y < f.nely; ++y)
    for (int x = 0; x < f.nelx; ++x)
      worst = std::max(worst, std::abs(f.rho[y * f.nelx + x] - f.rho[(f.nely - 1 - y) * f.nelx + x]));
  EXPECT_LT(worst, 1e-6);
}

TEST(Run, MeshRefinementAgrees) {
  const auto& coarse = cantilever_run();
  const auto fine = run_topo(cantilever_preset(120, 40, 0.5, 3.0, 3.0), 200, 0.01);
  EXPECT_NEAR(fine.final_compliance / coarse.final_compliance, 1.0, 0.15);
}

TEST(Run, BracketHonoursPassiveZones) {
  const auto p = bracket_preset();
  ASSERT_FALSE(p.passive_solid.empty());
  ASSERT_FALSE(p.passive_void.empty());
  double fx = 0, fy = 0;
  for (const auto& l : p.loads) (l.dir == Axis::kX ? fx : fy) += l.force;
  EXPECT_NEAR(std::hypot(fx, fy), 1.0, 1e-12);
  const auto f = run_topo(p, 200, 0.01);
  EXPECT_TRUE(f.converged);
  for (int e : p.passive_solid) EXPECT_EQ(f.rho[e], 1.0);
  for (int e : p.passive_void) EXPECT_EQ(f.rho[e], p.rho_min);
  EXPECT_NEAR(f.mean(), 0.45, 0.005);
}

TEST(Export, CsvRoundTripAndOrientation) {
  const auto& f = cantilever_run();
  const auto path = tmp("rho.csv");
  write_density_csv(f, path);
  const auto g = read_density_csv(path);
  EXPECT_EQ(g.nelx, f.nelx);
  EXPECT_EQ(g.nely, f.nely);
  EXPECT_EQ(g.rho, f.rho);

  DensityField tiny;
  tiny.nelx = 2;
  tiny.nely = 2;
  tiny.rho = {0.1, 0.2, 0.3, 0.4};  // bottom row 0.1 0.2
  write_density_csv(tiny, path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "0.3,0.4");
  fs::remove(path);
}

TEST(Export, PngHeaderSizeAndShade) {
  DensityField f;
  f.nelx = 3;
  f.nely = 2;
  f.rho.assign(6, 1.0);
  const auto path = tmp("rho.png");
  write_density_png(f, path, 4);
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  ASSERT_GT(bytes.size(), 33u);
  EXPECT_EQ(bytes[1], 'P');
  EXPECT_EQ(bytes[2], 'N');
  EXPECT_EQ(bytes[3], 'G');
  auto be32 = [&](int at) {
    return (bytes[at] << 24) | (bytes[at + 1] << 16) | (bytes[at + 2] << 8) | bytes[at + 3];
  };
  EXPECT_EQ(be32(16), 12);  // width
  EXPECT_EQ(be32(20), 8);   // height
  EXPECT_EQ(bytes[25], 0);  // grayscale
  f.rho.clear();
  EXPECT_THROW(write_density_png(f, path, 4), ehap::ValidationError);
  fs::remove(path);
}

TEST(Export, HistoryCsv) {
  const auto& f = cantilever_run();
  const auto path = tmp("hist.csv");
  write_history_csv(f, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,compliance,mean_density,change");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, f.iterations);
  fs::remove(path);
}
