#pragma once

// 2-D SIMP compliance minimisation on a regular grid of unit bilinear quads
// (plane stress, unit thickness) with a sensitivity filter and
// optimality-criteria updates.
//
// Grid conventions: node (i, j) with i = 0..nelx left to right and
// j = 0..nely bottom to top has id j * (nelx + 1) + i; its dofs are 2 id (+x)
// and 2 id + 1 (+y). Element (ex, ey) has index ey * nelx + ex.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

namespace ehap::topo {

enum class Axis { kX = 0, kY = 1 };

struct PointLoad {
  int node;
  Axis dir;
  double force;  // N
};

struct FixedDof {
  int node;
  Axis dir;
};

struct TopoProblem {
  int nelx = 60;
  int nely = 20;
  double volfrac = 0.5;
  double penalty = 3.0;
  double rmin = 1.5;  // elements
  std::vector<PointLoad> loads;
  std::vector<FixedDof> fixed;
  std::vector<int> passive_solid;
  std::vector<int> passive_void;
  double E0 = 1.0;
  double Emin = 1e-9;
  double nu = 0.3;
  double move = 0.2;
  double rho_min = 1e-3;

  int n_elements() const { return nelx * nely; }
  int n_nodes() const { return (nelx + 1) * (nely + 1); }
  int node_id(int i, int j) const { return j * (nelx + 1) + i; }
  int element_id(int ex, int ey) const { return ey * nelx + ex; }
  // Throws ValidationError on any violated invariant.
  void validate() const;
};

// Closed-form stiffness of a unit square, unit thickness, E = 1 element with
// nodes (0,0), (1,0), (1,1), (0,1).
Eigen::Matrix<double, 8, 8> element_stiffness(double nu);
std::array<int, 8> element_dofs(const TopoProblem& p, int e);

struct SolveResult {
  Eigen::VectorXd u;                  // all dofs, fixed ones zero
  double compliance = 0.0;            // f . u
  std::vector<double> strain_energy;  // u_e^T KE u_e per element (E = 1)
};

SolveResult assemble_and_solve(const TopoProblem& p, const std::vector<double>& rho);

// Density-weighted convolution with hat weights max(0, rmin - dist).
std::vector<double> sensitivity_filter(int nelx, int nely, const std::vector<double>& rho,
                                       const std::vector<double>& dc, double rmin);

// Optimality-criteria step; bisects the Lagrange multiplier so the mean
// density equals volfrac. Passive elements are re-imposed.
std::vector<double> oc_update(const TopoProblem& p, const std::vector<double>& rho,
                              const std::vector<double>& dc, double move);

struct DensityField {
  int nelx = 0;
  int nely = 0;
  std::vector<double> rho;
  int iterations = 0;
  bool converged = false;
  std::vector<double> compliance_history;  // compliance of each iterate before its update
  std::vector<double> mean_history;        // mean density after each update
  std::vector<double> change_history;      // max |delta rho| per update
  double final_compliance = 0.0;

  double mean() const;
};

DensityField run_topo(const TopoProblem& p, int max_iters = 200, double tol = 0.01);

// Left edge clamped, unit downward load at the middle of the right edge.
TopoProblem cantilever_preset(int nelx = 60, int nely = 20, double volfrac = 0.5,
                              double penalty = 3.0, double rmin = 1.5);
// Bottom edge clamped, unit oblique load at a pin near the upper right with
// a void bore and a solid ring around it.
TopoProblem bracket_preset(int nelx = 60, int nely = 40, double volfrac = 0.45,
                           double penalty = 3.0, double rmin = 1.5);
TopoProblem make_preset(std::string_view name, int nelx, int nely, double volfrac,
                        double penalty, double rmin);

// nely rows x nelx columns, top row first.
void write_density_csv(const DensityField& f, const std::filesystem::path& path);
DensityField read_density_csv(const std::filesystem::path& path);
// 8-bit grayscale, darker = denser, `scale` pixels per element.
void write_density_png(const DensityField& f, const std::filesystem::path& path, int scale = 8);
void write_history_csv(const DensityField& f, const std::filesystem::path& path);

}  // namespace ehap::topo
