#pragma once

// Per-subcommand request structs and their JSON bindings. All quantities are SI.

#include <string>
#include <vector>

#include "cli/binder.hpp"
#include "ehap/channel.hpp"
#include "ehap/hydraulics.hpp"
#include "ehap/lattice.hpp"

namespace ehap::cli {

struct SimulateRequest {
  hydraulics::HydraulicConfig hydraulics;
  std::string gait_csv;  // empty: bundled synthetic profile
  std::size_t gait_samples = 101;
  std::size_t plot_points = 2000;
};

struct PortPairSpec {
  std::string name;
  channel::Port a, b;
};

struct RouteRequest {
  std::vector<PortPairSpec> pairs;
  channel::RouteOptions options;
  hydraulics::FluidProps fluid;
  double flow_m3_s;
  std::vector<std::string> kinds;

  RouteRequest();
};

// Channel through the lattice block, either a named port preset shifted by
// offset or an explicit port pair.
struct ChannelSpec {
  std::string preset;
  channel::Port a, b;
  std::string kind = "bspline";
  Vec3 offset = Vec3::Zero();
  channel::RouteOptions options;
};

struct LatticeRequest {
  lattice::DemoConfig demo;  // routes are rebuilt from channels
  std::vector<ChannelSpec> channels;

  LatticeRequest();
  lattice::DemoConfig resolved() const;
};

struct TopoRequest {
  std::string preset = "cantilever";
  int nelx = 60;
  int nely = 20;
  double volfrac = 0.5;
  double penalty = 3.0;
  double rmin = 1.5;
  int max_iters = 200;
  double tol = 0.01;
  int png_scale = 8;

  static TopoRequest defaults_for(const std::string& preset);
};

struct GaitRequest {
  std::size_t samples = 101;
  double cadence_s = 1.1;
  gait::LinkageMap linkage{0.06, 0.065};
};

void bind(Binder& b, SimulateRequest& r);
void bind(Binder& b, RouteRequest& r);
void bind(Binder& b, LatticeRequest& r);
void bind(Binder& b, TopoRequest& r);
void bind(Binder& b, GaitRequest& r);

}  // namespace ehap::cli
