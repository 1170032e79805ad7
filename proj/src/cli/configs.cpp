#include "cli/configs.hpp"

#include <numbers>

namespace ehap::cli {

namespace {

void bind_port(Binder& b, channel::Port& p) {
  b.vec3("position_m", p.position);
  b.vec3("normal", p.normal, "direction of the channel leaving the port (normalised on use)");
  b.num("diameter_m", p.diameter);
}

void bind_options(Binder& b, channel::RouteOptions& o) {
  b.integer("n_ctrl", o.n_ctrl, "control points of the bspline route");
  b.num("stiffness_m", o.stiffness, "bspline end-handle length; 0 means 3 diameters");
  b.num("fillet_radius_m", o.fillet_radius, "arc route fillet radius; 0 means 2 diameters");
  b.num("handle_m", o.handle, "bezier3 handle length; 0 means a third of the port distance");
}

void bind_fluid(Binder& b, hydraulics::FluidProps& f) {
  b.num("bulk_modulus_Pa", f.bulk_modulus);
  b.num("density_kg_m3", f.density);
  b.num("kinematic_viscosity_m2_s", f.kinematic_viscosity);
}

struct AccSpec {
  double capacity = 0.0, precharge = 0.0, n = 1.4, pressure = 0.0;
};

void bind_accumulator(Binder& b, hydraulics::AccumulatorState& acc) {
  AccSpec s{acc.capacity(), acc.precharge(), acc.polytropic_n(), acc.pressure()};
  b.num("capacity_m3", s.capacity);
  b.num("precharge_Pa", s.precharge);
  b.num("polytropic_n", s.n);
  b.num("initial_pressure_Pa", s.pressure);
  if (b.reading()) acc = hydraulics::AccumulatorState::charged(s.capacity, s.precharge, s.n, s.pressure);
}

void bind_valve(Binder& b, hydraulics::ValveParams& v) {
  b.num("orifice_diameter_m", v.orifice_diameter);
  b.num("discharge_coeff", v.discharge_coeff);
  b.flag("normally_open", v.normally_open);
  b.num("transition_pressure_Pa", v.transition_pressure,
        "pressure drop below which the orifice law blends to laminar");
  b.num("switching_frequency_Hz", v.switching_frequency, "recorded only");
}

}  // namespace

void bind(Binder& b, SimulateRequest& r) {
  auto& c = r.hydraulics;
  b.section("fluid", [&](Binder& s) { bind_fluid(s, c.circuit.fluid); });
  b.section("cylinder", [&](Binder& s) {
    auto& y = c.circuit.cylinder;
    s.num("area_m2", y.area);
    s.num("stroke_m", y.stroke);
    s.num("dead_volume_upper_m3", y.dead_volume_upper);
    s.num("dead_volume_lower_m3", y.dead_volume_lower);
    s.num("moving_mass_kg", y.moving_mass);
    s.num("coulomb_friction_N", y.coulomb_friction);
    s.num("viscous_friction_N_s_m", y.viscous_friction);
    s.num("friction_smoothing_m_s", y.friction_smoothing);
  });
  b.section("pump", [&](Binder& s) {
    s.num("displacement_m3_rev", c.circuit.pump.displacement);
    s.num("speed_rpm", c.circuit.pump.speed_rpm);
    s.num("efficiency", c.circuit.pump.efficiency);
  });
  b.array("valves", c.circuit.valves, [](Binder& s, hydraulics::ValveParams& v) { bind_valve(s, v); });
  b.section("limb", [&](Binder& s) {
    s.num("stiffness_N_m", c.circuit.limb.stiffness);
    s.num("damping_N_s_m", c.circuit.limb.damping);
  });
  b.section("accumulators", [&](Binder& s) {
    s.section("A", [&](Binder& a) { bind_accumulator(a, c.accumulators.A); });
    s.section("B", [&](Binder& a) { bind_accumulator(a, c.accumulators.B); });
    s.section("C", [&](Binder& a) { bind_accumulator(a, c.accumulators.C); });
  });
  b.section("phase_bounds", [&](Binder& s) {
    s.num("cp_end", c.phase_bounds.cp_end, "cycle fraction");
    s.num("cd_end", c.phase_bounds.cd_end, "cycle fraction");
    s.num("pp_end", c.phase_bounds.pp_end, "cycle fraction");
  });
  b.section("phase_valves", [&](Binder& s) {
    for (auto phase : gait::kAllPhases) {
      const std::string name(gait::phase_name(phase));
      s.section(name.c_str(), [&](Binder& v) {
        v.bools4("open", c.phase_valves[phase].open, "valves 1..4");
        v.flag("pump", c.phase_valves[phase].pump);
      });
    }
  });
  b.section("linkage", [&](Binder& s) {
    s.num("moment_arm_m", c.linkage.moment_arm);
    s.num("neutral_angle_rad", c.linkage.neutral_angle);
  });
  b.num("y_offset_m", c.y_offset, "piston position at the linkage neutral angle");
  b.count("n_steps", c.n_steps, "RK4 steps per gait cycle (>= 1000)");
  b.num("cadence_s", c.cadence_s, "gait cycle duration");
  b.text("gait_csv", r.gait_csv,
         "gait profile CSV relative to the config file; empty selects the bundled profile");
  b.count("gait_samples", r.gait_samples, "samples of the bundled profile");
  b.count("plot_points", r.plot_points, "maximum points per SVG polyline");
}

RouteRequest::RouteRequest() : flow_m3_s(2.5 * std::numbers::pi * 1.6e-3 * 1.6e-3) {
  for (const auto& p : channel::preset_port_pairs()) pairs.push_back({p.name, p.a, p.b});
  kinds = {"bspline", "straight", "arc", "bezier3"};
}

void bind(Binder& b, RouteRequest& r) {
  b.list("pairs", r.pairs, [](Binder& s, PortPairSpec& p) {
    s.text("name", p.name);
    s.section("a", [&](Binder& x) { bind_port(x, p.a); });
    s.section("b", [&](Binder& x) { bind_port(x, p.b); });
  });
  b.section("options", [&](Binder& s) { bind_options(s, r.options); });
  b.section("fluid", [&](Binder& s) { bind_fluid(s, r.fluid); });
  b.num("flow_m3_s", r.flow_m3_s, "volumetric flow through each channel");
  b.strings("kinds", r.kinds, "route kinds to build: bspline, straight, arc, bezier3");
}

LatticeRequest::LatticeRequest() : demo(lattice::default_demo_config()) {
  demo.routes.clear();
  ChannelSpec perpendicular;
  perpendicular.preset = "perpendicular";
  ChannelSpec parallel;
  parallel.preset = "parallel";
  parallel.offset = Vec3(0.0, 0.0, 0.012);
  channels = {perpendicular, parallel};
}

lattice::DemoConfig LatticeRequest::resolved() const {
  lattice::DemoConfig c = demo;
  c.routes.clear();
  for (const auto& ch : channels) {
    channel::Port a = ch.a, b = ch.b;
    if (!ch.preset.empty()) {
      bool found = false;
      for (const auto& p : channel::preset_port_pairs(ch.a.diameter)) {
        if (p.name == ch.preset) {
          a = p.a;
          b = p.b;
          found = true;
        }
      }
      if (!found) {
        throw ValidationError("unknown channel preset '" + ch.preset +
                              "' (expected perpendicular or parallel)");
      }
    }
    a.position += ch.offset;
    b.position += ch.offset;
    c.routes.push_back(channel::make_route(channel::parse_route_kind(ch.kind), a, b, ch.options));
  }
  return c;
}

void bind(Binder& b, LatticeRequest& r) {
  auto& d = r.demo;
  b.section("bbox", [&](Binder& s) {
    s.vec3("lo_m", d.bbox.lo);
    s.vec3("hi_m", d.bbox.hi);
  });
  b.int3("dims", d.dims, "grid points used for the density solve");
  b.int3("mesh_dims", d.mesh_dims, "grid points used for meshing");
  b.list("period_samples", d.period_samples, [](Binder& s, lattice::PeriodSample& p) {
    if (s.reading() && !(s.has("point_m") && s.has("cells_per_m"))) {
      s.fail("point_m", "each period sample needs point_m and cells_per_m");
    }
    if (s.mode() == Binder::Mode::kSchema) p = {Vec3::Zero(), 200.0};
    s.vec3("point_m", p.point);
    s.num("cells_per_m", p.t);
  });
  b.num("support_radius_m", d.support_radius, "Wendland kernel support");
  b.num("t_min_per_m", d.t_min, "floor of the interpolated period field");
  b.num("target_density", d.target_density, "lattice volume fraction to hit");
  b.num("density_tol", d.density_tol);
  b.num("pipe_wall_m", d.pipe_wall, "solid wall kept around each channel bore");
  b.num("skin_m", d.skin, "solid shell kept at the block faces");
  b.flag("allow_below_floor", d.allow_below_floor, "permit lattice walls under 0.4 mm");
  b.list("channels", r.channels, [](Binder& s, ChannelSpec& c) {
    s.text("preset", c.preset, "perpendicular or parallel; empty uses the explicit ports a and b");
    if (s.mode() != Binder::Mode::kWrite || c.preset.empty()) {
      s.section("a", [&](Binder& x) { bind_port(x, c.a); });
      s.section("b", [&](Binder& x) { bind_port(x, c.b); });
    }
    if (s.reading() && c.preset.empty() && !(s.has("a") && s.has("b"))) {
      s.fail("preset", "a channel needs a preset or both ports a and b");
    }
    if (s.mode() != Binder::Mode::kWrite || !c.preset.empty()) {
      s.num("diameter_m", c.a.diameter, "bore diameter for preset channels");
    }
    s.vec3("offset_m", c.offset, "translation applied to both ports");
    s.text("kind", c.kind);
    s.section("options", [&](Binder& x) { bind_options(x, c.options); });
  });
}

TopoRequest TopoRequest::defaults_for(const std::string& preset) {
  TopoRequest r;
  r.preset = preset;
  if (preset == "bracket") {
    r.nely = 40;
    r.volfrac = 0.45;
  }
  return r;
}

void bind(Binder& b, TopoRequest& r) {
  b.text("preset", r.preset, "cantilever or bracket; the bracket defaults to 60x40 at 0.45");
  b.integer("nelx", r.nelx);
  b.integer("nely", r.nely);
  b.num("volfrac", r.volfrac);
  b.num("penalty", r.penalty);
  b.num("rmin", r.rmin, "filter radius in elements");
  b.integer("max_iters", r.max_iters);
  b.num("tol", r.tol, "stop when the largest density change falls below this");
  b.integer("png_scale", r.png_scale, "image pixels per element");
}

void bind(Binder& b, GaitRequest& r) {
  b.count("samples", r.samples, "samples of the bundled profile");
  b.num("cadence_s", r.cadence_s);
  b.section("linkage", [&](Binder& s) {
    s.num("moment_arm_m", r.linkage.moment_arm);
    s.num("neutral_angle_rad", r.linkage.neutral_angle);
  });
}

}  // namespace ehap::cli
