#include "ehap/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <ostream>
#include <regex>
#include <sstream>

#include "cli/binder.hpp"
#include "cli/configs.hpp"
#include "cli/svg.hpp"
#include "ehap/channel.hpp"
#include "ehap/gait.hpp"
#include "ehap/hydraulics.hpp"
#include "ehap/lattice.hpp"
#include "ehap/text.hpp"
#include "ehap/topo.hpp"

#ifndef EHAP_VERSION
#define EHAP_VERSION "dev"
#endif

namespace ehap::cli {

namespace fs = std::filesystem;

std::string_view tool_version() { return EHAP_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'", path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& path, std::string_view body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'", path.string());
  out << body;
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

json load_json(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw ConfigError("config file not found: '" + path.string() + "'", path.string());
  }
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), path.string());
  }
}

template <class Request>
void apply_json(const json& j, const std::string& file, Request& req) {
  try {
    Binder b = Binder::reader(j);
    bind(b, req);
    b.finish();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), file, e.key());
  } catch (const ValidationError& e) {
    // Raised by constructors inside a binding, e.g. accumulator charging.
    throw ConfigError(e.what(), file);
  }
}

template <class Request>
json resolved_json(Request req) {
  json j;
  Binder b = Binder::writer(j);
  bind(b, req);
  return j;
}

template <class Request>
json schema_json(const std::string& title) {
  json j;
  Request req;
  Binder b = Binder::schema(j);
  bind(b, req);
  json out = {{"$schema", "http://json-schema.org/draft-07/schema#"}, {"title", title}};
  out.update(j);
  return out;
}

std::string one_line(const json& j) { return j.dump() + "\n"; }

// Files written by one run plus the manifest describing them.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw ConfigError("cannot create output directory '" + dir_.string() + "'", dir_.string());
    }
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void add(const fs::path& p) {
    if (std::find(files_.begin(), files_.end(), p) == files_.end()) files_.push_back(p);
  }
  void write(const std::string& name, std::string_view body) {
    write_text(path(name), body);
    add(path(name));
  }
  void add_input(const fs::path& p) { inputs_.push_back(p); }

  void write_manifest(std::string_view subcommand, const json& config) const {
    json outputs = json::array();
    auto sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& f : sorted) {
      outputs.push_back({{"path", f.lexically_relative(dir_).generic_string()},
                         {"bytes", fs::file_size(f)},
                         {"sha256", file_sha256(f)}});
    }
    json inputs = json::array();
    for (const auto& f : inputs_) {
      inputs.push_back({{"path", f.generic_string()}, {"sha256", file_sha256(f)}});
    }
    const json manifest = {{"tool", "ehap"},
                           {"version", tool_version()},
                           {"subcommand", subcommand},
                           {"config_sha256", sha256_hex(config.dump())},
                           {"config", config},
                           {"inputs", inputs},
                           {"outputs", outputs}};
    write_text(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  std::vector<fs::path> inputs_;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  int verbosity = 0;

  void log(const std::string& msg) const {
    if (verbosity > 0) err << "[ehap] " << msg << '\n';
  }
};

// Shared --print-config / --print-schema handling. Returns true when the run
// should stop after printing.
template <class Request>
bool print_only(const Context& ctx, bool print_config, bool print_schema, const Request& req,
                const std::string& title) {
  if (print_schema) {
    ctx.out << schema_json<Request>(title).dump(2) << '\n';
    return true;
  }
  if (print_config) {
    ctx.out << resolved_json(req).dump(2) << '\n';
    return true;
  }
  return false;
}

// ---- simulate -------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir = "out/simulate";
  std::size_t n_steps = 0;
  std::string gait;
  bool print_config = false, print_schema = false;
  CLI::Option* n_steps_opt = nullptr;
};

double polytropic_deviation(const hydraulics::TimeSeries& ts, const hydraulics::InitialAccumulators& acc) {
  auto dev = [](const hydraulics::AccumulatorState& a, double P, double Vg) {
    const double c = a.precharge() * std::pow(a.capacity(), a.polytropic_n());
    return std::abs(P * std::pow(Vg, a.polytropic_n()) / c - 1.0);
  };
  double worst = 0.0;
  for (const auto& r : ts.rows) {
    worst = std::max({worst, dev(acc.A, r.PA, r.VgA), dev(acc.B, r.PB, r.VgB), dev(acc.C, r.PC, r.VgC)});
  }
  return worst;
}

int cmd_simulate(const Context& ctx, const SimulateArgs& a) {
  SimulateRequest req;
  fs::path base = fs::current_path();
  if (!a.config.empty()) {
    apply_json(load_json(a.config), a.config, req);
    base = fs::path(a.config).parent_path();
  }
  if (a.n_steps_opt && a.n_steps_opt->count()) req.hydraulics.n_steps = a.n_steps;
  fs::path gait_path;
  if (!a.gait.empty()) {
    req.gait_csv = a.gait;
    gait_path = a.gait;
  } else if (!req.gait_csv.empty()) {
    gait_path = base / req.gait_csv;
  }
  if (print_only(ctx, a.print_config, a.print_schema, req, "ehap simulate config")) return kExitOk;
  req.hydraulics.validate();
  if (req.plot_points < 2) throw ConfigError("plot_points must be at least 2", a.config, "plot_points");

  const auto& cfg = req.hydraulics;
  const gait::GaitProfile profile = gait_path.empty()
                                        ? gait::default_profile(req.gait_samples, cfg.cadence_s)
                                        : gait::load_gait_csv(gait_path, cfg.cadence_s);
  ctx.log("simulating " + std::to_string(cfg.n_steps) + " steps");
  const auto load = gait::cylinder_load_from_ankle(profile, cfg.linkage);
  const auto result = hydraulics::simulate_cycle(cfg, load, cfg.n_steps);
  const auto& rows = result.series.rows;

  OutputSet outs(a.out_dir);
  if (!gait_path.empty()) outs.add_input(gait_path);

  std::ostringstream csv;
  csv << "t_s,phase,y_a_m,v_m_s,P2_Pa,P3_Pa,PA_Pa,PB_Pa,PC_Pa,Q_pump_m3_s,pump_W,accA_W,accC_W\n";
  for (const auto& r : rows) {
    csv << text::format_double(r.t) << ',' << gait::phase_name(r.phase) << ','
        << text::format_double(r.y) << ',' << text::format_double(r.v) << ','
        << text::format_double(r.P2) << ',' << text::format_double(r.P3) << ','
        << text::format_double(r.PA) << ',' << text::format_double(r.PB) << ','
        << text::format_double(r.PC) << ',' << text::format_double(r.flows.Q_pump) << ','
        << text::format_double(r.flows.pump_W) << ',' << text::format_double(r.flows.accA_W) << ','
        << text::format_double(r.flows.accC_W) << '\n';
  }
  outs.write("timeseries.csv", csv.str());

  std::vector<double> y, y_cmd;
  double y_lo = rows.front().y, y_hi = rows.front().y;
  for (const auto& r : rows) {
    y.push_back(r.y);
    y_cmd.push_back(r.y_cmd);
    y_lo = std::min(y_lo, r.y);
    y_hi = std::max(y_hi, r.y);
  }
  const double corr = hydraulics::pearson_correlation(y, y_cmd);
  const auto& e = result.energy;
  const double closure_rel = e.closure_scale() > 0 ? std::abs(e.closure_residual()) / e.closure_scale() : 0.0;
  const json energy = {
      {"pump_input_J", e.pump_input},
      {"stored_A_J", e.stored_A},
      {"stored_C_J", e.stored_C},
      {"recovered_gravity_J", e.recovered_gravity},
      {"released_PP_J", e.released_PP},
      {"friction_loss_J", e.friction_loss},
      {"valve_loss_J", e.valve_loss},
      {"net_output_J", e.net_output},
      {"net_output_terms",
       {{"load_work_out_J", e.load_work_out},
        {"reservoir_B_J", e.reservoir_B},
        {"chamber_storage_J", e.chamber_storage},
        {"kinetic_change_J", e.kinetic_change}}},
      {"closure_residual_J", e.closure_residual()},
      {"closure_scale_J", e.closure_scale()},
      {"closure_relative", closure_rel},
      {"diagnostics",
       {{"n_steps", cfg.n_steps},
        {"polytropic_max_rel_dev", polytropic_deviation(result.series, cfg.accumulators)},
        {"y_min_m", y_lo},
        {"y_max_m", y_hi},
        {"pearson_y_vs_command", corr}}}};
  outs.write("energy.json", energy.dump(2) + "\n");

  LinePlot plot;
  plot.title = "Cylinder displacement over one gait cycle";
  plot.x_label = "time [s]";
  plot.y_label = "piston position [mm]";
  PlotSeries sim{"simulated y_a", "#1f5fbf", {}, {}, false};
  PlotSeries cmd{"commanded", "#d9480f", {}, {}, true};
  for (std::size_t i : decimate(rows.size(), req.plot_points)) {
    sim.x.push_back(rows[i].t);
    sim.y.push_back(1e3 * rows[i].y);
    cmd.x.push_back(rows[i].t);
    cmd.y.push_back(1e3 * rows[i].y_cmd);
  }
  plot.series = {cmd, sim};
  outs.write("displacement.svg", render_svg(plot));

  outs.write_manifest("simulate", resolved_json(req));
  ctx.out << one_line({{"closure_relative", closure_rel},
                       {"pearson_y_vs_command", corr},
                       {"y_min_m", y_lo},
                       {"y_max_m", y_hi},
                       {"out_dir", outs.dir().generic_string()}});
  return kExitOk;
}

// ---- route ----------------------------------------------------------------------------

struct RouteArgs {
  std::string ports;
  std::vector<std::string> kinds;
  double flow_lpm = 0.0;
  std::string out_dir = "out/route";
  bool print_config = false, print_schema = false;
  CLI::Option* flow_opt = nullptr;
};

int cmd_route(const Context& ctx, const RouteArgs& a) {
  RouteRequest req;
  if (!a.ports.empty()) apply_json(load_json(a.ports), a.ports, req);
  if (!a.kinds.empty()) req.kinds = a.kinds;
  if (a.flow_opt && a.flow_opt->count()) req.flow_m3_s = a.flow_lpm / 60000.0;
  if (print_only(ctx, a.print_config, a.print_schema, req, "ehap route ports")) return kExitOk;

  if (!(req.flow_m3_s > 0.0) || !std::isfinite(req.flow_m3_s)) {
    throw ConfigError("flow must be positive", a.ports, "flow_m3_s");
  }
  if (req.kinds.empty()) throw ConfigError("no route kinds requested", a.ports, "kinds");
  if (req.pairs.empty()) throw ConfigError("no port pairs given", a.ports, "pairs");
  static const std::regex safe("[A-Za-z0-9_-]+");
  for (const auto& p : req.pairs) {
    if (!std::regex_match(p.name, safe)) {
      throw ConfigError("port pair name '" + p.name + "' must match [A-Za-z0-9_-]+", a.ports, "pairs");
    }
  }
  req.fluid.validate();

  OutputSet outs(a.out_dir);
  json summary = json::object();
  for (const auto& kind_name : req.kinds) {
    const auto kind = channel::parse_route_kind(kind_name);
    json routes = json::array();
    for (const auto& pair : req.pairs) {
      ctx.log("routing " + pair.name + " as " + kind_name);
      const auto route = channel::make_route(kind, pair.a, pair.b, req.options);
      const auto files = channel::export_route(route, outs.path(pair.name + "_" + kind_name));
      outs.add(files.csv);
      outs.add(files.stl);
      const auto est = channel::pressure_loss_estimate(route, req.flow_m3_s, req.fluid);
      routes.push_back({{"pair", pair.name},
                        {"total_Pa", est.total},
                        {"friction_Pa", est.friction_loss},
                        {"bend_Pa", est.bend_loss},
                        {"arc_length_m", est.arc_length},
                        {"min_bend_radius_m", std::isfinite(est.min_bend_radius)
                                                  ? json(est.min_bend_radius)
                                                  : json(nullptr)},
                        {"reynolds", est.reynolds},
                        {"velocity_m_s", est.velocity},
                        {"friction_factor", est.friction_factor}});
      summary[kind_name][pair.name] = est.total;
    }
    const json report = {{"kind", kind_name}, {"flow_m3_s", req.flow_m3_s}, {"routes", routes}};
    outs.write("loss_" + kind_name + ".json", one_line(report));
  }
  outs.write_manifest("route", resolved_json(req));
  ctx.out << one_line({{"flow_m3_s", req.flow_m3_s}, {"total_Pa", summary}});
  return kExitOk;
}

// ---- lattice --------------------------------------------------------------------------

struct LatticeArgs {
  std::string config;
  std::string out;
  std::string report;
  std::string out_dir = "out/lattice";
  double target_density = 0.0;
  bool print_config = false, print_schema = false;
  CLI::Option* target_opt = nullptr;
};

int cmd_lattice(const Context& ctx, const LatticeArgs& a) {
  LatticeRequest req;
  if (!a.config.empty()) apply_json(load_json(a.config), a.config, req);
  if (a.target_opt && a.target_opt->count()) req.demo.target_density = a.target_density;
  if (print_only(ctx, a.print_config, a.print_schema, req, "ehap lattice config")) return kExitOk;

  const lattice::DemoConfig demo = req.resolved();
  demo.validate();
  OutputSet outs(a.out_dir);
  const fs::path stl = a.out.empty() ? outs.path("lattice.stl") : fs::path(a.out);
  const fs::path report_path = a.report.empty() ? outs.path("lattice_report.json") : fs::path(a.report);
  for (const auto& p : {stl, report_path}) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  }

  ctx.log("solving wall thickness and meshing");
  const auto result = lattice::run_demo(demo, true);
  lattice::export_stl(result.mesh, stl);
  outs.add(stl);

  const auto& m = result.mesh;
  const json report = {
      {"target_density", demo.target_density},
      {"achieved_fraction", result.thickness.fraction},
      {"wall_m", result.thickness.wall},
      {"bisection_iterations", result.thickness.iterations},
      {"part_fraction", result.part_fraction},
      {"dims", demo.dims},
      {"mesh_dims", demo.mesh_dims},
      {"mesh",
       {{"vertices", m.vertices.size()},
        {"triangles", m.triangles.size()},
        {"watertight", m.is_watertight()},
        {"consistently_oriented", m.is_consistently_oriented()},
        {"boundary_edges", m.boundary_edge_count()},
        {"degenerate_triangles", m.degenerate_triangle_count()},
        {"surface_area_m2", m.surface_area()},
        {"enclosed_volume_m3", m.enclosed_volume()}}}};
  write_text(report_path, report.dump(2) + "\n");
  outs.add(report_path);
  outs.write_manifest("lattice", resolved_json(req));
  ctx.out << one_line({{"achieved_fraction", result.thickness.fraction},
                       {"wall_m", result.thickness.wall},
                       {"triangles", m.triangles.size()},
                       {"stl", stl.generic_string()}});
  return kExitOk;
}

// ---- topo -----------------------------------------------------------------------------

struct TopoArgs {
  std::string config;
  std::string preset;
  int nelx = 0, nely = 0, max_iters = 0;
  double volfrac = 0, penalty = 0, rmin = 0;
  std::string out_dir = "out/topo";
  bool print_config = false, print_schema = false;
  CLI::Option *nelx_opt = nullptr, *nely_opt = nullptr, *volfrac_opt = nullptr,
              *penalty_opt = nullptr, *rmin_opt = nullptr, *iters_opt = nullptr;
};

int cmd_topo(const Context& ctx, const TopoArgs& a) {
  json j = json::object();
  if (!a.config.empty()) j = load_json(a.config);
  std::string preset = a.preset;
  if (preset.empty()) {
    preset = "cantilever";
    if (j.is_object() && j.contains("preset") && j["preset"].is_string()) preset = j["preset"];
  }
  TopoRequest req = TopoRequest::defaults_for(preset);
  if (!a.config.empty()) apply_json(j, a.config, req);
  req.preset = preset;
  if (a.nelx_opt->count()) req.nelx = a.nelx;
  if (a.nely_opt->count()) req.nely = a.nely;
  if (a.volfrac_opt->count()) req.volfrac = a.volfrac;
  if (a.penalty_opt->count()) req.penalty = a.penalty;
  if (a.rmin_opt->count()) req.rmin = a.rmin;
  if (a.iters_opt->count()) req.max_iters = a.max_iters;
  if (print_only(ctx, a.print_config, a.print_schema, req, "ehap topo config")) return kExitOk;
  if (req.png_scale < 1 || req.png_scale > 64) throw ConfigError("png_scale must lie in [1, 64]", a.config, "png_scale");

  const auto problem = topo::make_preset(req.preset, req.nelx, req.nely, req.volfrac, req.penalty, req.rmin);
  ctx.log("optimising " + std::to_string(req.nelx) + "x" + std::to_string(req.nely));
  const auto field = topo::run_topo(problem, req.max_iters, req.tol);

  OutputSet outs(a.out_dir);
  topo::write_density_csv(field, outs.path("density.csv"));
  outs.add(outs.path("density.csv"));
  topo::write_density_png(field, outs.path("density.png"), req.png_scale);
  outs.add(outs.path("density.png"));
  topo::write_history_csv(field, outs.path("history.csv"));
  outs.add(outs.path("history.csv"));
  outs.write_manifest("topo", resolved_json(req));
  ctx.out << one_line({{"preset", req.preset},
                       {"iterations", field.iterations},
                       {"converged", field.converged},
                       {"final_compliance", field.final_compliance},
                       {"mean_density", field.mean()}});
  return kExitOk;
}

// ---- gait -----------------------------------------------------------------------------

struct GaitArgs {
  std::string config;
  bool emit_default = false;
  std::string input;
  std::string out;
  std::string out_dir = "out/gait";
  bool print_config = false, print_schema = false;
};

int cmd_gait(const Context& ctx, const GaitArgs& a) {
  GaitRequest req;
  if (!a.config.empty()) apply_json(load_json(a.config), a.config, req);
  if (print_only(ctx, a.print_config, a.print_schema, req, "ehap gait config")) return kExitOk;
  if (a.emit_default == !a.input.empty()) {
    throw ValidationError("gait: pass exactly one of --emit-default or --input");
  }
  req.linkage.validate();
  OutputSet outs(a.out_dir);

  if (a.emit_default) {
    const fs::path path = a.out.empty() ? outs.path("default_gait.csv") : fs::path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    gait::write_gait_csv(path, gait::default_profile(req.samples, req.cadence_s),
                         gait::kDefaultProfileComment);
    outs.add(path);
    outs.write_manifest("gait", resolved_json(req));
    ctx.out << one_line({{"written", path.generic_string()}, {"samples", req.samples}});
    return kExitOk;
  }

  const auto profile = gait::load_gait_csv(a.input, req.cadence_s);
  outs.add_input(a.input);
  const auto load = gait::cylinder_load_from_ankle(profile, req.linkage);
  const gait::PhaseBounds bounds;
  std::ostringstream csv;
  csv << "t_frac,phase,force_N,position_m\n";
  for (const auto& s : load) {
    csv << text::format_double(s.t_frac) << ',' << gait::phase_name(gait::phase_at(s.t_frac, bounds))
        << ',' << text::format_double(s.force) << ',' << text::format_double(s.position) << '\n';
  }
  outs.write("cylinder_load.csv", csv.str());
  double peak = 0.0;
  for (const auto& p : gait::ankle_power(profile)) peak = std::max(peak, std::abs(p.power));
  const json summary = {{"samples", profile.size()},
                        {"cadence_s", profile.cadence()},
                        {"net_ankle_work_J", gait::net_ankle_work(profile)},
                        {"peak_abs_power_W", peak}};
  outs.write("gait_summary.json", summary.dump(2) + "\n");
  outs.write_manifest("gait", resolved_json(req));
  ctx.out << one_line(summary);
  return kExitOk;
}

// ---- error reporting ------------------------------------------------------------------

int report(std::ostream& err, int code, const std::string& kind, const std::string& message,
           const json& extra = json::object()) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  j.update(extra);
  err << j.dump() << '\n';
  return code;
}

}  // namespace

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file(path)); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Electro-hydraulic ankle prosthesis design toolkit", "ehap"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Progress messages on stderr (repeatable)");

  auto common = [](CLI::App* sub, bool& print_config, bool& print_schema) {
    sub->add_flag("--print-config", print_config, "Print the resolved config as JSON and exit");
    sub->add_flag("--print-schema", print_schema, "Print the config JSON schema and exit");
  };
  static const std::vector<std::string> kKinds{"bspline", "straight", "arc", "bezier3"};

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Hydraulic simulation of one gait cycle");
  s->add_option("--config", sim.config, "JSON config (defaults mirror the reference parameters)");
  s->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();
  sim.n_steps_opt = s->add_option("--n-steps", sim.n_steps, "RK4 steps per cycle (>= 1000)");
  s->add_option("--gait", sim.gait, "Gait profile CSV (t_frac,angle_rad,moment_Nm)");
  common(s, sim.print_config, sim.print_schema);

  RouteArgs rt;
  auto* r = app.add_subcommand("route", "Route channels and estimate pressure loss");
  r->add_option("--ports", rt.ports, "JSON port pairs (defaults to the two bundled layouts)");
  r->add_option("--kind", rt.kinds, "Route kind, repeatable")->check(CLI::IsMember(kKinds));
  rt.flow_opt = r->add_option("--flow-lpm", rt.flow_lpm, "Flow per channel in L/min");
  r->add_option("--out-dir", rt.out_dir, "Output directory")->capture_default_str();
  common(r, rt.print_config, rt.print_schema);

  LatticeArgs lt;
  auto* l = app.add_subcommand("lattice", "Lattice-filled manifold block");
  l->add_option("--config", lt.config, "JSON config");
  l->add_option("--out", lt.out, "STL path (default <out-dir>/lattice.stl)");
  l->add_option("--report", lt.report, "Report JSON path (default <out-dir>/lattice_report.json)");
  lt.target_opt = l->add_option("--target-density", lt.target_density, "Lattice volume fraction");
  l->add_option("--out-dir", lt.out_dir, "Directory for the manifest and default outputs")
      ->capture_default_str();
  common(l, lt.print_config, lt.print_schema);

  TopoArgs tp;
  auto* t = app.add_subcommand("topo", "2-D SIMP topology optimisation");
  t->add_option("--config", tp.config, "JSON config");
  t->add_option("--preset", tp.preset, "cantilever or bracket")
      ->check(CLI::IsMember({"cantilever", "bracket"}));
  tp.nelx_opt = t->add_option("--nelx", tp.nelx, "Elements along x");
  tp.nely_opt = t->add_option("--nely", tp.nely, "Elements along y");
  tp.volfrac_opt = t->add_option("--volfrac", tp.volfrac, "Target volume fraction");
  tp.penalty_opt = t->add_option("--penalty", tp.penalty, "SIMP exponent");
  tp.rmin_opt = t->add_option("--rmin", tp.rmin, "Filter radius in elements");
  tp.iters_opt = t->add_option("--max-iters", tp.max_iters, "Iteration cap");
  t->add_option("--out-dir", tp.out_dir, "Output directory")->capture_default_str();
  common(t, tp.print_config, tp.print_schema);

  GaitArgs gt;
  auto* g = app.add_subcommand("gait", "Gait profile utilities");
  g->add_option("--config", gt.config, "JSON config");
  g->add_flag("--emit-default", gt.emit_default, "Write the bundled synthetic profile");
  g->add_option("--input", gt.input, "Profile CSV to convert into a cylinder load series");
  g->add_option("--out", gt.out, "Path for --emit-default (default <out-dir>/default_gait.csv)");
  g->add_option("--out-dir", gt.out_dir, "Output directory")->capture_default_str();
  common(g, gt.print_config, gt.print_schema);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kExitConfig, "usage", e.what());
  }

  const Context ctx{out, err, verbosity};
  try {
    if (s->parsed()) return cmd_simulate(ctx, sim);
    if (r->parsed()) return cmd_route(ctx, rt);
    if (l->parsed()) return cmd_lattice(ctx, lt);
    if (t->parsed()) return cmd_topo(ctx, tp);
    if (g->parsed()) return cmd_gait(ctx, gt);
    return report(err, kExitConfig, "usage", "no subcommand");
  } catch (const ConfigError& e) {
    json extra = json::object();
    if (!e.file().empty()) extra["path"] = e.file();
    if (!e.key().empty()) extra["key"] = e.key();
    return report(err, kExitConfig, "config", e.what(), extra);
  } catch (const gait::GaitParseError& e) {
    return report(err, kExitConfig, "gait_csv", e.what());
  } catch (const lattice::DensityTargetError& e) {
    return report(err, kExitConfig, "density_target", e.what(),
                  {{"fraction_at_floor", e.fraction_at_floor()}});
  } catch (const ValidationError& e) {
    return report(err, kExitConfig, "validation", e.what());
  } catch (const fs::filesystem_error& e) {
    return report(err, kExitConfig, "filesystem", e.what(), {{"path", e.path1().generic_string()}});
  } catch (const hydraulics::IntegrationError& e) {
    return report(err, kExitRuntime, "integration", e.what(),
                  {{"step", e.step_index()}, {"phase", gait::phase_name(e.phase())}});
  } catch (const NumericError& e) {
    return report(err, kExitRuntime, "numeric", e.what());
  } catch (const std::exception& e) {
    return report(err, kExitRuntime, "runtime", e.what());
  }
}

}  // namespace ehap::cli
