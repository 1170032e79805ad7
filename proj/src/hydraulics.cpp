#include "ehap/hydraulics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ehap::hydraulics {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

double smoothstep01(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

// Outflow of an accumulator is throttled to zero over the last 2 % of its
// capacity so the gas never expands past V0.
double poppet_factor(double liquid, double capacity) {
  return smoothstep01(liquid / (0.02 * capacity));
}

}  // namespace

// ---- parameter validation ---------------------------------------------------

void FluidProps::validate() const {
  require(positive(bulk_modulus), "fluid.bulk_modulus must be > 0");
  require(positive(density), "fluid.density must be > 0");
  require(positive(kinematic_viscosity), "fluid.kinematic_viscosity must be > 0");
}

void CylinderParams::validate() const {
  require(positive(area), "cylinder.area must be > 0");
  require(positive(stroke), "cylinder.stroke must be > 0");
  require(positive(dead_volume_upper), "cylinder.dead_volume_upper must be > 0");
  require(positive(dead_volume_lower), "cylinder.dead_volume_lower must be > 0");
  require(positive(moving_mass), "cylinder.moving_mass must be > 0");
  require(std::isfinite(coulomb_friction) && coulomb_friction >= 0.0,
          "cylinder.coulomb_friction must be >= 0");
  require(std::isfinite(viscous_friction) && viscous_friction >= 0.0,
          "cylinder.viscous_friction must be >= 0");
  require(positive(friction_smoothing), "cylinder.friction_smoothing must be > 0");
}

void PumpParams::validate() const {
  require(positive(displacement), "pump.displacement must be > 0");
  require(std::isfinite(speed_rpm) && speed_rpm >= 0.0, "pump.speed_rpm must be >= 0");
  require(std::isfinite(efficiency) && efficiency > 0.0 && efficiency <= 1.0,
          "pump.efficiency must be in (0, 1]");
}

void ValveParams::validate() const {
  require(positive(orifice_diameter), "valve.orifice_diameter must be > 0");
  require(std::isfinite(discharge_coeff) && discharge_coeff > 0.0 && discharge_coeff <= 1.0,
          "valve.discharge_coeff must be in (0, 1]");
  require(std::isfinite(transition_pressure) && transition_pressure >= 0.0,
          "valve.transition_pressure must be >= 0");
  require(std::isfinite(switching_frequency) && switching_frequency >= 0.0,
          "valve.switching_frequency must be >= 0");
}

double ValveParams::orifice_area() const {
  return 0.25 * std::numbers::pi * orifice_diameter * orifice_diameter;
}

void LimbCoupling::validate() const {
  require(std::isfinite(stiffness) && stiffness >= 0.0, "limb.stiffness must be >= 0");
  require(std::isfinite(damping) && damping >= 0.0, "limb.damping must be >= 0");
}

void CircuitParams::validate() const {
  fluid.validate();
  cylinder.validate();
  pump.validate();
  for (const auto& v : valves) v.validate();
  limb.validate();
}

PhaseValveConfig PhaseValveConfig::defaults() {
  PhaseValveConfig c;
  c[GaitPhase::CP] = {{false, false, true, true}, true};
  c[GaitPhase::CD] = {{false, true, false, true}, true};
  c[GaitPhase::PP] = {{true, true, false, true}, true};
  c[GaitPhase::SW] = {{false, false, true, true}, true};
  return c;
}

PhaseValveConfig PhaseValveConfig::all_closed() { return PhaseValveConfig{}; }

// ---- accumulator ------------------------------------------------------------

AccumulatorState AccumulatorState::charged(double capacity, double precharge,
                                           double polytropic_n, double pressure) {
  require(positive(precharge), "accumulator: precharge must be > 0");
  require(std::isfinite(pressure) && pressure >= precharge,
          "accumulator: pressure must be >= precharge");
  require(positive(polytropic_n), "accumulator: polytropic_n must be > 0");
  const double gas = capacity * std::pow(precharge / pressure, 1.0 / polytropic_n);
  return with_gas_volume(capacity, precharge, polytropic_n, gas);
}

AccumulatorState AccumulatorState::with_gas_volume(double capacity, double precharge,
                                                   double polytropic_n, double gas_volume) {
  require(positive(capacity), "accumulator: capacity must be > 0");
  require(positive(precharge), "accumulator: precharge must be > 0");
  require(positive(polytropic_n), "accumulator: polytropic_n must be > 0");
  require(positive(gas_volume) && gas_volume <= capacity,
          "accumulator: gas volume must be in (0, capacity]");
  AccumulatorState a;
  a.capacity_ = capacity;
  a.precharge_ = precharge;
  a.n_ = polytropic_n;
  a.gas_volume_ = gas_volume;
  a.pressure_ = a.pressure_for_gas_volume(gas_volume);
  return a;
}

double AccumulatorState::pressure_for_gas_volume(double gas_volume) const {
  if (!(gas_volume > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return precharge_ * std::pow(capacity_ / gas_volume, n_);
}

double AccumulatorState::polytropic_residual() const {
  return std::abs(pressure_ * std::pow(gas_volume_, n_) /
                      (precharge_ * std::pow(capacity_, n_)) -
                  1.0);
}

double AccumulatorState::stored_energy() const {
  // Integral of P dV_liquid from V0 down to the current gas volume.
  if (n_ == 1.0) return precharge_ * capacity_ * std::log(capacity_ / gas_volume_);
  return (pressure_ * gas_volume_ - precharge_ * capacity_) / (n_ - 1.0);
}

AccumulatorState accumulator_update(const AccumulatorState& acc, double Q_in, double dt) {
  const double gas = acc.gas_volume() - Q_in * dt;
  if (gas > acc.capacity()) {
    throw NumericError("accumulator over-discharge: gas volume would exceed capacity");
  }
  if (!(gas > 0.0)) {
    throw NumericError("accumulator over-charge: gas volume would reach zero");
  }
  return AccumulatorState::with_gas_volume(acc.capacity(), acc.precharge(), acc.polytropic_n(),
                                           gas);
}

double accumulator_power(const AccumulatorState& acc, double q_acc) {
  return acc.pressure() * q_acc;
}

// ---- component laws ---------------------------------------------------------

double chamber_pressure_rate(double P, double V_ref, double A, double y, double v, double Q,
                             const FluidProps& fluid, ChamberSide side) {
  const bool lower = side == ChamberSide::kLower;
  const double V = lower ? V_ref - A * y : V_ref + A * y;
  if (!(V > 0.0)) {
    throw NumericError("chamber volume non-positive: piston outside its envelope");
  }
  const double rate =
      lower ? fluid.bulk_modulus / V * (A * v - Q) : fluid.bulk_modulus / V * (Q - A * v);
  if (P <= 0.0 && rate < 0.0) return 0.0;
  return rate;
}

int phase_frame_sign(GaitPhase phase) {
  return (phase == GaitPhase::CD || phase == GaitPhase::SW) ? 1 : -1;
}

double cylinder_accel(double F_A, double P2, double P3, double v, const CylinderParams& cyl,
                      GaitPhase phase) {
  const double Fs = friction_force(v, cyl);
  double pressure_force = 0.0;
  switch (phase) {
    case GaitPhase::CP: pressure_force = -(P3 - P2) * cyl.area; break;
    case GaitPhase::CD: pressure_force = -(P2 - P3) * cyl.area; break;
    case GaitPhase::PP: pressure_force = (P2 - P3) * cyl.area; break;
    case GaitPhase::SW: pressure_force = (P3 - P2) * cyl.area; break;
  }
  return (F_A + pressure_force - Fs) / cyl.moving_mass;
}

double friction_force(double v, const CylinderParams& cyl) {
  return cyl.coulomb_friction * std::tanh(v / cyl.friction_smoothing) + cyl.viscous_friction * v;
}

double orifice_flow(double dP, const ValveParams& valve, const FluidProps& fluid, bool open) {
  if (!open || dP == 0.0) return 0.0;
  const double K = valve.discharge_coeff * valve.orifice_area() * std::sqrt(2.0 / fluid.density);
  const double pt = valve.transition_pressure;
  if (pt == 0.0) return std::copysign(K * std::sqrt(std::abs(dP)), dP);
  // Equals the square-root law for |dP| >> pt, linear in dP near zero.
  return K * dP / std::sqrt(std::sqrt(dP * dP + pt * pt));
}

double pump_flow(const PumpParams& pump) { return pump.displacement * pump.speed_rpm / 60.0; }

double pump_power(double P1, const PumpParams& pump) {
  return P1 * pump.displacement * pump.speed_rpm * pump.efficiency / 60.0;
}

// ---- right-hand side ----------------------------------------------------------

namespace {

// Integrated state: y, v, P2, P3, gas volumes of A, B, C.
using Vec = std::array<double, 7>;

Vec pack(const HydraulicState& s) {
  return {s.y, s.v, s.P2, s.P3, s.acc_A.gas_volume(), s.acc_B.gas_volume(),
          s.acc_C.gas_volume()};
}

struct Rhs {
  Flows flows;
  Vec dx{};
};

Rhs evaluate(const CircuitParams& prm, const HydraulicState& ref, const Vec& x, GaitPhase phase,
             const PhaseValves& valves, const LoadSample& load) {
  const auto& cyl = prm.cylinder;
  const auto& fluid = prm.fluid;
  const double y = x[0], v = x[1];
  const double P2 = std::max(x[2], 0.0);
  const double P3 = std::max(x[3], 0.0);
  const double PA = ref.acc_A.pressure_for_gas_volume(x[4]);
  const double PB = ref.acc_B.pressure_for_gas_volume(x[5]);
  const double PC = ref.acc_C.pressure_for_gas_volume(x[6]);
  const double open_A = poppet_factor(ref.acc_A.capacity() - x[4], ref.acc_A.capacity());
  const double open_B = poppet_factor(ref.acc_B.capacity() - x[5], ref.acc_B.capacity());
  const double open_C = poppet_factor(ref.acc_C.capacity() - x[6], ref.acc_C.capacity());

  Rhs r;
  Flows& f = r.flows;
  auto& Q = f.Q_valve;
  Q[0] = orifice_flow(PA - P3, prm.valves[0], fluid, valves.open[0]);
  if (Q[0] > 0.0) Q[0] *= open_A;
  Q[1] = orifice_flow(PC - P3, prm.valves[1], fluid, valves.open[1]);
  if (Q[1] > 0.0) Q[1] *= open_C;
  Q[2] = orifice_flow(P3 - PB, prm.valves[2], fluid, valves.open[2]);
  if (Q[2] < 0.0) Q[2] *= open_B;
  Q[3] = orifice_flow(P2 - PB, prm.valves[3], fluid, valves.open[3]);
  if (Q[3] < 0.0) Q[3] *= open_B;
  // The volumetric efficiency scales the delivered flow.
  f.Q_pump = valves.pump ? pump_flow(prm.pump) * prm.pump.efficiency * open_B : 0.0;

  f.q_A = f.Q_pump - Q[0];
  f.q_B = Q[2] + Q[3] - f.Q_pump;
  f.q_C = -Q[1];

  double F = load.force;
  if (load.coupled) {
    F += prm.limb.stiffness * (load.position - y) + prm.limb.damping * (load.velocity - v);
  }
  f.force_ext = F;
  const int sigma = phase_frame_sign(phase);
  f.accel = sigma * cylinder_accel(sigma * F, P2, P3, sigma * v, cyl, phase);

  const double A = cyl.area;
  const double Q3_in = Q[0] + Q[1] - Q[2];
  r.dx[0] = v;
  r.dx[1] = f.accel;
  // Upper chamber shrinks with +y, lower chamber grows.
  r.dx[2] = chamber_pressure_rate(x[2], cyl.dead_volume_upper + A * cyl.stroke, A, y, v, Q[3],
                                  fluid, ChamberSide::kLower);
  r.dx[3] = chamber_pressure_rate(x[3], cyl.dead_volume_lower, A, y, v, Q3_in, fluid,
                                  ChamberSide::kUpper);
  r.dx[4] = -f.q_A;
  r.dx[5] = -f.q_B;
  r.dx[6] = -f.q_C;

  f.pump_W = (PA - PB) * f.Q_pump;
  f.accA_W = PA * f.q_A;
  f.accB_W = PB * f.q_B;
  f.accC_W = PC * f.q_C;
  f.valve_W = (PA - P3) * Q[0] + (PC - P3) * Q[1] + (P3 - PB) * Q[2] + (P2 - PB) * Q[3];
  f.chamber_W = P2 * (A * v - Q[3]) + P3 * (Q3_in - A * v);
  f.friction_W = friction_force(v, cyl) * v;
  f.load_W = F * v;
  f.kinetic_W = cyl.moving_mass * f.accel * v;
  return r;
}

Vec axpy(const Vec& x, double h, const Vec& k) {
  Vec out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h * k[i];
  return out;
}

bool all_finite(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace

Flows evaluate_flows(const CircuitParams& params, const HydraulicState& s, GaitPhase phase,
                     const PhaseValves& valves, const LoadSample& load) {
  return evaluate(params, s, pack(s), phase, valves, load).flows;
}

StepResult step(const CircuitParams& params, const HydraulicState& state, GaitPhase phase,
                const PhaseValves& valves, const LoadFunction& load, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step: dt must be > 0");
  const double t = state.t;
  const Vec x0 = pack(state);
  const auto k1 = evaluate(params, state, x0, phase, valves, load(t)).dx;
  const auto k2 = evaluate(params, state, axpy(x0, 0.5 * dt, k1), phase, valves, load(t + 0.5 * dt)).dx;
  const auto k3 = evaluate(params, state, axpy(x0, 0.5 * dt, k2), phase, valves, load(t + 0.5 * dt)).dx;
  const auto k4 = evaluate(params, state, axpy(x0, dt, k3), phase, valves, load(t + dt)).dx;
  Vec x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  if (!all_finite(x)) throw NumericError("non-finite state");

  StepResult out;
  const auto& cyl = params.cylinder;
  double y = x[0], v = x[1];
  if (y < 0.0) {
    y = 0.0;
    if (v < 0.0) {
      out.impact_energy = 0.5 * cyl.moving_mass * v * v;
      v = 0.0;
    }
  } else if (y > cyl.stroke) {
    y = cyl.stroke;
    if (v > 0.0) {
      out.impact_energy = 0.5 * cyl.moving_mass * v * v;
      v = 0.0;
    }
  }
  auto rebuild = [](const AccumulatorState& a, double gas) {
    if (!(gas > 0.0)) throw NumericError("accumulator gas volume collapsed");
    // The poppet stops discharge at V0; stage overshoot is rounding level.
    return AccumulatorState::with_gas_volume(a.capacity(), a.precharge(), a.polytropic_n(),
                                             std::min(gas, a.capacity()));
  };
  HydraulicState& s = out.state;
  s.y = y;
  s.v = v;
  s.P2 = std::max(x[2], 0.0);
  s.P3 = std::max(x[3], 0.0);
  s.acc_A = rebuild(state.acc_A, x[4]);
  s.acc_B = rebuild(state.acc_B, x[5]);
  s.acc_C = rebuild(state.acc_C, x[6]);
  s.t = t + dt;
  return out;
}

StepResult step(const CircuitParams& params, const HydraulicState& state, GaitPhase phase,
                const PhaseValves& valves, double F_A, double dt) {
  return step(params, state, phase, valves, [F_A](double) { return LoadSample{F_A}; }, dt);
}

// ---- cycle ------------------------------------------------------------------------

void HydraulicConfig::validate() const {
  circuit.validate();
  phase_bounds.validate();
  linkage.validate();
  require(positive(cadence_s), "cadence_s must be > 0");
  require(n_steps >= kMinCycleSteps,
          "n_steps must be at least " + std::to_string(kMinCycleSteps));
  require(std::isfinite(y_offset) && y_offset >= 0.0 && y_offset <= circuit.cylinder.stroke,
          "y_offset must lie within the stroke");
}

LoadFunction make_cycle_load(const std::vector<gait::CylinderLoadSample>& load, double cadence_s,
                             double y_offset) {
  if (load.size() < 2) throw ValidationError("load series needs at least two samples");
  if (load.front().t_frac != 0.0 || load.back().t_frac != 1.0) {
    throw ValidationError("load series must cover t_frac in [0, 1]");
  }
  // Position uses a cubic Hermite spline with finite-difference slopes so the
  // commanded velocity is continuous.
  const std::size_t n = load.size();
  std::vector<double> slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    slope[i] = (load[hi].position - load[lo].position) / (load[hi].t_frac - load[lo].t_frac);
  }
  return [load, slope, cadence_s, y_offset](double t) {
    const double u = std::clamp(t / cadence_s, 0.0, 1.0);
    auto it = std::upper_bound(load.begin(), load.end(), u,
                               [](double a, const gait::CylinderLoadSample& s) {
                                 return a < s.t_frac;
                               });
    std::size_t i = static_cast<std::size_t>(it - load.begin());
    i = std::clamp<std::size_t>(i, 1, load.size() - 1);
    const auto& a = load[i - 1];
    const auto& b = load[i];
    const double h = b.t_frac - a.t_frac;
    const double s = (u - a.t_frac) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double pos = h00 * a.position + h10 * h * slope[i - 1] + h01 * b.position +
                       h11 * h * slope[i];
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    const double dpos_du = (d00 * a.position + d01 * b.position) / h + d10 * slope[i - 1] +
                           d11 * slope[i];
    LoadSample out;
    out.force = -(a.force + s * (b.force - a.force));
    out.position = y_offset + pos;
    out.velocity = dpos_du / cadence_s;
    out.coupled = true;
    return out;
  };
}

namespace {

Record make_record(const CircuitParams& prm, const HydraulicState& s, GaitPhase phase,
                   const PhaseValves& valves, const LoadSample& load, double impact) {
  Record r;
  r.t = s.t;
  r.phase = phase;
  r.y = s.y;
  r.v = s.v;
  r.P2 = s.P2;
  r.P3 = s.P3;
  r.PA = s.acc_A.pressure();
  r.PB = s.acc_B.pressure();
  r.PC = s.acc_C.pressure();
  r.VgA = s.acc_A.gas_volume();
  r.VgB = s.acc_B.gas_volume();
  r.VgC = s.acc_C.gas_volume();
  r.y_cmd = load.position;
  r.flows = evaluate_flows(prm, s, phase, valves, load);
  r.impact_J = impact;
  return r;
}

}  // namespace

SimulationResult simulate_cycle(const HydraulicConfig& config,
                                const std::vector<gait::CylinderLoadSample>& load,
                                std::size_t n_steps) {
  HydraulicConfig cfg = config;
  cfg.n_steps = n_steps;
  cfg.validate();
  const CircuitParams& prm = cfg.circuit;
  const double T = cfg.cadence_s;
  const double dt = T / static_cast<double>(n_steps);
  const LoadFunction load_fn = make_cycle_load(load, T, cfg.y_offset);

  HydraulicState s;
  const LoadSample l0 = load_fn(0.0);
  s.y = std::clamp(l0.position, 0.0, prm.cylinder.stroke);
  s.v = l0.velocity;
  s.acc_A = cfg.accumulators.A;
  s.acc_B = cfg.accumulators.B;
  s.acc_C = cfg.accumulators.C;
  s.P2 = s.acc_B.pressure();
  s.P3 = s.acc_B.pressure();
  s.t = 0.0;

  SimulationResult result;
  result.series.moving_mass = prm.cylinder.moving_mass;
  auto& rows = result.series.rows;
  rows.reserve(n_steps + 1);

  auto phase_of = [&](std::size_t k) {
    const double u = k == n_steps ? 1.0 : static_cast<double>(k) / static_cast<double>(n_steps);
    return gait::phase_at(u, cfg.phase_bounds);
  };

  GaitPhase phase = phase_of(0);
  rows.push_back(make_record(prm, s, phase, cfg.phase_valves[phase], l0, 0.0));
  for (std::size_t k = 0; k < n_steps; ++k) {
    phase = phase_of(k);
    StepResult r;
    try {
      r = step(prm, s, phase, cfg.phase_valves[phase], load_fn, dt);
    } catch (const NumericError& e) {
      throw IntegrationError(k, phase,
                             "integration failed at step " + std::to_string(k) + " in phase " +
                                 std::string(gait::phase_name(phase)) + ": " + e.what());
    }
    s = r.state;
    // Keep the time grid exact rather than accumulated.
    s.t = (k + 1 == n_steps) ? T : dt * static_cast<double>(k + 1);
    const GaitPhase next = phase_of(k + 1);
    rows.push_back(make_record(prm, s, next, cfg.phase_valves[next], load_fn(s.t),
                               r.impact_energy));
  }
  result.energy = energy_audit(result.series);
  return result;
}

// ---- energy audit -----------------------------------------------------------------

double EnergyReport::closure_residual() const {
  return pump_input + recovered_gravity -
         (stored_A + stored_C + net_output + friction_loss + valve_loss);
}

EnergyReport energy_audit(const TimeSeries& series) {
  EnergyReport e;
  const auto& rows = series.rows;
  if (rows.empty()) throw ValidationError("energy_audit: empty series");
  double load_W_int = 0.0;
  double impacts = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Flows& a = rows[i - 1].flows;
    const Flows& b = rows[i].flows;
    const double h = 0.5 * (rows[i].t - rows[i - 1].t);
    auto trap = [h](double fa, double fb) { return h * (fa + fb); };
    e.pump_input += trap(a.pump_W, b.pump_W);
    e.stored_A += trap(a.accA_W, b.accA_W);
    e.stored_C += trap(a.accC_W, b.accC_W);
    e.reservoir_B += trap(a.accB_W, b.accB_W);
    e.recovered_gravity += trap(std::max(a.load_W, 0.0), std::max(b.load_W, 0.0));
    e.load_work_out += trap(std::max(-a.load_W, 0.0), std::max(-b.load_W, 0.0));
    load_W_int += trap(a.load_W, b.load_W);
    e.friction_loss += trap(a.friction_W, b.friction_W);
    e.valve_loss += trap(a.valve_W, b.valve_W);
    e.chamber_storage += trap(a.chamber_W, b.chamber_W);
    if (rows[i - 1].phase == GaitPhase::PP) {
      e.released_PP -= trap(a.accA_W + a.accC_W, b.accA_W + b.accC_W);
    }
    impacts += rows[i].impact_J;
  }
  const double m = series.moving_mass;
  e.kinetic_change = 0.5 * m * (rows.back().v * rows.back().v - rows.front().v * rows.front().v);
  e.friction_loss += impacts;
  e.net_output = e.load_work_out + e.reservoir_B + e.chamber_storage + e.kinetic_change;
  return e;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValidationError("pearson_correlation: need two equal-length series");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericError("pearson_correlation: zero variance");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace ehap::hydraulics
