#pragma once

// Lumped-parameter model of the electro-hydrostatic ankle actuator:
// a double-acting cylinder, three gas accumulators (A high pressure,
// B low-pressure reservoir, C gravity recovery), four on/off valves and a
// constant-speed pump, switched per gait phase.
//
// Global frame used by the simulator: y is the piston position in
// [0, stroke]; +y is extension (plantarflexion). The upper chamber (P2)
// is compressed by +y, the lower chamber (P3) grows with +y.
//
//   valve 1: A <-> lower     valve 3: lower <-> B
//   valve 2: C <-> lower     valve 4: upper <-> B      pump: B -> A

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "ehap/error.hpp"
#include "ehap/gait.hpp"

namespace ehap::hydraulics {

using gait::GaitPhase;

struct FluidProps {
  double bulk_modulus = 1.4e9;         // Pa
  double density = 850.0;              // kg/m^3
  double kinematic_viscosity = 46e-6;  // m^2/s

  void validate() const;
};

struct CylinderParams {
  double area = 160e-6;              // m^2
  double stroke = 0.040;             // m
  double dead_volume_upper = 4e-6;   // m^3, residual volume at full extension
  double dead_volume_lower = 4e-6;   // m^3, residual volume at full retraction
  double moving_mass = 1.0;          // kg, piston + reflected linkage
  double coulomb_friction = 20.0;    // N
  double viscous_friction = 100.0;   // N*s/m
  double friction_smoothing = 1e-3;  // m/s

  void validate() const;
  double upper_volume(double y) const { return dead_volume_upper + area * (stroke - y); }
  double lower_volume(double y) const { return dead_volume_lower + area * y; }
};

// Polytropic gas accumulator. The gas volume is the state; pressure is
// always derived from P * V^n = P_pre * V0^n so the invariant holds to
// rounding.
class AccumulatorState {
 public:
  AccumulatorState() = default;

  // Accumulator charged to `pressure` (>= precharge).
  static AccumulatorState charged(double capacity, double precharge, double polytropic_n,
                                  double pressure);
  static AccumulatorState with_gas_volume(double capacity, double precharge,
                                          double polytropic_n, double gas_volume);

  double capacity() const { return capacity_; }
  double precharge() const { return precharge_; }
  double polytropic_n() const { return n_; }
  double gas_volume() const { return gas_volume_; }
  double liquid_volume() const { return capacity_ - gas_volume_; }
  double pressure() const { return pressure_; }

  double pressure_for_gas_volume(double gas_volume) const;
  // |P V^n / (P_pre V0^n) - 1|
  double polytropic_residual() const;
  // Work done on the gas since it was at precharge (J).
  double stored_energy() const;

 private:
  double capacity_ = 1.3e-5;
  double precharge_ = 8e6;
  double n_ = 1.4;
  double gas_volume_ = 1.3e-5;
  double pressure_ = 8e6;
};

struct PumpParams {
  double displacement = 65.6e-9;  // m^3/rev
  double speed_rpm = 3850.0;
  double efficiency = 0.6;

  void validate() const;
};

struct ValveParams {
  double orifice_diameter = 0.76e-3;  // m
  double discharge_coeff = 0.7;
  bool normally_open = false;
  // Pressure scale of the laminar blend near dP = 0; 0 gives the bare
  // square-root orifice law.
  double transition_pressure = 1e5;  // Pa
  double switching_frequency = 200.0;  // Hz, stored only

  void validate() const;
  double orifice_area() const;
};

// Compliant coupling through which the limb imposes the commanded cylinder
// position. stiffness = 0 leaves the piston purely force driven.
struct LimbCoupling {
  double stiffness = 1e6;  // N/m
  double damping = 1.4e3;  // N*s/m

  void validate() const;
};

struct PhaseValves {
  std::array<bool, 4> open{};  // valves 1..4
  bool pump = false;
};

struct PhaseValveConfig {
  std::array<PhaseValves, 4> table{};  // indexed by GaitPhase

  const PhaseValves& operator[](GaitPhase p) const { return table[static_cast<int>(p)]; }
  PhaseValves& operator[](GaitPhase p) { return table[static_cast<int>(p)]; }

  static PhaseValveConfig defaults();
  static PhaseValveConfig all_closed();
};

struct HydraulicState {
  double y = 0.0;   // m
  double v = 0.0;   // m/s
  double P2 = 0.0;  // Pa, upper chamber
  double P3 = 0.0;  // Pa, lower chamber
  AccumulatorState acc_A;
  AccumulatorState acc_B;
  AccumulatorState acc_C;
  double t = 0.0;  // s
};

struct CircuitParams {
  FluidProps fluid;
  CylinderParams cylinder;
  PumpParams pump;
  std::array<ValveParams, 4> valves{};
  LimbCoupling limb;

  void validate() const;
};

// Load applied to the piston at one instant: external force plus the
// commanded position/velocity seen through the limb coupling.
struct LoadSample {
  double force = 0.0;     // N, +y direction
  double position = 0.0;  // m
  double velocity = 0.0;  // m/s
  bool coupled = false;   // apply the limb coupling toward position/velocity
};

using LoadFunction = std::function<LoadSample(double t)>;

// ---- component laws ------------------------------------------------------

enum class ChamberSide {
  kLower,  // volume V_ref - A*y, Q leaves the chamber
  kUpper,  // volume V_ref + A*y, Q enters the chamber
};

// Pressure rate of one chamber in the circuit-equation frame. Below zero
// pressure a negative rate is suppressed (the oil cavitates instead).
double chamber_pressure_rate(double P, double V_ref, double A, double y, double v, double Q,
                             const FluidProps& fluid, ChamberSide side);

// Phase-frame force balance as printed for each working state:
//   CP: F - (P3 - P2) A - Fs      CD: F - (P2 - P3) A - Fs
//   PP: F + (P2 - P3) A - Fs      SW: F + (P3 - P2) A - Fs
double cylinder_accel(double F_A, double P2, double P3, double v, const CylinderParams& cyl,
                      GaitPhase phase);

// +1 when the phase's equations share the simulator's frame (CD, SW), -1
// when they are written with the opposite direction positive (CP, PP).
int phase_frame_sign(GaitPhase phase);

double friction_force(double v, const CylinderParams& cyl);

double orifice_flow(double dP, const ValveParams& valve, const FluidProps& fluid,
                    bool open = true);

AccumulatorState accumulator_update(const AccumulatorState& acc, double Q_in, double dt);
double accumulator_power(const AccumulatorState& acc, double q_acc);

double pump_flow(const PumpParams& pump);
double pump_power(double P1, const PumpParams& pump);

// ---- integration -----------------------------------------------------------

// Instantaneous flows and power channels at one state. The channels obey
//   pump + load = accA + accB + accC + valve + friction + chamber + kinetic
// exactly (same clamped pressures everywhere).
struct Flows {
  double Q_pump = 0.0;                 // B -> A, m^3/s
  std::array<double, 4> Q_valve{};     // 1: A->lower, 2: C->lower, 3: lower->B, 4: upper->B
  double q_A = 0.0, q_B = 0.0, q_C = 0.0;  // liquid inflow to each accumulator
  double force_ext = 0.0;              // N
  double accel = 0.0;                  // m/s^2
  double pump_W = 0.0;
  double accA_W = 0.0, accB_W = 0.0, accC_W = 0.0;
  double load_W = 0.0;      // work rate of the load on the piston
  double friction_W = 0.0;
  double valve_W = 0.0;
  double chamber_W = 0.0;   // oil compression in both chambers
  double kinetic_W = 0.0;
};

Flows evaluate_flows(const CircuitParams& params, const HydraulicState& s, GaitPhase phase,
                     const PhaseValves& valves, const LoadSample& load);

// Energy removed by an end-stop impact during the last step (J).
struct StepResult {
  HydraulicState state;
  double impact_energy = 0.0;
};

// One classical RK4 step under a fixed valve topology. The piston is
// clamped to [0, stroke] afterwards, with the outward velocity zeroed.
StepResult step(const CircuitParams& params, const HydraulicState& state, GaitPhase phase,
                const PhaseValves& valves, const LoadFunction& load, double dt);
StepResult step(const CircuitParams& params, const HydraulicState& state, GaitPhase phase,
                const PhaseValves& valves, double F_A, double dt);

// ---- full cycle ------------------------------------------------------------

struct InitialAccumulators {
  AccumulatorState A = AccumulatorState::charged(1.3e-5, 8e6, 1.4, 12e6);
  AccumulatorState B = AccumulatorState::charged(1.0e-4, 2e6, 1.4, 2.5e6);
  AccumulatorState C = AccumulatorState::charged(1.3e-5, 7e6, 1.4, 7e6);
};

struct HydraulicConfig {
  CircuitParams circuit;
  InitialAccumulators accumulators;
  gait::PhaseBounds phase_bounds;
  PhaseValveConfig phase_valves = PhaseValveConfig::defaults();
  gait::LinkageMap linkage{0.06, 0.065};
  double y_offset = 0.020;  // piston position at linkage neutral
  std::size_t n_steps = 20000;
  double cadence_s = 1.1;

  void validate() const;
};

inline constexpr std::size_t kMinCycleSteps = 1000;

struct Record {
  double t = 0.0;
  GaitPhase phase = GaitPhase::CP;
  double y = 0.0, v = 0.0, P2 = 0.0, P3 = 0.0;
  double PA = 0.0, PB = 0.0, PC = 0.0;
  double VgA = 0.0, VgB = 0.0, VgC = 0.0;
  double y_cmd = 0.0;
  Flows flows;
  double impact_J = 0.0;  // end-stop loss in the step that ended here
};

struct TimeSeries {
  double moving_mass = 1.0;
  std::vector<Record> rows;
};

struct EnergyReport {
  double pump_input = 0.0;
  double stored_A = 0.0;
  double stored_C = 0.0;
  double recovered_gravity = 0.0;
  double released_PP = 0.0;
  double friction_loss = 0.0;
  double valve_loss = 0.0;
  double net_output = 0.0;
  // Components of net_output.
  double load_work_out = 0.0;
  double reservoir_B = 0.0;
  double chamber_storage = 0.0;
  double kinetic_change = 0.0;

  double closure_residual() const;
  double closure_scale() const { return pump_input + recovered_gravity; }
};

EnergyReport energy_audit(const TimeSeries& series);

class IntegrationError : public NumericError {
 public:
  IntegrationError(std::size_t step_index, GaitPhase phase, const std::string& what)
      : NumericError(what), step_index_(step_index), phase_(phase) {}
  std::size_t step_index() const { return step_index_; }
  GaitPhase phase() const { return phase_; }

 private:
  std::size_t step_index_;
  GaitPhase phase_;
};

struct SimulationResult {
  TimeSeries series;
  EnergyReport energy;
};

// Integrates one gait cycle. The load series comes from
// gait::cylinder_load_from_ankle: its force is what the cylinder must
// supply, so the piston sees -force; position is offset by y_offset.
SimulationResult simulate_cycle(const HydraulicConfig& config,
                                const std::vector<gait::CylinderLoadSample>& load,
                                std::size_t n_steps);

// Load function built from a cylinder-load series over a cycle of length T.
LoadFunction make_cycle_load(const std::vector<gait::CylinderLoadSample>& load, double cadence_s,
                             double y_offset);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ehap::hydraulics
