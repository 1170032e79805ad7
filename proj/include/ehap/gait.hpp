#pragma once

// Gait-cycle profiles: ingest, resample, segment into the four walking
// phases and map ankle-level loads onto the actuator cylinder.
//
// Conventions of the bundled data: angle is positive in plantarflexion,
// moment is the internal joint moment, positive plantarflexor. With these,
// ankle power P = M * dtheta/dt is negative while the body works on the
// ankle (controlled dorsiflexion) and positive during push-off.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ehap/error.hpp"

namespace ehap::gait {

struct GaitSample {
  double t_frac = 0.0;  // fraction of the cycle, [0, 1]
  double angle = 0.0;   // rad
  double moment = 0.0;  // N*m
};

inline constexpr std::size_t kMinSamples = 8;

class GaitProfile {
 public:
  // Throws ValidationError unless t_frac is strictly increasing from 0 to 1,
  // there are at least kMinSamples rows and cadence > 0.
  GaitProfile(std::vector<GaitSample> samples, double cadence_s);

  const std::vector<GaitSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  // Duration of one cycle in seconds.
  double cadence() const { return cadence_; }

  // Linear interpolation at t_frac in [0, 1].
  GaitSample at(double t_frac) const;

 private:
  std::vector<GaitSample> samples_;
  double cadence_;
};

enum class GaitPhase { CP, CD, PP, SW };

inline constexpr std::array<GaitPhase, 4> kAllPhases{GaitPhase::CP, GaitPhase::CD,
                                                     GaitPhase::PP, GaitPhase::SW};

std::string_view phase_name(GaitPhase phase);
GaitPhase parse_phase(std::string_view name);
// Cyclic successor: CP -> CD -> PP -> SW -> CP.
GaitPhase next_phase(GaitPhase phase);

struct PhaseBounds {
  double cp_end = 0.10;
  double cd_end = 0.50;
  double pp_end = 0.62;

  void validate() const;
};

GaitPhase phase_at(double t_frac, const PhaseBounds& bounds);

struct LinkageMap {
  double moment_arm = 0.06;  // m
  double neutral_angle = 0.0;  // rad

  void validate() const;
};

// ---- CSV -----------------------------------------------------------------

class GaitParseError : public ValidationError {
 public:
  enum class Kind { kIo, kHeader, kMalformedRow, kNonMonotone, kTooFewSamples };
  GaitParseError(Kind kind, const std::string& what) : ValidationError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::string_view kGaitCsvHeader = "t_frac,angle_rad,moment_Nm";

// Rows may appear in any order; they are sorted by t_frac before the
// monotonicity check, so duplicates are reported as non-monotone.
GaitProfile parse_gait_csv(std::istream& in, double cadence_s);
GaitProfile load_gait_csv(const std::filesystem::path& path, double cadence_s);

void write_gait_csv(std::ostream& out, const GaitProfile& profile,
                    std::string_view comment = {});
void write_gait_csv(const std::filesystem::path& path, const GaitProfile& profile,
                    std::string_view comment = {});

// ---- derived series --------------------------------------------------------

GaitProfile resample(const GaitProfile& profile, std::size_t n);

struct PowerSample {
  double t_frac;
  double power;  // W
};

// P = M * dtheta/dt, derivative by central differences (one-sided at the
// ends) with dt = cadence * dt_frac.
std::vector<PowerSample> ankle_power(const GaitProfile& profile);

// Trapezoidal integral of ankle power over the cycle (J).
double net_ankle_work(const GaitProfile& profile);

struct CylinderLoadSample {
  double t_frac;
  double force;     // N, moment / moment_arm
  double position;  // m, moment_arm * (angle - neutral_angle)
};

std::vector<CylinderLoadSample> cylinder_load_from_ankle(const GaitProfile& profile,
                                                         const LinkageMap& map);

// Synthetic stand-in for a measured level-walking profile of a 75 kg subject:
// peak dorsiflexion ~0.17 rad late in stance, peak plantarflexor moment
// 1.5 N*m/kg, push-off to ~0.30 rad plantarflexion.
GaitProfile default_profile(std::size_t n = 101, double cadence_s = 1.1);
inline constexpr std::string_view kDefaultProfileComment =
    "synthetic level-walking profile (75 kg, 1.5 N*m/kg peak); not measured data";

}  // namespace ehap::gait
