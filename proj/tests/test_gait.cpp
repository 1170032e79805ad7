#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ehap/gait.hpp"

using namespace ehap;
using namespace ehap::gait;

namespace {

std::vector<GaitSample> uniform_samples(std::size_t n, double (*angle)(double),
                                        double (*moment)(double)) {
  std::vector<GaitSample> s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n) ? 1.0 : double(i) / double(n - 1);
    s.push_back({t, angle(t), moment(t)});
  }
  return s;
}

GaitParseError::Kind parse_kind(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_gait_csv(in, 1.0);
  } catch (const GaitParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a parse error";
  return GaitParseError::Kind::kIo;
}

std::string csv_rows(std::size_t n) {
  std::ostringstream out;
  out << "t_frac,angle_rad,moment_Nm\n";
  for (std::size_t i = 0; i < n; ++i) out << double(i) / double(n - 1) << ",0.1,2\n";
  return out.str();
}

}  // namespace

TEST(GaitProfile, RejectsInvariantViolations) {
  auto ok = uniform_samples(8, [](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_NO_THROW(GaitProfile(ok, 1.0));
  EXPECT_THROW(GaitProfile(ok, 0.0), ValidationError);
  auto few = uniform_samples(7, [](double) { return 0.0; }, [](double) { return 0.0; });
  EXPECT_THROW(GaitProfile(few, 1.0), ValidationError);
  auto bad = ok;
  bad[3].t_frac = bad[2].t_frac;
  EXPECT_THROW(GaitProfile(bad, 1.0), ValidationError);
}

TEST(GaitCsv, DistinctErrorKinds) {
  using K = GaitParseError::Kind;
  EXPECT_EQ(parse_kind(csv_rows(3)), K::kTooFewSamples);
  EXPECT_EQ(parse_kind("time,angle,moment\n0,0,0\n"), K::kHeader);
  EXPECT_EQ(parse_kind(csv_rows(8) + "0.5,abc,1\n"), K::kMalformedRow);
  EXPECT_EQ(parse_kind(csv_rows(8) + "0.5,0,1,7\n"), K::kMalformedRow);
  EXPECT_EQ(parse_kind(csv_rows(8) + "1,0,0\n"), K::kNonMonotone);
}

TEST(GaitCsv, SortsRowsAndSkipsComments) {
  std::string text = "# synthetic\nt_frac,angle_rad,moment_Nm\n";
  for (int i = 9; i >= 0; --i) text += std::to_string(i / 9.0) + ",0," + std::to_string(i) + "\n";
  std::istringstream in(text);
  const auto p = parse_gait_csv(in, 1.2);
  ASSERT_EQ(p.size(), 10u);
  EXPECT_EQ(p.samples().front().moment, 0.0);
  EXPECT_EQ(p.samples().back().moment, 9.0);
  EXPECT_DOUBLE_EQ(p.cadence(), 1.2);
}

TEST(GaitCsv, RoundTripIsByteIdentical) {
  const auto p = default_profile(57, 1.1);
  std::ostringstream first;
  write_gait_csv(first, p, kDefaultProfileComment);
  std::istringstream in(first.str());
  const auto q = parse_gait_csv(in, 1.1);
  std::ostringstream second;
  write_gait_csv(second, q, kDefaultProfileComment);
  EXPECT_EQ(first.str(), second.str());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p.samples()[i].angle, q.samples()[i].angle);
    EXPECT_EQ(p.samples()[i].moment, q.samples()[i].moment);
  }
}

TEST(GaitCsv, MissingFileIsIoError) {
  try {
    load_gait_csv("/nonexistent/gait.csv", 1.0);
    FAIL();
  } catch (const GaitParseError& e) {
    EXPECT_EQ(e.kind(), GaitParseError::Kind::kIo);
  }
}

TEST(Phase, IntervalLookup) {
  const PhaseBounds b;
  EXPECT_EQ(phase_at(0.0, b), GaitPhase::CP);
  EXPECT_EQ(phase_at(0.0999, b), GaitPhase::CP);
  EXPECT_EQ(phase_at(0.10, b), GaitPhase::CD);
  EXPECT_EQ(phase_at(0.50, b), GaitPhase::PP);
  EXPECT_EQ(phase_at(0.55, b), GaitPhase::PP);
  EXPECT_EQ(phase_at(0.62, b), GaitPhase::SW);
  EXPECT_EQ(phase_at(1.0, b), GaitPhase::SW);
  EXPECT_THROW(phase_at(-0.01, b), ValidationError);
  EXPECT_THROW(phase_at(1.01, b), ValidationError);
}

TEST(Phase, ExactlyThreeInteriorBreakpoints) {
  const PhaseBounds b{0.2, 0.4, 0.7};
  int changes = 0;
  GaitPhase prev = phase_at(0.0, b);
  for (int i = 1; i <= 10000; ++i) {
    const GaitPhase p = phase_at(i / 10000.0, b);
    if (p != prev) {
      EXPECT_EQ(p, next_phase(prev));
      ++changes;
    }
    prev = p;
  }
  EXPECT_EQ(changes, 3);
}

TEST(Phase, BoundsValidationAndNames) {
  EXPECT_THROW((PhaseBounds{0.5, 0.4, 0.7}.validate()), ValidationError);
  EXPECT_THROW((PhaseBounds{0.0, 0.4, 0.7}.validate()), ValidationError);
  EXPECT_THROW((PhaseBounds{0.1, 0.4, 1.0}.validate()), ValidationError);
  for (GaitPhase p : kAllPhases) EXPECT_EQ(parse_phase(phase_name(p)), p);
  EXPECT_EQ(next_phase(GaitPhase::SW), GaitPhase::CP);
  EXPECT_THROW(parse_phase("XX"), ValidationError);
}

TEST(Resample, IdentityAndEndpoints) {
  const auto p = default_profile(101);
  const auto q = resample(p, 101);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(q.samples()[i].angle, p.samples()[i].angle, 1e-12);
    EXPECT_NEAR(q.samples()[i].moment, p.samples()[i].moment, 1e-12);
  }
  const auto r = resample(p, 13);
  EXPECT_EQ(r.samples().front().angle, p.samples().front().angle);
  EXPECT_EQ(r.samples().back().moment, p.samples().back().moment);
  EXPECT_THROW(resample(p, 7), ValidationError);
}

TEST(Resample, LinearRampIsFixedPoint) {
  // Non-uniform input grid carrying moment = 3 + 40 t.
  std::vector<GaitSample> s;
  for (double t : {0.0, 0.03, 0.11, 0.2, 0.45, 0.5, 0.8, 0.93, 1.0}) s.push_back({t, 0.0, 3.0 + 40.0 * t});
  const GaitProfile p(s, 1.0);
  for (std::size_t n : {8u, 9u, 50u, 333u}) {
    for (const auto& q : resample(p, n).samples()) {
      EXPECT_NEAR(q.moment, 3.0 + 40.0 * q.t_frac, 1e-12);
    }
  }
}

TEST(AnklePower, ConstantAngleGivesZero) {
  const GaitProfile p(uniform_samples(20, [](double) { return 0.3; }, [](double t) { return 50 * t; }),
                      1.0);
  for (const auto& s : ankle_power(p)) EXPECT_EQ(s.power, 0.0);
}

TEST(AnklePower, LinearRampHandDerivative) {
  // M = 40 N*m, angle ramps by 0.5 rad over T = 1.25 s: P = 40 * 0.5 / 1.25 = 16 W.
  const GaitProfile p(uniform_samples(11, [](double t) { return 0.5 * t; }, [](double) { return 40.0; }),
                      1.25);
  const auto pw = ankle_power(p);
  ASSERT_EQ(pw.size(), 11u);
  for (const auto& s : pw) EXPECT_NEAR(s.power, 16.0, 1e-12);
}

TEST(AnklePower, SignFlipsWithMoment) {
  const auto p = default_profile(61);
  std::vector<GaitSample> neg = p.samples();
  for (auto& s : neg) s.moment = -s.moment;
  const auto a = ankle_power(p);
  const auto b = ankle_power(GaitProfile(neg, p.cadence()));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].power, -b[i].power);
}

TEST(AnklePower, ClosedTrajectoryConstantMomentDoesNoWork) {
  const GaitProfile p(
      uniform_samples(201, [](double t) { return 0.2 * std::sin(2 * M_PI * t); },
                      [](double) { return 75.0; }),
      1.1);
  double scale = 0.0;
  for (const auto& s : ankle_power(p)) scale = std::max(scale, std::abs(s.power));
  EXPECT_LT(std::abs(net_ankle_work(p)), 1e-9 * scale);
}

TEST(DefaultProfile, MatchesDocumentedShape) {
  const auto p = default_profile();
  double min_angle = 1e9, max_moment = -1e9;
  for (const auto& s : p.samples()) {
    min_angle = std::min(min_angle, s.angle);
    max_moment = std::max(max_moment, s.moment);
  }
  EXPECT_NEAR(min_angle, -0.17, 1e-3);
  EXPECT_NEAR(max_moment, 1.5 * 75.0, 0.5);
  // Body works on the ankle in controlled dorsiflexion, ankle works in push-off.
  const auto pw = ankle_power(p);
  EXPECT_LT(pw[30].power, 0.0);
  EXPECT_GT(pw[55].power, 0.0);
}

TEST(CylinderLoad, DivisionOracleAndNeutralPose) {
  std::vector<GaitSample> s;
  for (int i = 0; i < 8; ++i) s.push_back({i / 7.0, 0.1, 120.0});
  s.back().t_frac = 1.0;
  const auto load = cylinder_load_from_ankle(GaitProfile(s, 1.0), {0.06, 0.1});
  for (const auto& l : load) {
    EXPECT_NEAR(l.force, 2000.0, 1e-9);
    EXPECT_EQ(l.position, 0.0);
  }
  EXPECT_THROW(cylinder_load_from_ankle(GaitProfile(s, 1.0), {0.0, 0.0}), ValidationError);
}

TEST(CylinderLoad, LinearInMomentAffineInAngle) {
  const auto p = default_profile(41);
  const LinkageMap map{0.05, 0.02};
  const auto base = cylinder_load_from_ankle(p, map);
  std::vector<GaitSample> scaled = p.samples();
  for (auto& s : scaled) {
    s.moment *= 2.5;
    s.angle += 0.1;
  }
  const auto l2 = cylinder_load_from_ankle(GaitProfile(scaled, p.cadence()), map);
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_NEAR(l2[i].force, 2.5 * base[i].force, 1e-9);
    EXPECT_NEAR(l2[i].position, base[i].position + 0.05 * 0.1, 1e-15);
  }
}

TEST(CylinderLoad, ZeroMomentZeroForce) {
  std::vector<GaitSample> s = default_profile(20).samples();
  for (auto& x : s) x.moment = 0.0;
  for (const auto& l : cylinder_load_from_ankle(GaitProfile(s, 1.0), {})) EXPECT_EQ(l.force, 0.0);
}
