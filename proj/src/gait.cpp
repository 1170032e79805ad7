#include "ehap/gait.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ehap/text.hpp"

namespace ehap::gait {

GaitProfile::GaitProfile(std::vector<GaitSample> samples, double cadence_s)
    : samples_(std::move(samples)), cadence_(cadence_s) {
  if (!(cadence_ > 0.0) || !std::isfinite(cadence_)) {
    throw ValidationError("gait profile: cadence must be positive");
  }
  if (samples_.size() < kMinSamples) {
    throw ValidationError("gait profile: too few samples (" + std::to_string(samples_.size()) +
                          " < " + std::to_string(kMinSamples) + ")");
  }
  if (samples_.front().t_frac != 0.0 || samples_.back().t_frac != 1.0) {
    throw ValidationError("gait profile: t_frac must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t_frac > samples_[i - 1].t_frac)) {
      throw ValidationError("gait profile: t_frac not strictly increasing at row " +
                            std::to_string(i));
    }
  }
  for (const auto& s : samples_) {
    if (!std::isfinite(s.angle) || !std::isfinite(s.moment)) {
      throw ValidationError("gait profile: non-finite angle or moment");
    }
  }
}

GaitSample GaitProfile::at(double t_frac) const {
  if (!(t_frac >= 0.0 && t_frac <= 1.0)) {
    throw ValidationError("gait profile: t_frac outside [0, 1]");
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t_frac,
                             [](double t, const GaitSample& s) { return t < s.t_frac; });
  if (it == samples_.end()) return samples_.back();
  const GaitSample& hi = *it;
  const GaitSample& lo = *(it - 1);
  const double s = (t_frac - lo.t_frac) / (hi.t_frac - lo.t_frac);
  return {t_frac, lo.angle + s * (hi.angle - lo.angle), lo.moment + s * (hi.moment - lo.moment)};
}

std::string_view phase_name(GaitPhase phase) {
  switch (phase) {
    case GaitPhase::CP: return "CP";
    case GaitPhase::CD: return "CD";
    case GaitPhase::PP: return "PP";
    case GaitPhase::SW: return "SW";
  }
  return "?";
}

GaitPhase parse_phase(std::string_view name) {
  for (GaitPhase p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  throw ValidationError("unknown gait phase '" + std::string(name) + "'");
}

GaitPhase next_phase(GaitPhase phase) {
  switch (phase) {
    case GaitPhase::CP: return GaitPhase::CD;
    case GaitPhase::CD: return GaitPhase::PP;
    case GaitPhase::PP: return GaitPhase::SW;
    case GaitPhase::SW: return GaitPhase::CP;
  }
  return GaitPhase::CP;
}

void PhaseBounds::validate() const {
  if (!(0.0 < cp_end && cp_end < cd_end && cd_end < pp_end && pp_end < 1.0)) {
    throw ValidationError("phase bounds must satisfy 0 < cp_end < cd_end < pp_end < 1");
  }
}

GaitPhase phase_at(double t_frac, const PhaseBounds& bounds) {
  if (!(t_frac >= 0.0 && t_frac <= 1.0)) {
    throw ValidationError("phase_at: t_frac outside [0, 1]");
  }
  if (t_frac < bounds.cp_end) return GaitPhase::CP;
  if (t_frac < bounds.cd_end) return GaitPhase::CD;
  if (t_frac < bounds.pp_end) return GaitPhase::PP;
  return GaitPhase::SW;
}

void LinkageMap::validate() const {
  if (!(moment_arm > 0.0)) throw ValidationError("linkage: moment_arm must be positive");
  if (!std::isfinite(neutral_angle)) throw ValidationError("linkage: neutral_angle not finite");
}

// ---- CSV -----------------------------------------------------------------

GaitProfile parse_gait_csv(std::istream& in, double cadence_s) {
  using Kind = GaitParseError::Kind;
  std::string line;
  bool header_seen = false;
  std::vector<GaitSample> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (text::trim(line) != kGaitCsvHeader) {
        throw GaitParseError(Kind::kHeader, "gait csv: expected header '" +
                                                std::string(kGaitCsvHeader) + "', got '" + line +
                                                "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = text::split(line, ',');
    GaitSample s;
    if (fields.size() != 3 || !text::parse_double(fields[0], s.t_frac) ||
        !text::parse_double(fields[1], s.angle) || !text::parse_double(fields[2], s.moment)) {
      throw GaitParseError(Kind::kMalformedRow,
                           "gait csv: malformed row at line " + std::to_string(line_no));
    }
    rows.push_back(s);
  }
  if (!header_seen) throw GaitParseError(Kind::kHeader, "gait csv: missing header");
  if (rows.size() < kMinSamples) {
    throw GaitParseError(Kind::kTooFewSamples, "gait csv: too few samples (" +
                                                   std::to_string(rows.size()) + " < " +
                                                   std::to_string(kMinSamples) + ")");
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const GaitSample& a, const GaitSample& b) { return a.t_frac < b.t_frac; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].t_frac > rows[i - 1].t_frac)) {
      throw GaitParseError(Kind::kNonMonotone, "gait csv: t_frac not strictly increasing (" +
                                                   text::format_double(rows[i].t_frac) +
                                                   " repeated)");
    }
  }
  if (rows.front().t_frac != 0.0 || rows.back().t_frac != 1.0) {
    throw GaitParseError(Kind::kNonMonotone, "gait csv: t_frac must span exactly [0, 1]");
  }
  return GaitProfile(std::move(rows), cadence_s);
}

GaitProfile load_gait_csv(const std::filesystem::path& path, double cadence_s) {
  std::ifstream in(path);
  if (!in) {
    throw GaitParseError(GaitParseError::Kind::kIo, "cannot open gait csv '" + path.string() + "'");
  }
  return parse_gait_csv(in, cadence_s);
}

void write_gait_csv(std::ostream& out, const GaitProfile& profile, std::string_view comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kGaitCsvHeader << '\n';
  for (const auto& s : profile.samples()) {
    out << text::format_double(s.t_frac) << ',' << text::format_double(s.angle) << ','
        << text::format_double(s.moment) << '\n';
  }
}

void write_gait_csv(const std::filesystem::path& path, const GaitProfile& profile,
                    std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write gait csv '" + path.string() + "'");
  write_gait_csv(out, profile, comment);
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

// ---- derived series --------------------------------------------------------

GaitProfile resample(const GaitProfile& profile, std::size_t n) {
  if (n < kMinSamples) {
    throw ValidationError("resample: n must be at least " + std::to_string(kMinSamples));
  }
  std::vector<GaitSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Endpoints exactly 0 and 1.
    const double t = (i + 1 == n) ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(profile.at(t));
  }
  return GaitProfile(std::move(out), profile.cadence());
}

std::vector<PowerSample> ankle_power(const GaitProfile& profile) {
  const auto& s = profile.samples();
  const double T = profile.cadence();
  const std::size_t n = s.size();
  std::vector<PowerSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == n) ? n - 1 : i + 1;
    const double rate = (s[hi].angle - s[lo].angle) / ((s[hi].t_frac - s[lo].t_frac) * T);
    out[i] = {s[i].t_frac, s[i].moment * rate};
  }
  return out;
}

double net_ankle_work(const GaitProfile& profile) {
  const auto p = ankle_power(profile);
  double work = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    work += 0.5 * (p[i].power + p[i - 1].power) * (p[i].t_frac - p[i - 1].t_frac);
  }
  return work * profile.cadence();
}

std::vector<CylinderLoadSample> cylinder_load_from_ankle(const GaitProfile& profile,
                                                         const LinkageMap& map) {
  map.validate();
  std::vector<CylinderLoadSample> out;
  out.reserve(profile.size());
  for (const auto& s : profile.samples()) {
    out.push_back({s.t_frac, s.moment / map.moment_arm,
                   map.moment_arm * (s.angle - map.neutral_angle)});
  }
  return out;
}

namespace {

struct Knot {
  double t;
  double value;
};

// C1 blend through keypoints with zero slope at each keypoint.
double cosine_blend(const std::vector<Knot>& keys, double t) {
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (t <= keys[i].t) {
      const double s = (t - keys[i - 1].t) / (keys[i].t - keys[i - 1].t);
      const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * s));
      return keys[i - 1].value + w * (keys[i].value - keys[i - 1].value);
    }
  }
  return keys.back().value;
}

}  // namespace

GaitProfile default_profile(std::size_t n, double cadence_s) {
  if (n < kMinSamples) throw ValidationError("default_profile: n too small");
  constexpr double kMass = 75.0;
  constexpr double kPeakMomentPerKg = 1.5;
  // Plantarflexion positive.
  const std::vector<Knot> angle{{0.00, 0.00}, {0.10, 0.09}, {0.48, -0.17},
                                {0.62, 0.30}, {0.85, -0.02}, {1.00, 0.00}};
  // Internal moment, plantarflexor positive: brief dorsiflexor moment after
  // heel strike, plantarflexor peak near 48 %, unloaded in swing.
  const std::vector<Knot> moment{{0.00, 0.0},  {0.05, -12.0},
                                 {0.12, 5.0},  {0.48, kPeakMomentPerKg * kMass},
                                 {0.62, 0.0},  {1.00, 0.0}};
  std::vector<GaitSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n) ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    samples.push_back({t, cosine_blend(angle, t), cosine_blend(moment, t)});
  }
  return GaitProfile(std::move(samples), cadence_s);
}

}  // namespace ehap::gait
