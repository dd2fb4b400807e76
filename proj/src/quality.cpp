#include "qarc/quality.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qarc/trace.hpp"

namespace qarc::quality {

namespace {

double curve_value(double a, double c, double bitrate_mbps) {
  const double norm = std::log1p(c * kBitratesMbps.back());
  const double v = a * std::log1p(c * bitrate_mbps) / norm;
  return std::clamp(v, 0.0, 1.0);
}

struct ProfileParams {
  double a_mean, a_amp, a_sigma;
  double c_mean, c_amp, c_sigma;
  double period;
};

ProfileParams params_for(Profile p) {
  switch (p) {
    case Profile::kStatic:
      return {0.965, 0.02, 0.008, 550.0, 120.0, 25.0, 11.0};
    case Profile::kDynamic:
      return {0.62, 0.10, 0.015, 4.0, 1.5, 0.25, 8.0};
    case Profile::kHybrid:
    default:
      return {0.80, 0.16, 0.012, 60.0, 55.0, 6.0, 9.0};
  }
}

}  // namespace

void QualityCurveSeries::validate() const {
  for (std::size_t t = 0; t < slots.size(); ++t) {
    const QualitySlot& s = slots[t];
    for (std::size_t i = 0; i < kNumBitrates; ++i) {
      if (s[i] < 0.0 || s[i] > 1.0) {
        throw std::invalid_argument("quality series " + id + ": score out of [0,1] at slot " +
                                    std::to_string(t));
      }
      if (i > 0 && s[i] < s[i - 1] - 1e-12) {
        throw std::invalid_argument("quality series " + id +
                                    ": not non-decreasing in bitrate at slot " +
                                    std::to_string(t));
      }
    }
    // concavity in bitrate: marginal gain per Mbps must not increase
    for (std::size_t i = 2; i < kNumBitrates; ++i) {
      const double g1 = (s[i - 1] - s[i - 2]) / (kBitratesMbps[i - 1] - kBitratesMbps[i - 2]);
      const double g2 = (s[i] - s[i - 1]) / (kBitratesMbps[i] - kBitratesMbps[i - 1]);
      if (g2 > g1 + 1e-9) {
        throw std::invalid_argument("quality series " + id + ": not concave at slot " +
                                    std::to_string(t));
      }
    }
  }
}

Profile profile_from_string(const std::string& s) {
  if (s == "static") return Profile::kStatic;
  if (s == "dynamic") return Profile::kDynamic;
  if (s == "hybrid") return Profile::kHybrid;
  throw std::invalid_argument("unknown quality profile: " + s);
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::kStatic: return "static";
    case Profile::kDynamic: return "dynamic";
    default: return "hybrid";
  }
}

QualityCurveSeries gen_quality_curves(Profile profile, std::size_t length,
                                      std::uint64_t seed, const std::string& id) {
  if (length < 1) throw std::invalid_argument("gen_quality_curves: length must be >= 1");
  const ProfileParams pp = params_for(profile);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> ga(0.0, pp.a_sigma);
  std::normal_distribution<double> gc(0.0, pp.c_sigma);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
  const double phase_a = phase_dist(rng);
  const double phase_c = phase_dist(rng);
  // mean-reverting residuals on top of a slow oscillation
  const double revert = 0.35;
  double res_a = 0.0, res_c = 0.0;

  QualityCurveSeries series;
  series.id = id;
  series.slots.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double w = 2.0 * M_PI * static_cast<double>(t) / pp.period;
    res_a = revert * res_a + ga(rng);
    res_c = revert * res_c + gc(rng);
    const double a = std::clamp(pp.a_mean + pp.a_amp * std::sin(w + phase_a) + res_a, 0.05, 1.0);
    const double c = std::max(pp.c_mean + pp.c_amp * std::sin(w + phase_c) + res_c, 0.5);
    QualitySlot slot;
    for (std::size_t i = 0; i < kNumBitrates; ++i) {
      slot[i] = curve_value(a, c, kBitratesMbps[i]);
    }
    series.slots.push_back(slot);
  }
  series.validate();
  return series;
}

double slot_dynamism(const QualitySlot& slot) { return 1.0 - slot.front(); }

FrameClip gen_frame_clip(const QualityCurveSeries& curves, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> dir_dist(-1.0, 1.0);
  FrameClip clip;
  clip.frames.reserve(curves.size() * FrameClip::kFramesPerSlot);
  for (const QualitySlot& slot : curves.slots) {
    const double dyn = slot_dynamism(slot);
    const double freq = 1.0 + 6.0 * dyn;        // spatial cycles across the frame
    const double motion = 1.5 * dyn;            // phase advance per frame
    const double phase0 = phase_dist(rng);
    const double dx = dir_dist(rng), dy = dir_dist(rng);
    for (std::size_t f = 0; f < FrameClip::kFramesPerSlot; ++f) {
      Tensor frame({FrameClip::kWidth, FrameClip::kHeight, 3});
      const double phase = phase0 + motion * static_cast<double>(f);
      for (std::size_t x = 0; x < FrameClip::kWidth; ++x) {
        for (std::size_t y = 0; y < FrameClip::kHeight; ++y) {
          const double u = static_cast<double>(x) / FrameClip::kWidth;
          const double v = static_cast<double>(y) / FrameClip::kHeight;
          const double base = 2.0 * M_PI * freq * (dx * u + dy * v) + phase;
          for (std::size_t ch = 0; ch < 3; ++ch) {
            frame.values[(x * FrameClip::kHeight + y) * 3 + ch] =
                0.5 + 0.5 * std::sin(base + 0.7 * static_cast<double>(ch));
          }
        }
      }
      clip.frames.push_back(std::move(frame));
    }
  }
  return clip;
}

void write_quality_csv(std::ostream& out, const QualityCurveSeries& series) {
  out << "slot,v300,v500,v800,v1100,v1400\n";
  out.precision(17);
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << t;
    for (double v : series.slots[t]) out << ',' << v;
    out << '\n';
  }
}

void write_quality_csv_file(const std::string& path, const QualityCurveSeries& series) {
  std::ofstream out(path);
  if (!out) throw trace::ParseError("cannot open " + path + " for writing");
  write_quality_csv(out, series);
}

QualityCurveSeries parse_quality_csv(std::istream& in, const std::string& id) {
  QualityCurveSeries series;
  series.id = id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    QualitySlot slot;
    if (!std::getline(ls, cell, ',')) {
      throw trace::ParseError("quality csv " + id + ": malformed line " + std::to_string(line_no));
    }
    for (std::size_t i = 0; i < kNumBitrates; ++i) {
      if (!std::getline(ls, cell, ',')) {
        throw trace::ParseError("quality csv " + id + ": missing column at line " +
                                std::to_string(line_no));
      }
      slot[i] = std::stod(cell);
    }
    series.slots.push_back(slot);
  }
  series.validate();
  return series;
}

QualityCurveSeries parse_quality_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw trace::ParseError("cannot open " + path);
  return parse_quality_csv(in, path);
}

void write_frame_clip(std::ostream& out, const FrameClip& clip) {
  out.write("QFRM", 4);
  const std::uint32_t version = 1;
  const auto count = static_cast<std::uint32_t>(clip.frames.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  std::vector<unsigned char> buf;
  for (const Tensor& frame : clip.frames) {
    buf.resize(frame.numel());
    for (std::size_t i = 0; i < frame.numel(); ++i) {
      buf[i] = static_cast<unsigned char>(
          std::lround(std::clamp(frame.values[i], 0.0, 1.0) * 255.0));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  }
}

void write_frame_clip_file(const std::string& path, const FrameClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw trace::ParseError("cannot open " + path + " for writing");
  write_frame_clip(out, clip);
}

FrameClip parse_frame_clip(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "QFRM") {
    throw trace::ParseError("frame clip: bad magic");
  }
  std::uint32_t version = 0, count = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || version != 1) throw trace::ParseError("frame clip: unsupported version");
  FrameClip clip;
  const std::size_t pixels = FrameClip::kWidth * FrameClip::kHeight * 3;
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t f = 0; f < count; ++f) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    if (!in) throw trace::ParseError("frame clip: truncated frame data");
    Tensor frame({FrameClip::kWidth, FrameClip::kHeight, 3});
    for (std::size_t i = 0; i < pixels; ++i) {
      frame.values[i] = static_cast<double>(buf[i]) / 255.0;
    }
    clip.frames.push_back(std::move(frame));
  }
  return clip;
}

FrameClip parse_frame_clip_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw trace::ParseError("cannot open " + path);
  return parse_frame_clip(in);
}

}  // namespace qarc::quality
