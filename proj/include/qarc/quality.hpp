#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "qarc/tensor.hpp"

namespace qarc::quality {

// Candidate sending bitrates, fixed across the whole artifact.
inline constexpr std::array<double, 5> kBitratesKbps{300.0, 500.0, 800.0, 1100.0, 1400.0};
inline constexpr std::array<double, 5> kBitratesMbps{0.3, 0.5, 0.8, 1.1, 1.4};
inline constexpr std::size_t kNumBitrates = 5;

using QualitySlot = std::array<double, kNumBitrates>;

// Per-slot quality scores in [0,1], one per candidate bitrate. Within a slot
// scores are non-decreasing in bitrate with non-increasing marginal gains.
struct QualityCurveSeries {
  std::string id;
  std::vector<QualitySlot> slots;

  std::size_t size() const { return slots.size(); }
  void validate() const;
};

enum class Profile { kStatic, kDynamic, kHybrid };

Profile profile_from_string(const std::string& s);
std::string to_string(Profile p);

// Seeded synthetic quality curves: V(b) = clamp(a*ln(1+c*b)/ln(1+c*b_max), 0, 1)
// where (a, c) follow a mean-reverting oscillating walk. Static profiles
// saturate early (large c), dynamic ones keep gaining quality with bitrate.
QualityCurveSeries gen_quality_curves(Profile profile, std::size_t length,
                                      std::uint64_t seed, const std::string& id = "");

// 1 - V(lowest bitrate): how much the slot's content gains from bitrate.
double slot_dynamism(const QualitySlot& slot);

struct FrameClip {
  static constexpr std::size_t kFramesPerSlot = 5;
  static constexpr std::size_t kWidth = 64;
  static constexpr std::size_t kHeight = 36;
  std::vector<Tensor> frames;  // each {kWidth, kHeight, 3}, values in [0,1]
};

// Moving-gradient frames whose spatial frequency and per-frame motion are
// monotone in the slot's dynamism. A fully static slot renders identical
// frames; values stay in [0,1].
FrameClip gen_frame_clip(const QualityCurveSeries& curves, std::uint64_t seed);

// CSV "slot,v300,v500,v800,v1100,v1400" with header, values in [0,1].
void write_quality_csv(std::ostream& out, const QualityCurveSeries& series);
void write_quality_csv_file(const std::string& path, const QualityCurveSeries& series);
QualityCurveSeries parse_quality_csv(std::istream& in, const std::string& id = "");
QualityCurveSeries parse_quality_csv_file(const std::string& path);

// Binary clip file: magic "QFRM", u32 version, u32 frame count, then per frame
// 64*36*3 bytes, 8-bit per channel, row-major RGB.
void write_frame_clip(std::ostream& out, const FrameClip& clip);
void write_frame_clip_file(const std::string& path, const FrameClip& clip);
FrameClip parse_frame_clip(std::istream& in);
FrameClip parse_frame_clip_file(const std::string& path);

}  // namespace qarc::quality
