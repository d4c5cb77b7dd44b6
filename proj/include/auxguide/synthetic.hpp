#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "auxguide/features.hpp"

namespace auxguide::synthetic {

enum class MotionClass : std::uint8_t { WalkLine = 0, WalkCircle, StandWave, JumpInPlace };
enum class CameraClass : std::uint8_t { Static = 0, Follow, Orbit, PullOut };

inline constexpr std::size_t kNumMotionClasses = 4;
inline constexpr std::size_t kNumCameraClasses = 4;
inline constexpr std::size_t kNumConditions = kNumMotionClasses * kNumCameraClasses;

/// Discrete text-condition stand-in: a (motion, camera) class pair.
struct ConditionLabel {
  MotionClass motion = MotionClass::WalkLine;
  CameraClass camera = CameraClass::Static;

  /// motion * 4 + camera, in [0, 16).
  std::size_t index() const noexcept {
    return static_cast<std::size_t>(motion) * kNumCameraClasses + static_cast<std::size_t>(camera);
  }
  static ConditionLabel from_index(std::size_t index);

  bool operator==(const ConditionLabel&) const = default;
};

std::string_view to_string(MotionClass m);
std::string_view to_string(CameraClass c);
/// "walk-line/follow" style label used in the dataset file.
std::string to_string(const ConditionLabel& label);
ConditionLabel parse_label(std::string_view text);

struct GenConfig {
  std::size_t frames = 64;
  double fps = 30.0;
  std::uint64_t seed = 0;
  double noise_scale = 0.0;
};

void validate(const GenConfig& cfg);

/// Largest frame-to-frame joint displacement (metres) a noise-free sample of
/// the class can produce. Walking classes are bounded by root speed plus limb
/// swing; the in-place classes by limb and hop motion only.
double max_joint_step(MotionClass m, double fps);

/// Deterministic paired trajectory realizing `label`:
///  - walk-line: straight walk at 1.0-1.4 m/s along a random heading
///  - walk-circle: closed circle of radius 0.35-0.5 m over the clip
///  - stand-wave: fixed root, right arm waving
///  - jump-in-place: periodic vertical hops
/// and camera classes static (fixed, aimed at the start pose), follow
/// (rigid offset, aimed at the pelvis), orbit (circles the pelvis) and
/// pull-out (distance grows linearly, aimed at the pelvis).
features::TrajectoryPair generate_pair(const ConditionLabel& label, const GenConfig& cfg);

/// Relative label frequencies; motion and camera classes are apportioned
/// independently.
struct LabelMix {
  std::array<double, kNumMotionClasses> motion{1, 1, 1, 1};
  std::array<double, kNumCameraClasses> camera{1, 1, 1, 1};
};

/// Labels for n records: counts within 1 of the weight proportions
/// (largest remainder), order fixed by a seeded shuffle.
std::vector<ConditionLabel> assign_labels(std::size_t n, const LabelMix& mix, std::uint64_t seed);

/// Writes n records in the JSON-lines dataset format; record i is generated
/// from the stream (cfg.seed, i).
void generate_dataset(std::size_t n, const GenConfig& cfg, const LabelMix& mix,
                      const std::filesystem::path& out);

}  // namespace auxguide::synthetic
