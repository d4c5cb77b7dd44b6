#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "auxguide/error.hpp"
#include "auxguide/geometry.hpp"

namespace auxguide::features {

/// F frames of fixed-width feature rows, stored row-major.
template <std::size_t Width>
class FeatureSeq {
 public:
  static constexpr std::size_t kWidth = Width;

  FeatureSeq() = default;
  explicit FeatureSeq(std::size_t frames) : frames_(frames), data_(frames * Width, 0.0) {}
  FeatureSeq(std::size_t frames, std::vector<double> data) : frames_(frames), data_(std::move(data)) {
    if (data_.size() != frames_ * Width)
      throw Error(ErrorCode::ShapeMismatch, "feature data does not match frames x width");
    for (double v : data_)
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "feature value not finite");
  }

  std::size_t frames() const noexcept { return frames_; }
  constexpr std::size_t width() const noexcept { return Width; }

  std::span<double> row(std::size_t f) { return {data_.data() + f * Width, Width}; }
  std::span<const double> row(std::size_t f) const { return {data_.data() + f * Width, Width}; }
  double& at(std::size_t f, std::size_t c) { return data_[f * Width + c]; }
  double at(std::size_t f, std::size_t c) const { return data_[f * Width + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const FeatureSeq&) const = default;

 private:
  std::size_t frames_ = 0;
  std::vector<double> data_;
};

inline constexpr std::size_t kHumanWidth = 199;
inline constexpr std::size_t kCameraWidth = 14;
inline constexpr std::size_t kFramingWidth = 18;

using HumanFeatureSeq = FeatureSeq<kHumanWidth>;
using CameraFeatureSeq = FeatureSeq<kCameraWidth>;
using FramingFeatureSeq = FeatureSeq<kFramingWidth>;

/// Column layout of the human features.
namespace human_cols {
inline constexpr std::size_t kRootHeight = 0;   // pelvis z (up)
inline constexpr std::size_t kRootVelX = 1;     // pelvis x velocity, world, m/s
inline constexpr std::size_t kRootVelY = 2;     // pelvis y velocity, world, m/s
inline constexpr std::size_t kHeadingRate = 3;  // rad/s about +z
inline constexpr std::size_t kPose = 4;         // 22 joints x 6D local rotation
inline constexpr std::size_t kPoseWidth = 132;
inline constexpr std::size_t kJoints = 136;     // 21 joints x xyz, heading-aligned pelvis frame
inline constexpr std::size_t kJointsWidth = 63;
}  // namespace human_cols

/// Column layout of the camera features.
namespace camera_cols {
inline constexpr std::size_t kRotation = 0;     // 6D of the world->camera rotation
inline constexpr std::size_t kVelocity = 6;     // camera position velocity, m/s
inline constexpr std::size_t kRelative = 9;     // camera position - pelvis position, world
inline constexpr std::size_t kFov = 12;         // (fov_h, fov_v), radians
}  // namespace camera_cols

using PoseParams = std::array<double, human_cols::kPoseWidth>;

struct HumanFrame {
  geometry::JointFrame joints;  // world frame; joints[Pelvis] is the root position
  double heading = 0.0;         // rotation about +z, radians (unwrapped)
  PoseParams pose6d{};          // per-joint local rotations, 6D each
};

/// World-space source from which all three feature sets are extracted.
struct TrajectoryPair {
  std::vector<HumanFrame> human;
  std::vector<geometry::CameraPose> camera;
  double fps = 30.0;

  std::size_t frames() const noexcept { return human.size(); }
};

/// Throws LengthMismatch / InvalidArgument when the pair is malformed.
void validate(const TrajectoryPair& traj);

HumanFeatureSeq build_human_features(const TrajectoryPair& traj);
CameraFeatureSeq build_camera_features(const TrajectoryPair& traj);
/// Framing coordinates are NDC clamped to [-kNdcLimit, kNdcLimit]. Points
/// behind the camera are placed on the border of that box, so they always
/// read as off-screen.
inline constexpr double kNdcLimit = 3.0;
geometry::Vec2 framing_point(const geometry::CameraPose& pose, const geometry::Vec3& point);
FramingFeatureSeq build_framing_features(const TrajectoryPair& traj);

/// Pelvis-relative joint offsets expressed in the heading-aligned frame.
/// This is the one place the local-frame convention for J lives.
std::array<double, human_cols::kJointsWidth> localize_joints(const geometry::JointFrame& joints,
                                                             double heading);
geometry::JointFrame globalize_joints(std::span<const double> local, const geometry::Vec3& pelvis,
                                      double heading);

struct RootInit {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/// Inverse of the feature builders. Velocity channels are integrated with a
/// cumulative sum from `init`; the camera is placed at pelvis + relative
/// offset with the decoded rotation and fields of view.
TrajectoryPair integrate_features(const HumanFeatureSeq& h, const CameraFeatureSeq& c,
                                  const RootInit& init, double fps);

}  // namespace auxguide::features
