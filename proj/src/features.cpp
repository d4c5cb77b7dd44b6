#include "auxguide/features.hpp"

#include <algorithm>
#include <cmath>

namespace auxguide::features {

using geometry::operator+;
using geometry::operator-;
using geometry::operator*;

using geometry::Vec3;

void validate(const TrajectoryPair& traj) {
  if (traj.human.size() != traj.camera.size())
    throw Error(ErrorCode::LengthMismatch, "human and camera trajectories differ in length");
  if (!(traj.fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  for (const auto& pose : traj.camera) geometry::validate(pose);
}

namespace {

void require_frames(const TrajectoryPair& traj) {
  validate(traj);
  if (traj.frames() < 2) throw Error(ErrorCode::TooShort, "need at least 2 frames");
}

// Forward difference times fps; the last frame repeats the previous one.
template <typename Get>
double forward_rate(const TrajectoryPair& traj, std::size_t f, Get get) {
  const std::size_t n = traj.frames();
  const std::size_t a = f + 1 < n ? f : n - 2;
  return (get(a + 1) - get(a)) * traj.fps;
}

}  // namespace

std::array<double, human_cols::kJointsWidth> localize_joints(const geometry::JointFrame& joints,
                                                             double heading) {
  const geometry::Mat3 unrotate = geometry::rot_z(-heading);
  const Vec3& pelvis = joints.joints[geometry::Pelvis];
  std::array<double, human_cols::kJointsWidth> out{};
  for (std::size_t j = 1; j < geometry::kNumJoints; ++j) {
    const Vec3 local = unrotate * (joints.joints[j] - pelvis);
    for (std::size_t k = 0; k < 3; ++k) out[(j - 1) * 3 + k] = local[k];
  }
  return out;
}

geometry::JointFrame globalize_joints(std::span<const double> local, const Vec3& pelvis,
                                      double heading) {
  const geometry::Mat3 rotate = geometry::rot_z(heading);
  geometry::JointFrame out;
  out.joints[geometry::Pelvis] = pelvis;
  for (std::size_t j = 1; j < geometry::kNumJoints; ++j) {
    const Vec3 l{local[(j - 1) * 3], local[(j - 1) * 3 + 1], local[(j - 1) * 3 + 2]};
    out.joints[j] = pelvis + rotate * l;
  }
  return out;
}

HumanFeatureSeq build_human_features(const TrajectoryPair& traj) {
  require_frames(traj);
  using namespace human_cols;
  const std::size_t n = traj.frames();
  HumanFeatureSeq out(n);
  const auto pelvis = [&](std::size_t f, std::size_t axis) {
    return traj.human[f].joints.joints[geometry::Pelvis][axis];
  };
  for (std::size_t f = 0; f < n; ++f) {
    auto row = out.row(f);
    row[kRootHeight] = pelvis(f, 2);
    row[kRootVelX] = forward_rate(traj, f, [&](std::size_t i) { return pelvis(i, 0); });
    row[kRootVelY] = forward_rate(traj, f, [&](std::size_t i) { return pelvis(i, 1); });
    row[kHeadingRate] = forward_rate(traj, f, [&](std::size_t i) { return traj.human[i].heading; });
    std::copy(traj.human[f].pose6d.begin(), traj.human[f].pose6d.end(), row.begin() + kPose);
    const auto local = localize_joints(traj.human[f].joints, traj.human[f].heading);
    std::copy(local.begin(), local.end(), row.begin() + kJoints);
  }
  return out;
}

CameraFeatureSeq build_camera_features(const TrajectoryPair& traj) {
  require_frames(traj);
  using namespace camera_cols;
  const std::size_t n = traj.frames();
  CameraFeatureSeq out(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto row = out.row(f);
    const auto& cam = traj.camera[f];
    const auto r6 = geometry::matrix_to_rot6d(cam.rotation).flat();
    std::copy(r6.begin(), r6.end(), row.begin() + kRotation);
    for (std::size_t k = 0; k < 3; ++k) {
      row[kVelocity + k] =
          forward_rate(traj, f, [&](std::size_t i) { return traj.camera[i].position[k]; });
      row[kRelative + k] = cam.position[k] - traj.human[f].joints.joints[geometry::Pelvis][k];
    }
    row[kFov] = cam.fov_h;
    row[kFov + 1] = cam.fov_v;
  }
  return out;
}

geometry::Vec2 framing_point(const geometry::CameraPose& pose, const geometry::Vec3& point) {
  const Vec3 p = pose.rotation.matrix() * (point - pose.position);
  const double sx = p[0] / std::tan(0.5 * pose.fov_h);
  const double sy = p[1] / std::tan(0.5 * pose.fov_v);
  if (p[2] > 1e-6)
    return {std::clamp(sx / p[2], -kNdcLimit, kNdcLimit),
            std::clamp(sy / p[2], -kNdcLimit, kNdcLimit)};
  // Behind the camera: push onto the border of the clamp box.
  const double m = std::max(std::abs(sx), std::abs(sy));
  if (!(m > 0.0)) return {kNdcLimit, kNdcLimit};
  return {kNdcLimit * sx / m, kNdcLimit * sy / m};
}

FramingFeatureSeq build_framing_features(const TrajectoryPair& traj) {
  validate(traj);
  const std::size_t n = traj.frames();
  FramingFeatureSeq out(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto row = out.row(f);
    for (std::size_t i = 0; i < geometry::kNumFramingJoints; ++i) {
      const auto p =
          framing_point(traj.camera[f], traj.human[f].joints.joints[geometry::kFramingJoints[i]]);
      row[2 * i] = p[0];
      row[2 * i + 1] = p[1];
    }
  }
  return out;
}

TrajectoryPair integrate_features(const HumanFeatureSeq& h, const CameraFeatureSeq& c,
                                  const RootInit& init, double fps) {
  if (h.frames() != c.frames())
    throw Error(ErrorCode::LengthMismatch, "human and camera features differ in length");
  if (!(fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  using namespace human_cols;
  const std::size_t n = h.frames();
  TrajectoryPair traj;
  traj.fps = fps;
  traj.human.resize(n);
  traj.camera.resize(n);

  double x = init.x, y = init.y, heading = init.heading;
  for (std::size_t f = 0; f < n; ++f) {
    const auto hr = h.row(f);
    if (f > 0) {
      const auto prev = h.row(f - 1);
      x += prev[kRootVelX] / fps;
      y += prev[kRootVelY] / fps;
      heading += prev[kHeadingRate] / fps;
    }
    HumanFrame& frame = traj.human[f];
    frame.heading = heading;
    std::copy(hr.begin() + kPose, hr.begin() + kPose + kPoseWidth, frame.pose6d.begin());
    const Vec3 pelvis{x, y, hr[kRootHeight]};
    frame.joints = globalize_joints(hr.subspan(kJoints, kJointsWidth), pelvis, heading);

    const auto cr = c.row(f);
    geometry::CameraPose& cam = traj.camera[f];
    cam.rotation =
        geometry::rot6d_to_matrix(geometry::Rot6D::from_flat(cr.subspan(camera_cols::kRotation, 6)));
    for (std::size_t k = 0; k < 3; ++k) cam.position[k] = pelvis[k] + cr[camera_cols::kRelative + k];
    cam.fov_h = cr[camera_cols::kFov];
    cam.fov_v = cr[camera_cols::kFov + 1];
    geometry::validate(cam);
  }
  return traj;
}

}  // namespace auxguide::features
