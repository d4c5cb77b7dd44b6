#include "auxguide/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "auxguide/dataset.hpp"
#include "auxguide/error.hpp"
#include "auxguide/rng.hpp"

namespace auxguide::synthetic {

using geometry::operator+;
using geometry::operator-;
using geometry::operator*;

using geometry::Mat3;
using geometry::Vec3;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPelvisHeight = 0.93;

constexpr std::array<std::string_view, kNumMotionClasses> kMotionNames = {
    "walk-line", "walk-circle", "stand-wave", "jump-in-place"};
constexpr std::array<std::string_view, kNumCameraClasses> kCameraNames = {
    "static", "follow", "orbit", "pull-out"};

// Parent-relative rest offsets in the body frame (x forward, y left, z up).
constexpr std::array<Vec3, geometry::kNumJoints> kRestOffsets = {{
    {0, 0, 0},          // pelvis
    {0, 0.09, -0.08},   // left hip
    {0, -0.09, -0.08},  // right hip
    {0, 0, 0.11},       // spine1
    {0, 0, -0.40},      // left knee
    {0, 0, -0.40},      // right knee
    {0, 0, 0.14},       // spine2
    {0, 0, -0.40},      // left ankle
    {0, 0, -0.40},      // right ankle
    {0, 0, 0.05},       // spine3
    {0.12, 0, -0.05},   // left foot
    {0.12, 0, -0.05},   // right foot
    {0, 0, 0.21},       // neck
    {0, 0.07, 0.12},    // left collar
    {0, -0.07, 0.12},   // right collar
    {0, 0, 0.10},       // head
    {0, 0.11, 0.03},    // left shoulder
    {0, -0.11, 0.03},   // right shoulder
    {0, 0.26, 0},       // left elbow
    {0, -0.26, 0},      // right elbow
    {0, 0.25, 0},       // left wrist
    {0, -0.25, 0},      // right wrist
}};

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

struct MotionParams {
  double heading0 = 0.0;
  Vec3 start{0, 0, 0};
  double speed = 1.2;
  double radius = 0.4;
  double turn_sign = 1.0;
  double cadence = 0.9;       // strides per second
  double wave_freq = 1.5;     // Hz
  double jump_height = 0.2;   // m
  double jump_freq = 1.2;     // Hz
};

struct CameraParams {
  double distance = 3.2;
  double height = 1.3;
  double azimuth = 0.0;  // world angle of the camera around the subject
  double orbit_rate = 0.6;
  double pull_extra = 2.5;
  double fov_v = 0.8;
};

struct Pose {
  Vec3 pelvis;
  double heading = 0.0;
  std::array<Mat3, geometry::kNumJoints> local;
};

Pose motion_pose(MotionClass cls, const MotionParams& mp, double t, double duration) {
  Pose pose;
  pose.heading = mp.heading0;
  pose.pelvis = mp.start;
  pose.pelvis[2] = kPelvisHeight;
  auto& L = pose.local;

  // Arms hang down by default.
  L[geometry::LeftShoulder] = geometry::rot_x(-1.3);
  L[geometry::RightShoulder] = geometry::rot_x(1.3);

  switch (cls) {
    case MotionClass::WalkLine:
    case MotionClass::WalkCircle: {
      if (cls == MotionClass::WalkLine) {
        pose.pelvis[0] += mp.speed * t * std::cos(mp.heading0);
        pose.pelvis[1] += mp.speed * t * std::sin(mp.heading0);
      } else {
        const double psi = mp.heading0 + mp.turn_sign * 2.0 * kPi * t / duration;
        pose.pelvis[0] += mp.radius * std::cos(psi);
        pose.pelvis[1] += mp.radius * std::sin(psi);
        pose.heading = psi + mp.turn_sign * 0.5 * kPi;
      }
      const double theta = 2.0 * kPi * mp.cadence * t;
      const double swing = 0.45 * std::sin(theta);
      pose.pelvis[2] += 0.02 * std::sin(2.0 * theta);
      L[geometry::LeftHip] = geometry::rot_y(-swing);
      L[geometry::RightHip] = geometry::rot_y(swing);
      L[geometry::LeftKnee] = geometry::rot_y(0.6 * std::max(0.0, std::sin(theta)));
      L[geometry::RightKnee] = geometry::rot_y(0.6 * std::max(0.0, -std::sin(theta)));
      L[geometry::LeftShoulder] = geometry::rot_y(0.5 * swing) * geometry::rot_x(-1.3);
      L[geometry::RightShoulder] = geometry::rot_y(-0.5 * swing) * geometry::rot_x(1.3);
      L[geometry::LeftElbow] = geometry::rot_z(0.2);
      L[geometry::RightElbow] = geometry::rot_z(-0.2);
      break;
    }
    case MotionClass::StandWave: {
      const double osc = std::sin(2.0 * kPi * mp.wave_freq * t);
      L[geometry::RightShoulder] = geometry::rot_x(-0.3);
      L[geometry::RightElbow] = geometry::rot_x(-(1.0 + 0.5 * osc));
      L[geometry::Spine2] = geometry::rot_x(0.05 * osc);
      break;
    }
    case MotionClass::JumpInPlace: {
      const double s = std::sin(2.0 * kPi * mp.jump_freq * t);
      const double air = std::max(0.0, s);
      const double crouch = std::max(0.0, -s);
      pose.pelvis[2] += mp.jump_height * air - 0.12 * crouch;
      L[geometry::LeftHip] = geometry::rot_y(-0.5 * crouch);
      L[geometry::RightHip] = geometry::rot_y(-0.5 * crouch);
      L[geometry::LeftKnee] = geometry::rot_y(1.0 * crouch);
      L[geometry::RightKnee] = geometry::rot_y(1.0 * crouch);
      L[geometry::LeftShoulder] = geometry::rot_y(-0.8 * air) * geometry::rot_x(-1.3);
      L[geometry::RightShoulder] = geometry::rot_y(-0.8 * air) * geometry::rot_x(1.3);
      break;
    }
  }
  return pose;
}

features::HumanFrame forward_kinematics(const Pose& pose) {
  features::HumanFrame frame;
  frame.heading = pose.heading;
  std::array<Mat3, geometry::kNumJoints> global;
  global[0] = geometry::rot_z(pose.heading) * pose.local[0];
  frame.joints.joints[0] = pose.pelvis;
  for (std::size_t j = 1; j < geometry::kNumJoints; ++j) {
    const auto p = static_cast<std::size_t>(geometry::kParents[j]);
    frame.joints.joints[j] = frame.joints.joints[p] + global[p] * kRestOffsets[j];
    global[j] = global[p] * pose.local[j];
  }
  for (std::size_t j = 0; j < geometry::kNumJoints; ++j) {
    const Mat3& r = j == 0 ? global[0] : pose.local[j];
    const auto six = geometry::matrix_to_rot6d(geometry::RotationMatrix(r)).flat();
    std::copy(six.begin(), six.end(), frame.pose6d.begin() + 6 * j);
  }
  return frame;
}

geometry::CameraPose camera_pose(CameraClass cls, const CameraParams& cp, const Vec3& pelvis,
                                 const Vec3& pelvis0, double t, double duration) {
  double az = cp.azimuth;
  double dist = cp.distance;
  Vec3 anchor = pelvis;
  switch (cls) {
    case CameraClass::Static:
      anchor = pelvis0;
      dist += 2.0;
      break;
    case CameraClass::Follow: break;
    case CameraClass::Orbit: az += cp.orbit_rate * t; break;
    case CameraClass::PullOut: dist += cp.pull_extra * t / duration; break;
  }
  geometry::CameraPose pose;
  pose.position = {anchor[0] + dist * std::cos(az), anchor[1] + dist * std::sin(az), cp.height};
  pose.rotation = geometry::look_at(pose.position, anchor);
  pose.fov_v = cp.fov_v;
  pose.fov_h = 2.0 * std::atan(std::tan(0.5 * cp.fov_v) * 16.0 / 9.0);
  return pose;
}

}  // namespace

ConditionLabel ConditionLabel::from_index(std::size_t index) {
  if (index >= kNumConditions) throw Error(ErrorCode::InvalidArgument, "condition index out of range");
  return ConditionLabel{static_cast<MotionClass>(index / kNumCameraClasses),
                        static_cast<CameraClass>(index % kNumCameraClasses)};
}

std::string_view to_string(MotionClass m) { return kMotionNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(CameraClass c) { return kCameraNames[static_cast<std::size_t>(c)]; }

std::string to_string(const ConditionLabel& label) {
  return std::string(to_string(label.motion)) + "/" + std::string(to_string(label.camera));
}

ConditionLabel parse_label(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos)
    throw Error(ErrorCode::ParseError, "condition label must be motion/camera: " + std::string(text));
  const auto m = text.substr(0, slash);
  const auto c = text.substr(slash + 1);
  const auto mi = std::find(kMotionNames.begin(), kMotionNames.end(), m);
  const auto ci = std::find(kCameraNames.begin(), kCameraNames.end(), c);
  if (mi == kMotionNames.end() || ci == kCameraNames.end())
    throw Error(ErrorCode::ParseError, "unknown condition label: " + std::string(text));
  return ConditionLabel{static_cast<MotionClass>(mi - kMotionNames.begin()),
                        static_cast<CameraClass>(ci - kCameraNames.begin())};
}

void validate(const GenConfig& cfg) {
  if (cfg.frames < 2) throw Error(ErrorCode::InvalidArgument, "frames must be >= 2");
  if (!(cfg.fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "fps must be positive");
  if (!(cfg.noise_scale >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_scale must be >= 0");
}

double max_joint_step(MotionClass m, double fps) {
  // Per-second bounds on joint speed (root speed + limb angular motion).
  switch (m) {
    case MotionClass::WalkLine: return 5.0 / fps;
    case MotionClass::WalkCircle: return 6.0 / fps;
    case MotionClass::StandWave: return 3.0 / fps;
    case MotionClass::JumpInPlace: return 5.0 / fps;
  }
  return 0.0;
}

features::TrajectoryPair generate_pair(const ConditionLabel& label, const GenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed, {label.index()});

  MotionParams mp;
  mp.heading0 = uniform(rng, -kPi, kPi);
  mp.start = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), 0.0};
  mp.speed = uniform(rng, 1.0, 1.4);
  mp.radius = uniform(rng, 0.35, 0.5);
  mp.turn_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  mp.cadence = uniform(rng, 0.8, 1.0);
  mp.wave_freq = uniform(rng, 1.2, 1.8);
  mp.jump_height = uniform(rng, 0.15, 0.3);
  mp.jump_freq = uniform(rng, 1.0, 1.4);

  CameraParams cp;
  cp.distance = uniform(rng, 2.8, 3.6);
  cp.height = uniform(rng, 1.0, 1.6);
  // Roughly in front of the subject.
  cp.azimuth = mp.heading0 + uniform(rng, -0.6, 0.6);
  cp.orbit_rate = (rng.uniform() < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.4, 0.8);
  cp.pull_extra = uniform(rng, 2.0, 3.0);
  cp.fov_v = uniform(rng, 0.7, 0.95);

  const double duration = static_cast<double>(cfg.frames - 1) / cfg.fps;
  features::TrajectoryPair traj;
  traj.fps = cfg.fps;
  traj.human.reserve(cfg.frames);
  traj.camera.reserve(cfg.frames);
  Vec3 pelvis0{};
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    const double t = static_cast<double>(f) / cfg.fps;
    const Pose pose = motion_pose(label.motion, mp, t, duration);
    if (f == 0) pelvis0 = pose.pelvis;
    traj.human.push_back(forward_kinematics(pose));
    traj.camera.push_back(camera_pose(label.camera, cp, pose.pelvis, pelvis0, t, duration));
  }

  if (cfg.noise_scale > 0.0) {
    Rng jitter(cfg.seed, {label.index(), 0x6a69747465ULL});
    for (std::size_t f = 0; f < cfg.frames; ++f) {
      for (auto& joint : traj.human[f].joints.joints)
        for (double& v : joint) v += cfg.noise_scale * jitter.normal();
      for (double& v : traj.camera[f].position) v += cfg.noise_scale * jitter.normal();
    }
  }
  return traj;
}

std::vector<ConditionLabel> assign_labels(std::size_t n, const LabelMix& mix, std::uint64_t seed) {
  const auto apportion = [n](std::span<const double> w) {
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "label weights must be >= 0");
      total += v;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "label weights must sum > 0");
    std::vector<std::size_t> counts(w.size());
    std::vector<double> remainder(w.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double exact = static_cast<double>(n) * w[i] / total;
      counts[i] = static_cast<std::size_t>(std::floor(exact));
      remainder[i] = exact - static_cast<double>(counts[i]);
      assigned += counts[i];
    }
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % order.size()]];
    std::vector<std::size_t> list;
    for (std::size_t i = 0; i < w.size(); ++i) list.insert(list.end(), counts[i], i);
    return list;
  };
  auto motions = apportion(mix.motion);
  auto cameras = apportion(mix.camera);
  Rng rng(seed, {0x6c6162656cULL});
  std::shuffle(motions.begin(), motions.end(), rng.engine());
  std::shuffle(cameras.begin(), cameras.end(), rng.engine());
  std::vector<ConditionLabel> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = ConditionLabel{static_cast<MotionClass>(motions[i]), static_cast<CameraClass>(cameras[i])};
  return out;
}

void generate_dataset(std::size_t n, const GenConfig& cfg, const LabelMix& mix,
                      const std::filesystem::path& out) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "dataset size must be >= 1");
  validate(cfg);
  const auto labels = assign_labels(n, mix, cfg.seed);
  std::vector<dataset::Record> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    GenConfig sample_cfg = cfg;
    sample_cfg.seed = mix64(cfg.seed ^ mix64(i));
    const auto traj = generate_pair(labels[i], sample_cfg);
    records.push_back(dataset::make_record("sample-" + std::to_string(i), labels[i], traj));
  }
  dataset::write_jsonl(out, records);
}

}  // namespace auxguide::synthetic
