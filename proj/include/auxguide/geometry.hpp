#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace auxguide::geometry {

using Vec3 = std::array<double, 3>;
using Vec2 = std::array<double, 2>;

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& a);
double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

/// 3x3 row-major matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(std::size_t r, std::size_t c) const { return m[r * 3 + c]; }
  double& operator()(std::size_t r, std::size_t c) { return m[r * 3 + c]; }
  Vec3 column(std::size_t c) const { return {m[c], m[3 + c], m[6 + c]}; }
  Mat3 transpose() const;
  double determinant() const;

  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2);
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

/// Continuous 6D rotation representation: the first two matrix columns.
struct Rot6D {
  Vec3 a1{1, 0, 0};
  Vec3 a2{0, 1, 0};

  std::array<double, 6> flat() const { return {a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]}; }
  static Rot6D from_flat(std::span<const double> v);
};

/// Proper rotation (R^T R = I, det = +1 within 1e-8); checked on construction.
class RotationMatrix {
 public:
  RotationMatrix() = default;
  explicit RotationMatrix(const Mat3& m);

  const Mat3& matrix() const noexcept { return m_; }

 private:
  Mat3 m_;
};

/// Gram-Schmidt orthonormalization of the two columns. Throws
/// DegenerateInput when a normalization divides by < 1e-9.
RotationMatrix rot6d_to_matrix(const Rot6D& r);
Rot6D matrix_to_rot6d(const RotationMatrix& m);

/// Pinhole camera with principal point at the image centre. The rotation maps
/// world to camera coordinates: x right, y down, z forward (optical axis).
struct CameraPose {
  RotationMatrix rotation;
  Vec3 position{0, 0, 0};
  double fov_h = 1.0;
  double fov_v = 0.75;
};

/// Throws InvalidArgument if fovs leave (0, pi) or the position is not finite.
void validate(const CameraPose& pose);

/// World->camera rotation that looks from `eye` towards `target` with +Z up.
RotationMatrix look_at(const Vec3& eye, const Vec3& target);

struct NdcPoint {
  Vec2 ndc{0, 0};
  bool in_front = false;
};

NdcPoint project_to_ndc(const CameraPose& pose, const Vec3& point);

inline constexpr std::size_t kNumJoints = 22;
inline constexpr std::size_t kNumFramingJoints = 9;

/// Joint order of the 22-joint body skeleton (pelvis root).
enum Joint : std::size_t {
  Pelvis = 0, LeftHip, RightHip, Spine1, LeftKnee, RightKnee, Spine2, LeftAnkle, RightAnkle,
  Spine3, LeftFoot, RightFoot, Neck, LeftCollar, RightCollar, Head, LeftShoulder,
  RightShoulder, LeftElbow, RightElbow, LeftWrist, RightWrist,
};

/// Parent index per joint; -1 for the root.
inline constexpr std::array<int, kNumJoints> kParents = {
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19};

/// Joints whose screen positions form the framing features, in column order:
/// left ankle, right ankle, pelvis, spine (mid), head, left shoulder,
/// right shoulder, left wrist, right wrist.
inline constexpr std::array<std::size_t, kNumFramingJoints> kFramingJoints = {
    LeftAnkle, RightAnkle, Pelvis, Spine2, Head, LeftShoulder, RightShoulder, LeftWrist,
    RightWrist};

struct JointFrame {
  std::array<Vec3, kNumJoints> joints{};
};

std::array<bool, kNumFramingJoints> visibility_mask(const CameraPose& pose,
                                                    const JointFrame& frame);

/// All descendants of `joint` in the skeleton tree, including itself.
std::vector<std::size_t> descendants(std::size_t joint);

using JointMask = std::array<bool, kNumJoints>;

/// Joints that are off-screen (behind the camera or |ndc| > 1) in at least
/// half of the frames, closed under skeleton descendants. The same mask is
/// returned for every frame.
std::vector<JointMask> detect_offscreen_chains(std::span<const CameraPose> poses,
                                               std::span<const JointFrame> frames);

}  // namespace auxguide::geometry
