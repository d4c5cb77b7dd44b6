#include "auxguide/geometry.hpp"

#include <cmath>
#include <numbers>

#include "auxguide/error.hpp"

namespace auxguide::geometry {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Mat3 Mat3::transpose() const {
  Mat3 t;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Mat3::determinant() const {
  return dot(column(0), cross(column(1), column(2)));
}

Mat3 Mat3::from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  Mat3 out;
  for (std::size_t r = 0; r < 3; ++r) {
    out(r, 0) = c0[r];
    out(r, 1) = c1[r];
    out(r, 2) = c2[r];
  }
  return out;
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  return from_columns(r0, r1, r2).transpose();
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
  return out;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v[0] + a(0, 1) * v[1] + a(0, 2) * v[2],
          a(1, 0) * v[0] + a(1, 1) * v[1] + a(1, 2) * v[2],
          a(2, 0) * v[0] + a(2, 1) * v[1] + a(2, 2) * v[2]};
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return m;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m.m = {c, 0, s, 0, 1, 0, -s, 0, c};
  return m;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return m;
}

Rot6D Rot6D::from_flat(std::span<const double> v) {
  if (v.size() != 6) throw Error(ErrorCode::ShapeMismatch, "6D rotation needs 6 values");
  return Rot6D{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  const Mat3 rtr = m.transpose() * m;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const double expect = r == c ? 1.0 : 0.0;
      if (!(std::abs(rtr(r, c) - expect) <= 1e-8))
        throw Error(ErrorCode::InvalidArgument, "rotation matrix is not orthonormal");
    }
  if (!(std::abs(m.determinant() - 1.0) <= 1e-8))
    throw Error(ErrorCode::InvalidArgument, "rotation matrix determinant is not +1");
}

RotationMatrix rot6d_to_matrix(const Rot6D& r) {
  const double n1 = norm(r.a1);
  if (!(n1 >= 1e-9)) throw Error(ErrorCode::DegenerateInput, "first 6D column is ~zero");
  const Vec3 c1 = (1.0 / n1) * r.a1;
  const Vec3 resid = r.a2 - dot(r.a2, c1) * c1;
  const double n2 = norm(resid);
  if (!(n2 >= 1e-9)) throw Error(ErrorCode::DegenerateInput, "6D columns are ~parallel");
  const Vec3 c2 = (1.0 / n2) * resid;
  const Vec3 c3 = cross(c1, c2);
  return RotationMatrix(Mat3::from_columns(c1, c2, c3));
}

Rot6D matrix_to_rot6d(const RotationMatrix& m) {
  return Rot6D{m.matrix().column(0), m.matrix().column(1)};
}

void validate(const CameraPose& pose) {
  const auto in_range = [](double f) { return f > 0.0 && f < std::numbers::pi; };
  if (!in_range(pose.fov_h) || !in_range(pose.fov_v))
    throw Error(ErrorCode::InvalidArgument, "camera field of view outside (0, pi)");
  for (double v : pose.position)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "camera position not finite");
}

RotationMatrix look_at(const Vec3& eye, const Vec3& target) {
  Vec3 forward = target - eye;
  const double fn = norm(forward);
  if (!(fn > 1e-9)) throw Error(ErrorCode::DegenerateInput, "look_at target coincides with eye");
  forward = (1.0 / fn) * forward;
  Vec3 right = cross(forward, Vec3{0, 0, 1});
  const double rn = norm(right);
  if (!(rn > 1e-9)) throw Error(ErrorCode::DegenerateInput, "look_at direction is vertical");
  right = (1.0 / rn) * right;
  const Vec3 down = cross(forward, right);
  return RotationMatrix(Mat3::from_rows(right, down, forward));
}

NdcPoint project_to_ndc(const CameraPose& pose, const Vec3& point) {
  const Vec3 p = pose.rotation.matrix() * (point - pose.position);
  const double depth = p[2];
  NdcPoint out;
  out.in_front = depth > 1e-6;
  out.ndc = {p[0] / (depth * std::tan(0.5 * pose.fov_h)),
             p[1] / (depth * std::tan(0.5 * pose.fov_v))};
  return out;
}

namespace {

bool on_screen(const NdcPoint& p) {
  return p.in_front && std::abs(p.ndc[0]) <= 1.0 && std::abs(p.ndc[1]) <= 1.0;
}

}  // namespace

std::array<bool, kNumFramingJoints> visibility_mask(const CameraPose& pose,
                                                    const JointFrame& frame) {
  std::array<bool, kNumFramingJoints> out{};
  for (std::size_t i = 0; i < kNumFramingJoints; ++i)
    out[i] = on_screen(project_to_ndc(pose, frame.joints[kFramingJoints[i]]));
  return out;
}

std::vector<std::size_t> descendants(std::size_t joint) {
  std::vector<std::size_t> out{joint};
  // Parents always precede children in the joint order.
  std::array<bool, kNumJoints> in{};
  in[joint] = true;
  for (std::size_t j = joint + 1; j < kNumJoints; ++j) {
    const int p = kParents[j];
    if (p >= 0 && in[static_cast<std::size_t>(p)]) {
      in[j] = true;
      out.push_back(j);
    }
  }
  return out;
}

std::vector<JointMask> detect_offscreen_chains(std::span<const CameraPose> poses,
                                               std::span<const JointFrame> frames) {
  if (poses.size() != frames.size())
    throw Error(ErrorCode::LengthMismatch, "camera and joint sequences differ in length");
  std::array<std::size_t, kNumJoints> off_count{};
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t j = 0; j < kNumJoints; ++j)
      if (!on_screen(project_to_ndc(poses[f], frames[f].joints[j]))) ++off_count[j];

  JointMask mask{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (frames.empty() || 2 * off_count[j] < frames.size()) continue;
    for (std::size_t d : descendants(j)) mask[d] = true;
  }
  return std::vector<JointMask>(frames.size(), mask);
}

}  // namespace auxguide::geometry
