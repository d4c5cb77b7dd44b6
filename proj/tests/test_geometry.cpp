#include <cmath>
#include <numbers>
#include <vector>

#include "auxguide/geometry.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::geometry;
using testutil::error_code_of;

namespace {

double max_diff(const Mat3& a, const Mat3& b) {
  double m = 0;
  for (std::size_t i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
  return m;
}

bool is_rotation(const Mat3& r) {
  return max_diff(r.transpose() * r, Mat3{}) < 1e-8 && std::abs(r.determinant() - 1) < 1e-8;
}

CameraPose axis_camera(double fov_h = std::numbers::pi / 2, double fov_v = std::numbers::pi / 2) {
  CameraPose c;
  c.fov_h = fov_h;
  c.fov_v = fov_v;
  return c;
}

}  // namespace

TEST_CASE("6D to matrix hand cases") {
  CHECK(max_diff(rot6d_to_matrix(Rot6D{}).matrix(), Mat3{}) < 1e-15);
  CHECK(max_diff(rot6d_to_matrix(Rot6D{{1, 0, 0}, {1, 1, 0}}).matrix(), Mat3{}) < 1e-15);
  CHECK(max_diff(rot6d_to_matrix(Rot6D{{2, 0, 0}, {0, 0.5, 0}}).matrix(), Mat3{}) < 1e-15);
  CHECK(error_code_of([] { rot6d_to_matrix(Rot6D{{0, 0, 0}, {0, 1, 0}}); }) ==
        ErrorCode::DegenerateInput);
  CHECK(error_code_of([] { rot6d_to_matrix(Rot6D{{1, 0, 0}, {2, 0, 0}}); }) ==
        ErrorCode::DegenerateInput);
}

TEST_CASE("matrix to 6D takes the first two columns") {
  const auto r = matrix_to_rot6d(RotationMatrix(rot_z(std::numbers::pi / 2)));
  CHECK(std::abs(r.a1[0]) < 1e-15);
  CHECK(r.a1[1] == doctest::Approx(1.0));
  CHECK(r.a2[0] == doctest::Approx(-1.0));
  CHECK(std::abs(r.a2[1]) < 1e-15);
}

TEST_CASE("random 6D inputs give rotations and round-trip") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    Rot6D r;
    for (auto& v : r.a1) v = rng.normal();
    for (auto& v : r.a2) v = rng.normal();
    const auto m = rot6d_to_matrix(r);
    CHECK(is_rotation(m.matrix()));
    const auto back = rot6d_to_matrix(matrix_to_rot6d(m));
    CHECK(max_diff(back.matrix(), m.matrix()) < 1e-9);
  }
}

TEST_CASE("rotation matrix rejects improper input") {
  Mat3 flip;
  flip(2, 2) = -1;
  CHECK(error_code_of([&] { RotationMatrix{flip}; }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(RotationMatrix{rot_x(0.3) * rot_y(-1.2)});
}

TEST_CASE("projection to NDC") {
  const auto cam = axis_camera();
  auto p = project_to_ndc(cam, {0, 0, 2});
  CHECK(p.in_front);
  CHECK(p.ndc[0] == 0.0);
  CHECK(p.ndc[1] == 0.0);

  p = project_to_ndc(cam, {2, 0, 2});
  CHECK(p.ndc[0] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_FALSE(project_to_ndc(cam, {0, 0, -1}).in_front);
  CHECK_FALSE(project_to_ndc(cam, {1, 1, 0}).in_front);

  // pinhole homogeneity about a displaced, rotated camera
  CameraPose c2;
  c2.rotation = look_at({3, -4, 1.5}, {0, 0, 1});
  c2.position = {3, -4, 1.5};
  const Vec3 q{0.4, 0.7, 1.1};
  const auto a = project_to_ndc(c2, q);
  for (double lambda : {0.25, 3.0, 17.0}) {
    const auto b = project_to_ndc(c2, c2.position + lambda * (q - c2.position));
    CHECK(b.ndc[0] == doctest::Approx(a.ndc[0]).epsilon(1e-12));
    CHECK(b.ndc[1] == doctest::Approx(a.ndc[1]).epsilon(1e-12));
  }
}

TEST_CASE("look_at puts the target on the optical axis") {
  CameraPose c;
  c.position = {5, 2, 3};
  c.rotation = look_at(c.position, {-1, 0.5, 1});
  const auto p = project_to_ndc(c, {-1, 0.5, 1});
  CHECK(p.in_front);
  CHECK(std::abs(p.ndc[0]) < 1e-12);
  CHECK(std::abs(p.ndc[1]) < 1e-12);
  // +Z world is up, so a point above the target is in the upper half (y down)
  CHECK(project_to_ndc(c, {-1, 0.5, 2}).ndc[1] < 0);
}

TEST_CASE("visibility") {
  const auto cam = axis_camera();
  JointFrame f;
  for (auto& j : f.joints) j = {0, 0, 3};
  for (bool v : visibility_mask(cam, f)) CHECK(v);

  for (auto& j : f.joints) j = {0, 0, -3};
  for (bool v : visibility_mask(cam, f)) CHECK_FALSE(v);

  for (auto& j : f.joints) j = {0, 0, 3};
  f.joints[Head] = {4.5, 0, 3};  // ndc.x = 1.5
  const auto m = visibility_mask(cam, f);
  for (std::size_t i = 0; i < kNumFramingJoints; ++i) CHECK(m[i] == (kFramingJoints[i] != Head));
}

TEST_CASE("skeleton descendants") {
  CHECK(descendants(Pelvis).size() == kNumJoints);
  CHECK(descendants(LeftWrist) == std::vector<std::size_t>{LeftWrist});
  auto arm = descendants(LeftCollar);
  std::sort(arm.begin(), arm.end());
  CHECK(arm == std::vector<std::size_t>{LeftCollar, LeftShoulder, LeftElbow, LeftWrist});
}

TEST_CASE("off-screen chains") {
  const auto cam = axis_camera();
  std::vector<CameraPose> poses(6, cam);
  std::vector<JointFrame> frames(6);
  for (auto& f : frames)
    for (auto& j : f.joints) j = {0, 0, 3};

  for (const auto& m : detect_offscreen_chains(poses, frames))
    for (bool b : m) CHECK_FALSE(b);

  auto wrist = frames;
  for (auto& f : wrist) f.joints[LeftWrist] = {10, 0, 3};
  for (const auto& m : detect_offscreen_chains(poses, wrist))
    for (std::size_t j = 0; j < kNumJoints; ++j) CHECK(m[j] == (j == LeftWrist));

  auto elbow = frames;  // off-screen in exactly half the frames
  for (std::size_t i = 0; i < 3; ++i) elbow[i].joints[LeftElbow] = {0, 0, -1};
  for (const auto& m : detect_offscreen_chains(poses, elbow))
    for (std::size_t j = 0; j < kNumJoints; ++j) CHECK(m[j] == (j == LeftElbow || j == LeftWrist));

  auto root = frames;
  for (auto& f : root) f.joints[Pelvis] = {0, 0, -2};
  for (const auto& m : detect_offscreen_chains(poses, root))
    for (bool b : m) CHECK(b);

  auto two = frames;  // 2 of 6 frames is below the threshold
  for (std::size_t i = 0; i < 2; ++i) two[i].joints[Head] = {9, 9, 3};
  for (const auto& m : detect_offscreen_chains(poses, two)) CHECK_FALSE(m[Head]);

  CHECK(error_code_of([&] {
          detect_offscreen_chains(std::span(poses).first(5), frames);
        }) == ErrorCode::LengthMismatch);
}

TEST_CASE("descendant closure holds for random masks") {
  Rng rng(8);
  const auto cam = axis_camera();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CameraPose> poses(4, cam);
    std::vector<JointFrame> frames(4);
    for (auto& f : frames)
      for (auto& j : f.joints) j = {4 * (rng.uniform() - 0.5), 4 * (rng.uniform() - 0.5), 3};
    for (const auto& m : detect_offscreen_chains(poses, frames))
      for (std::size_t j = 0; j < kNumJoints; ++j)
        if (m[j])
          for (std::size_t d : descendants(j)) CHECK(m[d]);
  }
}
