#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "auxguide/dataset.hpp"
#include "auxguide/synthetic.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace auxguide;
using namespace auxguide::synthetic;
using testutil::error_code_of;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("labels round-trip through text") {
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    const auto l = ConditionLabel::from_index(i);
    CHECK(l.index() == i);
    CHECK(parse_label(to_string(l)) == l);
  }
  CHECK(to_string(ConditionLabel{MotionClass::WalkLine, CameraClass::Follow}) == "walk-line/follow");
  CHECK(error_code_of([] { parse_label("walk/sideways"); }) == ErrorCode::ParseError);
}

TEST_CASE("stand-wave with static camera keeps the pelvis fixed") {
  GenConfig cfg;
  cfg.seed = 3;
  const auto t = generate_pair({MotionClass::StandWave, CameraClass::Static}, cfg);
  const auto p0 = t.human[0].joints.joints[geometry::Pelvis];
  for (const auto& h : t.human) CHECK(h.joints.joints[geometry::Pelvis] == p0);
  for (const auto& c : t.camera) CHECK(c.position == t.camera[0].position);
}

TEST_CASE("follow camera keeps the pelvis near the centre") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    const auto t = generate_pair({MotionClass::WalkLine, CameraClass::Follow}, cfg);
    std::size_t near = 0;
    for (std::size_t f = 0; f < t.frames(); ++f) {
      const auto p = geometry::project_to_ndc(t.camera[f], t.human[f].joints.joints[geometry::Pelvis]);
      if (p.in_front && std::abs(p.ndc[0]) <= 0.5 && std::abs(p.ndc[1]) <= 0.5) ++near;
    }
    CHECK(near >= (9 * t.frames() + 9) / 10);
  }
}

TEST_CASE("walk-circle closes its loop") {
  GenConfig cfg;
  cfg.seed = 12;
  const auto t = generate_pair({MotionClass::WalkCircle, CameraClass::Orbit}, cfg);
  const auto& a = t.human.front().joints.joints[geometry::Pelvis];
  const auto& b = t.human.back().joints.joints[geometry::Pelvis];
  double span = 0;
  for (const auto& h : t.human)
    span = std::max(span, geometry::norm(geometry::operator-(h.joints.joints[geometry::Pelvis], a)));
  CHECK(span > 0.5);
  // one frame short of a full turn
  CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) < 0.2 * span);
}

TEST_CASE("generation is deterministic and valid") {
  GenConfig cfg;
  cfg.seed = 77;
  cfg.noise_scale = 0.02;
  for (std::size_t i = 0; i < kNumConditions; ++i) {
    const auto l = ConditionLabel::from_index(i);
    const auto a = generate_pair(l, cfg), b = generate_pair(l, cfg);
    const auto ra = dataset::make_record("a", l, a), rb = dataset::make_record("a", l, b);
    CHECK(ra.human == rb.human);
    CHECK(ra.camera == rb.camera);
    CHECK(ra.framing == rb.framing);
    CHECK_NOTHROW(features::validate(a));
    for (const auto& c : a.camera) CHECK_NOTHROW(geometry::validate(c));
    for (const auto& h : a.human)
      for (std::size_t j = 0; j < geometry::kNumJoints; ++j)
        CHECK(geometry::rot6d_to_matrix(geometry::Rot6D::from_flat(
                  std::span(h.pose6d).subspan(6 * j, 6))).matrix().determinant() ==
              doctest::Approx(1.0));
  }
}

TEST_CASE("noise-free motion respects the per-class step bound") {
  for (std::size_t i = 0; i < kNumConditions; ++i)
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      GenConfig cfg;
      cfg.seed = seed;
      cfg.frames = 96;
      const auto l = ConditionLabel::from_index(i);
      const auto t = generate_pair(l, cfg);
      double step = 0;
      for (std::size_t f = 1; f < t.frames(); ++f)
        for (std::size_t j = 0; j < geometry::kNumJoints; ++j)
          step = std::max(step, geometry::norm(geometry::operator-(t.human[f].joints.joints[j],
                                                                   t.human[f - 1].joints.joints[j])));
      CHECK(step <= max_joint_step(l.motion, cfg.fps));
    }
}

TEST_CASE("label assignment") {
  const auto four = assign_labels(4, LabelMix{{1, 1, 1, 1}, {1, 0, 0, 0}}, 1);
  std::map<MotionClass, int> m;
  for (const auto& l : four) ++m[l.motion];
  CHECK(m.size() == 4);
  for (const auto& l : four) CHECK(l.camera == CameraClass::Static);

  const auto many = assign_labels(103, LabelMix{{3, 1, 0, 1}, {1, 1, 1, 1}}, 5);
  std::map<MotionClass, int> mm;
  std::map<CameraClass, int> cc;
  for (const auto& l : many) {
    ++mm[l.motion];
    ++cc[l.camera];
  }
  CHECK(std::abs(mm[MotionClass::WalkLine] - 103 * 0.6) <= 1);
  CHECK(std::abs(mm[MotionClass::WalkCircle] - 103 * 0.2) <= 1);
  CHECK(mm[MotionClass::StandWave] == 0);
  for (auto [k, v] : cc) CHECK(std::abs(v - 103 / 4.0) <= 1);
  CHECK(assign_labels(103, LabelMix{{3, 1, 0, 1}, {1, 1, 1, 1}}, 5) == many);
}

TEST_CASE("dataset generation") {
  const auto dir = std::filesystem::temp_directory_path() / "auxguide_test_synthetic";
  std::filesystem::create_directories(dir);
  GenConfig cfg;
  cfg.frames = 16;
  cfg.seed = 2;
  generate_dataset(1, cfg, {}, dir / "one.jsonl");
  const auto recs = dataset::read_jsonl(dir / "one.jsonl");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].frames() == 16);

  generate_dataset(6, cfg, {}, dir / "a.jsonl");
  generate_dataset(6, cfg, {}, dir / "b.jsonl");
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(dataset::read_jsonl(dir / "a.jsonl").size() == 6);

  CHECK(error_code_of([&] { generate_dataset(1, cfg, {}, dir / "missing" / "x.jsonl"); }) ==
        ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}
