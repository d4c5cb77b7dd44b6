#include "auxguide/dataset.hpp"

#include <fstream>
#include "json.hpp"

#include "auxguide/error.hpp"

namespace auxguide::dataset {

using json = nlohmann::ordered_json;

namespace {

template <std::size_t W>
json rows_to_json(const features::FeatureSeq<W>& seq) {
  json out = json::array();
  for (std::size_t f = 0; f < seq.frames(); ++f) {
    const auto r = seq.row(f);
    out.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return out;
}

template <std::size_t W>
features::FeatureSeq<W> rows_from_json(const json& rows, std::size_t frames, const char* name) {
  if (!rows.is_array() || rows.size() != frames)
    throw Error(ErrorCode::ParseError, std::string(name) + ": expected " + std::to_string(frames) + " rows");
  std::vector<double> data;
  data.reserve(frames * W);
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != W)
      throw Error(ErrorCode::ParseError,
                  std::string(name) + ": expected rows of width " + std::to_string(W));
    for (const auto& v : r) data.push_back(v.get<double>());
  }
  return features::FeatureSeq<W>(frames, std::move(data));
}

json world_to_json(const features::TrajectoryPair& traj) {
  json heading = json::array(), joints = json::array(), pose = json::array();
  json rot = json::array(), pos = json::array(), fov = json::array();
  for (std::size_t f = 0; f < traj.frames(); ++f) {
    const auto& h = traj.human[f];
    heading.push_back(h.heading);
    std::vector<double> jf;
    jf.reserve(3 * geometry::kNumJoints);
    for (const auto& j : h.joints.joints) jf.insert(jf.end(), j.begin(), j.end());
    joints.push_back(std::move(jf));
    pose.push_back(std::vector<double>(h.pose6d.begin(), h.pose6d.end()));
    const auto& c = traj.camera[f];
    rot.push_back(std::vector<double>(c.rotation.matrix().m.begin(), c.rotation.matrix().m.end()));
    pos.push_back(std::vector<double>(c.position.begin(), c.position.end()));
    fov.push_back(std::vector<double>{c.fov_h, c.fov_v});
  }
  json out;
  out["heading"] = std::move(heading);
  out["joints"] = std::move(joints);
  out["pose6d"] = std::move(pose);
  out["cam_rotation"] = std::move(rot);
  out["cam_position"] = std::move(pos);
  out["fov"] = std::move(fov);
  return out;
}

template <std::size_t N>
std::array<double, N> fixed_row(const json& r, const char* name) {
  if (!r.is_array() || r.size() != N)
    throw Error(ErrorCode::ParseError, std::string("world.") + name + ": bad row width");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = r[i].get<double>();
  return out;
}

features::TrajectoryPair world_from_json(const json& w, std::size_t frames, double fps) {
  features::TrajectoryPair traj;
  traj.fps = fps;
  traj.human.resize(frames);
  traj.camera.resize(frames);
  for (const char* key : {"heading", "joints", "pose6d", "cam_rotation", "cam_position", "fov"})
    if (!w.contains(key) || !w[key].is_array() || w[key].size() != frames)
      throw Error(ErrorCode::ParseError, std::string("world.") + key + ": missing or wrong length");
  for (std::size_t f = 0; f < frames; ++f) {
    auto& h = traj.human[f];
    h.heading = w["heading"][f].get<double>();
    const auto jf = fixed_row<3 * geometry::kNumJoints>(w["joints"][f], "joints");
    for (std::size_t j = 0; j < geometry::kNumJoints; ++j)
      h.joints.joints[j] = {jf[3 * j], jf[3 * j + 1], jf[3 * j + 2]};
    h.pose6d = fixed_row<features::human_cols::kPoseWidth>(w["pose6d"][f], "pose6d");
    auto& c = traj.camera[f];
    geometry::Mat3 m;
    m.m = fixed_row<9>(w["cam_rotation"][f], "cam_rotation");
    c.rotation = geometry::RotationMatrix(m);
    c.position = fixed_row<3>(w["cam_position"][f], "cam_position");
    const auto fov = fixed_row<2>(w["fov"][f], "fov");
    c.fov_h = fov[0];
    c.fov_v = fov[1];
  }
  features::validate(traj);
  return traj;
}

}  // namespace

Record make_record(std::string id, const synthetic::ConditionLabel& label,
                   const features::TrajectoryPair& traj, bool keep_world) {
  Record rec;
  rec.id = std::move(id);
  rec.fps = traj.fps;
  rec.label = label;
  rec.human = features::build_human_features(traj);
  rec.camera = features::build_camera_features(traj);
  rec.framing = features::build_framing_features(traj);
  if (keep_world) rec.world = traj;
  return rec;
}

std::string to_json_line(const Record& rec) {
  json j;
  j["id"] = rec.id;
  j["fps"] = rec.fps;
  j["F"] = rec.frames();
  j["condition_label"] = synthetic::to_string(rec.label);
  j["human"] = rows_to_json(rec.human);
  j["camera"] = rows_to_json(rec.camera);
  j["framing"] = rows_to_json(rec.framing);
  if (rec.world) j["world"] = world_to_json(*rec.world);
  if (rec.latent) {
    json lat = json::array();
    for (std::size_t r = 0; r < rec.latent->rows(); ++r) {
      const auto row = rec.latent->row(r);
      lat.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["latent"] = std::move(lat);
  }
  return j.dump();
}

Record from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  try {
    Record rec;
    rec.id = j.at("id").get<std::string>();
    rec.fps = j.at("fps").get<double>();
    if (!(rec.fps > 0.0)) throw Error(ErrorCode::ParseError, "fps must be positive");
    const auto frames = j.at("F").get<std::size_t>();
    rec.label = synthetic::parse_label(j.at("condition_label").get<std::string>());
    rec.human = rows_from_json<features::kHumanWidth>(j.at("human"), frames, "human");
    rec.camera = rows_from_json<features::kCameraWidth>(j.at("camera"), frames, "camera");
    rec.framing = rows_from_json<features::kFramingWidth>(j.at("framing"), frames, "framing");
    if (j.contains("world")) rec.world = world_from_json(j["world"], frames, rec.fps);
    if (j.contains("latent")) {
      const auto& lat = j["latent"];
      if (!lat.is_array() || lat.empty() || !lat[0].is_array())
        throw Error(ErrorCode::ParseError, "latent must be a non-empty array of rows");
      const std::size_t rows = lat.size(), cols = lat[0].size();
      Matrix m(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (lat[r].size() != cols) throw Error(ErrorCode::ParseError, "ragged latent rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = lat[r][c].get<double>();
      }
      rec.latent = std::move(m);
    }
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed record: ") + e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  for (const auto& rec : records) out << to_json_line(rec) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace auxguide::dataset
