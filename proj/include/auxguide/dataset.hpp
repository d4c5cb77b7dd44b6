#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "auxguide/features.hpp"
#include "auxguide/matrix.hpp"
#include "auxguide/synthetic.hpp"

namespace auxguide::dataset {

/// One line of the JSON-lines dataset file (see docs/dataset_format.md).
struct Record {
  std::string id;
  double fps = 30.0;
  synthetic::ConditionLabel label;
  features::HumanFeatureSeq human;
  features::CameraFeatureSeq camera;
  features::FramingFeatureSeq framing;
  std::optional<features::TrajectoryPair> world;
  std::optional<Matrix> latent;  // present in sampler output only

  std::size_t frames() const noexcept { return human.frames(); }
};

/// Builds the three feature sets from a world trajectory.
Record make_record(std::string id, const synthetic::ConditionLabel& label,
                   const features::TrajectoryPair& traj, bool keep_world = true);

std::string to_json_line(const Record& rec);
Record from_json_line(const std::string& line);

void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_jsonl(const std::filesystem::path& path);

}  // namespace auxguide::dataset
