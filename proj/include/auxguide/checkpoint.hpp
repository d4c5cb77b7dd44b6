#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "auxguide/nn.hpp"

namespace auxguide::checkpoint {

/// A checkpoint is a directory holding manifest.json plus one raw
/// little-endian float64 blob per tensor (<name>.f64, row-major).
///
/// manifest.json:
///   {"format": "auxguide-checkpoint/1", "kind": "...", "config": {...},
///    "tensors": [{"name": "...", "shape": [...], "file": "...", "bytes": N}, ...]}
struct Checkpoint {
  std::string kind;
  nlohmann::ordered_json config;
  std::vector<nn::Tensor> tensors;

  const nn::Tensor& tensor(const std::string& name) const;
};

inline constexpr const char* kFormat = "auxguide-checkpoint/1";

void save(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load(const std::filesystem::path& dir);

/// Copies tensor values by name into a store; shapes must match.
void restore_into(const Checkpoint& ckpt, nn::ParamStore& store);

}  // namespace auxguide::checkpoint
