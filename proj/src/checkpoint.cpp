#include "auxguide/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>

#include "auxguide/error.hpp"

namespace auxguide::checkpoint {

namespace {

std::string blob_name(const std::string& tensor) {
  std::string out = tensor;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) c = '_';
  return out + ".f64";
}

void write_le(std::ofstream& out, const std::vector<double>& values) {
  static_assert(sizeof(double) == 8);
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

std::vector<double> read_le(std::ifstream& in, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw Error(ErrorCode::IoError, "checkpoint blob truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    out[k] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace

const nn::Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw Error(ErrorCode::ParseError, "checkpoint has no tensor " + name);
}

void save(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["kind"] = ckpt.kind;
  manifest["config"] = ckpt.config;
  manifest["tensors"] = nlohmann::ordered_json::array();
  for (const auto& t : ckpt.tensors) {
    const std::string file = blob_name(t.name);
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / file).string());
    write_le(out, t.value);
    nlohmann::ordered_json entry;
    entry["name"] = t.name;
    entry["shape"] = t.shape;
    entry["file"] = file;
    entry["bytes"] = t.value.size() * 8;
    manifest["tensors"].push_back(std::move(entry));
  }
  std::ofstream mf(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!mf) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir.string());
  mf << manifest.dump(2) << '\n';
}

Checkpoint load(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw Error(ErrorCode::IoError, "no manifest.json in " + dir.string());
  nlohmann::ordered_json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad manifest: ") + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != kFormat)
      throw Error(ErrorCode::ParseError, "unsupported checkpoint format");
    Checkpoint ckpt;
    ckpt.kind = manifest.at("kind").get<std::string>();
    ckpt.config = manifest.at("config");
    for (const auto& entry : manifest.at("tensors")) {
      nn::Tensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      std::size_t count = 1;
      for (auto s : t.shape) count *= s;
      if (entry.at("bytes").get<std::size_t>() != count * 8)
        throw Error(ErrorCode::ParseError, "tensor " + t.name + " byte count does not match shape");
      std::ifstream in(dir / entry.at("file").get<std::string>(), std::ios::binary);
      if (!in) throw Error(ErrorCode::IoError, "missing blob for tensor " + t.name);
      t.value = read_le(in, count);
      t.grad.assign(count, 0.0);
      ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad manifest: ") + e.what());
  }
}

void restore_into(const Checkpoint& ckpt, nn::ParamStore& store) {
  for (auto& t : store.tensors()) {
    const auto& src = ckpt.tensor(t.name);
    if (src.shape != t.shape)
      throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor " + t.name + " has a different shape");
    t.value = src.value;
  }
}

}  // namespace auxguide::checkpoint
