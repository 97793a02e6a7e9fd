#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "filt/params.hpp"
#include "filt/types.hpp"

namespace filt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  ModelDims dims;
  /// Free-form settings stored next to the dimensions (config snapshot, seeds, ...).
  nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

/// Sidecar path holding the metadata: `<path>.meta.json`.
std::filesystem::path metadata_path(const std::filesystem::path& path);

/// Binary layout (little endian): "FILT", u32 version, u32 tensor count, then per
/// tensor u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values.
void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json dims_to_json(const ModelDims& dims);
ModelDims dims_from_json(const nlohmann::json& j);

}  // namespace filt
