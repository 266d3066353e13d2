#pragma once

#include <map>
#include <string>

#include "ecodse/dataset.hpp"
#include "ecodse/ecognn.hpp"
#include "ecodse/train.hpp"

namespace ecodse {

/// Versioned JSON container: config echo, parameter tensors (row-major),
/// training history, label normalization and the run seed. Canonical output
/// (sorted keys, shortest floats) makes save(load(x)) byte-stable.
struct CheckpointData {
  EcognnModel model;
  std::vector<EpochRecord> history;
  std::map<std::string, AffineNorm> target_norm;  // label units, from the manifest
  std::string run_config;                         // serialized RunConfig echo, may be empty
  std::uint64_t seed = 0;
};

void save_checkpoint(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace ecodse
