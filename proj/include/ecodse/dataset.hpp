#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecodse/graph.hpp"

namespace ecodse {

struct AffineNorm {
  double scale = 1.0;
  double offset = 0.0;

  double denormalize(double v) const { return v * scale + offset; }
  double normalize(double raw) const { return (raw - offset) / scale; }
};

/// One-hot block inside a node feature vector: exactly one 1, or all zeros
/// when the category is absent.
struct FeatureBlock {
  std::string name;
  int size = 0;
};

/// Dataset-level schema. Feature vocabularies are dataset-dependent, so the
/// manifest declares the one-hot blocks and numeric field names instead of
/// the code hard-coding them.
struct DatasetManifest {
  int feature_dim = 0;
  int edge_feature_dim = 0;
  std::vector<FeatureBlock> blocks;
  std::vector<std::string> numeric_fields;  // trailing columns after the blocks
  std::string slot_field;                   // numeric field written by apply_configuration
  std::map<std::string, AffineNorm> normalization;  // per QoR target, label units
  std::uint64_t split_seed = 0;
  double train_fraction = 0.7;
  double test_fraction = 0.15;
  double validation_fraction = 0.15;
  bool self_loops = false;

  void validate() const;
  int slot_feature_index() const;  // column index of slot_field
  int numeric_offset() const;      // first numeric column
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<CdfgGraph> graphs;
};

/// Reads a JSON-lines bundle: one manifest record, then one record per graph.
/// Every graph is validated against the manifest schema.
Dataset load_dataset(const std::string& path);

/// Writes the canonical form: sorted object keys, shortest float repr, one
/// record per line. load(save(x)) is byte-stable.
void save_dataset(const Dataset& dataset, const std::string& path);

std::string manifest_to_json_line(const DatasetManifest& manifest);
std::string graph_to_json_line(const CdfgGraph& graph);

struct DatasetSplit {
  std::vector<CdfgGraph> train;
  std::vector<CdfgGraph> test;
  std::vector<CdfgGraph> validation;
};

/// Deterministic partition given the manifest split seed. Fraction counts are
/// floor-rounded and the remainder goes to train.
DatasetSplit split_dataset(const std::vector<CdfgGraph>& graphs, const DatasetManifest& manifest);

}  // namespace ecodse
