#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tfk/model.hpp"
#include "tfk/training.hpp"

namespace tfk {

inline constexpr const char* kCheckpointFormat = "tfk-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON container: config echo, vocabulary, seed, named parameter
/// arrays in declaration order and, optionally, the training state needed to
/// resume. Output is byte-stable for identical inputs.
std::string checkpoint_to_json(const Model& model, const TrainConfig* train_config = nullptr,
                               const TrainState* state = nullptr);

struct LoadedCheckpoint {
  std::optional<Model> model;
  std::optional<TrainConfig> train_config;
  std::optional<TrainState> state;
};

LoadedCheckpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig* train_config = nullptr,
                     const TrainState* state = nullptr);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tfk
