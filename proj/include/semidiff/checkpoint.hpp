#pragma once

#include "semidiff/score_model.hpp"

#include <filesystem>
#include <string>

namespace semidiff {

// Checkpoint file layout:
//   8 bytes   magic "SDCKPT01"
//   8 bytes   header length L (uint64, little-endian)
//   L bytes   UTF-8 JSON header: architecture, growth caps, seed, n_params, id
//   8*n bytes parameters as little-endian IEEE-754 float64
void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path, const std::string& id = {});
ScoreModel load_checkpoint(const std::filesystem::path& path, std::string* id = nullptr);

std::string checkpoint_bytes(const ScoreModel& model, const std::string& id = {});
ScoreModel checkpoint_from_bytes(const std::string& bytes, std::string* id = nullptr);

}  // namespace semidiff
