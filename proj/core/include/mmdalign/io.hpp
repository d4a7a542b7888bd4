#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/mmd.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mmdalign {

/// Plain-text matrix: a "rows cols" line, then one row per line. Values are
/// written in shortest round-trip form, so save -> load is exact.
void save_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix(const std::filesystem::path& path);

/// Per-epoch training snapshot.
///
/// Text layout:
///   mmdalign-checkpoint 1
///   epoch <int>
///   criterion <double>
///   lr <double>
///   config <key> <value>        (zero or more)
///   mapping <d> <d>             followed by d rows
///   projector <p> <d>           followed by p rows
///   offset <d>                  followed by one row
struct Checkpoint {
  int epoch = 0;
  double criterion = 0.0;
  double lr = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
  MappingMatrix mapping;
  Projector projector;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace mmdalign
