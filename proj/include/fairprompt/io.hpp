#pragma once

#include <fairprompt/types.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fairprompt::io {

/// Named-tensor container behind every on-disk checkpoint: a short text
/// header (kind, tag, metadata, shapes) followed by raw row-major
/// little-endian doubles in header order.
struct Checkpoint {
  std::string kind;  // "encoder" | "prompts"
  std::string tag;   // pre-training strategy or tuning mode
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  std::string meta_value(const std::string& key, const std::string& fallback = "") const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

/// FNV-1a over a file's bytes; used for determinism checks.
std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t len);

/// Append `row` to a CSV, writing `header` first iff the file does not exist.
void append_csv_row(const std::string& path, const std::string& header, const std::string& row);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fairprompt::io
