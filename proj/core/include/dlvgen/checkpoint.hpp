#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlvgen/graph.hpp"
#include "dlvgen/tensor.hpp"

namespace dlvgen {

// Checkpoint container. All integers and floats are little-endian.
//
//   magic       8 bytes  "DLVGCKPT"
//   version     u32      1
//   seed        u64
//   config      u32 length + UTF-8 bytes (key = value lines)
//   vocabulary  u32 count, then per token: u32 length + bytes
//   tensors     u32 count, then per tensor:
//                 u32 name length + name bytes
//                 u32 rank, rank x u64 dims
//                 product(dims) x f64 values, row-major
//
// Tensors are written in parameter registration order, so identical runs
// produce identical bytes.
struct Checkpoint {
  std::uint64_t seed = 0;
  std::string config_text;
  std::vector<std::string> vocabulary;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(std::string_view name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies every parameter value into the checkpoint, in store order.
void export_parameters(const ParameterStore& store, Checkpoint& ckpt);
// Loads values by name; every store parameter must be present with the same
// shape.
void import_parameters(const Checkpoint& ckpt, ParameterStore& store);

// 64-bit FNV-1a, used to fingerprint checkpoint files.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
// hex64(fnv1a64()) of a file's bytes.
std::string file_hash(const std::filesystem::path& path);

}  // namespace dlvgen
