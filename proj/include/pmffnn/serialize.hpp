#pragma once

#include <cstdint>
#include <string>

#include "pmffnn/data.hpp"
#include "pmffnn/model.hpp"

namespace pmffnn {

/// Flat binary container for model parameters and running-stat buffers.
/// Layout (all integers and floats little-endian):
///   magic "PMFFNN01" (8 bytes)
///   u32 tensor_count
///   per tensor: u32 name_len, name bytes, u64 rows, u64 cols,
///               rows*cols f64 values
/// Tensors appear in the model's stable order; loading requires exact
/// name and shape agreement with the target model.
void save_model_params(const std::string& path, ModelGraph& model);
void load_model_params(const std::string& path, ModelGraph& model);

std::uint64_t fnv1a64(const void* data, std::size_t len);

/// "rows:cols:0x<hash>" over features and targets.
std::string dataset_fingerprint(const DatasetTable& table);

/// Writes to a temp file in the same directory, then renames into place.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace pmffnn
