#pragma once

#include <filesystem>

#include "lada/dataset.hpp"

namespace lada {

// Binary layout (little-endian):
//   "LADAEMB1", u32 n, u32 d, u32 C,
//   n x { u64 id, u8 domain (0 source, 1 target), i32 label (-1 absent), d x f64 }
// CSV layout: header id,domain,label,f0,...,f{d-1}; domain is source|target.
// Target labels in both formats are the hidden ground truth.

void write_embeddings_binary(const Dataset& ds, const std::filesystem::path& path);
Dataset load_embeddings_binary(const std::filesystem::path& path);

void write_embeddings_csv(const Dataset& ds, const std::filesystem::path& path);
/// `num_classes` of 0 infers C as 1 + the largest label seen.
Dataset load_embeddings_csv(const std::filesystem::path& path, int num_classes = 0);

/// Dispatch on extension: ".csv" is CSV, anything else binary.
void write_embeddings(const Dataset& ds, const std::filesystem::path& path);
Dataset load_embeddings(const std::filesystem::path& path);

}  // namespace lada
