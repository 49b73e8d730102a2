#pragma once

// Binary snapshot files.
//
//   offset  size  field
//   0       4     magic "SMOR"
//   4       4     format version (u32)
//   8       8     rows (u64)
//   16      8     cols (u64)
//   24      8     n_params (u64)
//   32      8     K (u64)
//   40      1     normalized (u8)
//   41      ...   rows * cols f64, column-major
//
// All integers and floats little-endian. A JSON sidecar (<file>.json) holds
// the parameter values, time interval, model id, seed and, for normalized
// sets, the per-parameter initial states.

#include <cstdint>
#include <filesystem>
#include <string>

#include "smor/network.hpp"
#include "smor/reduction.hpp"

namespace smor::io {

inline constexpr std::uint32_t kFormatVersion = 1;

struct SnapshotMeta {
  std::string model;  // wave | sg_single_soliton | sg_doublets
  Index grid = 0;     // N
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;
};

struct SnapshotFile {
  mor::SnapshotSet set;
  SnapshotMeta meta;
};

std::filesystem::path sidecar_path(const std::filesystem::path& file);

/// Throws IoError when the file cannot be written.
void write_snapshot_file(const std::filesystem::path& file,
                         const mor::SnapshotSet& set, const SnapshotMeta& meta);

/// Throws IoError on a bad magic, version or truncated payload.
SnapshotFile read_snapshot_file(const std::filesystem::path& file);

/// Network parameters as JSON (doubles round-trip exactly).
void write_network(const std::filesystem::path& file, const net::Network& net);
net::Network read_network(const std::filesystem::path& file);

}  // namespace smor::io
