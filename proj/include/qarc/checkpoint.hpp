#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qarc/tensor.hpp"

namespace qarc {

// Binary checkpoint: magic "QARC", u32 format version, u32 tensor count, then
// per tensor: u32 name length, UTF-8 name, u32 rank, u64 dims, and the values
// as little-endian 64-bit floats. Round-trips bit-exactly.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& os, const std::vector<Parameter>& params);
void save_checkpoint(const std::string& path, const std::vector<Parameter>& params);

std::vector<Parameter> load_checkpoint(std::istream& is);
std::vector<Parameter> load_checkpoint(const std::string& path);

// Loads into an existing parameter set, matching by name; throws if a name is
// missing or a shape disagrees.
void restore_checkpoint(const std::string& path, std::vector<Parameter>& params);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qarc
