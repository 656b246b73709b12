#pragma once

#include <string>

#include "rsft/dynamics.hpp"
#include "rsft/state.hpp"

namespace rsft {

/// File layout, all integers and floats little-endian, 8 bytes each:
///   "RSFT-CKPT v1\n"
///   N (u64), phi[N], pi_phi[N], s, pi_s, S0, step_count (u64), lambda,
///   generator id length (u64) + bytes, generator state length (u64) + bytes,
///   FNV-1a 64 checksum (u64) of everything before it.
struct Checkpoint {
    ExtendedState state;
    Generator generator;
};

inline constexpr const char* kCheckpointMagic = "RSFT-CKPT v1\n";

std::string encode_checkpoint(const ExtendedState& state, const Generator& generator);
Checkpoint decode_checkpoint(const std::string& bytes);

/// Written to a temporary file and renamed, so a crash never leaves a torn file.
void write_checkpoint(const ExtendedState& state, const Generator& generator,
                      const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

} // namespace rsft
