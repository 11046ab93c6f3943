#pragma once

#include <filesystem>
#include <optional>

#include "hmarl/policy.hpp"

namespace hmarl {

// Byte layout (all integers and floats little-endian):
//   [0, 8)    magic "HMARLCK\0"
//   [8, 12)   u32 format version (kCheckpointVersion)
//   [12, 16)  u32 header length H
//   [16, 16+H) header JSON: role, head_spec, input_width, trunk/head layer
//             sizes, frozen, tags, trunk_digest
//   u64 parameter count P, then P float64 values in parameter_blocks() order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const PolicyNet& net, const std::filesystem::path& path);

/// Throws Checkpoint on malformed, truncated or version-mismatched files, and
/// when `expected_role` is set and differs from the stored role.
PolicyNet load_checkpoint(const std::filesystem::path& path, std::optional<PolicyRole> expected_role = std::nullopt);

/// Conventional file name of a low-level controller inside a controller directory.
std::filesystem::path controller_path(const std::filesystem::path& dir, PolicyRole role);

/// Loads attack/engage/defend controllers from `dir`. Controllers whose stored
/// trunks are bit-identical are re-linked to one shared Trunk object.
/// Throws MissingArtifact when a file is absent.
LowLevelPolicySet load_controller_set(const std::filesystem::path& dir);

}  // namespace hmarl
