#pragma once

#include <cstdint>
#include <filesystem>

#include "graphdialog/model.hpp"

namespace graphdialog {

inline constexpr char kCheckpointMagic[8] = {'G', 'D', 'L', 'G', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little endian): magic, u32 version, config text, word
// vocabulary with tag flags, entity vocabulary, then every parameter as
// name, u32 rows, u32 cols and row-major f64 values.
void save_checkpoint(const GraphDialogModel& model, const std::filesystem::path& path);

// Throws VersionError on a foreign magic, an unknown version, or a
// parameter set that does not match the stored config.
GraphDialogModel load_checkpoint(const std::filesystem::path& path);

}  // namespace graphdialog
