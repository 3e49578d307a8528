#pragma once

#include <filesystem>

#include "dcldmd/dcldmd.hpp"
#include "dcldmd/edmdc.hpp"

namespace dcldmd {

/// Single-file JSON model formats. Doubles are written with full
/// round-trip precision; complex matrices are stored as re/im pairs.
void save_dcldmd_model(const DcldmdModel& model, const std::filesystem::path& path);
DcldmdModel load_dcldmd_model(const std::filesystem::path& path);

void save_edmdc_model(const EdmdcModel& model, const std::filesystem::path& path);
EdmdcModel load_edmdc_model(const std::filesystem::path& path);

}  // namespace dcldmd
