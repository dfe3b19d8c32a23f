#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "minr/metrics.hpp"
#include "minr/trainer.hpp"

namespace minr {

// Non-finite PSNR values serialize as the string "inf". Wall-clock time is
// left out so that reports of identical runs are byte-identical.
nlohmann::json to_json(const TrainReport& report);
nlohmann::json psnr_json(double value);

// Rounded millions with two decimals, half-up: 466700 -> "0.47".
std::string format_millions(std::size_t count);

std::string loss_csv(const TrainReport& report);
std::string histogram_csv(const Histogram& histogram);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace minr
