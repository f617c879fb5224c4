#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentopt/tensor.hpp"

namespace latentopt {

/// Reads binary (P6) or ASCII (P3) PPM, or 8-bit RGB/RGBA/gray PNG, chosen
/// by extension. Values are scaled to [0, 1]; RGBA drops alpha.
ImageTensor read_image(const std::filesystem::path& path);

/// 8-bit PPM (P6). Requires 3 channels.
void write_ppm(const std::filesystem::path& path, const ImageTensor& image);

/// 8-bit PNG, 1 or 3 channels. `comment`, when non-empty, goes into a tEXt chunk.
void write_png(const std::filesystem::path& path, const ImageTensor& image, const std::string& comment = {});

/// Writes any image by extension (.png or .ppm).
void write_image(const std::filesystem::path& path, const ImageTensor& image, const std::string& comment = {});

/// Raw little-endian float32 values at `path` plus a JSON sidecar at
/// `path` + ".json" holding {"shape": [...], "dtype": "f32"} merged with `extra`.
void write_f32_dump(const std::filesystem::path& path, const std::vector<double>& values, const std::vector<int>& shape,
                    const nlohmann::json& extra = nlohmann::json::object());

struct F32Dump {
  std::vector<int> shape;
  std::vector<double> values;
  nlohmann::json sidecar;
};

F32Dump read_f32_dump(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace latentopt
