#pragma once

#include <filesystem>
#include <string>

#include "invlab/data/dataset.hpp"

namespace invlab::data {

// PNG (8-bit gray or RGB) ----------------------------------------------------

void write_png(const std::filesystem::path& path, ImageView image);
/// Gray PNGs load with 1 channel; everything else is converted to RGB.
Image read_png(const std::filesystem::path& path);

// Portable layout -------------------------------------------------------------
//
//   DIR/manifest.json
//   DIR/<split>/labels.csv        file,label,id,transform
//   DIR/<split>/images/NNNNNNNN.png
//
// `transform` is empty or one of identity | rotation:<radians> |
// background:<level> | dilate:<k> | erode:<k>.

std::string encode_transform(const nuisance::TransformParams& p);
nuisance::TransformParams decode_transform(const std::string& s);

void write_portable_split(const std::filesystem::path& dir, const LabeledImageDataset& ds);
LabeledImageDataset read_portable_split(const std::filesystem::path& dir, int num_classes,
                                        const std::string& name, const std::string& split);

/// Writes every split plus manifest.json. `extra` is merged into the manifest.
void write_portable(const std::filesystem::path& dir, const DatasetSplits& splits,
                    const nlohmann::json& extra = nlohmann::json::object());
DatasetSplits read_portable(const std::filesystem::path& dir);
bool is_portable_layout(const std::filesystem::path& dir);

// Packed binary -----------------------------------------------------------------
//
// Little-endian: magic "INVLDS01" (8 bytes), uint32 H, W, C, N, then N*H*W*C
// image bytes (HWC per image), then N int32 labels.

void write_packed(const std::filesystem::path& path, const LabeledImageDataset& ds);
LabeledImageDataset read_packed(const std::filesystem::path& path, int num_classes);

}  // namespace invlab::data
