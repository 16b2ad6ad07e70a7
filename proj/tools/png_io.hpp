#pragma once

#include <string>

#include "tpsalign/feature_map.hpp"

namespace tpsalign::cli {

/// 8-bit PNG -> unit-range floats. Gray, gray+alpha, RGB and RGBA are kept
/// as 1, 2, 3 or 4 channels; palettes expand to RGB(A); 16-bit is reduced.
FeatureMap<double> read_png(const std::string& path);

/// Channels 1-4 as above; values are clamped to [0, 1] and rounded.
void write_png(const std::string& path, const FeatureMap<double>& image);

} // namespace tpsalign::cli
