#ifndef SBLAB_LAYOUT_IO_HPP
#define SBLAB_LAYOUT_IO_HPP

#include <string>
#include <vector>

#include "sblab/geometry.hpp"

namespace sblab {

/// Parse and validate a soundboard layout file (key-value sections plus
/// boundary / path / station tables). Station nodes are snapped onto the
/// rasterized bridge chains; a station farther than 0.75 * dx from its
/// bridge is rejected.
SoundboardLayout build_layout(const std::string& path);

SoundboardLayout build_layout_from_string(const std::string& text, const std::string& name);

/// CSV with header x_m,y_m,h_mm; thickness is converted to meters.
std::vector<ThicknessSample> load_thickness_samples(const std::string& path);

void save_thickness_samples(const std::string& path, const std::vector<ThicknessSample>& samples);

} // namespace sblab

#endif
