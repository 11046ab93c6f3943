#pragma once

#include <string>
#include <vector>

#include "hmarl/explain.hpp"

namespace hmarl {

struct SvgFile {
    std::string name;     // file name, no directory
    std::string content;
};

/// Fixed mode colours used by every heatmap and its legend.
const char* mode_color(Mode m) noexcept;

/// One heatmap per value of `slice_axis`. The two remaining axes become rows
/// (first) and columns (second); each cell is coloured by its argmax mode and
/// tie cells carry a hatch overlay. Throws InvalidInput for an unknown axis or
/// an empty grid.
std::vector<SvgFile> render_heatmaps(const ExplanationGrid& grid, const std::string& slice_axis);

}  // namespace hmarl
