#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "doseforge/doseselect.hpp"

namespace doseforge {

// Static plots built purely from already-computed summaries: axis lines,
// credible bands, and mean paths. No scripting or interactivity.
std::string curve_svg(const std::vector<CurveSummary>& curves,
                      const std::string& title);
std::string contour_svg(const std::vector<Contour>& contours,
                        const std::string& title);

}  // namespace doseforge
