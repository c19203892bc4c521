#pragma once

#include <string>
#include <vector>

namespace dia {

// Standalone SVG figures with the plotted values embedded as a CSV comment,
// so downstream checks can parse numbers instead of pixels.
std::string svg_scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<double>& xs, const std::vector<double>& ys);

std::string svg_bars(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& heights);

}  // namespace dia
