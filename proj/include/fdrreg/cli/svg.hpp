#pragma once

// Minimal standalone SVG plots.

#include <span>
#include <string>
#include <vector>

namespace fdrreg::cli {

struct Curve {
    std::vector<double> x;
    std::vector<double> y;  // on the density scale
    std::string colour;
    std::string label;
};

// Density-scaled histogram of z with overlaid curves.
std::string histogram_svg(std::span<const double> z, std::span<const Curve> curves, const std::string& title,
                          int bins = 80);

}  // namespace fdrreg::cli
