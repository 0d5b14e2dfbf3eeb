#include "fdrreg/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fdrreg::cli {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

}  // namespace

std::string histogram_svg(std::span<const double> z, std::span<const Curve> curves, const std::string& title, int bins) {
    constexpr double W = 720, H = 420, L = 60, R = 20, T = 40, B = 50;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << xml_escape(title) << "</text>\n";
    if (z.empty()) {
        svg << "</svg>\n";
        return svg.str();
    }
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    double lo = *mn, hi = *mx;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    std::vector<double> dens(static_cast<std::size_t>(bins), 0.0);
    for (double v : z) dens[static_cast<std::size_t>(std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1))] += 1.0;
    for (double& d : dens) d /= static_cast<double>(z.size()) * width;
    double ymax = *std::max_element(dens.begin(), dens.end());
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.x[i] >= lo && c.x[i] <= hi && std::isfinite(c.y[i])) ymax = std::max(ymax, c.y[i]);
        }
    }
    ymax *= 1.05;
    auto px = [&](double x) { return L + (x - lo) / (hi - lo) * (W - L - R); };
    auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };

    for (int b = 0; b < bins; ++b) {
        const double x0 = px(lo + b * width);
        const double x1 = px(lo + (b + 1) * width);
        const double y = py(dens[static_cast<std::size_t>(b)]);
        svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(x1 - x0) << "\" height=\""
            << num(H - B - y) << "\" fill=\"#c8c8c8\" stroke=\"#a0a0a0\" stroke-width=\"0.5\"/>\n";
    }
    int legend = 0;
    for (const auto& c : curves) {
        svg << "<polyline fill=\"none\" stroke=\"" << c.colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (c.x[i] < lo || c.x[i] > hi || !std::isfinite(c.y[i])) continue;
            svg << num(px(c.x[i])) << ',' << num(py(c.y[i])) << ' ';
        }
        svg << "\"/>\n";
        const double ly = T + 10 + 18 * legend++;
        svg << "<line x1=\"" << W - 190 << "\" y1=\"" << ly << "\" x2=\"" << W - 165 << "\" y2=\"" << ly << "\" stroke=\""
            << c.colour << "\" stroke-width=\"2\"/>\n<text x=\"" << W - 158 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(c.label) << "</text>\n";
    }
    // Axes with a handful of ticks.
    svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 6; ++k) {
        const double x = lo + (hi - lo) * k / 6.0;
        svg << "<text x=\"" << num(px(x)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << num(x) << "</text>\n";
    }
    svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">z</text>\n</svg>\n";
    return svg.str();
}

}  // namespace fdrreg::cli
