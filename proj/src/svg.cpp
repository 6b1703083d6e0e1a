#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace sega::detail {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanel = 140.0;
constexpr double kMargin = 50.0;

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string open_svg(double height, const std::string& title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
        "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{:.1f}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        kWidth, height, kWidth / 2.0, escape(title));
}

}  // namespace

std::string histogram_svg(const std::string& title, const std::string& x_label, const std::vector<NamedSeries>& series,
                          int bins) {
    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const auto& s : series)
        for (const double v : s.values) {
            if (!std::isfinite(v)) continue;
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
    if (!(hi > lo)) hi = lo + 1.0;

    const double height = kMargin + kPanel * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 30.0;
    std::string svg = open_svg(height, title);
    const double plot_w = kWidth - 2 * kMargin;
    for (std::size_t p = 0; p < series.size(); ++p) {
        const double top = kMargin + kPanel * static_cast<double>(p);
        const double base = top + kPanel - 30.0;
        std::vector<int> counts(static_cast<std::size_t>(bins), 0);
        for (const double v : series[p].values) {
            if (!std::isfinite(v)) continue;
            auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
            counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1;
        }
        const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kMargin, top + 4.0, escape(series[p].name));
        const double bw = plot_w / bins;
        for (int b = 0; b < bins; ++b) {
            const double h = (kPanel - 45.0) * counts[static_cast<std::size_t>(b)] / peak;
            svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#4c72b0\"/>\n",
                               kMargin + bw * b, base - h, bw - 1.0, h);
        }
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", kMargin,
                           base, kMargin + plot_w, base);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{:.4g}</text>\n", kMargin, base + 14.0, lo);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", kMargin + plot_w,
                           base + 14.0, hi);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n</svg>\n", kWidth / 2.0,
                       height - 8.0, escape(x_label));
    return svg;
}

std::string sobol_bars_svg(const std::string& title, const std::vector<std::string>& factors,
                           const std::vector<IndexGroup>& groups) {
    const double height = kMargin + kPanel * static_cast<double>(std::max<std::size_t>(groups.size(), 1)) + 30.0;
    std::string svg = open_svg(height, title);
    const double plot_w = kWidth - 2 * kMargin;
    const double slot = plot_w / static_cast<double>(std::max<std::size_t>(factors.size(), 1));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double top = kMargin + kPanel * static_cast<double>(g);
        const double base = top + kPanel - 30.0;
        const double scale = kPanel - 45.0;  // index 1.0 = full panel height
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kMargin, top + 4.0, escape(groups[g].name));
        for (std::size_t f = 0; f < factors.size(); ++f) {
            const double x = kMargin + slot * static_cast<double>(f);
            const double s1 = f < groups[g].first_order.size() ? std::clamp(groups[g].first_order[f], 0.0, 1.0) : 0.0;
            const double st = f < groups[g].total_order.size() ? std::clamp(groups[g].total_order[f], 0.0, 1.0) : 0.0;
            svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#4c72b0\"/>\n",
                               x + slot * 0.15, base - s1 * scale, slot * 0.3, s1 * scale);
            svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#dd8452\"/>\n",
                               x + slot * 0.5, base - st * scale, slot * 0.3, st * scale);
            svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", x + slot * 0.5,
                               base + 14.0, escape(factors[f]));
        }
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", kMargin,
                           base, kMargin + plot_w, base);
    }
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">blue: first order, orange: total order</text>\n</svg>\n",
        kWidth / 2.0, height - 8.0);
    return svg;
}

}  // namespace sega::detail
