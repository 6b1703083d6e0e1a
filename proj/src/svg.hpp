#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sega::detail {

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

/// One histogram panel per series, stacked vertically, shared x range.
std::string histogram_svg(const std::string& title, const std::string& x_label, const std::vector<NamedSeries>& series,
                          int bins = 20);

struct IndexGroup {
    std::string name;
    std::vector<double> first_order;
    std::vector<double> total_order;
};

/// Grouped bars of first/total order indices per factor, one panel per group.
std::string sobol_bars_svg(const std::string& title, const std::vector<std::string>& factors,
                           const std::vector<IndexGroup>& groups);

}  // namespace sega::detail
