#pragma once

#include "sega/volume.hpp"

#include <string_view>
#include <vector>

namespace sega {

enum class DegenerateFlag { None, EmptyPrediction, EmptyReference };

std::string_view degenerate_flag_name(DegenerateFlag f);

struct MetricResult {
    double dsc = 0.0;
    double hd_mm = 0.0;
    double volume_ml_pred = 0.0;
    double volume_ml_gt = 0.0;
    DegenerateFlag degenerate = DegenerateFlag::None;
};

/// 2|P and G| / (|P| + |G|); 1 when both masks are empty.
/// Throws GeometryMismatch.
double dice(const LabelMask& pred, const LabelMask& gt);

/// Foreground voxels with at least one background 6-neighbour. Voxels
/// outside the grid count as background. Sorted by linear index.
std::vector<Index3> surface_voxels(const LabelMask& mask);

/// Exact squared Euclidean distance (mm^2) from every voxel centre to the
/// nearest foreground voxel centre. Separable lower-envelope transform with
/// per-axis weights spacing^2. Throws EmptyMask.
std::vector<double> squared_distance_transform(const LabelMask& mask);

/// sqrt of squared_distance_transform.
std::vector<double> distance_transform(const LabelMask& mask);

/// Symmetric Hausdorff distance in mm between the surface voxel centre sets.
/// Returns the degenerate penalty when exactly one mask is empty.
double hausdorff(const LabelMask& pred, const LabelMask& gt);

/// Foreground volume in millilitres.
double mask_volume_ml(const LabelMask& mask);

/// All metrics for one prediction/reference pair, with the degenerate-case
/// conventions applied.
MetricResult evaluate_pair(const LabelMask& pred, const LabelMask& gt);

}  // namespace sega
