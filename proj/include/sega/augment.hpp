#pragma once

#include "sega/volume.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace sega {

/// Number of augmentation factors: rotation, displacement, gamma, noise.
inline constexpr std::size_t kAugmentationFactors = 4;

/// One point of the four-factor augmentation model.
struct AugmentationParams {
    double alpha_deg = 0.0;  ///< rotation about world z, ~ N(0, 5 deg)
    double d_mm = 0.0;       ///< displacement along world +x, ~ U(0, 2 mm)
    double beta = 0.0;       ///< log-gamma, ~ N(0, 0.05)
    double sigma = 0.0;      ///< noise std in normalized units, ~ U(0, 0.03)
    std::array<double, kAugmentationFactors> unit_point{0.5, 0.0, 0.5, 0.0};
    std::uint64_t noise_seed = 0;

    double gamma() const;
};

struct AugmentedCase {
    VoxelGrid image;  ///< normalized float intensities in [0, 1]
    LabelMask mask;
    AugmentationParams params;
    std::string base_case;
    std::size_t design_row = 0;
};

/// Fixed CT window mapped to [0, 1] before augmentation.
inline constexpr double kWindowLowHu = -1024.0;
inline constexpr double kWindowHighHu = 3071.0;

/// Maps a unit hypercube point to parameters through the inverse CDFs of the
/// four factor distributions. Throws DomainError for coordinates outside [0,1].
AugmentationParams sample_params(const std::array<double, kAugmentationFactors>& unit_point,
                                 std::uint64_t noise_seed);

/// Rotation about world z through the volume centre followed by translation
/// along world +x. Image is trilinearly resampled, mask nearest-neighbour.
/// Out-of-field voxels become 0.
std::pair<VoxelGrid, LabelMask> apply_geometric(const VoxelGrid& image, const LabelMask& mask,
                                                const AugmentationParams& params);

/// v <- clamp(v^gamma + N(0, sigma^2), 0, 1). The noise at voxel i depends only
/// on (noise_seed, i). Throws DomainError if the input is not normalized.
VoxelGrid apply_intensity(const VoxelGrid& image, const AugmentationParams& params);

/// HU window -> [0, 1], clamped. Output is Float32.
VoxelGrid normalize_intensity(const VoxelGrid& image);

/// normalize -> geometric -> intensity.
AugmentedCase augment_case(const VoxelGrid& image, const LabelMask& mask, const AugmentationParams& params,
                           std::string base_case = {}, std::size_t design_row = 0);

/// Standard normal draw for (seed, counter); independent of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t counter);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sega
