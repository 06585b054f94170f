#pragma once

#include <vector>

#include "vstab/core/warp_field.hpp"

namespace vstab::stab {

/// Axis-aligned rectangle in normalized coordinates, a subset of [-1, 1]^2.
struct CropRegion {
    double left = -1.0;
    double top = -1.0;
    double right = 1.0;
    double bottom = 1.0;

    void validate() const {
        if (!(left < right) || !(top < bottom))
            throw InvalidInputError("CropRegion: empty or inverted rectangle");
        if (left < -1.0 || top < -1.0 || right > 1.0 || bottom > 1.0)
            throw InvalidInputError("CropRegion: outside [-1, 1]^2");
    }

    static CropRegion full() { return {}; }
};

/// Largest axis-aligned pixel rectangle whose warped coordinates stay inside
/// [-1, 1] in every field (the region with no missing content across all
/// frames). Ties resolve by area, then topmost row, then leftmost column,
/// then smallest height. Throws NoValidRegionError when no pixel is valid
/// everywhere.
CropRegion compute_crop_region(const std::vector<WarpField>& fields);
CropRegion compute_crop_region(const std::vector<const WarpField*>& fields);

/// Bilinear resample of the region onto an out_h x out_w frame, stretching
/// directly to the output aspect. The region must span at least 2 px on
/// each axis.
Frame crop_resize(const Frame& frame, const CropRegion& region, Eigen::Index out_h,
                  Eigen::Index out_w);

/// Full-frame crop_resize.
Frame resize_bilinear(const Frame& frame, Eigen::Index out_h, Eigen::Index out_w);

/// Resamples a warp field to a new resolution. Field values are normalized
/// coordinates, so they are resolution independent.
WarpField resize_field(const WarpField& field, Eigen::Index out_h, Eigen::Index out_w);

}  // namespace vstab::stab
