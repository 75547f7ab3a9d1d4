#pragma once

#include "creekline/types.hpp"

namespace creekline {

/// Copies the `roi` sub-rectangle. Throws BoundsError if it spills out.
template <typename Scalar>
Plane<Scalar> crop(const Plane<Scalar>& img, const Rect& roi) {
    require_inside(roi, img.cols(), img.rows(), "crop roi");
    return img.block(roi.y, roi.x, roi.height, roi.width);
}

ColorImage crop(const ColorImage& img, const Rect& roi);

/// ITU-R BT.601 luma, normalized to [0, 1].
GrayImage to_gray(const ColorImage& img);

}  // namespace creekline
