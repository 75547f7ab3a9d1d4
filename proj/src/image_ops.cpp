#include "creekline/image_ops.hpp"

namespace creekline {

ColorImage crop(const ColorImage& img, const Rect& roi) {
    require_inside(roi, img.width(), img.height(), "crop roi");
    ColorImage out;
    out.r = img.r.block(roi.y, roi.x, roi.height, roi.width);
    out.g = img.g.block(roi.y, roi.x, roi.height, roi.width);
    out.b = img.b.block(roi.y, roi.x, roi.height, roi.width);
    return out;
}

GrayImage to_gray(const ColorImage& img) {
    GrayImage gray = (img.r.cast<double>() * 0.299 + img.g.cast<double>() * 0.587 +
                      img.b.cast<double>() * 0.114) /
                     255.0;
    return gray.min(1.0).max(0.0);
}

}  // namespace creekline
