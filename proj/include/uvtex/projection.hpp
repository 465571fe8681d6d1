#pragma once

#include <string>

#include "uvtex/render.hpp"
#include "uvtex/tensor.hpp"

namespace uvtex {

// UV-space colors accumulated from image pixels. Valid texels hold the mean
// of their contributors in [-1,1]; invalid texels are exactly 0.
struct PartialTexture {
    Tensor values;             // {3, R, R}
    Tensor valid;              // {R, R}, 0/1
    std::vector<int32_t> hits; // R*R
    int resolution = 0;
};

// Applies the silhouette mask: defined <- defined AND s.
CorrespondenceMap mask_correspondence(const CorrespondenceMap& d, const Silhouette& s);

// Nearest-texel splat with hit-count averaging; colors map [0,1] -> [-1,1]
// via 2c-1. Accumulation runs in double, storage is float.
PartialTexture project(const Tensor& image, const CorrespondenceMap& d_masked, int resolution);

// Morphological erosion of the validity mask (square structuring element of
// side 2*radius+1, out-of-bounds counts as invalid). Values and hits are
// zeroed where validity is removed.
PartialTexture erode_validity(const PartialTexture& u_part, int radius);

// Baseline completion: invalid texels take the per-channel mean of the valid
// region (0 when nothing is valid), valid texels are kept.
Tensor mean_fill(const PartialTexture& u_part);

void save_partial(const std::string& prefix, const PartialTexture& u_part);
PartialTexture load_partial(const std::string& prefix);

// Debug view: valid texels as color, invalid texels magenta. {R,R,3} in [0,1].
Tensor partial_preview(const PartialTexture& u_part);

} // namespace uvtex
