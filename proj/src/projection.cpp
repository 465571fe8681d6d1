#include "uvtex/projection.hpp"

#include <algorithm>
#include <cmath>

#include "uvtex/tensor_io.hpp"

namespace uvtex {

CorrespondenceMap mask_correspondence(const CorrespondenceMap& d, const Silhouette& s) {
    check(d.width == s.width && d.height == s.height, Err::ResolutionMismatch,
          "correspondence and silhouette disagree");
    CorrespondenceMap out(d.width, d.height);
    for (size_t i = 0; i < d.defined.size(); ++i) {
        if (d.defined[i] && s.mask[i]) {
            out.defined[i] = 1;
            out.part[i] = d.part[i];
            out.uv[i] = d.uv[i];
        }
    }
    return out;
}

PartialTexture project(const Tensor& image, const CorrespondenceMap& d_masked, int resolution) {
    check(image.rank() == 3 && image.dim(2) == 3, Err::ShapeMismatch, "image must be {H,W,3}");
    check(image.dim(0) == d_masked.height && image.dim(1) == d_masked.width,
          Err::ResolutionMismatch, "image resolution does not match correspondence map");
    check(resolution >= 1, Err::BadRange, "resolution must be positive");

    const int R = resolution;
    std::vector<double> acc(static_cast<size_t>(3) * R * R, 0.0);
    PartialTexture out;
    out.resolution = R;
    out.values = Tensor({3, R, R});
    out.valid = Tensor({R, R});
    out.hits.assign(static_cast<size_t>(R) * R, 0);

    for (int y = 0; y < d_masked.height; ++y) {
        for (int x = 0; x < d_masked.width; ++x) {
            size_t i = d_masked.idx(x, y);
            if (!d_masked.defined[i]) continue;
            int tx = std::clamp(static_cast<int>(d_masked.uv[i][0] * R), 0, R - 1);
            int ty = std::clamp(static_cast<int>(d_masked.uv[i][1] * R), 0, R - 1);
            size_t t = static_cast<size_t>(ty) * R + tx;
            for (int c = 0; c < 3; ++c)
                acc[static_cast<size_t>(c) * R * R + t] += 2.0 * image.at(y, x, c) - 1.0;
            out.hits[t] += 1;
        }
    }
    for (int ty = 0; ty < R; ++ty) {
        for (int tx = 0; tx < R; ++tx) {
            size_t t = static_cast<size_t>(ty) * R + tx;
            if (out.hits[t] == 0) continue;
            out.valid.at(ty, tx) = 1.0f;
            for (int c = 0; c < 3; ++c)
                out.values.at(c, ty, tx) =
                    static_cast<float>(acc[static_cast<size_t>(c) * R * R + t] / out.hits[t]);
        }
    }
    return out;
}

PartialTexture erode_validity(const PartialTexture& u_part, int radius) {
    check(radius >= 0, Err::BadRange, "radius must be non-negative");
    if (radius == 0) return u_part;
    const int R = u_part.resolution;
    PartialTexture out = u_part;
    for (int ty = 0; ty < R; ++ty) {
        for (int tx = 0; tx < R; ++tx) {
            bool keep = u_part.valid.at(ty, tx) != 0.0f;
            for (int dy = -radius; dy <= radius && keep; ++dy) {
                for (int dx = -radius; dx <= radius && keep; ++dx) {
                    int ax = tx + dx, ay = ty + dy;
                    if (ax < 0 || ax >= R || ay < 0 || ay >= R ||
                        u_part.valid.at(ay, ax) == 0.0f)
                        keep = false;
                }
            }
            if (!keep && u_part.valid.at(ty, tx) != 0.0f) {
                out.valid.at(ty, tx) = 0.0f;
                out.hits[static_cast<size_t>(ty) * R + tx] = 0;
                for (int c = 0; c < 3; ++c) out.values.at(c, ty, tx) = 0.0f;
            }
        }
    }
    return out;
}

Tensor mean_fill(const PartialTexture& u_part) {
    const int R = u_part.resolution;
    double sum[3] = {0, 0, 0};
    int64_t n = 0;
    for (int ty = 0; ty < R; ++ty) {
        for (int tx = 0; tx < R; ++tx) {
            if (u_part.valid.at(ty, tx) == 0.0f) continue;
            ++n;
            for (int c = 0; c < 3; ++c) sum[c] += u_part.values.at(c, ty, tx);
        }
    }
    float fill[3] = {0, 0, 0};
    if (n > 0)
        for (int c = 0; c < 3; ++c) fill[c] = static_cast<float>(sum[c] / n);
    Tensor out = u_part.values;
    for (int ty = 0; ty < R; ++ty)
        for (int tx = 0; tx < R; ++tx)
            if (u_part.valid.at(ty, tx) == 0.0f)
                for (int c = 0; c < 3; ++c) out.at(c, ty, tx) = fill[c];
    return out;
}

void save_partial(const std::string& prefix, const PartialTexture& u_part) {
    save_uvt(prefix + "_values.uvt", u_part.values);
    save_uvt(prefix + "_valid.uvt", u_part.valid);
}

PartialTexture load_partial(const std::string& prefix) {
    PartialTexture out;
    out.values = load_uvt(prefix + "_values.uvt");
    out.valid = load_uvt(prefix + "_valid.uvt");
    check(out.values.rank() == 3 && out.values.dim(0) == 3 && out.valid.rank() == 2 &&
              out.values.dim(1) == out.valid.dim(0) && out.values.dim(2) == out.valid.dim(1),
          Err::ShapeMismatch, "partial texture files disagree: " + prefix);
    out.resolution = out.valid.dim(0);
    out.hits.assign(out.valid.data.size(), 0);
    for (size_t i = 0; i < out.valid.data.size(); ++i)
        out.hits[i] = out.valid.data[i] != 0.0f ? 1 : 0;
    return out;
}

Tensor partial_preview(const PartialTexture& u_part) {
    const int R = u_part.resolution;
    Tensor img({R, R, 3});
    for (int ty = 0; ty < R; ++ty) {
        for (int tx = 0; tx < R; ++tx) {
            if (u_part.valid.at(ty, tx) != 0.0f) {
                for (int c = 0; c < 3; ++c)
                    img.at(ty, tx, c) =
                        std::clamp(0.5f * (u_part.values.at(c, ty, tx) + 1.0f), 0.0f, 1.0f);
            } else {
                img.at(ty, tx, 0) = 1.0f;
                img.at(ty, tx, 1) = 0.0f;
                img.at(ty, tx, 2) = 1.0f;
            }
        }
    }
    return img;
}

} // namespace uvtex
