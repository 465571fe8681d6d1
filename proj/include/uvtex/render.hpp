#pragma once

#include <array>
#include <limits>
#include <utility>
#include <vector>

#include "uvtex/mesh.hpp"
#include "uvtex/tensor.hpp"

namespace uvtex {

struct Camera {
    Vec3 eye{0, 1, 3.4f};
    Vec3 look_at{0, 1, 0};
    Vec3 up{0, 1, 0};
    float vertical_fov = 0.6f; // radians
    int width = 256;
    int height = 256;
    float near_clip = 0.1f;
    float far_clip = 100.0f;
};

// Per-pixel surface assignment: (part, uv) where a mesh fragment won the
// depth test, undefined elsewhere.
struct CorrespondenceMap {
    int width = 0, height = 0;
    std::vector<uint8_t> defined;
    std::vector<int16_t> part;
    std::vector<Vec2> uv;

    CorrespondenceMap() = default;
    CorrespondenceMap(int w, int h)
        : width(w), height(h), defined(static_cast<size_t>(w) * h, 0),
          part(static_cast<size_t>(w) * h, -1), uv(static_cast<size_t>(w) * h, Vec2{0, 0}) {}
    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

struct Silhouette {
    int width = 0, height = 0;
    std::vector<uint8_t> mask; // exactly 0 or 1

    Silhouette() = default;
    Silhouette(int w, int h) : width(w), height(h), mask(static_cast<size_t>(w) * h, 0) {}
    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

struct RenderOutput {
    Tensor color;                  // {H, W, 3} in [0,1]
    CorrespondenceMap correspondence;
    Silhouette silhouette;
    std::vector<float> depth;      // camera-space depth, +inf where empty
};

struct RenderSettings {
    std::array<float, 3> background{0.5f, 0.5f, 0.5f};
};

// Z-buffered perspective rasterization with perspective-correct UV
// interpolation; color sampled bilinearly (clamp-to-edge) from a {3,R,R}
// texture holding values in [-1,1]. Depth ties go to the lower face id.
RenderOutput render(const Mesh& mesh, const Tensor& texture, const Camera& camera,
                    const RenderSettings& settings = {});

// Bilinear texture lookup used by the renderer; exposed for reuse.
std::array<float, 3> sample_texture(const Tensor& texture, float u, float v);

// Simulates coarse correspondence estimation: jitters defined UVs with
// Gaussian noise (clamped to [0,1]) and dilates the defined region by
// `dilation` pixels, copying nearest defined values. The silhouette is
// returned untouched.
std::pair<CorrespondenceMap, Silhouette> corrupt_correspondence(const CorrespondenceMap& d,
                                                                const Silhouette& s,
                                                                float noise_sigma, int dilation,
                                                                uint64_t seed);

// UVT1 serialization helpers (correspondence as {H,W,4}: defined, part, u, v;
// silhouette as {H,W} of 0/1).
Tensor correspondence_to_tensor(const CorrespondenceMap& d);
CorrespondenceMap correspondence_from_tensor(const Tensor& t);
Tensor silhouette_to_tensor(const Silhouette& s);
Silhouette silhouette_from_tensor(const Tensor& t);

} // namespace uvtex
