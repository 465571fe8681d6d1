#include "uvtex/render.hpp"

#include <algorithm>
#include <cmath>

#include "uvtex/rng.hpp"

namespace uvtex {

namespace {

struct V3 {
    double x, y, z;
};

V3 sub(V3 a, V3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
V3 cross(V3 a, V3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(V3 a) { return std::sqrt(dot(a, a)); }
V3 normalize(V3 a) {
    double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}
V3 tov3(const Vec3& v) { return {v[0], v[1], v[2]}; }

// Vertex in camera space with its linear attributes.
struct ClipVert {
    V3 pos;      // camera space, depth = -pos.z
    double u, v; // uv, affine over the triangle in 3D
};

ClipVert lerp(const ClipVert& a, const ClipVert& b, double t) {
    return {{a.pos.x + t * (b.pos.x - a.pos.x), a.pos.y + t * (b.pos.y - a.pos.y),
             a.pos.z + t * (b.pos.z - a.pos.z)},
            a.u + t * (b.u - a.u),
            a.v + t * (b.v - a.v)};
}

// Sutherland-Hodgman against the near plane depth >= near (z <= -near).
int clip_near(const ClipVert in[3], double near_clip, ClipVert out[4]) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ClipVert& a = in[i];
        const ClipVert& b = in[(i + 1) % 3];
        double da = -a.pos.z - near_clip;
        double db = -b.pos.z - near_clip;
        if (da >= 0) out[n++] = a;
        if ((da >= 0) != (db >= 0)) out[n++] = lerp(a, b, da / (da - db));
    }
    return n;
}

struct ScreenVert {
    double x, y;    // pixel coordinates, y down
    double inv_w;   // 1/depth
    double u_over_w, v_over_w;
};

// Boundary rule for CCW triangles in y-down screen space (top-left).
inline bool edge_accepts_boundary(double dx, double dy) {
    if (dy == 0.0) return dx > 0.0;
    return dy < 0.0;
}

} // namespace

std::array<float, 3> sample_texture(const Tensor& texture, float u, float v) {
    const int r = texture.dim(1);
    float x = u * r - 0.5f, y = v * r - 0.5f;
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    float fx = x - x0, fy = y - y0;
    auto cl = [r](int i) { return std::clamp(i, 0, r - 1); };
    int x1 = cl(x0 + 1), y1 = cl(y0 + 1);
    x0 = cl(x0);
    y0 = cl(y0);
    std::array<float, 3> out{};
    for (int c = 0; c < 3; ++c) {
        float v00 = texture.at(c, y0, x0), v10 = texture.at(c, y0, x1);
        float v01 = texture.at(c, y1, x0), v11 = texture.at(c, y1, x1);
        float val = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
        out[c] = std::clamp(0.5f * (val + 1.0f), 0.0f, 1.0f); // [-1,1] -> [0,1]
    }
    return out;
}

RenderOutput render(const Mesh& mesh, const Tensor& texture, const Camera& cam,
                    const RenderSettings& settings) {
    check(texture.rank() == 3 && texture.dim(0) == 3 && texture.dim(1) == texture.dim(2),
          Err::MismatchedResolution, "texture must be {3,R,R}");
    check(cam.near_clip > 0 && cam.far_clip > cam.near_clip, Err::DegenerateCamera,
          "need 0 < near < far");
    check(cam.vertical_fov > 0 && cam.vertical_fov < M_PI, Err::DegenerateCamera,
          "fov out of range");
    check(cam.width >= 1 && cam.height >= 1, Err::DegenerateCamera, "empty viewport");

    V3 eye = tov3(cam.eye);
    V3 fwd = sub(tov3(cam.look_at), eye);
    check(norm(fwd) > 0, Err::DegenerateCamera, "eye equals look_at");
    fwd = normalize(fwd);
    V3 up = tov3(cam.up);
    V3 right = cross(fwd, up);
    check(norm(right) > 1e-8, Err::DegenerateCamera, "up parallel to view direction");
    right = normalize(right);
    V3 cup = cross(right, fwd);

    const int W = cam.width, H = cam.height;
    const double tan_half = std::tan(cam.vertical_fov / 2.0);
    const double aspect = static_cast<double>(W) / H;

    RenderOutput out;
    out.color = Tensor({H, W, 3});
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) out.color.at(y, x, c) = settings.background[c];
    out.correspondence = CorrespondenceMap(W, H);
    out.silhouette = Silhouette(W, H);
    out.depth.assign(static_cast<size_t>(W) * H, std::numeric_limits<float>::infinity());

    // Camera-space transform of all vertices.
    std::vector<V3> cs(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        V3 d = sub(tov3(mesh.vertices[i]), eye);
        cs[i] = {dot(d, right), dot(d, cup), -dot(d, fwd)}; // looking down -z
    }

    auto to_screen = [&](const ClipVert& cv) {
        double w = -cv.pos.z; // depth > 0
        double xn = cv.pos.x / (w * tan_half * aspect);
        double yn = cv.pos.y / (w * tan_half);
        return ScreenVert{(xn + 1.0) * 0.5 * W, (1.0 - yn) * 0.5 * H, 1.0 / w, cv.u / w,
                          cv.v / w};
    };

    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        ClipVert tri[3];
        for (int k = 0; k < 3; ++k) {
            tri[k].pos = cs[mesh.faces[f][k]];
            tri[k].u = mesh.uv_corners[f][k][0];
            tri[k].v = mesh.uv_corners[f][k][1];
        }
        ClipVert poly[4];
        int n = clip_near(tri, cam.near_clip, poly);
        for (int t = 0; t + 2 < n; ++t) { // fan over n-2 triangles
            ScreenVert s0 = to_screen(poly[0]);
            ScreenVert s1 = to_screen(poly[t + 1]);
            ScreenVert s2 = to_screen(poly[t + 2]);

            double area2 = (s1.x - s0.x) * (s2.y - s0.y) - (s1.y - s0.y) * (s2.x - s0.x);
            if (area2 == 0) continue;
            ScreenVert va = s0, vb = s1, vc = s2;
            if (area2 < 0) {
                std::swap(vb, vc);
                area2 = -area2;
            }

            int x0 = std::max(0, static_cast<int>(std::floor(std::min({va.x, vb.x, vc.x}) - 0.5)));
            int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max({va.x, vb.x, vc.x}))));
            int y0 = std::max(0, static_cast<int>(std::floor(std::min({va.y, vb.y, vc.y}) - 0.5)));
            int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max({va.y, vb.y, vc.y}))));

            for (int py = y0; py <= y1; ++py) {
                for (int px = x0; px <= x1; ++px) {
                    double qx = px + 0.5, qy = py + 0.5;
                    double w0 = ((vc.x - vb.x) * (qy - vb.y) - (vc.y - vb.y) * (qx - vb.x)) / area2;
                    double w1 = ((va.x - vc.x) * (qy - vc.y) - (va.y - vc.y) * (qx - vc.x)) / area2;
                    double w2 = 1.0 - w0 - w1;
                    bool inside = true;
                    const double wv[3] = {w0, w1, w2};
                    const ScreenVert* sv[3] = {&va, &vb, &vc};
                    for (int k = 0; k < 3 && inside; ++k) {
                        if (wv[k] < 0) inside = false;
                        else if (wv[k] == 0) {
                            const ScreenVert* a = sv[(k + 1) % 3];
                            const ScreenVert* b = sv[(k + 2) % 3];
                            if (!edge_accepts_boundary(b->x - a->x, b->y - a->y)) inside = false;
                        }
                    }
                    if (!inside) continue;

                    double inv_w = w0 * va.inv_w + w1 * vb.inv_w + w2 * vc.inv_w;
                    if (inv_w <= 0) continue;
                    double depth = 1.0 / inv_w;
                    if (depth > cam.far_clip) continue;
                    size_t idx = static_cast<size_t>(py) * W + px;
                    if (static_cast<float>(depth) >= out.depth[idx]) continue;

                    double u = (w0 * va.u_over_w + w1 * vb.u_over_w + w2 * vc.u_over_w) / inv_w;
                    double v = (w0 * va.v_over_w + w1 * vb.v_over_w + w2 * vc.v_over_w) / inv_w;
                    u = std::clamp(u, 0.0, 1.0);
                    v = std::clamp(v, 0.0, 1.0);

                    out.depth[idx] = static_cast<float>(depth);
                    out.silhouette.mask[idx] = 1;
                    out.correspondence.defined[idx] = 1;
                    out.correspondence.part[idx] = static_cast<int16_t>(mesh.part_labels[f]);
                    out.correspondence.uv[idx] = {static_cast<float>(u), static_cast<float>(v)};
                    auto rgb = sample_texture(texture, static_cast<float>(u), static_cast<float>(v));
                    for (int c = 0; c < 3; ++c) out.color.at(py, px, c) = rgb[c];
                }
            }
        }
    }
    return out;
}

std::pair<CorrespondenceMap, Silhouette> corrupt_correspondence(const CorrespondenceMap& d,
                                                                const Silhouette& s,
                                                                float noise_sigma, int dilation,
                                                                uint64_t seed) {
    check(noise_sigma >= 0 && dilation >= 0, Err::BadRange,
          "noise_sigma and dilation must be non-negative");
    check(d.width == s.width && d.height == s.height, Err::ResolutionMismatch,
          "correspondence and silhouette disagree");

    CorrespondenceMap out = d;
    if (noise_sigma > 0) {
        Rng rng(seed);
        for (size_t i = 0; i < out.defined.size(); ++i) {
            if (!out.defined[i]) continue;
            float du = static_cast<float>(rng.normal() * noise_sigma);
            float dv = static_cast<float>(rng.normal() * noise_sigma);
            out.uv[i][0] = std::clamp(out.uv[i][0] + du, 0.0f, 1.0f);
            out.uv[i][1] = std::clamp(out.uv[i][1] + dv, 0.0f, 1.0f);
        }
    }

    // Grow the defined region one ring per pass, copying from a fixed
    // neighbor priority so the result is scan-order independent.
    const int W = d.width, H = d.height;
    static const int nx[8] = {-1, 1, 0, 0, -1, 1, -1, 1};
    static const int ny[8] = {0, 0, -1, 1, -1, -1, 1, 1};
    for (int pass = 0; pass < dilation; ++pass) {
        CorrespondenceMap prev = out;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                size_t i = prev.idx(x, y);
                if (prev.defined[i]) continue;
                for (int k = 0; k < 8; ++k) {
                    int ax = x + nx[k], ay = y + ny[k];
                    if (ax < 0 || ax >= W || ay < 0 || ay >= H) continue;
                    size_t j = prev.idx(ax, ay);
                    if (!prev.defined[j]) continue;
                    out.defined[i] = 1;
                    out.part[i] = prev.part[j];
                    out.uv[i] = prev.uv[j];
                    break;
                }
            }
        }
    }
    return {out, s};
}

Tensor correspondence_to_tensor(const CorrespondenceMap& d) {
    Tensor t({d.height, d.width, 4});
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            size_t i = d.idx(x, y);
            t.at(y, x, 0) = d.defined[i] ? 1.0f : 0.0f;
            t.at(y, x, 1) = static_cast<float>(d.part[i]);
            t.at(y, x, 2) = d.uv[i][0];
            t.at(y, x, 3) = d.uv[i][1];
        }
    }
    return t;
}

CorrespondenceMap correspondence_from_tensor(const Tensor& t) {
    check(t.rank() == 3 && t.dim(2) == 4, Err::ShapeMismatch,
          "correspondence tensor must be {H,W,4}");
    CorrespondenceMap d(t.dim(1), t.dim(0));
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            size_t i = d.idx(x, y);
            d.defined[i] = t.at(y, x, 0) != 0.0f;
            d.part[i] = static_cast<int16_t>(t.at(y, x, 1));
            d.uv[i] = {t.at(y, x, 2), t.at(y, x, 3)};
        }
    }
    return d;
}

Tensor silhouette_to_tensor(const Silhouette& s) {
    Tensor t({s.height, s.width});
    for (size_t i = 0; i < s.mask.size(); ++i) t.data[i] = s.mask[i] ? 1.0f : 0.0f;
    return t;
}

Silhouette silhouette_from_tensor(const Tensor& t) {
    check(t.rank() == 2, Err::ShapeMismatch, "silhouette tensor must be {H,W}");
    Silhouette s(t.dim(1), t.dim(0));
    for (size_t i = 0; i < s.mask.size(); ++i) s.mask[i] = t.data[i] != 0.0f;
    return s;
}

} // namespace uvtex
