#pragma once

#include <array>
#include <string>
#include <vector>

#include "uvtex/tensor.hpp"

namespace uvtex {

using Vec2 = std::array<float, 2>;
using Vec3 = std::array<float, 3>;

// Triangle mesh with per-corner UVs and a per-face body-part label.
// UV charts of distinct faces must not overlap in the atlas.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<std::array<Vec2, 3>> uv_corners; // per face
    std::vector<int> part_labels;                // per face, in [0, part_count)
    int part_count = 0;
    std::vector<std::string> part_names;         // size part_count, may be empty
};

// Loads an OBJ (v / vt / f v/vt) with part labels taken from `g`/`usemtl`
// names via a sidecar JSON table {name: part_id}. If parts_json is empty it
// defaults to <obj path without extension>.parts.json.
Mesh load_mesh(const std::string& obj_path, const std::string& parts_json = "");

// Throws on any invariant violation (MissingUVs / OverlappingCharts / BadIndex).
void validate_mesh(const Mesh& mesh);

// Per-texel surface assignment at a given atlas resolution.
struct TexelTable {
    int resolution = 0;
    struct Entry {
        int face = -1; // -1 == EMPTY
        std::array<float, 3> bary{0, 0, 0};
    };
    std::vector<Entry> entries;        // resolution^2, row-major (v-major)
    std::vector<int16_t> part_of_texel; // -1 == NONE

    const Entry& at(int tx, int ty) const {
        return entries[static_cast<size_t>(ty) * resolution + tx];
    }
    bool covered(int tx, int ty) const { return at(tx, ty).face >= 0; }
    int64_t covered_count() const;
};

// Rasterizes UV triangles over texel centers (boundary ties resolved by a
// fixed fill rule, overlaps by lower face id), then runs one half-texel
// dilation pass that assigns seam texels to their closest triangle.
TexelTable build_texel_table(const Mesh& mesh, int resolution);

// Barycentric combination of the face's three UV corners.
Vec2 surface_to_uv(const Mesh& mesh, int face, const std::array<float, 3>& bary);

} // namespace uvtex
