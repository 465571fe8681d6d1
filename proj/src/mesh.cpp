#include "uvtex/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace uvtex {

namespace {

struct P2 {
    double x, y;
};

inline double cross(P2 a, P2 b) { return a.x * b.y - a.y * b.x; }
inline P2 sub(P2 a, P2 b) { return {a.x - b.x, a.y - b.y}; }

// Boundary fill rule for CCW triangles in (x right, y up) texel space:
// a lattice point exactly on an edge belongs to the triangle iff the edge
// points in -y, or is horizontal pointing +x. Shared edges are then claimed
// by exactly one of the two adjacent triangles.
inline bool edge_accepts_boundary(P2 dir) {
    if (dir.y == 0.0) return dir.x > 0.0;
    return dir.y < 0.0;
}

struct TriXY {
    P2 p[3];       // CCW order in texel coordinates
    int bary_map[3]; // texel-space corner -> original uv corner index
    double area2;  // > 0
    bool degenerate;
};

TriXY make_tri(const std::array<Vec2, 3>& uv, int resolution) {
    TriXY t;
    for (int k = 0; k < 3; ++k) {
        t.p[k] = {static_cast<double>(uv[k][0]) * resolution,
                  static_cast<double>(uv[k][1]) * resolution};
        t.bary_map[k] = k;
    }
    t.area2 = cross(sub(t.p[1], t.p[0]), sub(t.p[2], t.p[0]));
    if (t.area2 < 0) {
        std::swap(t.p[1], t.p[2]);
        std::swap(t.bary_map[1], t.bary_map[2]);
        t.area2 = -t.area2;
    }
    t.degenerate = t.area2 == 0.0;
    return t;
}

// Barycentric weights of q in CCW order; caller remaps via bary_map.
inline void bary_ccw(const TriXY& t, P2 q, double w[3]) {
    w[0] = cross(sub(t.p[2], t.p[1]), sub(q, t.p[1])) / t.area2;
    w[1] = cross(sub(t.p[0], t.p[2]), sub(q, t.p[2])) / t.area2;
    w[2] = 1.0 - w[0] - w[1];
}

inline bool inside_with_rule(const TriXY& t, P2 q, double w[3]) {
    bary_ccw(t, q, w);
    for (int k = 0; k < 3; ++k) {
        double e = w[k];
        if (e < 0) return false;
        if (e == 0) {
            // w[k] == 0 means q lies on the edge opposite corner k,
            // i.e. the edge from p[(k+1)%3] to p[(k+2)%3].
            P2 dir = sub(t.p[(k + 2) % 3], t.p[(k + 1) % 3]);
            if (!edge_accepts_boundary(dir)) return false;
        }
    }
    return true;
}

inline P2 closest_on_segment(P2 q, P2 a, P2 b) {
    P2 ab = sub(b, a);
    double len2 = ab.x * ab.x + ab.y * ab.y;
    double s = len2 > 0 ? ((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return {a.x + s * ab.x, a.y + s * ab.y};
}

inline double dist2(P2 a, P2 b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Distance (texel units) from q to the triangle; 0 when inside.
double tri_distance(const TriXY& t, P2 q, P2* closest) {
    double w[3];
    bary_ccw(t, q, w);
    if (w[0] >= 0 && w[1] >= 0 && w[2] >= 0) {
        *closest = q;
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        P2 c = closest_on_segment(q, t.p[k], t.p[(k + 1) % 3]);
        double d = dist2(q, c);
        if (d < best) {
            best = d;
            *closest = c;
        }
    }
    return std::sqrt(best);
}

// Interior depth of q: distance to the nearest edge line, 0 outside.
double interior_depth(const TriXY& t, P2 q) {
    double w[3];
    bary_ccw(t, q, w);
    if (w[0] < 0 || w[1] < 0 || w[2] < 0) return 0.0;
    double depth = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        P2 a = t.p[k], b = t.p[(k + 1) % 3];
        double len = std::sqrt(dist2(a, b));
        if (len == 0) return 0.0;
        double d = cross(sub(b, a), sub(q, a)) / len;
        depth = std::min(depth, d);
    }
    return std::max(depth, 0.0);
}

std::map<std::string, int> load_parts_table(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), Err::IoError, "cannot open parts table: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Err::IoError, "malformed parts table " + path + ": " + e.what());
    }
    check(j.is_object(), Err::BadConfig, "parts table must be a JSON object: " + path);
    std::map<std::string, int> table;
    for (auto it = j.begin(); it != j.end(); ++it) {
        check(it.value().is_number_integer(), Err::BadConfig,
              "part id must be an integer: " + it.key());
        table[it.key()] = it.value().get<int>();
    }
    return table;
}

std::string default_parts_path(const std::string& obj_path) {
    size_t dot = obj_path.find_last_of('.');
    size_t slash = obj_path.find_last_of('/');
    std::string stem = (dot == std::string::npos || (slash != std::string::npos && dot < slash))
                           ? obj_path
                           : obj_path.substr(0, dot);
    return stem + ".parts.json";
}

} // namespace

Mesh load_mesh(const std::string& obj_path, const std::string& parts_json) {
    std::ifstream in(obj_path);
    check(in.good(), Err::IoError, "cannot open mesh: " + obj_path);
    auto table = load_parts_table(parts_json.empty() ? default_parts_path(obj_path) : parts_json);

    Mesh mesh;
    std::vector<Vec2> uvs;
    std::string current_group;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v{};
            ss >> v[0] >> v[1] >> v[2];
            check(!ss.fail(), Err::IoError, "bad vertex at line " + std::to_string(line_no));
            mesh.vertices.push_back(v);
        } else if (tag == "vt") {
            Vec2 t{};
            ss >> t[0] >> t[1];
            check(!ss.fail(), Err::IoError, "bad texcoord at line " + std::to_string(line_no));
            uvs.push_back(t);
        } else if (tag == "g" || tag == "usemtl" || tag == "o") {
            ss >> current_group;
        } else if (tag == "f") {
            std::vector<int> vi, ti;
            std::string corner;
            while (ss >> corner) {
                size_t s1 = corner.find('/');
                int v = std::stoi(corner.substr(0, s1));
                check(v > 0, Err::BadIndex, "non-positive vertex index at line " +
                                                std::to_string(line_no));
                int t = 0;
                if (s1 != std::string::npos) {
                    size_t s2 = corner.find('/', s1 + 1);
                    std::string ts = corner.substr(s1 + 1, s2 == std::string::npos
                                                               ? std::string::npos
                                                               : s2 - s1 - 1);
                    if (!ts.empty()) t = std::stoi(ts);
                }
                check(t > 0, Err::MissingUVs,
                      "face corner without vt reference at line " + std::to_string(line_no));
                vi.push_back(v - 1);
                ti.push_back(t - 1);
            }
            check(vi.size() >= 3, Err::IoError, "face with <3 corners at line " +
                                                    std::to_string(line_no));
            auto part_it = table.find(current_group);
            check(part_it != table.end(), Err::BadConfig,
                  "group '" + current_group + "' missing from parts table");
            for (int t : ti)
                check(t >= 0 && t < static_cast<int>(uvs.size()), Err::BadIndex,
                      "vt index out of range at line " + std::to_string(line_no));
            // Fan-triangulate polygons.
            for (size_t k = 2; k < vi.size(); ++k) {
                mesh.faces.push_back({vi[0], vi[k - 1], vi[k]});
                mesh.uv_corners.push_back({uvs[ti[0]], uvs[ti[k - 1]], uvs[ti[k]]});
                mesh.part_labels.push_back(part_it->second);
            }
        }
    }
    int max_part = -1;
    for (int p : mesh.part_labels) max_part = std::max(max_part, p);
    mesh.part_count = max_part + 1;
    mesh.part_names.assign(mesh.part_count, "");
    for (const auto& [name, id] : table)
        if (id >= 0 && id < mesh.part_count) mesh.part_names[id] = name;

    validate_mesh(mesh);
    return mesh;
}

void validate_mesh(const Mesh& mesh) {
    check(mesh.faces.size() == mesh.uv_corners.size() &&
              mesh.faces.size() == mesh.part_labels.size(),
          Err::BadIndex, "face attribute arrays disagree in length");
    for (size_t i = 0; i < mesh.faces.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            int v = mesh.faces[i][k];
            check(v >= 0 && v < static_cast<int>(mesh.vertices.size()), Err::BadIndex,
                  "vertex index out of range in face " + std::to_string(i));
            float u = mesh.uv_corners[i][k][0], w = mesh.uv_corners[i][k][1];
            check(u >= 0.f && u <= 1.f && w >= 0.f && w <= 1.f, Err::MissingUVs,
                  "UV outside [0,1] in face " + std::to_string(i));
        }
        check(mesh.part_labels[i] >= 0 && mesh.part_labels[i] < mesh.part_count, Err::BadIndex,
              "part label out of range in face " + std::to_string(i));
    }

    // Chart overlap check on a texel grid: two faces genuinely overlap when
    // some probe center sits deeper than half a texel inside both.
    const int res = 128;
    const double half_texel_diag = 0.5 * std::sqrt(2.0);
    std::vector<TriXY> tris(mesh.faces.size());
    for (size_t i = 0; i < mesh.faces.size(); ++i) tris[i] = make_tri(mesh.uv_corners[i], res);
    std::vector<int> owner(static_cast<size_t>(res) * res, -1);
    for (size_t i = 0; i < tris.size(); ++i) {
        const TriXY& t = tris[i];
        if (t.degenerate) continue;
        int x0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].x, t.p[1].x, t.p[2].x}))));
        int x1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({t.p[0].x, t.p[1].x, t.p[2].x}))));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].y, t.p[1].y, t.p[2].y}))));
        int y1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({t.p[0].y, t.p[1].y, t.p[2].y}))));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                P2 q{x + 0.5, y + 0.5};
                if (interior_depth(t, q) <= half_texel_diag) continue;
                int& cell = owner[static_cast<size_t>(y) * res + x];
                if (cell >= 0 && cell != static_cast<int>(i))
                    fail(Err::OverlappingCharts,
                         "faces " + std::to_string(cell) + " and " + std::to_string(i) +
                             " overlap in the atlas");
                cell = static_cast<int>(i);
            }
        }
    }
}

TexelTable build_texel_table(const Mesh& mesh, int resolution) {
    check(resolution >= 4, Err::BadRange, "texel table resolution must be >= 4");
    validate_mesh(mesh);

    TexelTable table;
    table.resolution = resolution;
    table.entries.assign(static_cast<size_t>(resolution) * resolution, {});
    table.part_of_texel.assign(static_cast<size_t>(resolution) * resolution, -1);

    std::vector<TriXY> tris(mesh.faces.size());
    for (size_t i = 0; i < mesh.faces.size(); ++i)
        tris[i] = make_tri(mesh.uv_corners[i], resolution);

    // Pass 1: texel centers covered by a triangle. Faces iterated in order,
    // first claim wins, which resolves contested boundary texels to the
    // lower face id.
    for (size_t i = 0; i < tris.size(); ++i) {
        const TriXY& t = tris[i];
        if (t.degenerate) continue;
        int x0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].x, t.p[1].x, t.p[2].x}) - 0.5)));
        int x1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({t.p[0].x, t.p[1].x, t.p[2].x}))));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].y, t.p[1].y, t.p[2].y}) - 0.5)));
        int y1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({t.p[0].y, t.p[1].y, t.p[2].y}))));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                auto& entry = table.entries[static_cast<size_t>(y) * resolution + x];
                if (entry.face >= 0) continue;
                double w[3];
                if (!inside_with_rule(t, {x + 0.5, y + 0.5}, w)) continue;
                entry.face = static_cast<int>(i);
                for (int k = 0; k < 3; ++k)
                    entry.bary[t.bary_map[k]] = static_cast<float>(w[k]);
            }
        }
    }

    // Pass 2: half-texel dilation. Empty texels whose center lies within half
    // a texel of a triangle get the closest point's barycentrics.
    std::vector<double> best_dist(table.entries.size(),
                                  std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < tris.size(); ++i) {
        const TriXY& t = tris[i];
        if (t.degenerate) continue;
        int x0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].x, t.p[1].x, t.p[2].x}) - 1.5)));
        int x1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({t.p[0].x, t.p[1].x, t.p[2].x}) + 1.5)));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({t.p[0].y, t.p[1].y, t.p[2].y}) - 1.5)));
        int y1 = std::min(resolution - 1, static_cast<int>(std::ceil(std::max({t.p[0].y, t.p[1].y, t.p[2].y}) + 1.5)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                size_t idx = static_cast<size_t>(y) * resolution + x;
                if (table.entries[idx].face >= 0) continue;
                P2 closest;
                double d = tri_distance(t, {x + 0.5, y + 0.5}, &closest);
                // d == 0 is a boundary center the fill rule already ruled on.
                if (d == 0.0 || d > 0.5 || d >= best_dist[idx]) continue;
                best_dist[idx] = d;
                double w[3];
                bary_ccw(t, closest, w);
                auto& entry = table.entries[idx];
                entry.face = static_cast<int>(i);
                for (int k = 0; k < 3; ++k) {
                    double v = std::clamp(w[k], 0.0, 1.0);
                    entry.bary[t.bary_map[k]] = static_cast<float>(v);
                }
                // Renormalize after clamping.
                float sum = entry.bary[0] + entry.bary[1] + entry.bary[2];
                if (sum > 0)
                    for (float& b : entry.bary) b /= sum;
            }
        }
    }

    for (size_t idx = 0; idx < table.entries.size(); ++idx)
        if (table.entries[idx].face >= 0)
            table.part_of_texel[idx] =
                static_cast<int16_t>(mesh.part_labels[table.entries[idx].face]);
    return table;
}

int64_t TexelTable::covered_count() const {
    int64_t n = 0;
    for (const auto& e : entries) n += e.face >= 0;
    return n;
}

Vec2 surface_to_uv(const Mesh& mesh, int face, const std::array<float, 3>& bary) {
    check(face >= 0 && face < static_cast<int>(mesh.faces.size()), Err::BadIndex,
          "face id out of range");
    float sum = bary[0] + bary[1] + bary[2];
    check(bary[0] >= -1e-6f && bary[1] >= -1e-6f && bary[2] >= -1e-6f &&
              std::fabs(sum - 1.0f) <= 1e-6f,
          Err::BadBarycentric, "barycentric triple must be >= 0 and sum to 1");
    const auto& uv = mesh.uv_corners[face];
    Vec2 out{};
    for (int k = 0; k < 3; ++k) {
        out[0] += bary[k] * uv[k][0];
        out[1] += bary[k] * uv[k][1];
    }
    return out;
}

} // namespace uvtex
