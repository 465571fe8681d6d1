#!/usr/bin/env python3
"""Generates assets/humanoid.obj and its parts table.

Six axis-aligned boxes (head, torso, arms, legs), one UV chart per part in a
3x2 atlas grid. Front and back faces get large rectangles because they
dominate the visible surface; top/bottom/left/right share a narrow strip.
Rerun after changing proportions or the chart layout.
"""

import json
import os

PARTS = ["head", "torso", "arm_l", "arm_r", "leg_l", "leg_r"]

# (cx, cy, cz, hx, hy, hz) per part, feet on y=0
BOXES = {
    "head": (0.0, 1.755, 0.0, 0.15, 0.175, 0.15),
    "torso": (0.0, 1.20, 0.0, 0.25, 0.35, 0.125),
    "arm_l": (-0.36, 1.25, 0.0, 0.09, 0.30, 0.09),
    "arm_r": (0.36, 1.25, 0.0, 0.09, 0.30, 0.09),
    "leg_l": (-0.13, 0.425, 0.0, 0.11, 0.425, 0.11),
    "leg_r": (0.13, 0.425, 0.0, 0.11, 0.425, 0.11),
}

# atlas cell (col, row) per part; cells are 1/3 x 1/2
CELLS = {
    "head": (0, 1),
    "torso": (1, 1),
    "arm_l": (2, 1),
    "arm_r": (0, 0),
    "leg_l": (1, 0),
    "leg_r": (2, 0),
}

# rects in cell-local coords (x0, y0, x1, y1); gaps stay wider than one
# texel at a 64-texel atlas so the half-texel seam dilation cannot bridge
# adjacent charts
FACE_RECTS = {
    "front": (0.04, 0.04, 0.40, 0.96),
    "back": (0.48, 0.04, 0.84, 0.96),
    "top": (0.90, 0.78, 0.97, 0.97),
    "bottom": (0.90, 0.5333, 0.97, 0.7233),
    "left": (0.90, 0.2867, 0.97, 0.4767),
    "right": (0.90, 0.04, 0.97, 0.23),
}


def box_corners(cx, cy, cz, hx, hy, hz):
    def c(sx, sy, sz):
        return (cx + sx * hx, cy + sy * hy, cz + sz * hz)

    return {
        (sx, sy, sz): c(sx, sy, sz)
        for sx in (-1, 1)
        for sy in (-1, 1)
        for sz in (-1, 1)
    }


# quads as corner signs, CCW seen from outside, starting lower-left
FACE_QUADS = {
    "front": [(-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)],
    "back": [(1, -1, -1), (-1, -1, -1), (-1, 1, -1), (1, 1, -1)],
    "top": [(-1, 1, 1), (1, 1, 1), (1, 1, -1), (-1, 1, -1)],
    "bottom": [(-1, -1, -1), (1, -1, -1), (1, -1, 1), (-1, -1, 1)],
    "left": [(-1, -1, -1), (-1, -1, 1), (-1, 1, 1), (-1, 1, -1)],
    "right": [(1, -1, 1), (1, -1, -1), (1, 1, -1), (1, 1, 1)],
}


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "assets")
    os.makedirs(out_dir, exist_ok=True)

    vlines, vtlines, flines = [], [], []
    vidx = {}

    def vertex(p):
        if p not in vidx:
            vlines.append("v %.6f %.6f %.6f" % p)
            vidx[p] = len(vlines)
        return vidx[p]

    for part in PARTS:
        corners = box_corners(*BOXES[part])
        col, row = CELLS[part]
        flines.append("g %s" % part)
        for face, quad in FACE_QUADS.items():
            x0, y0, x1, y1 = FACE_RECTS[face]
            u0, v0 = (col + x0) / 3.0, (row + y0) / 2.0
            u1, v1 = (col + x1) / 3.0, (row + y1) / 2.0
            uvs = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]
            vs = [vertex(corners[s]) for s in quad]
            ts = []
            for u, v in uvs:
                vtlines.append("vt %.6f %.6f" % (u, v))
                ts.append(len(vtlines))
            flines.append("f %d/%d %d/%d %d/%d" % (vs[0], ts[0], vs[1], ts[1], vs[2], ts[2]))
            flines.append("f %d/%d %d/%d %d/%d" % (vs[0], ts[0], vs[2], ts[2], vs[3], ts[3]))

    obj_path = os.path.join(out_dir, "humanoid.obj")
    with open(obj_path, "w") as f:
        f.write("# low-poly six-part humanoid, one UV chart per part\n")
        f.write("\n".join(vlines) + "\n")
        f.write("\n".join(vtlines) + "\n")
        f.write("\n".join(flines) + "\n")

    with open(os.path.join(out_dir, "humanoid.parts.json"), "w") as f:
        json.dump({name: i for i, name in enumerate(PARTS)}, f, indent=2)
        f.write("\n")

    print("wrote", obj_path, ":", len(vlines), "vertices,", len(flines) - len(PARTS), "face lines")


if __name__ == "__main__":
    main()
