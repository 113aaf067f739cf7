#!/usr/bin/env python3
"""Generate meshes/notch.mesh: a notched rectangle with 55 linear triangles.

Rectangle [-0.4, 1.6] x [0, 1] with a V-notch cut into the top edge
(opening (0.45,1)-(0.75,1), apex (0.6,0.5)). Boundary tags: left (x=-0.4),
right (x=1.6), other. Scans the target edge length until the Delaunay
triangulation of the sampled point set has exactly 55 elements.
"""
import sys

import numpy as np
from matplotlib.path import Path
from scipy.spatial import Delaunay

POLY = np.array([
    [-0.4, 0.0], [1.6, 0.0], [1.6, 1.0],
    [0.75, 1.0], [0.6, 0.5], [0.45, 1.0], [-0.4, 1.0],
])


def sample_points(h):
    pts = [tuple(p) for p in POLY]
    n_poly = len(POLY)
    for i in range(n_poly):
        a, b = POLY[i], POLY[(i + 1) % n_poly]
        n = max(1, int(round(np.linalg.norm(b - a) / h)))
        for k in range(1, n):
            pts.append(tuple(a + (b - a) * k / n))
    path = Path(POLY)
    xs = np.arange(-0.4 + h, 1.6, h)
    ys = np.arange(h, 1.0, h)
    for x in xs:
        for y in ys:
            p = (x, y)
            if path.contains_point(p, radius=-0.55 * h):
                pts.append(p)
    return np.array(pts)


def triangulate(h):
    pts = sample_points(h)
    tri = Delaunay(pts)
    path = Path(POLY)
    keep = []
    for t in tri.simplices:
        c = pts[t].mean(axis=0)
        if path.contains_point(c, radius=-1e-9):
            keep.append(t)
    return pts, np.array(keep)


def main():
    for h in np.linspace(0.2, 0.5, 301):
        pts, tris = triangulate(h)
        if len(tris) == 55:
            break
    else:
        sys.exit("no edge length in the scanned range gives 55 triangles")
    print(f"h = {h:.4f}, {len(tris)} triangles, {len(pts)} points sampled")

    used = sorted({int(i) for t in tris for i in t})
    remap = {o: n for n, o in enumerate(used)}
    nodes = pts[used]
    elems = []
    for t in tris:
        a, b, c = (nodes[remap[i]] for i in t)
        if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0:
            t = t[[0, 2, 1]]
        elems.append([remap[int(i)] for i in t])

    edge_count = {}
    for e, t in enumerate(elems):
        for i in range(3):
            key = tuple(sorted((t[i], t[(i + 1) % 3])))
            edge_count[key] = edge_count.get(key, 0) + 1
    facets = []
    for (a, b), cnt in sorted(edge_count.items()):
        if cnt != 1:
            continue
        xa, xb = nodes[a][0], nodes[b][0]
        if abs(xa + 0.4) < 1e-9 and abs(xb + 0.4) < 1e-9:
            tag = "left"
        elif abs(xa - 1.6) < 1e-9 and abs(xb - 1.6) < 1e-9:
            tag = "right"
        else:
            tag = "other"
        facets.append((tag, a, b))

    with open("meshes/notch.mesh", "w") as f:
        f.write("ggn-mesh 1\ndim 2\n")
        f.write(f"nodes {len(nodes)}\n")
        for i, (x, y) in enumerate(nodes):
            f.write(f"{i} {x:.17g} {y:.17g}\n")
        f.write(f"elements {len(elems)}\n")
        for t in elems:
            f.write(f"simplex 1 {t[0]} {t[1]} {t[2]}\n")
        f.write(f"facets {len(facets)}\n")
        for tag, a, b in facets:
            f.write(f"{tag} {a} {b}\n")
    print(f"wrote meshes/notch.mesh: {len(nodes)} nodes, {len(elems)} elements, "
          f"{len(facets)} facets")


if __name__ == "__main__":
    main()
