#!/usr/bin/env python3
"""Generate meshes/stenosis.mesh: an idealized stenosis channel.

Structured 10x10 grid of second-order quads (21x21 nodes), mapped from the
unit square. The channel runs along y in [0, 2] with half-width
w(y) = 0.5 * (1 - 0.4 * exp(-((y-1)/0.25)^2)), x in [-w(y), w(y)].
Tags: inlet (y=0), outlet (y=2), wall (sides).
"""
import math

NX = NY = 10
P = 2


def half_width(y):
    g = (y - 1.0) / 0.25
    return 0.5 * (1.0 - 0.4 * math.exp(-g * g))


def main():
    gw, gh = P * NX + 1, P * NY + 1
    nodes = []
    for j in range(gh):
        for i in range(gw):
            a = 2.0 * i / (gw - 1) - 1.0
            b = 2.0 * j / (gh - 1)
            nodes.append((a * half_width(b), b))

    elems = []
    for ey in range(NY):
        for ex in range(NX):
            el = [(P * ey + b) * gw + P * ex + a for b in range(P + 1) for a in range(P + 1)]
            elems.append(el)

    facets = []
    for ex in range(NX):
        facets.append(("inlet", [P * ex + a for a in range(P + 1)]))
        facets.append(("outlet", [(gh - 1) * gw + P * ex + a for a in range(P + 1)]))
    for ey in range(NY):
        facets.append(("wall", [(P * ey + b) * gw for b in range(P + 1)]))
        facets.append(("wall", [(P * ey + b) * gw + gw - 1 for b in range(P + 1)]))

    with open("meshes/stenosis.mesh", "w") as f:
        f.write("ggn-mesh 1\ndim 2\n")
        f.write(f"nodes {len(nodes)}\n")
        for i, (x, y) in enumerate(nodes):
            f.write(f"{i} {x:.17g} {y:.17g}\n")
        f.write(f"elements {len(elems)}\n")
        for el in elems:
            f.write("quad " + str(P) + " " + " ".join(map(str, el)) + "\n")
        f.write(f"facets {len(facets)}\n")
        for tag, ns in facets:
            f.write(tag + " " + " ".join(map(str, ns)) + "\n")
    print(f"wrote meshes/stenosis.mesh: {len(nodes)} nodes, {len(elems)} elements, "
          f"{len(facets)} facets")


if __name__ == "__main__":
    main()
