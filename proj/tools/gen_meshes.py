#!/usr/bin/env python3
"""Regenerates the shipped unstructured unit-square meshes.

Boundary points are equispaced so opposite sides match under translation;
interior points are k-means centres of a uniform sample, which keeps the
triangulation close to isotropic. Output is deterministic for a fixed seed.
"""
import argparse
import pathlib

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.spatial import Delaunay

PRESETS = {"coarse": (4, 10, 60), "fine": (20, 412, 4)}


def boundary_points(per_side):
    s = np.arange(per_side) / per_side
    return np.concatenate([
        np.column_stack([s, np.zeros_like(s)]),
        np.column_stack([np.ones_like(s), s]),
        np.column_stack([1.0 - s, np.ones_like(s)]),
        np.column_stack([np.zeros_like(s), 1.0 - s]),
    ])


def interior_points(count, per_side, rng):
    margin = 0.6 / per_side
    sample = rng.uniform(margin, 1.0 - margin, size=(max(2000, 40 * count), 2))
    centres, _ = kmeans2(sample, count, minit="++", seed=rng, iter=60)
    return centres


def min_angle(points, tris):
    worst = np.pi
    for t in tris:
        p = points[t]
        for i in range(3):
            a = p[(i + 1) % 3] - p[i]
            b = p[(i + 2) % 3] - p[i]
            cos = a @ b / np.linalg.norm(a) / np.linalg.norm(b)
            worst = min(worst, np.arccos(np.clip(cos, -1.0, 1.0)))
    return worst


def build(per_side, n_interior, seed, attempts):
    best = None
    for attempt in range(attempts):
        rng = np.random.default_rng(seed + attempt)
        pts = np.vstack([boundary_points(per_side), interior_points(n_interior, per_side, rng)])
        tris = Delaunay(pts).simplices.copy()
        for t in tris:
            p = pts[t]
            e1, e2 = p[1] - p[0], p[2] - p[0]
            area = e1[0] * e2[1] - e1[1] * e2[0]
            if area < 0:
                t[1], t[2] = t[2], t[1]
        angle = min_angle(pts, tris)
        if best is None or angle > best[2]:
            best = (pts, tris, angle)
    return best


def write(path, pts, tris):
    with open(path, "w") as out:
        out.write("tri-mesh v1\n")
        out.write(f"vertices {len(pts)}\n")
        for x, y in pts:
            out.write(f"{x:.17g} {y:.17g}\n")
        out.write(f"cells {len(tris)}\n")
        for t in tris:
            out.write(f"{t[0]} {t[1]} {t[2]}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "meshes"))
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    for name, (per_side, n_interior, attempts) in PRESETS.items():
        pts, tris, angle = build(per_side, n_interior, args.seed, attempts)
        write(pathlib.Path(args.out) / f"{name}.msh", pts, tris)
        print(f"{name}: {len(tris)} cells, min angle {np.degrees(angle):.1f} deg")


if __name__ == "__main__":
    main()
