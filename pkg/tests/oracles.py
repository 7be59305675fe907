"""Independent brute-force oracles.

Everything here is written from the operation definitions directly, with
per-voxel neighborhood scans and no vectorized shortcuts, so it stays an
independent check on the production implementations.
"""
from __future__ import annotations

import math

import numpy as np


def fd_derivative(values, coords, axis):
    """Loop-based finite differences: central interior, one-sided edges."""
    out = np.full(values.shape, np.nan)
    moved = np.moveaxis(values, axis, 0)
    target = np.moveaxis(out, axis, 0)
    n = moved.shape[0]
    for i in range(n):
        if 0 < i < n - 1:
            target[i] = (moved[i + 1] - moved[i - 1]) / (coords[i + 1] - coords[i - 1])
        elif i == 0 and n > 1:
            target[i] = (moved[1] - moved[0]) / (coords[1] - coords[0])
        elif i == n - 1 and n > 1:
            target[i] = (moved[n - 1] - moved[n - 2]) / (coords[n - 1] - coords[n - 2])
    return out


def boundary_bits(iso):
    """3x3 mean per slice, strictly inside (0,1), intersected with iso."""
    nd, nlat, nlon = iso.shape
    out = np.zeros_like(iso)
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                if iso[d, i, j] != 1:
                    continue
                total = 0
                count = 0
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        ni, nj = i + di, j + dj
                        if 0 <= ni < nlat and 0 <= nj < nlon:
                            total += int(iso[d, ni, nj])
                            count += 1
                mean = total / count
                if 0.0 < mean < 1.0:
                    out[d, i, j] = 1
    return out


def north_facing_bits(boundary, iso):
    nd, nlat, nlon = iso.shape
    out = np.zeros_like(boundary)
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                if boundary[d, i, j] != 1:
                    continue
                if i + 1 >= nlat or iso[d, i + 1, j] == 0:
                    out[d, i, j] = 1
    return out


def group_labels(nf, n):
    """Dilate into n x n x 2 (one level down), label by BFS with
    26-connectivity, multiply back onto the undilated grid."""
    nd, nlat, nlon = nf.shape
    h = n // 2
    dilated = np.zeros_like(nf)
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                if nf[d, i, j] != 1:
                    continue
                for dd in (0, 1):
                    for di in range(-h, h + 1):
                        for dj in range(-h, h + 1):
                            zd, zi, zj = d + dd, i + di, j + dj
                            if 0 <= zd < nd and 0 <= zi < nlat and 0 <= zj < nlon:
                                dilated[zd, zi, zj] = 1
    labels = np.zeros(nf.shape, dtype=np.int32)
    next_label = 0
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                if dilated[d, i, j] != 1 or labels[d, i, j] != 0:
                    continue
                next_label += 1
                stack = [(d, i, j)]
                labels[d, i, j] = next_label
                while stack:
                    cd, ci, cj = stack.pop()
                    for dd in (-1, 0, 1):
                        for di in (-1, 0, 1):
                            for dj in (-1, 0, 1):
                                zd, zi, zj = cd + dd, ci + di, cj + dj
                                if (
                                    0 <= zd < nd and 0 <= zi < nlat and 0 <= zj < nlon
                                    and dilated[zd, zi, zj] == 1
                                    and labels[zd, zi, zj] == 0
                                ):
                                    labels[zd, zi, zj] = next_label
                                    stack.append((zd, zi, zj))
    front_labels = labels * nf
    # compress to contiguous 1..K preserving first-appearance order
    seen = {}
    out = np.zeros_like(front_labels)
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                lab = front_labels[d, i, j]
                if lab:
                    if lab not in seen:
                        seen[lab] = len(seen) + 1
                    out[d, i, j] = seen[lab]
    return out


def arcs_between(labels_t, labels_t1, n):
    """Per-voxel disk scan: every labeled voxel at t collects all labels of
    t+1 within the radius-n disk at the same depth."""
    nd, nlat, nlon = labels_t.shape
    pairs = set()
    offsets = [
        (di, dj)
        for di in range(-n, n + 1)
        for dj in range(-n, n + 1)
        if di * di + dj * dj <= n * n
    ]
    for d in range(nd):
        for i in range(nlat):
            for j in range(nlon):
                a = labels_t[d, i, j]
                if a == 0:
                    continue
                for di, dj in offsets:
                    ni, nj = i + di, j + dj
                    if 0 <= ni < nlat and 0 <= nj < nlon:
                        b = labels_t1[d, ni, nj]
                        if b != 0:
                            pairs.add((int(a), int(b)))
    return pairs


def front_pipeline(salinity_steps, threshold, n):
    """Whole brute-force tracking pipeline on a list of (D, NLat, NLon)
    salinity arrays. Returns (labelings, arcs) with arcs[(t, a, b)]."""
    labelings = []
    for vol in salinity_steps:
        iso = np.where(np.isnan(vol), 0, (vol >= threshold).astype(np.uint8))
        bnd = boundary_bits(iso)
        nf = north_facing_bits(bnd, iso)
        labelings.append(group_labels(nf, n))
    arcs = set()
    for t in range(len(labelings) - 1):
        for a, b in arcs_between(labelings[t], labelings[t + 1], n):
            arcs.add((t, a, b))
    return labelings, arcs


def bilinear_point(values2d, lat, lon, lat_q, lon_q):
    """Scalar bilinear interpolation with NaN corner poisoning."""
    i = int(np.searchsorted(lat, lat_q, side="right")) - 1
    j = int(np.searchsorted(lon, lon_q, side="right")) - 1
    i = min(max(i, 0), len(lat) - 2)
    j = min(max(j, 0), len(lon) - 2)
    wi = (lat_q - lat[i]) / (lat[i + 1] - lat[i])
    wj = (lon_q - lon[j]) / (lon[j + 1] - lon[j])
    corners = [values2d[i, j], values2d[i, j + 1], values2d[i + 1, j], values2d[i + 1, j + 1]]
    if any(math.isnan(c) for c in corners):
        if (wi in (0.0, 1.0)) and (wj in (0.0, 1.0)):
            return corners[int(wi) * 2 + int(wj)]
        return math.nan
    return (
        (1 - wi) * ((1 - wj) * corners[0] + wj * corners[1])
        + wi * ((1 - wj) * corners[2] + wj * corners[3])
    )
