"""Vectorized numpy versions of the compiled assembly loops.

Signatures and output layout match ``_kernels.pyx`` exactly.
"""
import numpy as np


def p1_stiffness_triplets(nodes, triangles, coef):
    p = nodes[triangles]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = np.abs(c[:, 2] * b[:, 1] - c[:, 1] * b[:, 2])
    s = coef / (2.0 * area2)
    ke = s[:, None, None] * (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
    rows = np.repeat(triangles, 3, axis=1)
    cols = np.tile(triangles, (1, 3))
    return rows.ravel().astype(np.int64), cols.ravel().astype(np.int64), ke.ravel()


def p1_load(nodes, triangles, f_mid, num_nodes):
    p = nodes[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    w = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / 12.0
    contrib = w[:, None] * (f_mid + np.roll(f_mid, 1, axis=1))
    out = np.zeros(num_nodes)
    np.add.at(out, triangles.ravel(), contrib.ravel())
    return out
