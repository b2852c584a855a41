"""Piecewise-constant coefficient fields: background, crossing channels, corner inclusions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Partition, StructuredMesh


@dataclass(frozen=True)
class CoefficientGeometry:
    """Channel/inclusion layout, with sizes given as fractions of H.

    Each subdomain gets one horizontal and one vertical channel crossing at
    its center.  Continuous channels run edge to edge; otherwise they stop
    one fine-element strip short of the subdomain boundary.  Inclusions are
    squares centered at interior corners of the subdomain grid.
    """

    alpha_b: float = 1.0
    alpha_c: float = 1e4
    alpha_i: float = 1e6
    channel_width_fraction: float = 1.0 / 6.0
    inclusion_side_fraction: float = 1.0 / 3.0
    channels_continuous: bool = False

    def __post_init__(self):
        for name in ("alpha_b", "alpha_c", "alpha_i"):
            if not getattr(self, name) >= 1.0:
                raise ValueError(f"{name} must be >= 1 (coefficients are scaled so min alpha = 1)")
        for name in ("channel_width_fraction", "inclusion_side_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    def with_jumps(self, alpha_c: float, alpha_i: float) -> "CoefficientGeometry":
        return CoefficientGeometry(
            alpha_b=self.alpha_b,
            alpha_c=alpha_c,
            alpha_i=alpha_i,
            channel_width_fraction=self.channel_width_fraction,
            inclusion_side_fraction=self.inclusion_side_fraction,
            channels_continuous=self.channels_continuous,
        )


@dataclass(frozen=True)
class CoefficientField:
    alpha_per_triangle: np.ndarray

    def __post_init__(self):
        a = self.alpha_per_triangle
        if a.ndim != 1 or not np.all(np.isfinite(a)) or a.min() <= 0:
            raise ValueError("coefficient must be a finite positive value per triangle")

    def scaled(self, s: float) -> "CoefficientField":
        return CoefficientField(self.alpha_per_triangle * s)


@dataclass(frozen=True)
class CoefficientExtrema:
    """Per-subdomain min/max of the coefficient over Omega_k and its layer."""

    under: np.ndarray
    over: np.ndarray
    under_delta: np.ndarray
    over_delta: np.ndarray

    def contrast(self) -> np.ndarray:
        return self.over / self.under

    def layer_contrast(self) -> np.ndarray:
        return self.over_delta / self.under_delta


def constant_coefficient(mesh: StructuredMesh, value: float = 1.0) -> CoefficientField:
    return CoefficientField(np.full(mesh.num_triangles, float(value)))


def _in(c, lo, hi, tol=1e-9):
    # half-open [lo, hi) with ties decided as in exact arithmetic; centroids
    # sit on multiples of h/3, far from the tolerance
    return (c >= lo - tol) & (c < hi - tol)


def channel_mask(mesh: StructuredMesh, partition: Partition, geometry: CoefficientGeometry) -> np.ndarray:
    """Triangles whose centroid lies in some subdomain's channel cross."""
    H, h = partition.H, mesh.h
    w = geometry.channel_width_fraction * H
    inset = 0.0 if geometry.channels_continuous else h
    c = mesh.centroids()
    x, y = c[:, 0], c[:, 1]
    mask = np.zeros(mesh.num_triangles, dtype=bool)
    for k in range(partition.num_subdomains):
        x0, y0 = (k % partition.N_side) * H, (k // partition.N_side) * H
        xc, yc = x0 + 0.5 * H, y0 + 0.5 * H
        along_x = _in(x, x0 + inset, x0 + H - inset)
        along_y = _in(y, y0 + inset, y0 + H - inset)
        horizontal = along_x & _in(y, yc - 0.5 * w, yc + 0.5 * w)
        vertical = along_y & _in(x, xc - 0.5 * w, xc + 0.5 * w)
        mask |= horizontal | vertical
    return mask


def inclusion_mask(mesh: StructuredMesh, partition: Partition, geometry: CoefficientGeometry) -> np.ndarray:
    """Triangles whose centroid lies in an inclusion at an interior subdomain corner."""
    H = partition.H
    s = geometry.inclusion_side_fraction * H
    c = mesh.centroids()
    mask = np.zeros(mesh.num_triangles, dtype=bool)
    for I in range(1, partition.N_side):
        for J in range(1, partition.N_side):
            cx, cy = I * H, J * H
            mask |= _in(c[:, 0], cx - 0.5 * s, cx + 0.5 * s) & _in(c[:, 1], cy - 0.5 * s, cy + 0.5 * s)
    return mask


def build_coefficient(
    mesh: StructuredMesh, partition: Partition, geometry: CoefficientGeometry
) -> CoefficientField:
    """Evaluate the geometry on the mesh by centroid membership.

    Overlaps resolve as inclusion over channel over background.

    Raises
    ------
    ValueError
        If a visible channel or inclusion is narrower than h.
    """
    if partition.mesh is not mesh:
        raise ValueError("partition was built on a different mesh")
    H, h = partition.H, mesh.h
    tol = 1e-12 * h
    # a feature equal to the background is invisible and needs no resolution
    if geometry.alpha_c != geometry.alpha_b and geometry.channel_width_fraction * H < h - tol:
        raise ValueError(
            f"channel width {geometry.channel_width_fraction * H:.4g} is below the mesh size h={h:.4g}"
        )
    if geometry.alpha_i != geometry.alpha_b and geometry.inclusion_side_fraction * H < h - tol:
        raise ValueError(
            f"inclusion side {geometry.inclusion_side_fraction * H:.4g} is below the mesh size h={h:.4g}"
        )
    alpha = np.full(mesh.num_triangles, float(geometry.alpha_b))
    alpha[channel_mask(mesh, partition, geometry)] = geometry.alpha_c
    alpha[inclusion_mask(mesh, partition, geometry)] = geometry.alpha_i
    return CoefficientField(alpha)


def coefficient_extrema(partition: Partition, field: CoefficientField) -> CoefficientExtrema:
    a = field.alpha_per_triangle
    if a.shape[0] != partition.mesh.num_triangles:
        raise ValueError("coefficient field does not match the partition's mesh")
    K = partition.num_subdomains
    under, over = np.empty(K), np.empty(K)
    under_d, over_d = np.empty(K), np.empty(K)
    for k in range(K):
        sub = a[partition.subdomain_triangles[k]]
        lay = a[partition.layer_triangles[k]]
        under[k], over[k] = sub.min(), sub.max()
        under_d[k], over_d[k] = lay.min(), lay.max()
    return CoefficientExtrema(under, over, under_d, over_d)
