"""Deterministic rasterizer for scene specs.

Hard-edged shapes (no anti-aliasing) composited over a flat background, then
a per-pixel style remap. Pure numpy float ops, so renders are bit-identical
across runs. Each shape is confined to its own grid cell, which makes edit
locality exact: recoloring an object can only touch pixels inside its cell.
"""
import numpy as np

from chatbrush import DataError
from .types import PALETTE, grid_cell

RESOLUTIONS = (32, 64)

# fraction of the half-cell taken by the shape's outer radius
_SIZE_FRAC = {"small": 0.45, "medium": 0.62, "large": 0.8}

_SEPIA = np.array([
    [0.393, 0.769, 0.189],
    [0.349, 0.686, 0.168],
    [0.272, 0.534, 0.131],
], dtype=np.float32)

_NIGHT = np.array([0.30, 0.30, 0.85], dtype=np.float32)


def _polygon_mask(u, v, verts):
    """Even-odd fill of a polygon given unit-space pixel coords u, v."""
    inside = np.zeros(u.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        crosses = (y1 > v) != (y2 > v)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (x2 - x1) * (v - y1) / (y2 - y1) + x1
        inside ^= crosses & (u < xint)
    return inside


def _star_vertices(points=5, inner=0.42):
    verts = []
    for i in range(points * 2):
        r = 1.0 if i % 2 == 0 else inner
        ang = -np.pi / 2 + i * np.pi / points
        verts.append((r * np.cos(ang), r * np.sin(ang)))
    return verts


_TRIANGLE = [(0.0, -1.0), (np.cos(np.pi / 6), 0.5), (-np.cos(np.pi / 6), 0.5)]
_STAR = _star_vertices()


def shape_mask(shape, u, v):
    """Boolean mask for a unit-radius shape; u, v in shape-local units."""
    if shape == "circle":
        return u * u + v * v <= 1.0
    if shape == "square":
        s = 1.0 / np.sqrt(2.0)
        return np.maximum(np.abs(u), np.abs(v)) <= s
    if shape == "triangle":
        return _polygon_mask(u, v, _TRIANGLE)
    if shape == "star":
        return _polygon_mask(u, v, _STAR)
    if shape == "heart":
        # classic sextic heart curve, y flipped for screen coords
        hu, hv = u * 1.25, -v * 1.25 - 0.2
        lhs = (hu * hu + hv * hv - 1.0) ** 3
        return lhs - hu * hu * hv ** 3 <= 0.0
    raise DataError(f"unknown shape {shape!r}")


def object_mask(obj, resolution):
    cell = resolution / 3.0
    row, col = grid_cell(obj.position)
    cx = (col + 0.5) * cell
    cy = (row + 0.5) * cell
    radius = _SIZE_FRAC[obj.size] * cell / 2.0
    ys, xs = np.mgrid[0:resolution, 0:resolution].astype(np.float64)
    u = (xs + 0.5 - cx) / radius
    v = (ys + 0.5 - cy) / radius
    return shape_mask(obj.shape, u, v)


def object_bbox(obj, resolution):
    """(y0, y1, x0, x1) half-open pixel bounds of the object's grid cell."""
    cell = resolution / 3.0
    row, col = grid_cell(obj.position)
    return (int(np.floor(row * cell)), int(np.ceil((row + 1) * cell)),
            int(np.floor(col * cell)), int(np.ceil((col + 1) * cell)))


def apply_style(img, style):
    if style == "plain":
        return img
    if style == "inverted":
        return (1.0 - img).astype(np.float32)
    if style == "sepia":
        return np.clip(img @ _SEPIA.T, 0.0, 1.0).astype(np.float32)
    if style == "night":
        return (img * _NIGHT).astype(np.float32)
    raise DataError(f"unknown style {style!r}")


def render(scene, resolution=64):
    """Render a scene to an (H, W, 3) float32 image in [0, 1]."""
    if resolution not in RESOLUTIONS:
        raise DataError(f"unsupported resolution {resolution}; choose from {RESOLUTIONS}")
    scene.validate()
    img = np.empty((resolution, resolution, 3), dtype=np.float32)
    img[:] = np.asarray(PALETTE[scene.background], dtype=np.float32)
    for obj in scene.objects:
        mask = object_mask(obj, resolution)
        img[mask] = np.asarray(PALETTE[obj.color], dtype=np.float32)
    return apply_style(img, scene.style)
