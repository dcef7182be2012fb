"""Ground models: flat, slope, stairs, and a seeded random heightfield.

The heightfield is value noise on a uniform lattice with bilinear
interpolation; lattice values come from a position-keyed integer hash so
the surface is reproducible bit-for-bit from the seed alone, with no RNG
state to carry around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def _lattice_unit(seed: int, i: int, j: int) -> float:
    """Deterministic uniform [0,1) value at lattice node (i, j)."""
    h = _splitmix64((seed & 0xFFFFFFFFFFFFFFFF) ^ _splitmix64(i & 0xFFFFFFFFFFFFFFFF))
    h = _splitmix64(h ^ _splitmix64(j & 0xFFFFFFFFFFFFFFFF))
    return h / 2.0**64


@dataclass(frozen=True)
class Terrain:
    """Piecewise ground elevation z(x, y) with outward surface normals."""

    kind: str = "flat"  # flat | slope | stairs | heightfield
    slope_angle: float = 0.0  # rad, ascent along +x
    stair_rise: float = 0.05
    stair_run: float = 0.2
    seed: int = 0
    max_height: float = 0.1
    cell_size: float = 0.15

    def __post_init__(self):
        if self.kind not in ("flat", "slope", "stairs", "heightfield"):
            raise ValueError(f"unknown terrain kind {self.kind!r}")
        if self.kind == "stairs" and (self.stair_rise <= 0 or self.stair_run <= 0):
            raise ValueError("stair rise and run must be positive")
        if self.kind == "heightfield" and self.max_height < 0:
            raise ValueError("heightfield max height must be nonnegative")

    def height(self, x: float, y: float) -> float:
        if self.kind == "flat":
            return 0.0
        if self.kind == "slope":
            return x * math.tan(self.slope_angle)
        if self.kind == "stairs":
            return math.floor(x / self.stair_run) * self.stair_rise
        return self._field_height(x, y)

    def _field_height(self, x: float, y: float) -> float:
        c = self.cell_size
        fx, fy = x / c, y / c
        i, j = math.floor(fx), math.floor(fy)
        tx, ty = fx - i, fy - j
        h00 = _lattice_unit(self.seed, i, j)
        h10 = _lattice_unit(self.seed, i + 1, j)
        h01 = _lattice_unit(self.seed, i, j + 1)
        h11 = _lattice_unit(self.seed, i + 1, j + 1)
        h = (
            h00 * (1 - tx) * (1 - ty)
            + h10 * tx * (1 - ty)
            + h01 * (1 - tx) * ty
            + h11 * tx * ty
        )
        return h * self.max_height

    def normal(self, x: float, y: float) -> np.ndarray:
        if self.kind == "flat" or self.kind == "stairs":
            # stair treads are level; risers are never contact surfaces here
            return np.array([0.0, 0.0, 1.0])
        if self.kind == "slope":
            t = math.tan(self.slope_angle)
            n = np.array([-t, 0.0, 1.0])
            return n / np.linalg.norm(n)
        d = 1e-4
        gx = (self._field_height(x + d, y) - self._field_height(x - d, y)) / (2 * d)
        gy = (self._field_height(x, y + d) - self._field_height(x, y - d)) / (2 * d)
        n = np.array([-gx, -gy, 1.0])
        return n / np.linalg.norm(n)

    def nominal_grade(self) -> float:
        """Average rise per unit +x travel (for body pitch references)."""
        if self.kind == "slope":
            return math.tan(self.slope_angle)
        if self.kind == "stairs":
            return self.stair_rise / self.stair_run
        return 0.0

    def reference_height(self, x: float, y: float) -> float:
        """Smoothed elevation for body references (stairs become a ramp)."""
        if self.kind == "stairs":
            return x * self.nominal_grade()
        if self.kind == "heightfield":
            return 0.5 * self.max_height
        return self.height(x, y)


def terrain_height(terrain: Terrain, x: float, y: float):
    """Elevation and surface normal at (x, y)."""
    return terrain.height(x, y), terrain.normal(x, y)
