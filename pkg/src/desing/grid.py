"""Single-chart tensor-product grids with labeled boundary faces.

A chart grid covers a closed coordinate box with n >= 3 equispaced nodes
per axis.  Every face is either "physical" (part of the manifold boundary,
carrying a boundary operator) or "truncation" (an artificial cut, e.g. at
the tip of a cusp, receiving reference data instead).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, DomainError

PHYSICAL = "physical"
TRUNCATION = "truncation"


@dataclass(frozen=True, order=True)
class Face:
    """One of the 2m faces of the coordinate box: (axis, side 0=low/1=high)."""

    axis: int
    side: int

    @property
    def name(self) -> str:
        return f"x{self.axis + 1}_{'lo' if self.side == 0 else 'hi'}"

    @staticmethod
    def from_name(name: str) -> "Face":
        try:
            core, end = name.rsplit("_", 1)
            axis = int(core[1:]) - 1
            side = {"lo": 0, "hi": 1}[end]
        except Exception as exc:
            raise ConfigurationError(f"bad face name {name!r}") from exc
        return Face(axis, side)


@dataclass(frozen=True)
class ChartGrid:
    """Equispaced node lattice on a coordinate box with face roles."""

    lo: tuple
    hi: tuple
    shape: tuple
    face_roles: Mapping[Face, str] = field(default_factory=dict)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", shape)
        if not (len(lo) == len(hi) == len(shape)):
            raise DomainError("lo/hi/shape must agree in length")
        if len(shape) < 1:
            raise DomainError("grid dimension must be >= 1")
        if any(n < 3 for n in shape):
            raise DomainError(f"need >= 3 nodes per axis, got {shape}")
        if any(b <= a for a, b in zip(lo, hi)):
            raise DomainError("each extent must have positive length")
        roles = dict(self.face_roles)
        for f in self.all_faces():
            roles.setdefault(f, PHYSICAL)
        for f, role in roles.items():
            if not isinstance(f, Face) or f.axis >= len(shape):
                raise ConfigurationError(f"face {f} not on this grid")
            if role not in (PHYSICAL, TRUNCATION):
                raise ConfigurationError(f"unknown face role {role!r}")
        object.__setattr__(self, "face_roles", roles)

    # -- basic geometry -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (n - 1) for a, b, n in zip(self.lo, self.hi, self.shape))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        return np.linspace(self.lo[axis], self.hi[axis], self.shape[axis])

    @cached_property
    def coords(self) -> tuple:
        """Meshgrid coordinate arrays, one per axis, each of grid shape."""
        axes = [self.axis_coords(k) for k in range(self.m)]
        out = tuple(np.meshgrid(*axes, indexing="ij"))
        for arr in out:
            arr.flags.writeable = False
        return out

    def center(self) -> tuple:
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    # -- faces ----------------------------------------------------------
    def all_faces(self):
        return [Face(ax, side) for ax in range(len(self.shape)) for side in (0, 1)]

    def faces_with_role(self, role: str):
        return [f for f in self.all_faces() if self.face_roles[f] == role]

    def face_slicer(self, face: Face) -> tuple:
        """Index tuple selecting the nodes of one face."""
        idx = [slice(None)] * self.m
        idx[face.axis] = 0 if face.side == 0 else self.shape[face.axis] - 1
        return tuple(idx)

    def face_mask(self, face: Face) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.face_slicer(face)] = True
        return mask

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for f in self.all_faces():
            mask[self.face_slicer(f)] = True
        return mask

    # -- refinement -----------------------------------------------------
    def refined(self, factor: int = 2) -> "ChartGrid":
        """Same box and roles with (n-1)*factor + 1 nodes per axis."""
        shape = tuple((n - 1) * factor + 1 for n in self.shape)
        return ChartGrid(self.lo, self.hi, shape, dict(self.face_roles))

    def with_shape(self, shape) -> "ChartGrid":
        return ChartGrid(self.lo, self.hi, tuple(shape), dict(self.face_roles))

    def __eq__(self, other):
        if not isinstance(other, ChartGrid):
            return NotImplemented
        return (self.lo == other.lo and self.hi == other.hi
                and self.shape == other.shape and self.face_roles == other.face_roles)

    def __hash__(self):
        return hash((self.lo, self.hi, self.shape,
                     tuple(sorted((f, r) for f, r in self.face_roles.items()))))
