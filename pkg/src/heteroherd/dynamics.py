"""Boid sheep dynamics with shepherd repulsion.

Every sheep moves by ``x(k+1) = x(k) + v(k)`` where ``v(k)`` is a weighted
sum of four unit-free force vectors: separation, alignment, attraction (all
averaged over the neighbours inside the perception radius) and repulsion
from the shepherd.

Positions are ``(N, 2)`` float arrays; sheep indices are 0-based.  The
per-agent functions below are the readable reference; :func:`flock_displacements`
is the compiled kernel the engine uses for a whole flock at once.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from ._kernels import EPS_DIST, EPS_NORM, flock_kernel

FloatArray = NDArray[np.float64]


def coerce_floats(obj) -> None:
    """Store ``float``-annotated fields of a frozen dataclass as floats, so
    that equal configs serialise (and hash) identically."""
    for f in dataclasses.fields(obj):
        if f.type in ("float", float):
            v = getattr(obj, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                object.__setattr__(obj, f.name, float(v))


@dataclass(frozen=True)
class ForceProfile:
    """Gains of the four sheep forces and the perception radius."""

    separation: float = 100.0
    alignment: float = 0.5
    attraction: float = 2.0
    repulsion: float = 500.0
    perception_radius: float = 20.0

    def __post_init__(self) -> None:
        coerce_floats(self)
        for name in ("separation", "alignment", "attraction", "repulsion"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} gain must be non-negative")
        if not self.perception_radius > 0:
            raise ValueError("perception_radius must be positive")

    @property
    def gains(self) -> FloatArray:
        return np.array(
            [self.separation, self.alignment, self.attraction, self.repulsion]
        )

    def masked(self, alpha: Sequence[float]) -> ForceProfile:
        return self.scaled(alpha)

    def scaled(self, factors: Sequence[float]) -> ForceProfile:
        f1, f2, f3, f4 = factors
        return ForceProfile(
            self.separation * f1,
            self.alignment * f2,
            self.attraction * f3,
            self.repulsion * f4,
            self.perception_radius,
        )


class VariantAlpha(NamedTuple):
    """Binary mask selecting which of the four forces a variant sheep feels."""

    separation: int
    alignment: int
    attraction: int
    repulsion: int

    @classmethod
    def parse(cls, value: Sequence[int]) -> VariantAlpha:
        flags = tuple(int(v) for v in value)
        if len(flags) != 4 or any(f not in (0, 1) for f in flags):
            raise ValueError(f"alpha must be four 0/1 flags, got {list(value)}")
        return cls(*flags)

    @property
    def n_forces(self) -> int:
        return sum(self)

    @property
    def is_trivial(self) -> bool:
        return self.n_forces in (0, 4)

    def __str__(self) -> str:
        return "".join(str(f) for f in self)


NONTRIVIAL_ALPHAS: tuple[VariantAlpha, ...] = tuple(
    VariantAlpha(*a) for a in product((1, 0), repeat=4) if 0 < sum(a) < 4
)


@dataclass(frozen=True)
class SheepAgent:
    index: int
    position: FloatArray
    prev_displacement: FloatArray
    profile: ForceProfile
    is_variant: bool


def neighbor_set(positions: FloatArray, i: int, radius: float) -> list[int]:
    """Indices ``j != i`` with ``|x_j - x_i| <= radius``, ascending."""
    d = np.hypot(*(positions - positions[i]).T)
    return [j for j in np.flatnonzero(d <= radius) if j != i]


def separation_force(positions: FloatArray, i: int, neighbors: Sequence[int]) -> FloatArray:
    if not neighbors:
        return np.zeros(2)
    diff = positions[list(neighbors)] - positions[i]
    r = np.maximum(np.hypot(*diff.T), EPS_DIST)
    return -(diff / (r**3)[:, None]).sum(axis=0) / len(neighbors)


def alignment_force(prev_displacements: FloatArray, neighbors: Sequence[int]) -> FloatArray:
    """Mean heading of the neighbours; near-still neighbours count as zero."""
    if not neighbors:
        return np.zeros(2)
    v = prev_displacements[list(neighbors)]
    n = np.hypot(*v.T)
    unit = np.zeros_like(v)
    moving = n >= EPS_NORM
    unit[moving] = v[moving] / n[moving, None]
    return unit.sum(axis=0) / len(neighbors)


def attraction_force(positions: FloatArray, i: int, neighbors: Sequence[int]) -> FloatArray:
    if not neighbors:
        return np.zeros(2)
    diff = positions[list(neighbors)] - positions[i]
    r = np.maximum(np.hypot(*diff.T), EPS_DIST)
    return (diff / r[:, None]).sum(axis=0) / len(neighbors)


def shepherd_repulsion(
    position: FloatArray,
    shepherd_position: FloatArray,
    repulsion_range: float = math.inf,
) -> FloatArray:
    """Inverse-square push directed from the shepherd toward the sheep.

    ``repulsion_range`` limits the distance at which the shepherd is felt;
    the default (infinite) is the unbounded model.
    """
    diff = np.asarray(shepherd_position, float) - np.asarray(position, float)
    r = max(math.hypot(*diff), EPS_DIST)
    if r > repulsion_range:
        return np.zeros(2)
    return -diff / r**3


def force_components(
    positions: FloatArray,
    prev_displacements: FloatArray,
    shepherd_position: FloatArray,
    i: int,
    radius: float,
    repulsion_range: float = math.inf,
) -> FloatArray:
    """The four unweighted force vectors of sheep ``i`` as a ``(4, 2)`` array."""
    nb = neighbor_set(positions, i, radius)
    return np.stack(
        [
            separation_force(positions, i, nb),
            alignment_force(prev_displacements, nb),
            attraction_force(positions, i, nb),
            shepherd_repulsion(positions[i], shepherd_position, repulsion_range),
        ]
    )


def sheep_step(
    positions: FloatArray,
    prev_displacements: FloatArray,
    gains: FloatArray,
    shepherd_position: FloatArray,
    i: int,
    radius: float,
    repulsion_range: float = math.inf,
) -> FloatArray:
    """Displacement ``v_i(k)`` of one sheep from the time-k state.

    ``gains`` is the sheep's four-vector of force gains (or an ``(N, 4)``
    table, from which row ``i`` is taken).
    """
    g = np.asarray(gains, float)
    if g.ndim == 2:
        g = g[i]
    comps = force_components(
        positions, prev_displacements, shepherd_position, i, radius, repulsion_range
    )
    return g @ comps


def flock_displacements(
    positions: FloatArray,
    prev_displacements: FloatArray,
    gains: FloatArray,
    shepherd_position: FloatArray,
    radius: float,
    repulsion_range: float = math.inf,
    out: FloatArray | None = None,
) -> FloatArray:
    """Synchronous displacement of every sheep, shape ``(N, 2)``."""
    if out is None:
        out = np.empty_like(positions, dtype=np.float64)
    flock_kernel(
        np.ascontiguousarray(positions, dtype=np.float64),
        np.ascontiguousarray(prev_displacements, dtype=np.float64),
        np.ascontiguousarray(gains, dtype=np.float64),
        np.asarray(shepherd_position, dtype=np.float64),
        float(radius),
        float(repulsion_range),
        out,
    )
    return out


def gain_table(
    profile: ForceProfile, n_sheep: int, n_variant: int, alpha: Sequence[int]
) -> FloatArray:
    """Per-sheep gains: the last ``n_variant`` rows are alpha-masked."""
    table = np.tile(profile.gains, (n_sheep, 1))
    if n_variant:
        table[n_sheep - n_variant :] *= np.asarray(alpha, float)
    return table
