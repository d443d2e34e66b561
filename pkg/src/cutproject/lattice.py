"""Full-rank lattices in R^n: basis arithmetic, duals, density, box enumeration.

A lattice is given by an invertible basis matrix whose columns generate it;
every point is ``basis @ z`` for an integer vector ``z``.  All enumeration
routines return those integer coordinates alongside the real positions, so
downstream identities can be checked exactly in ``z`` instead of matching
floating-point positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BUDGET = 100_000_000
BOUNDARY_TOL = 1e-9

# number of candidate points materialised per chunk during enumeration
_CHUNK = 1 << 18


class BudgetError(RuntimeError):
    """An enumeration would exceed its candidate budget."""


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo_i, hi_i]; hi < lo in a coordinate marks it empty."""

    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi) -> None:
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("box bounds must be 1d arrays of equal length")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        object.__setattr__(self, "lo", _readonly(lo))
        object.__setattr__(self, "hi", _readonly(hi))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def is_empty(self) -> bool:
        return bool((self.hi < self.lo).any())

    @property
    def volume(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.prod(self.sides))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, points, tol: float = BOUNDARY_TOL):
        """Closed-box membership with boundary tolerance; vectorised over rows."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        ok = (pts >= self.lo - tol).all(axis=1) & (pts <= self.hi + tol).all(axis=1)
        return bool(ok[0]) if single else ok

    def contains_box(self, other: "Box", tol: float = BOUNDARY_TOL) -> bool:
        if other.is_empty:
            return True
        return bool((other.lo >= self.lo - tol).all() and (other.hi <= self.hi + tol).all())

    def intersect(self, other: "Box") -> "Box":
        return Box(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def inflate(self, margin) -> "Box":
        margin = np.asarray(margin, dtype=float)
        return Box(self.lo - margin, self.hi + margin)

    def shifted(self, t) -> "Box":
        t = np.asarray(t, dtype=float)
        return Box(self.lo + t, self.hi + t)

    @staticmethod
    def product(first: "Box", second: "Box") -> "Box":
        return Box(np.concatenate([first.lo, second.lo]), np.concatenate([first.hi, second.hi]))


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice in R^n; ``basis`` columns generate, ``inv_basis`` is cached."""

    basis: np.ndarray
    inv_basis: np.ndarray
    det_abs: float

    def __init__(self, basis) -> None:
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1] or basis.shape[0] == 0:
            raise ValueError("basis must be a non-empty square matrix")
        if not np.isfinite(basis).all():
            raise ValueError("basis entries must be finite")
        n = basis.shape[0]
        det = float(np.linalg.det(basis))
        col_scale = float(np.max(np.linalg.norm(basis, axis=0)))
        if abs(det) <= 1e-12 * max(col_scale, 1e-300) ** n:
            raise ValueError("singular basis")
        object.__setattr__(self, "basis", _readonly(basis))
        object.__setattr__(self, "inv_basis", _readonly(np.linalg.inv(basis)))
        object.__setattr__(self, "det_abs", abs(det))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def points(self, z) -> np.ndarray:
        """Positions ``basis @ z`` for integer coordinate rows ``z``.

        Accumulates column by column in a fixed order so that the same ``z``
        yields bit-identical positions from every call site, independent of
        batch size.
        """
        z = np.asarray(z)
        zz = np.atleast_2d(z).astype(float)
        out = np.zeros((zz.shape[0], self.n))
        for j in range(self.n):
            out += zz[:, j : j + 1] * self.basis[:, j]
        return out[0] if z.ndim == 1 else out

    def coordinates(self, points) -> np.ndarray:
        """Real-valued preimage ``inv_basis @ p`` of positions."""
        return np.asarray(points, dtype=float) @ self.inv_basis.T


def density(lat: Lattice) -> float:
    """Points per unit volume, 1 / |det basis|."""
    return 1.0 / lat.det_abs


def dual(lat: Lattice) -> Lattice:
    """Dual lattice under the pairing exp(2*pi*i k.l); basis is the inverse transpose."""
    return Lattice(lat.inv_basis.T.copy())


def _integer_ranges(lat: Lattice, box: Box) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate integer bounds covering the preimage of ``box``.

    Interval arithmetic on inv_basis applied to the box makes the cover
    complete; the small pad absorbs floating-point rounding.
    """
    lo = np.empty(lat.n, dtype=np.int64)
    hi = np.empty(lat.n, dtype=np.int64)
    for i in range(lat.n):
        row = lat.inv_basis[i]
        t_lo = np.minimum(row * box.lo, row * box.hi)
        t_hi = np.maximum(row * box.lo, row * box.hi)
        s_lo, s_hi = float(t_lo.sum()), float(t_hi.sum())
        pad = 1e-6 + 1e-12 * max(abs(s_lo), abs(s_hi))
        lo[i] = int(np.ceil(s_lo - pad))
        hi[i] = int(np.floor(s_hi + pad))
    return lo, hi


def lattice_points_in_box(
    lat: Lattice,
    box: Box,
    budget: int = DEFAULT_BUDGET,
    tol: float = BOUNDARY_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """All lattice points inside the closed ``box``: arrays (Z, P).

    Complete by construction: integer candidates come from interval
    arithmetic on the box corners, then positions are filtered against the
    box with the boundary tolerance.  Raises BudgetError when the candidate
    count exceeds ``budget``.
    """
    if box.dim != lat.n:
        raise ValueError(f"box dimension {box.dim} does not match lattice dimension {lat.n}")
    empty = (np.zeros((0, lat.n), dtype=np.int64), np.zeros((0, lat.n)))
    if box.is_empty:
        return empty
    lo, hi = _integer_ranges(lat, box)
    counts = np.maximum(hi - lo + 1, 0)
    total = int(np.prod(counts.astype(object)))
    if total > budget:
        raise BudgetError(f"enumeration budget exceeded: {total} candidates > {budget}")
    if total == 0:
        return empty

    axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(lat.n)]
    rest = int(np.prod(counts[1:])) if lat.n > 1 else 1
    block = max(1, _CHUNK // max(rest, 1))

    z_hits, p_hits = [], []
    for start in range(0, counts[0], block):
        first = axes[0][start : start + block]
        grid = np.meshgrid(first, *axes[1:], indexing="ij")
        z = np.stack([g.reshape(-1) for g in grid], axis=1)
        p = lat.points(z)
        keep = box.contains(p, tol=tol)
        if keep.any():
            z_hits.append(z[keep])
            p_hits.append(p[keep])
    if not z_hits:
        return empty
    return np.concatenate(z_hits), np.concatenate(p_hits)


def enumerate_in_box(
    lat: Lattice,
    box: Box,
    budget: int = DEFAULT_BUDGET,
    tol: float = BOUNDARY_TOL,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """List of (z, p) pairs for every lattice point p = basis @ z inside ``box``."""
    z, p = lattice_points_in_box(lat, box, budget=budget, tol=tol)
    return [(z[i], p[i]) for i in range(len(z))]
