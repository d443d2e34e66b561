"""Independent brute-force oracles the library-side implementations are checked against."""

import numpy as np

from cutproject import Box, Lattice, WeightedComb


def brute_lattice_points(lat: Lattice, box: Box, z_range: int, tol: float = 1e-9):
    """Plain double loop over a generous integer range, filtered against the box."""
    axes = [np.arange(-z_range, z_range + 1)] * lat.n
    grid = np.meshgrid(*axes, indexing="ij")
    z = np.stack([g.reshape(-1) for g in grid], axis=1)
    p = z @ lat.basis.T
    keep = ((p >= box.lo - tol) & (p <= box.hi + tol)).all(axis=1)
    return {tuple(row) for row in z[keep]}


def brute_z_range(lat: Lattice, box: Box) -> int:
    """Integer range certainly covering the preimage of the box."""
    corner = float(np.max(np.abs(np.concatenate([box.lo, box.hi]))))
    return int(np.ceil(np.max(np.abs(lat.inv_basis)) * lat.n * (corner + 1.0))) + 2


def grid_a_norm(comb: WeightedComb, a_box: Box, region: Box, pitch: float = 1e-3,
                tol: float = 1e-9) -> float:
    """Window-norm oracle: exhaustive scan over a regular grid of translates."""
    t_lo = region.lo - a_box.lo
    t_hi = region.hi - a_box.hi
    if (t_hi < t_lo).any():
        raise ValueError("region too small")
    mags = np.abs(comb.weights)
    if comb.dim == 1:
        ts = np.arange(t_lo[0], t_hi[0] + pitch / 2, pitch)
        pos = np.sort(comb.positions[:, 0])
        order = np.argsort(comb.positions[:, 0])
        csum = np.concatenate([[0.0], np.cumsum(mags[order])])
        lo_idx = np.searchsorted(pos, ts + a_box.lo[0] - tol, side="left")
        hi_idx = np.searchsorted(pos, ts + a_box.hi[0] + tol, side="right")
        return float(np.max(csum[hi_idx] - csum[lo_idx]))
    if comb.dim == 2:
        t1 = np.arange(t_lo[0], t_hi[0] + pitch / 2, pitch)
        t2 = np.arange(t_lo[1], t_hi[1] + pitch / 2, pitch)
        acc = np.zeros((len(t1), len(t2)))
        for (x, y), w in zip(comb.positions, mags):
            i0 = np.searchsorted(t1, x - a_box.hi[0] - tol, side="left")
            i1 = np.searchsorted(t1, x - a_box.lo[0] + tol, side="right")
            j0 = np.searchsorted(t2, y - a_box.hi[1] - tol, side="left")
            j1 = np.searchsorted(t2, y - a_box.lo[1] + tol, side="right")
            acc[i0:i1, j0:j1] += w
        return float(acc.max())
    raise NotImplementedError
