"""Gram-matrix positive semidefiniteness checks for weight functions on point sets.

A finite comb is read as a function: the weight at an atom position, zero
elsewhere (extension by zero).  For sample points x_1..x_n the matrix
M[k][l] = f(x_k - x_l) is Hermitian whenever f is, and positive
semidefiniteness of every such matrix is what positive definiteness of f
means.  Restriction to a subgroup, extension by zero, and the lift to the
lattice strip all preserve these matrices entry by entry, which the
cross-check below turns into a finite-scale test.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .comb import WeightedComb, lift
from .cps import CutProjectScheme, Window

PSD_TOL = 1e-8
HERMITIAN_TOL = 1e-6
LOOKUP_TOL = 1e-9
MAX_GRAM_POINTS = 500


def _check_hermitian(f: WeightedComb) -> None:
    """Verify f(-t) = conj(f(t)) across the comb's atoms."""
    if f.n_atoms == 0:
        return
    tree = cKDTree(f.positions)
    dist, idx = tree.query(-f.positions, k=1)
    matched = dist <= LOOKUP_TOL
    disc = np.zeros(f.n_atoms)
    disc[~matched] = np.abs(f.weights[~matched])
    disc[matched] = np.abs(f.weights[idx[matched]] - np.conj(f.weights[matched]))
    worst = float(disc.max())
    if worst > HERMITIAN_TOL:
        raise ValueError(f"not Hermitian: discrepancy {worst:.3e}")
    if worst > 1e-9:
        warnings.warn(f"weight function only approximately Hermitian ({worst:.3e})", stacklevel=3)


def _lookup_weights(f: WeightedComb, diffs: np.ndarray, ref_diffs: np.ndarray | None) -> np.ndarray:
    """f evaluated at difference vectors, zero where no atom sits."""
    if f.n_atoms == 0:
        return np.zeros(len(diffs), dtype=complex)
    if ref_diffs is not None and f.refs is not None:
        table = {tuple(z): w for z, w in zip(map(tuple, f.refs), f.weights)}
        return np.array([table.get(tuple(z), 0.0) for z in map(tuple, ref_diffs)], dtype=complex)
    dist, idx = cKDTree(f.positions).query(diffs, k=1)
    out = np.zeros(len(diffs), dtype=complex)
    hit = dist <= LOOKUP_TOL
    out[hit] = f.weights[idx[hit]]
    return out


def gram_matrix(
    f: WeightedComb,
    points,
    refs=None,
) -> np.ndarray:
    """Hermitian matrix f(x_k - x_l) over the sample points.

    Only the upper triangle is looked up; the lower triangle is its conjugate
    mirror, so the matrix is Hermitian by construction.  With integer
    coordinates for both the comb and the points the lookup is exact.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    if n > MAX_GRAM_POINTS:
        raise ValueError(f"too many sample points for the eigen budget ({n} > {MAX_GRAM_POINTS})")
    _check_hermitian(f)
    ii, jj = np.triu_indices(n)
    diffs = pts[ii] - pts[jj]
    ref_diffs = None
    if refs is not None and f.refs is not None:
        refs = np.atleast_2d(np.asarray(refs, dtype=np.int64))
        ref_diffs = refs[ii] - refs[jj]
    vals = _lookup_weights(f, diffs, ref_diffs)
    m = np.zeros((n, n), dtype=complex)
    m[ii, jj] = vals
    lower = np.conj(m.T)
    m[jj, ii] = lower[jj, ii]
    return m


@dataclass(frozen=True)
class GramReport:
    size: int
    min_eig: float
    ok: bool
    tol: float
    points: np.ndarray


def gram_min_eigenvalue(
    f: WeightedComb,
    points,
    refs=None,
    psd_tol: float = PSD_TOL,
) -> GramReport:
    """Minimum eigenvalue of the Gram matrix over the sample points.

    ``ok`` means the minimum eigenvalue clears -psd_tol scaled by the matrix
    max-norm, the tolerance double-precision eigensolves warrant at this size.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = gram_matrix(f, pts, refs=refs)
    if len(m) == 0:
        return GramReport(0, 0.0, True, psd_tol, pts)
    min_eig = float(np.linalg.eigvalsh(m)[0])
    tol = psd_tol * max(1.0, float(np.max(np.abs(m))))
    return GramReport(len(m), min_eig, min_eig >= -tol, tol, pts)


@dataclass(frozen=True)
class RestrictionReport:
    ok: bool
    trials: int
    min_eigs: np.ndarray
    seed: int


def restriction_check(
    f: WeightedComb,
    subgroup_points,
    trials: int,
    seed: int,
    config_size: int = 40,
    refs=None,
    psd_tol: float = PSD_TOL,
) -> RestrictionReport:
    """Gram tests on random configurations drawn only from the given point set.

    Positive definiteness restricts to any subset closed under differences,
    so every trial of a genuinely positive definite f must pass.
    """
    pts = np.atleast_2d(np.asarray(subgroup_points, dtype=float))
    if refs is not None:
        refs = np.atleast_2d(np.asarray(refs, dtype=np.int64))
    rng = np.random.default_rng(seed)
    eigs = np.empty(trials)
    ok = True
    for t in range(trials):
        size = min(config_size, len(pts))
        idx = rng.choice(len(pts), size=size, replace=False)
        report = gram_min_eigenvalue(f, pts[idx], refs=refs[idx] if refs is not None else None,
                                     psd_tol=psd_tol)
        eigs[t] = report.min_eig
        ok &= report.ok
    return RestrictionReport(ok, trials, eigs, seed)


@dataclass(frozen=True)
class CrosscheckReport:
    down_ok: bool
    up_ok: bool
    entrywise_equal: bool
    min_eigs_down: np.ndarray
    min_eigs_up: np.ndarray
    seed: int


def lift_pd_crosscheck(
    cps: CutProjectScheme,
    gamma: WeightedComb,
    window: Window,
    trials: int,
    seed: int,
    config_size: int = 40,
    psd_tol: float = PSD_TOL,
) -> CrosscheckReport:
    """Test positive definiteness downstairs and on the lifted comb together.

    The same index sets are used on both sides, so the two Gram matrices are
    equal entry by entry through the lift bijection and the two verdicts must
    agree; the report records both so that agreement is observed, not assumed.
    """
    eta = lift(cps, gamma, window, window)
    if gamma.n_atoms == 0:
        empty = np.zeros(0)
        return CrosscheckReport(True, True, True, empty, empty, seed)
    rng = np.random.default_rng(seed)
    down_eigs = np.empty(trials)
    up_eigs = np.empty(trials)
    down_ok = up_ok = True
    equal = True
    for t in range(trials):
        size = min(config_size, gamma.n_atoms)
        idx = rng.choice(gamma.n_atoms, size=size, replace=False)
        refs = gamma.refs[idx] if gamma.refs is not None else None
        m_down = gram_matrix(gamma, gamma.positions[idx], refs=refs)
        m_up = gram_matrix(eta, eta.positions[idx], refs=eta.refs[idx])
        equal &= bool(np.array_equal(m_down, m_up))
        lo_down = float(np.linalg.eigvalsh(m_down)[0]) if len(m_down) else 0.0
        lo_up = float(np.linalg.eigvalsh(m_up)[0]) if len(m_up) else 0.0
        down_eigs[t], up_eigs[t] = lo_down, lo_up
        down_ok &= lo_down >= -psd_tol * max(1.0, float(np.max(np.abs(m_down))))
        up_ok &= lo_up >= -psd_tol * max(1.0, float(np.max(np.abs(m_up))))
    return CrosscheckReport(down_ok, up_ok, equal, down_eigs, up_eigs, seed)
