import numpy as np
import pytest

from cutproject import (
    Box,
    WeightedComb,
    Window,
    autocorrelation_patch,
    gram_matrix,
    gram_min_eigenvalue,
    lift_pd_crosscheck,
    model_comb,
    model_set,
    restriction_check,
)


def random_autocorrelation(fib, fib_window, rng, hi=40.0):
    pts = model_set(fib, fib_window, Box([0.0], [hi]))
    z = np.stack([p.z for p in pts])
    w = rng.normal(size=len(z)) + 1j * rng.normal(size=len(z))
    comb = model_comb(fib, z, w)
    return comb, autocorrelation_patch(comb, Box([-1.0], [hi + 1.0]))


def flip_zero_weight(comb: WeightedComb) -> WeightedComb:
    """Negate the central weight; the trace argument then forces a negative
    eigenvalue on every nonempty configuration."""
    idx = int(np.argmin(np.linalg.norm(comb.positions, axis=1)))
    w = comb.weights.copy()
    w[idx] = -w[idx]
    return WeightedComb(comb.positions, w, refs=comb.refs, dim=comb.dim, validate=False)


def test_delta_at_origin_gives_identity():
    f = WeightedComb([[0.0]], [1.0])
    points = np.array([[0.0], [1.3], [2.9], [4.1]])
    m = gram_matrix(f, points)
    assert np.array_equal(m, np.eye(4))
    report = gram_min_eigenvalue(f, points)
    assert report.min_eig == pytest.approx(1.0)
    assert report.ok


def test_known_indefinite_two_point_matrix():
    # f(0) = 0, f(+-x0) = 1: matrix [[0, 1], [1, 0]] has eigenvalues -1, 1
    f = WeightedComb([[1.0], [-1.0], [0.0]], [1.0, 1.0, 0.0])
    report = gram_min_eigenvalue(f, [[0.0], [1.0]])
    assert report.min_eig == pytest.approx(-1.0)
    assert not report.ok


def test_autocorrelation_is_psd(fib, fib_window):
    rng = np.random.default_rng(101)
    comb, ac = random_autocorrelation(fib, fib_window, rng)
    idx = rng.choice(comb.n_atoms, size=min(50, comb.n_atoms), replace=False)
    report = gram_min_eigenvalue(ac, comb.positions[idx])
    assert report.ok
    assert report.min_eig >= -1e-8


def test_non_hermitian_rejected():
    f = WeightedComb([[1.0], [-1.0]], [1.0, 0.5])
    with pytest.raises(ValueError, match="not Hermitian"):
        gram_min_eigenvalue(f, [[0.0], [1.0]])


def test_eigen_budget():
    f = WeightedComb([[0.0]], [1.0])
    with pytest.raises(ValueError, match="budget"):
        gram_min_eigenvalue(f, np.linspace(0, 1, 501)[:, None])


def test_gram_matrix_hermitian_and_residual(fib, fib_window):
    rng = np.random.default_rng(7)
    comb, ac = random_autocorrelation(fib, fib_window, rng, hi=80.0)
    idx = rng.choice(comb.n_atoms, size=30, replace=False)
    m = gram_matrix(ac, comb.positions[idx])
    assert np.array_equal(m, np.conj(m.T))
    vals, vecs = np.linalg.eigh(m)
    for j in (0, len(vals) - 1):
        residual = np.linalg.norm(m @ vecs[:, j] - vals[j] * vecs[:, j])
        assert residual <= 1e-8 * np.linalg.norm(m, 2)


def test_refs_lookup_matches_position_lookup(fib, fib_window):
    rng = np.random.default_rng(15)
    comb, ac = random_autocorrelation(fib, fib_window, rng, hi=50.0)
    idx = rng.choice(comb.n_atoms, size=20, replace=False)
    m_pos = gram_matrix(ac, comb.positions[idx])
    m_ref = gram_matrix(ac, comb.positions[idx], refs=comb.refs[idx])
    assert np.max(np.abs(m_pos - m_ref)) < 1e-12


def test_extension_by_zero_block_structure():
    # configuration mixing lattice points and far off-lattice points: the
    # cross entries vanish, so the matrix splits into blocks
    f = WeightedComb([[0.0], [1.0], [-1.0]], [2.0, 1.0, 1.0])
    pts = np.array([[0.0], [1.0], [0.31], [1.31]])
    m = gram_matrix(f, pts)
    assert m[0, 2] == 0 and m[0, 3] == 0 and m[1, 2] == 0 and m[1, 3] == 0
    assert m[2, 3] != 0 or m[2, 2] != 0


def test_restriction_check_pd_function(fib, fib_window):
    rng = np.random.default_rng(23)
    comb, ac = random_autocorrelation(fib, fib_window, rng)
    report = restriction_check(ac, comb.positions, trials=20, seed=5, config_size=25)
    assert report.ok
    assert np.all(report.min_eigs >= -1e-6)


def test_restriction_check_flags_non_pd(fib, fib_window):
    rng = np.random.default_rng(29)
    comb, ac = random_autocorrelation(fib, fib_window, rng)
    bad = flip_zero_weight(ac)
    report = restriction_check(bad, comb.positions, trials=5, seed=5, config_size=25)
    assert not report.ok


def test_crosscheck_pd_both_sides(fib):
    rng = np.random.default_rng(31)
    window = Window(Box([-1.0], [1.0]))  # differences live in W - W
    base = Window(Box([0.0], [1.0]))
    pts = model_set(fib, base, Box([0.0], [30.0]))
    z = np.stack([p.z for p in pts])
    w = rng.normal(size=len(z)) + 1j * rng.normal(size=len(z))
    gamma = autocorrelation_patch(model_comb(fib, z, w), Box([-1.0], [31.0]))
    report = lift_pd_crosscheck(fib, gamma, window, trials=10, seed=3)
    assert report.entrywise_equal
    assert report.down_ok and report.up_ok
    assert np.array_equal(report.min_eigs_down, report.min_eigs_up)


def test_crosscheck_corrupted_fails_on_both_sides(fib):
    rng = np.random.default_rng(37)
    window = Window(Box([-1.0], [1.0]))
    base = Window(Box([0.0], [1.0]))
    pts = model_set(fib, base, Box([0.0], [30.0]))
    z = np.stack([p.z for p in pts])
    w = rng.normal(size=len(z)) + 1j * rng.normal(size=len(z))
    gamma = flip_zero_weight(autocorrelation_patch(model_comb(fib, z, w), Box([-1.0], [31.0])))
    report = lift_pd_crosscheck(fib, gamma, window, trials=10, seed=3)
    assert report.entrywise_equal
    assert not report.down_ok and not report.up_ok


def test_crosscheck_sign_flip_pair_detected(fib):
    # flip one +-t weight pair and probe it with a chain configuration
    base = Window(Box([0.0], [1.0]))
    pts = model_set(fib, base, Box([0.0], [60.0]))
    z = np.stack([p.z for p in pts])
    gamma = autocorrelation_patch(model_comb(fib, z, np.ones(len(z))), Box([-1.0], [61.0]))
    mags = np.abs(gamma.weights)
    away = np.linalg.norm(gamma.positions, axis=1) > 1e-9
    target = int(np.arange(gamma.n_atoms)[away][np.argmax(mags[away])])
    w = gamma.weights.copy()
    pos_t = gamma.positions[target]
    mirror = int(np.argmin(np.linalg.norm(gamma.positions + pos_t, axis=1)))
    w[target] = -w[target]
    w[mirror] = -w[mirror]
    bad = WeightedComb(gamma.positions, w, refs=gamma.refs, dim=1, validate=False)
    report = gram_min_eigenvalue(bad, gamma.positions[np.abs(gamma.weights) > 0.2 * mags.max()][:40])
    assert not report.ok


def test_crosscheck_empty_comb(fib):
    window = Window(Box([-1.0], [1.0]))
    gamma = WeightedComb(np.zeros((0, 1)), np.zeros(0), dim=1)
    report = lift_pd_crosscheck(fib, gamma, window, trials=3, seed=1)
    assert report.down_ok and report.up_ok
