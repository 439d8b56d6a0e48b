import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freesupport.barycenter import (BarycenterState, SolverOptions, initialize, objective, solve,
                                    stationarity_residual, step, update_support)
from freesupport.measures import MeasureError, make_family, make_measure, pool_supports


def dirac_family(points, weights=None):
    return make_family([make_measure([p]) for p in points], weights)


def assert_monotone(trace):
    diffs = np.diff(np.asarray(trace))
    assert np.all(diffs <= 1e-10), diffs.max()


def test_objective_zero_on_self():
    mu = make_measure([[0.0, 1.0], [1.0, 0.0]])
    assert objective(mu, make_family([mu])) == pytest.approx(0.0, abs=1e-15)


def test_objective_symmetric_diracs():
    assert objective(make_measure([[0.0]]), dirac_family([[1.0], [-1.0]])) == pytest.approx(1.0)


def test_objective_dirac_quadratic(rng):
    # F(c) = sum pi |c - a|^2, minimised at the weighted mean
    pts = rng.normal(size=(4, 2))
    pi = np.array([0.1, 0.2, 0.3, 0.4])
    fam = dirac_family(pts, pi)
    for _ in range(5):
        c = rng.normal(size=2)
        expected = float(pi @ ((pts - c) ** 2).sum(axis=1))
        assert objective(make_measure([c]), fam) == pytest.approx(expected, rel=1e-12)
    best = objective(make_measure([pi @ pts]), fam)
    for _ in range(20):
        assert objective(make_measure([pi @ pts + 0.1 * rng.normal(size=2)]), fam) >= best


def test_initialize_with_all_pooled_atoms():
    fam = make_family([make_measure([[0.0], [1.0]]), make_measure([[5.0], [7.0]])])
    state = initialize(fam, SolverOptions(support_size=4))
    np.testing.assert_allclose(np.sort(state.support.ravel()), [0.0, 1.0, 5.0, 7.0])
    np.testing.assert_allclose(state.weights, 0.25)


def test_initialize_single_atom_is_pooled_mean():
    fam = make_family([make_measure([[0.0], [1.0]]), make_measure([[5.0], [7.0], [9.0]])], [0.3, 0.7])
    state = initialize(fam, SolverOptions(support_size=1))
    np.testing.assert_allclose(state.support, [pool_supports(fam).mean()])


def test_initialize_user_supplied():
    fam = make_family([make_measure([[0.0], [1.0]])])
    init = np.array([[0.25], [0.75], [3.0]])
    state = initialize(fam, SolverOptions(init_mode="user_supplied", init_support=init))
    np.testing.assert_array_equal(state.support, init)
    assert state.weights.shape == (3,)


def test_initialize_rejects_oversized_support():
    fam = make_family([make_measure([[0.0], [1.0]])])
    with pytest.raises(MeasureError):
        initialize(fam, SolverOptions(support_size=3))


@pytest.mark.parametrize("bad", [{"step_size": 0.0}, {"step_size": 0.6}, {"tolerance": 0.0},
                                 {"support_size": 0}, {"init_mode": "grid"},
                                 {"init_mode": "user_supplied"}])
def test_options_validation(bad):
    with pytest.raises(ValueError):
        SolverOptions(**bad)


def test_half_step_lands_on_dirac_mean():
    pts = np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 0.0]])
    pi = np.array([0.5, 0.25, 0.25])
    fam = dirac_family(pts, pi)
    state = BarycenterState(np.array([[10.0, 10.0]]), np.array([1.0]))
    one = step(state, fam, 0.5)
    np.testing.assert_allclose(one.support, [pi @ pts])
    two = step(one, fam, 0.5)
    np.testing.assert_allclose(two.support, one.support)
    assert one.iteration == 1 and len(one.objective_trace) == 2


def test_step_is_identity_at_fixed_point():
    mu = make_measure([[0.0, 1.0], [2.0, 3.0], [-1.0, 0.5]])
    state = BarycenterState(mu.support, mu.weights)
    nxt = step(state, make_family([mu]), 0.5)
    np.testing.assert_allclose(nxt.support, mu.support, atol=1e-15)


def test_quarter_step_on_diracs():
    # z' = (1 - 0.5) * 0 + 0.5 * mean
    pts = np.array([[2.0], [4.0]])
    fam = dirac_family(pts)
    nxt = step(BarycenterState(np.array([[0.0]]), np.array([1.0])), fam, 0.25)
    np.testing.assert_allclose(nxt.support, [[1.5]])


def test_step_rejects_bad_eta():
    fam = dirac_family([[0.0]])
    with pytest.raises(ValueError):
        step(BarycenterState(np.array([[0.0]]), np.array([1.0])), fam, 0.7)


def test_half_step_paths_agree_bitwise(rng):
    z = rng.normal(size=(7, 3))
    avg = rng.normal(size=(7, 3))
    general = (1.0 - 2.0 * 0.5) * z + 2.0 * 0.5 * avg
    assert np.array_equal(update_support(z, avg, 0.5), general)


def test_translates_converge_to_midpoints():
    fam = make_family([make_measure([[0.0], [1.0]]), make_measure([[2.0], [3.0]])])
    state = solve(fam, SolverOptions(support_size=2))
    np.testing.assert_allclose(np.sort(state.support.ravel()), [1.0, 2.0], atol=1e-12)
    assert_monotone(state.objective_trace)


def test_single_measure_recovered():
    mu = make_measure(np.random.default_rng(3).normal(size=(12, 2)))
    state = solve(make_family([mu]), SolverOptions(support_size=12))
    got = state.support[np.lexsort(state.support.T)]
    want = mu.support[np.lexsort(mu.support.T)]
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_fixed_point_on_diracs():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(5, 3))
    pi = rng.random(5) + 0.1
    pi /= pi.sum()
    fam = dirac_family(pts, pi)
    state = solve(fam, SolverOptions(support_size=1, tolerance=1e-12))
    assert np.linalg.norm(state.support[0] - pi @ pts) <= 1e-9


def test_stops_immediately_at_zero_objective():
    mu = make_measure([[0.0], [1.0]])
    state = solve(make_family([mu]), SolverOptions(support_size=2))
    assert state.converged and state.iteration == 0
    assert state.objective_trace == (0.0,)


def test_max_iterations_respected(rng):
    fam = make_family([make_measure(rng.normal(size=(30, 2))) for _ in range(3)])
    state = solve(fam, SolverOptions(support_size=8, max_iterations=2, tolerance=1e-300))
    assert state.iteration == 2 and len(state.objective_trace) == 3


def random_family(rng, n_measures=3, d=2):
    ms = [make_measure(rng.normal(size=(int(rng.integers(5, 15)), d)) * rng.uniform(0.5, 2)
                       + rng.normal(size=d) * 3) for _ in range(n_measures)]
    raw = rng.random(n_measures) + 0.2
    return make_family(ms, raw / raw.sum())


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 0.3, 0.1]), st.integers(1, 10))
@settings(max_examples=40)
def test_monotone_descent(seed, eta, m):
    fam = random_family(np.random.default_rng(seed))
    state = solve(fam, SolverOptions(support_size=m, step_size=eta, max_iterations=60))
    assert_monotone(state.objective_trace)


def test_translation_equivariance(rng):
    fam = random_family(rng)
    shift = np.array([3.5, -2.25])
    init = initialize(fam, SolverOptions(support_size=5))
    shifted = make_family([mu.translate(shift) for mu in fam.measures], fam.family_weights)
    a = solve(fam, SolverOptions(support_size=5, max_iterations=10), state=init)
    b = solve(shifted, SolverOptions(support_size=5, max_iterations=10),
              state=BarycenterState(init.support + shift, init.weights))
    np.testing.assert_allclose(b.support, a.support + shift, atol=1e-9)
    np.testing.assert_allclose(b.objective_trace, a.objective_trace, rtol=1e-9)


def test_stationarity_residual_decreases():
    rng = np.random.default_rng(5)
    for _ in range(5):
        fam = random_family(rng)
        init = initialize(fam, SolverOptions(support_size=6))
        first = stationarity_residual(init, fam)
        final = solve(fam, SolverOptions(support_size=6), state=init)
        assert stationarity_residual(final, fam) <= first


def test_four_gaussian_benchmark_terminates():
    from freesupport.gaussian import benchmark_components, sample
    comps = benchmark_components(seed=0)
    fam = make_family([make_measure(sample(g, 100, seed=i)) for i, g in enumerate(comps)])
    state = solve(fam, SolverOptions(support_size=50))
    assert state.converged and state.iteration < 200
    assert_monotone(state.objective_trace)


def test_user_weights_are_kept():
    fam = make_family([make_measure([[0.0], [1.0], [2.0]])])
    v = np.array([0.2, 0.3, 0.5])
    state = solve(fam, SolverOptions(init_mode="user_supplied", init_support=[[0.0], [1.0], [2.0]],
                                     weights=v))
    np.testing.assert_allclose(state.weights, v)
