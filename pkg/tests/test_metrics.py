import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn import metrics as skm

from freesupport.gaussian import GaussianParams
from freesupport.measures import MeasureError, make_family, make_measure
from freesupport.metrics import (ari, calinski_harabasz, classification_report,
                                 classify_nearest_prototype, contingency, nmi, semidiscrete_w2,
                                 silhouette, stability_gap)

from .oracles import brute_force_ari

labels = st.lists(st.integers(0, 3), min_size=2, max_size=25)


def test_ari_hand_case():
    assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    assert brute_force_ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def test_ari_identical_and_relabelled():
    assert ari([0, 0, 1, 2], [5, 5, 7, 9]) == pytest.approx(1.0)


@given(st.data())
@settings(max_examples=60)
def test_ari_against_references(data):
    a = data.draw(labels)
    b = data.draw(st.lists(st.integers(0, 3), min_size=len(a), max_size=len(a)))
    expected = skm.adjusted_rand_score(a, b)
    assert ari(a, b) == pytest.approx(expected, abs=1e-12)
    assert ari(a, b) == pytest.approx(ari(b, a), abs=1e-12)


@given(st.data())
@settings(max_examples=60)
def test_nmi_against_sklearn(data):
    a = data.draw(labels)
    b = data.draw(st.lists(st.integers(0, 3), min_size=len(a), max_size=len(a)))
    got = nmi(a, b)
    assert got == pytest.approx(skm.normalized_mutual_info_score(a, b), abs=1e-10)
    assert -1e-12 <= got <= 1 + 1e-12


def test_nmi_independent_grid():
    a = [0, 0, 1, 1]
    b = [0, 1, 0, 1]
    assert nmi(a, b) == pytest.approx(0.0, abs=1e-15)
    assert nmi(a, a) == pytest.approx(1.0)


def test_contingency_shape_mismatch():
    with pytest.raises(ValueError):
        contingency([0, 1], [0])


def test_silhouette_and_ch_against_sklearn(rng):
    for _ in range(5):
        x = rng.normal(size=(60, 3))
        lab = rng.integers(0, 4, 60)
        lab[:4] = [0, 1, 2, 3]
        assert silhouette(x, lab) == pytest.approx(skm.silhouette_score(x, lab), abs=1e-10)
        assert calinski_harabasz(x, lab) == pytest.approx(skm.calinski_harabasz_score(x, lab), rel=1e-10)


def test_silhouette_singletons_against_sklearn():
    x = np.array([[0.0], [0.1], [5.0], [9.0]])
    lab = [0, 0, 1, 2]
    assert silhouette(x, lab) == pytest.approx(skm.silhouette_score(x, lab), abs=1e-12)


def test_degenerate_cluster_indices():
    x = np.arange(4.0)[:, None]
    with pytest.raises(ValueError):
        silhouette(x, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        calinski_harabasz(x, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        calinski_harabasz(x, [0, 1, 2, 3])
    assert calinski_harabasz(np.array([[0.0], [0.0], [1.0], [1.0]]), [0, 0, 1, 1]) == np.inf


def test_report_perfect():
    rep = classification_report(["a", "b", "a"], ["a", "b", "a"])
    assert rep == {"accuracy": 1.0, "precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_report_balanced_two_class_constant_prediction():
    # class 0: precision 1/2, recall 1, F1 2/3; class 1: F1 0
    rep = classification_report([0, 0, 0, 0], [0, 0, 1, 1])
    assert rep["accuracy"] == pytest.approx(0.5)
    assert rep["f1"] == pytest.approx(1 / 3)


def test_report_single_predicted_class():
    # only class 0 gets predicted: its F1 is 2*(1/3)/(4/3) = 1/2, the others 0
    truth = [0, 1, 2]
    rep = classification_report([0, 0, 0], truth)
    assert rep["f1"] == pytest.approx(1 / 6)
    assert rep["accuracy"] == pytest.approx(1 / 3)
    sk = skm.f1_score(truth, [0, 0, 0], average="macro", zero_division=0)
    assert rep["f1"] == pytest.approx(sk)


def test_report_against_sklearn(rng):
    truth = rng.integers(0, 3, 50)
    pred = rng.integers(0, 3, 50)
    rep = classification_report(pred, truth)
    assert rep["precision"] == pytest.approx(skm.precision_score(truth, pred, average="macro"))
    assert rep["recall"] == pytest.approx(skm.recall_score(truth, pred, average="macro"))
    assert rep["f1"] == pytest.approx(skm.f1_score(truth, pred, average="macro"))


def test_report_empty():
    with pytest.raises(ValueError):
        classification_report([], [])


def test_nearest_prototype():
    protos = {"left": make_measure([[-5.0, 0.0]]), "right": make_measure([[5.0, 0.0]])}
    tests = [make_measure([[-4.0, 1.0], [-6.0, 0.0]]), make_measure([[3.0, 0.0]])]
    assert classify_nearest_prototype(tests, protos) == ["left", "right"]
    # equidistant: the smaller label wins
    assert classify_nearest_prototype([make_measure([[0.0, 0.0]])], protos) == ["left"]


def test_semidiscrete_dirac_at_origin():
    # W2^2 between N(0, I_2) samples and delta_0 is the sample mean of |x|^2, about 2
    mean, se = semidiscrete_w2(GaussianParams(np.zeros(2), np.eye(2)), make_measure([[0.0, 0.0]]),
                               sample_size=100, repeats=50, seed=0)
    assert mean ** 2 == pytest.approx(2.0, abs=0.3)
    assert se > 0


def test_semidiscrete_reproducible():
    g = GaussianParams([1.0], [[0.5]])
    mu = make_measure([[0.0], [1.0], [2.0]])
    assert semidiscrete_w2(g, mu, 20, 5, seed=4) == semidiscrete_w2(g, mu, 20, 5, seed=4)


def test_semidiscrete_dimension_check():
    with pytest.raises(MeasureError):
        semidiscrete_w2(GaussianParams([0.0], [[1.0]]), make_measure([[0.0, 0.0]]))


def test_stability_identical_families():
    fam = make_family([make_measure([[0.0], [1.0]]), make_measure([[2.0]])])
    out = stability_gap(fam, fam, make_measure([[1.0]]))
    assert out["gap"] == 0.0 and out["delta"] == 0.0 and out["bound"] == 0.0


def test_stability_shifted_dirac():
    fa = make_family([make_measure([[0.0]])])
    fb = make_family([make_measure([[0.5]])])
    out = stability_gap(fa, fb, make_measure([[1.0]]))
    # |1 - 0.25| against 4 * 1 * 0.5
    assert out["gap"] == pytest.approx(0.75)
    assert out["bound"] == pytest.approx(2.0)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_stability_bound_holds(seed):
    rng = np.random.default_rng(seed)
    fa, fb = [], []
    for _ in range(3):
        x = rng.normal(size=(6, 2))
        fa.append(make_measure(x))
        fb.append(make_measure(x + 0.1 * rng.normal(size=x.shape)))
    pi = rng.dirichlet(np.ones(3))
    out = stability_gap(make_family(fa, pi), make_family(fb, pi), make_measure(rng.normal(size=(4, 2))))
    assert out["gap"] <= out["bound"] + 1e-12


def test_stability_rejects_mismatched_weights():
    a = make_measure([[0.0]])
    with pytest.raises(MeasureError):
        stability_gap(make_family([a, a], [0.5, 0.5]), make_family([a, a], [0.4, 0.6]), a)
