import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvspin.errors import InvalidModelParameter
from hvspin.geometry import EZ, SeededRng, UnitVector3, Vector3, rowdot
from hvspin.models import (
    COMPLETE,
    LOCAL_BASELINE,
    HiddenPair,
    ModelSpec,
    PairOutcome,
    ProductOutcome,
    SettingPair,
    complete_outcomes,
    complete_signs,
    local_baseline_outcomes,
    single_spin_outcome,
    single_spin_signs,
    sufficient_condition_product,
    sufficient_condition_products,
)

import oracles

Z = UnitVector3(0.0, 0.0, 1.0)
MZ = UnitVector3(0.0, 0.0, -1.0)
X = UnitVector3(1.0, 0.0, 0.0)

coord = st.floats(min_value=-1, max_value=1, allow_nan=False)
unit_vectors = st.tuples(coord, coord, coord).filter(lambda t: math.hypot(*t) > 0.1).map(
    lambda t: UnitVector3.normalized(*t)
)


def test_single_spin_examples():
    assert single_spin_outcome(Vector3(0, 0, 1), Z, Z) == 1
    assert single_spin_outcome(Vector3(0, 0, 0), MZ, Z) == -1


def test_single_spin_rejects_long_bloch_vector():
    with pytest.raises(InvalidModelParameter):
        single_spin_outcome(Vector3(0, 0, 1.1), Z, Z)
    with pytest.raises(InvalidModelParameter):
        ModelSpec("single_spin", Vector3(0.8, 0.8, 0))


def test_single_spin_mean_matches_bloch_projection():
    n = 1_000_000
    lam = SeededRng(1).unit_vectors(n)
    mean = single_spin_signs(Vector3(0, 0, 0.6), lam, np.array([0, 0, 1.0])).mean()
    assert abs(mean - 0.6) < 4 * math.sqrt((1 - 0.36) / n)


def test_sufficient_condition_examples():
    s = SettingPair(Z, X)  # a.b = 0
    assert sufficient_condition_product(HiddenPair(Z, Z), s) == 1
    assert sufficient_condition_product(HiddenPair(Z, MZ), s) == -1


def test_sufficient_condition_correlation_at_60_degrees():
    n = 1_000_000
    rng = SeededRng(2)
    lam1, lam2 = rng.unit_vectors(n), rng.unit_vectors(n)
    ab = math.cos(math.pi / 3)
    mean = sufficient_condition_products(lam1, lam2, np.array([0, 0, 1.0]), np.array([math.sqrt(1 - ab**2), 0, ab])).mean()
    assert abs(mean + 0.5) < 4 * math.sqrt(0.75 / n)


def test_product_outcome_has_no_individual_results():
    out = ProductOutcome(1)
    assert not hasattr(out, "x") and not hasattr(out, "y")
    assert isinstance(sufficient_condition_product(HiddenPair(Z, Z), SettingPair(Z, X)), int)


def test_complete_examples():
    s = SettingPair(Z, X)
    assert complete_outcomes(HiddenPair(Z, Z), s) == PairOutcome(1, 1)
    assert complete_outcomes(HiddenPair(MZ, Z), s) == PairOutcome(-1, 1)


@given(unit_vectors, unit_vectors, unit_vectors, unit_vectors)
def test_complete_product_consistency(l1, l2, a, b):
    h, s = HiddenPair(l1, l2), SettingPair(a, b)
    assert complete_outcomes(h, s).xy == sufficient_condition_product(h, s)


@given(unit_vectors, unit_vectors, unit_vectors, unit_vectors, unit_vectors, unit_vectors)
def test_complete_x_is_local(l1, l2, l2b, a, b, b2):
    x1 = complete_outcomes(HiddenPair(l1, l2), SettingPair(a, b)).x
    x2 = complete_outcomes(HiddenPair(l1, l2b), SettingPair(a, b2)).x
    assert x1 == x2


def test_complete_y_depends_on_distant_setting():
    rng = SeededRng(4)
    v = rng.unit_vectors(5 * 1000).reshape(1000, 5, 3)
    flips = 0
    for l1, l2, a, a2, b in v:
        h = HiddenPair(*map(UnitVector3.from_array, (l1, l2)))
        a, a2, b = map(UnitVector3.from_array, (a, a2, b))
        flips += complete_outcomes(h, SettingPair(a, b)).y != complete_outcomes(h, SettingPair(a2, b)).y
    assert flips > 0


@given(unit_vectors, unit_vectors, unit_vectors, unit_vectors, unit_vectors)
def test_local_baseline_is_local(lam, a, a2, b, b2):
    o = local_baseline_outcomes(lam, SettingPair(a, b))
    assert o.x == local_baseline_outcomes(lam, SettingPair(a, b2)).x
    assert o.y == local_baseline_outcomes(lam, SettingPair(a2, b)).y


def test_local_baseline_examples():
    assert local_baseline_outcomes(Z, SettingPair(Z, Z)) == PairOutcome(1, -1)
    lam = SeededRng(5).unit_vectors(10_000)
    x, y = LOCAL_BASELINE.evaluate([lam], np.array([0, 0, 1.0]), np.array([0, 0, 1.0]))
    assert np.all(x * y == -1)


def test_local_baseline_orthogonal_correlation():
    # quadrature oracle first: E(pi/2) = 0
    assert oracles.hemisphere_correlation(math.pi / 2) == pytest.approx(0.0, abs=1e-6)
    n = 1_000_000
    lam = SeededRng(6).unit_vectors(n)
    x, y = LOCAL_BASELINE.evaluate([lam], np.array([0, 0, 1.0]), np.array([1.0, 0, 0]))
    assert abs((x * y).mean()) < 4 / math.sqrt(n)


@settings(max_examples=30)
@given(unit_vectors, unit_vectors, unit_vectors, unit_vectors)
def test_vectorised_matches_scalar(l1, l2, a, b):
    arr = lambda v: np.array([tuple(v)])
    x, y = complete_signs(arr(l1), arr(l2), np.array(tuple(a)), np.array(tuple(b)))
    o = complete_outcomes(HiddenPair(l1, l2), SettingPair(a, b))
    assert (int(x[0]), int(y[0])) == (o.x, o.y)


def test_model_spec_surface():
    assert COMPLETE.n_hidden == 2 and COMPLETE.outcome_kind == "pair"
    assert LOCAL_BASELINE.n_hidden == 1
    assert ModelSpec("sufficient_condition").outcome_kind == "product"
    assert ModelSpec("single_spin", Vector3(0, 0, 1)).outcome_kind == "single"
    with pytest.raises(ValueError):
        ModelSpec("toner_bacon")


def test_models_are_pure():
    lam = SeededRng(8).unit_vectors(1000)
    lam2 = SeededRng(9).unit_vectors(1000)
    a, b = np.array(tuple(EZ)), np.array([1.0, 0, 0])
    first = COMPLETE.evaluate([lam, lam2], a, b)
    second = COMPLETE.evaluate([lam, lam2], a, b)
    assert all(np.array_equal(p, q) for p, q in zip(first, second))
