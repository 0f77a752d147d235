"""Deterministic hidden-variable models.

Four models are catalogued:

``single_spin``
    Bell-Mermin rule for one spin with Bloch vector P: ``X = sgn((P + lam).a)``.
``sufficient_condition``
    Fixes only the product of the two outcomes, ``XY = sgn(lam1.lam2 - a.b)``.
    It exposes no individual outcomes.
``complete``
    ``X = sgn(a.lam1)`` and ``Y = sgn(lam1.lam2 - a.b) * X``. X is local, Y is not.
``local_baseline``
    Anticorrelated hemisphere model on one shared lam: ``X = sgn(a.lam)``,
    ``Y = -sgn(b.lam)``.

Each model has a scalar entry point operating on :class:`UnitVector3` objects
and a vectorised one operating on ``(n, 3)`` arrays. The scalar versions are
thin wrappers so both paths share one formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidModelParameter
from .geometry import UnitVector3, Vector3, dot, rowdot, sign_array

BLOCH_TOL = 1e-12


class ModelKind(str, Enum):
    SINGLE_SPIN = "single_spin"
    SUFFICIENT_CONDITION = "sufficient_condition"
    COMPLETE = "complete"
    LOCAL_BASELINE = "local_baseline"


# What a model reports per trial.
SINGLE = "single"
PRODUCT = "product"
PAIR = "pair"


@dataclass(frozen=True)
class HiddenPair:
    lambda1: UnitVector3
    lambda2: UnitVector3


@dataclass(frozen=True)
class SettingPair:
    a: UnitVector3
    b: UnitVector3

    @property
    def cos_theta_ab(self) -> float:
        return min(1.0, max(-1.0, dot(self.a, self.b)))


@dataclass(frozen=True)
class PairOutcome:
    x: int
    y: int

    @property
    def xy(self) -> int:
        return self.x * self.y


@dataclass(frozen=True)
class ProductOutcome:
    """Only the product XY is known; there is deliberately no ``x`` or ``y``."""

    xy: int


TrialOutcome = PairOutcome | ProductOutcome


def _check_bloch(P) -> np.ndarray:
    p = np.asarray(tuple(P), dtype=np.float64)
    if not np.all(np.isfinite(p)):
        raise InvalidModelParameter("Bloch vector must be finite")
    if float(np.sqrt(rowdot(p, p))) > 1.0 + BLOCH_TOL:
        raise InvalidModelParameter(f"Bloch vector {tuple(p)} has length greater than 1")
    return p


# -- vectorised forms --------------------------------------------------------


def single_spin_signs(P, lam: np.ndarray, a) -> np.ndarray:
    p = _check_bloch(P)
    return sign_array(rowdot(p + lam, np.asarray(a, dtype=np.float64)))


def sufficient_condition_products(lam1: np.ndarray, lam2: np.ndarray, a, b) -> np.ndarray:
    return sign_array(rowdot(lam1, lam2) - rowdot(np.asarray(a), np.asarray(b)))


def complete_signs(lam1: np.ndarray, lam2: np.ndarray, a, b) -> tuple[np.ndarray, np.ndarray]:
    x = sign_array(rowdot(np.asarray(a), lam1))
    y = sufficient_condition_products(lam1, lam2, a, b) * x
    return x, y


def local_baseline_signs(lam: np.ndarray, a, b) -> tuple[np.ndarray, np.ndarray]:
    x = sign_array(rowdot(np.asarray(a), lam))
    y = -sign_array(rowdot(np.asarray(b), lam))
    return x, y


# -- scalar forms ------------------------------------------------------------


def _arr(v) -> np.ndarray:
    return np.asarray(tuple(v), dtype=np.float64)


def single_spin_outcome(P: Vector3, lam: UnitVector3, a: UnitVector3) -> int:
    """Outcome +1/-1 of measuring a single spin with Bloch vector P along ``a``."""
    return int(single_spin_signs(P, _arr(lam), _arr(a)))


def sufficient_condition_product(h: HiddenPair, s: SettingPair) -> int:
    """The product XY = sgn(lam1.lam2 - a.b). No individual outcome is defined."""
    return int(sufficient_condition_products(_arr(h.lambda1), _arr(h.lambda2), _arr(s.a), _arr(s.b)))


def complete_outcomes(h: HiddenPair, s: SettingPair) -> PairOutcome:
    x, y = complete_signs(_arr(h.lambda1), _arr(h.lambda2), _arr(s.a), _arr(s.b))
    return PairOutcome(int(x), int(y))


def local_baseline_outcomes(lam: UnitVector3, s: SettingPair) -> PairOutcome:
    x, y = local_baseline_signs(_arr(lam), _arr(s.a), _arr(s.b))
    return PairOutcome(int(x), int(y))


@dataclass(frozen=True)
class ModelSpec:
    """Selects a model from the catalogue together with its parameters.

    ``bloch_vector`` is only meaningful for ``single_spin``.

    The estimator talks to models through ``n_hidden``, ``outcome_kind`` and
    :meth:`evaluate`; any object providing those three can be run, which is
    how test fixtures plug in.
    """

    kind: ModelKind
    bloch_vector: Vector3 = Vector3(0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind is ModelKind.SINGLE_SPIN:
            _check_bloch(self.bloch_vector)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def n_hidden(self) -> int:
        """Number of unit vectors drawn per trial."""
        if self.kind in (ModelKind.SINGLE_SPIN, ModelKind.LOCAL_BASELINE):
            return 1
        return 2

    @property
    def outcome_kind(self) -> str:
        return {
            ModelKind.SINGLE_SPIN: SINGLE,
            ModelKind.SUFFICIENT_CONDITION: PRODUCT,
            ModelKind.COMPLETE: PAIR,
            ModelKind.LOCAL_BASELINE: PAIR,
        }[self.kind]

    def evaluate(self, lambdas: list[np.ndarray], a, b=None):
        """Evaluate a batch of trials.

        ``lambdas`` holds ``n_hidden`` arrays of shape (n, 3). ``a`` and ``b``
        are (3,) or (n, 3). Returns one sign array for single/product models
        and an ``(x, y)`` tuple for pair models.
        """
        k = self.kind
        if k is ModelKind.SINGLE_SPIN:
            return single_spin_signs(self.bloch_vector, lambdas[0], a)
        if k is ModelKind.SUFFICIENT_CONDITION:
            return sufficient_condition_products(lambdas[0], lambdas[1], a, b)
        if k is ModelKind.COMPLETE:
            return complete_signs(lambdas[0], lambdas[1], a, b)
        return local_baseline_signs(lambdas[0], a, b)


SINGLE_SPIN = ModelSpec(ModelKind.SINGLE_SPIN)
SUFFICIENT_CONDITION = ModelSpec(ModelKind.SUFFICIENT_CONDITION)
COMPLETE = ModelSpec(ModelKind.COMPLETE)
LOCAL_BASELINE = ModelSpec(ModelKind.LOCAL_BASELINE)


def get_model(name: str, bloch_vector: Vector3 | None = None) -> ModelSpec:
    kind = ModelKind(name)
    if bloch_vector is not None:
        return ModelSpec(kind, bloch_vector)
    return ModelSpec(kind)
