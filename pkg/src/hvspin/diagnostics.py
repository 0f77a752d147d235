"""Audits of the models' nonlocal structure: CHSH, signaling, outcome dependence, asymmetry."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import models as _m
from .analytic import CHSH_SIGNS, ChshSettings
from .errors import ExactLawViolation, InsufficientDataError, UnsupportedModelError
from .estimator import (
    EstimateWithError,
    JointCounts,
    RunConfig,
    correlation_estimate,
    marginal_estimates,
    run_trials,
)
from .geometry import SeededRng, UnitVector3, derive_seed, uniforms_to_sphere
from .models import SettingPair

AUDIT_Z_THRESHOLD = 5.0
COMPARE_Z_THRESHOLD = 4.0


@dataclass(frozen=True)
class ChshEstimate:
    value: float
    std_error: float
    terms: tuple[EstimateWithError, ...]
    seed: int

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class SignalingAudit:
    a: UnitVector3
    setting_grid: tuple[UnitVector3, ...]
    marginals: tuple[EstimateWithError, ...]
    max_pairwise_z: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_pairwise_z < self.threshold


@dataclass(frozen=True)
class OutcomeDependenceReport:
    cos_theta: float
    p_y_plus_given_x_plus: EstimateWithError
    p_y_plus_given_x_minus: EstimateWithError

    @property
    def gap(self) -> float:
        return abs(self.p_y_plus_given_x_plus.value - self.p_y_plus_given_x_minus.value)

    @property
    def gap_std_error(self) -> float:
        return math.hypot(self.p_y_plus_given_x_plus.std_error, self.p_y_plus_given_x_minus.std_error)


@dataclass(frozen=True)
class AsymmetryProbe:
    trials: int
    x_flip_rate_under_b_change: float
    y_flip_rate_under_a_change: float
    x_flips: int
    y_flips: int

    @property
    def y_flip_std_error(self) -> float:
        p = self.y_flip_rate_under_a_change
        return math.sqrt(p * (1.0 - p) / self.trials)


def _require_pairs(model, what: str):
    if model.outcome_kind != _m.PAIR:
        raise UnsupportedModelError(
            f"{what} needs both outcomes X and Y; model {model.name!r} "
            "defines no marginals (the product rule fixes only XY)"
        )


def chsh_scan(
    model, settings: ChshSettings, trials_per_pair: int, seed: int = 0, shards: int = 1, workers: int | None = 1
) -> ChshEstimate:
    """Estimate the CHSH combination, one independent run per setting pair.

    Term ``i`` runs with seed ``derive_seed(seed, i)``; the seeds do not
    depend on the model, so the product-only and complete models give the
    same estimate for the same seed. Errors add in quadrature.
    """
    if model.outcome_kind == _m.SINGLE:
        raise UnsupportedModelError("CHSH needs a two-party model")
    terms = []
    for i, pair in enumerate(settings.pairs()):
        s = derive_seed(seed, i)
        counts = run_trials(RunConfig(model, pair, trials_per_pair, s, shards), workers)
        terms.append(correlation_estimate(counts, s))
    value = sum(sign * t.value for sign, t in zip(CHSH_SIGNS, terms))
    err = math.sqrt(sum(t.std_error**2 for t in terms))
    return ChshEstimate(value, err, tuple(terms), seed)


def pairwise_max_z(estimates) -> float:
    """Largest |m_i - m_j| / sqrt(se_i^2 + se_j^2) over all pairs."""
    worst = 0.0
    for p, q in itertools.combinations(estimates, 2):
        diff = abs(p.value - q.value)
        se = math.hypot(p.std_error, q.std_error)
        if se == 0.0:
            z = 0.0 if diff == 0.0 else math.inf
        else:
            z = diff / se
        worst = max(worst, z)
    return worst


def no_signaling_audit(
    model,
    a: UnitVector3,
    b_grid,
    trials: int,
    seed: int = 0,
    threshold: float = AUDIT_Z_THRESHOLD,
    shards: int = 1,
    workers: int | None = 1,
) -> SignalingAudit:
    """Check that A's marginal <X> does not move as B's setting ranges over ``b_grid``.

    Each b gets its own derived seed. The audit passes when every pairwise
    z-score between marginals stays below ``threshold``.
    """
    _require_pairs(model, "a signaling audit")
    b_grid = tuple(b_grid)
    marginals = []
    for i, b in enumerate(b_grid):
        s = derive_seed(seed, i)
        counts = run_trials(RunConfig(model, SettingPair(a, b), trials, s, shards), workers)
        marginals.append(marginal_estimates(counts, s)[0])
    return SignalingAudit(a, b_grid, tuple(marginals), pairwise_max_z(marginals), threshold)


def conditional_estimates(counts: JointCounts, seed=None) -> tuple[EstimateWithError, EstimateWithError]:
    """P(Y=+1 | X=+1) and P(Y=+1 | X=-1) from a pair tally."""
    if counts.kind != _m.PAIR:
        raise UnsupportedModelError("conditional probabilities need pair counts")
    out = []
    for hit, n in ((counts.n_pp, counts.n_pp + counts.n_pm), (counts.n_mp, counts.n_mp + counts.n_mm)):
        if n == 0:
            raise InsufficientDataError("a conditioning cell has zero trials")
        p = hit / n
        out.append(EstimateWithError(p, math.sqrt(p * (1.0 - p) / n), n, seed))
    return out[0], out[1]


def outcome_dependence_audit(
    model, s: SettingPair, trials: int, seed: int = 0, shards: int = 1, workers: int | None = 1
) -> OutcomeDependenceReport:
    _require_pairs(model, "an outcome-dependence audit")
    counts = run_trials(RunConfig(model, s, trials, seed, shards), workers)
    plus, minus = conditional_estimates(counts, seed)
    return OutcomeDependenceReport(s.cos_theta_ab, plus, minus)


def asymmetry_probe(trials: int, seed: int = 0, model=_m.COMPLETE, batch: int = 1 << 18) -> AsymmetryProbe:
    """Count deterministic outcome flips when one party's setting is redrawn.

    Per trial draws the model's hidden vectors, then a, b, a', b', all
    uniform on the sphere. X is compared between (a, b) and (a, b'); Y
    between (a, b) and (a', b). For the complete model X must never flip;
    that is checked exactly and raised on.
    """
    _require_pairs(model, "the asymmetry probe")
    k = model.n_hidden
    rng = SeededRng(seed, 0)
    x_flips = y_flips = 0
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        v = uniforms_to_sphere(rng.uniforms((n, k + 4, 2)))
        lambdas = [v[:, i] for i in range(k)]
        a, b, a2, b2 = (v[:, k + i] for i in range(4))
        x, y = model.evaluate(lambdas, a, b)
        x_b2, _ = model.evaluate(lambdas, a, b2)
        _, y_a2 = model.evaluate(lambdas, a2, b)
        x_flips += int(np.count_nonzero(x != x_b2))
        y_flips += int(np.count_nonzero(y != y_a2))
        done += n
    if getattr(model, "kind", None) is _m.ModelKind.COMPLETE and x_flips:
        raise ExactLawViolation(f"complete model X changed with B's setting on {x_flips} trials")
    return AsymmetryProbe(trials, x_flips / trials, y_flips / trials, x_flips, y_flips)


def chi_square_uniform_pvalue(counts: JointCounts) -> float:
    """p-value of a chi-square goodness-of-fit of the four joint cells against 1/4 each."""
    if counts.kind != _m.PAIR:
        raise UnsupportedModelError("chi-square test needs pair counts")
    return float(stats.chisquare([counts.n_pp, counts.n_pm, counts.n_mp, counts.n_mm]).pvalue)


def fibonacci_directions(n: int) -> tuple[UnitVector3, ...]:
    """``n`` roughly evenly spread directions (golden-angle spiral)."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    out = []
    for i in range(n):
        z = 1.0 - (2.0 * i + 1.0) / n
        r = math.sqrt(max(0.0, 1.0 - z * z))
        out.append(UnitVector3.normalized(r * math.cos(golden * i), r * math.sin(golden * i), z))
    return tuple(out)
