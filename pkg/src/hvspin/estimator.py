"""Sharded, seed-reproducible Monte Carlo engine.

A run of N trials is split into ``shards`` contiguous blocks of
``ceil(N / shards)`` trials (the last block takes the remainder). Shard ``s``
draws from ``SeededRng(master_seed, s)`` and keeps a private tally; tallies
are merged by addition. The result is a function of the config alone, so the
number of worker threads executing the shards never changes it.

Per trial the hidden vectors are drawn in a fixed order (lam1, then lam2),
two uniforms each, so models that share a seed see the same hidden variables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import models as _m
from .errors import EmptyRunError, ExactLawViolation, InvalidModelParameter, UnsupportedModelError
from .geometry import SeededRng, UnitVector3, rowdot, sign_array, uniforms_to_sphere
from .models import ModelKind, ModelSpec, SettingPair

MAX_TRIALS = 2**62
BATCH = 1 << 18


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's counts.

    ``settings`` is a :class:`SettingPair`, or a single direction for the
    single-spin model.
    """

    model: ModelSpec
    settings: SettingPair | UnitVector3
    trials: int
    master_seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if not 1 <= self.trials <= MAX_TRIALS:
            raise InvalidModelParameter(f"trials must be in [1, 2**62], got {self.trials}")
        if not 1 <= self.shards <= self.trials:
            raise InvalidModelParameter(f"shards must be in [1, trials], got {self.shards}")
        kind = self.model.outcome_kind
        if kind == _m.SINGLE and not isinstance(self.settings, UnitVector3):
            raise InvalidModelParameter("single-spin runs take one direction as settings")
        if kind != _m.SINGLE and not isinstance(self.settings, SettingPair):
            raise InvalidModelParameter("two-party runs take a SettingPair as settings")

    def shard_sizes(self) -> list[int]:
        per = -(-self.trials // self.shards)
        return [max(0, min(per, self.trials - s * per)) for s in range(self.shards)]


@dataclass(frozen=True)
class JointCounts:
    """Outcome tallies.

    ``kind`` is ``"pair"`` (four joint cells), ``"product"`` (only XY is
    known) or ``"single"`` (one party's X). Product and single tallies use
    ``n_plus``/``n_minus``.
    """

    kind: str
    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0
    n_plus: int = 0
    n_minus: int = 0

    def __post_init__(self):
        cells = (self.n_pp, self.n_pm, self.n_mp, self.n_mm, self.n_plus, self.n_minus)
        if any(c < 0 for c in cells):
            raise ValueError("counts must be nonnegative")
        if self.kind == _m.PAIR and (self.n_plus or self.n_minus):
            raise ValueError("pair counts carry no n_plus/n_minus")
        if self.kind != _m.PAIR and (self.n_pp or self.n_pm or self.n_mp or self.n_mm):
            raise ValueError(f"{self.kind} counts carry no joint cells")

    @property
    def total(self) -> int:
        if self.kind == _m.PAIR:
            return self.n_pp + self.n_pm + self.n_mp + self.n_mm
        return self.n_plus + self.n_minus

    def __add__(self, other: "JointCounts") -> "JointCounts":
        if self.kind != other.kind:
            raise ValueError(f"cannot merge {self.kind} counts with {other.kind} counts")
        return JointCounts(
            self.kind,
            self.n_pp + other.n_pp,
            self.n_pm + other.n_pm,
            self.n_mp + other.n_mp,
            self.n_mm + other.n_mm,
            self.n_plus + other.n_plus,
            self.n_minus + other.n_minus,
        )

    def to_product(self) -> "JointCounts":
        """Forget the individual outcomes and keep only the product tally."""
        if self.kind == _m.PRODUCT:
            return self
        if self.kind != _m.PAIR:
            raise UnsupportedModelError("single-party counts have no product")
        return JointCounts(_m.PRODUCT, n_plus=self.n_pp + self.n_mm, n_minus=self.n_pm + self.n_mp)

    def as_dict(self) -> dict:
        if self.kind == _m.PAIR:
            return {"pp": self.n_pp, "pm": self.n_pm, "mp": self.n_mp, "mm": self.n_mm}
        return {"plus": self.n_plus, "minus": self.n_minus}


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n: int
    master_seed: int | None = None

    def z_score(self, reference: float) -> float:
        diff = abs(self.value - reference)
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / self.std_error


def sign_std_error(value: float, n: int) -> float:
    """Plug-in standard error of the mean of a +1/-1 observable."""
    return math.sqrt(max(0.0, 1.0 - value * value) / n)


def _sign_estimate(plus: int, minus: int, seed) -> EstimateWithError:
    n = plus + minus
    if n == 0:
        raise EmptyRunError("no trials in tally")
    value = (plus - minus) / n
    return EstimateWithError(value, sign_std_error(value, n), n, seed)


def _tally_pair(x: np.ndarray, y: np.ndarray) -> JointCounts:
    # Encode (x, y) as a cell index 0..3 in order pp, pm, mp, mm.
    idx = (x < 0).astype(np.int64) * 2 + (y < 0)
    c = np.bincount(idx, minlength=4)
    return JointCounts(_m.PAIR, int(c[0]), int(c[1]), int(c[2]), int(c[3]))


def _tally_signs(kind: str, s: np.ndarray) -> JointCounts:
    plus = int(np.count_nonzero(s > 0))
    return JointCounts(kind, n_plus=plus, n_minus=int(s.size) - plus)


def _run_shard(cfg: RunConfig, shard: int, size: int) -> JointCounts:
    model = cfg.model
    k = model.n_hidden
    kind = model.outcome_kind
    if kind == _m.SINGLE:
        a, b = np.asarray(tuple(cfg.settings), dtype=np.float64), None
    else:
        a = np.asarray(tuple(cfg.settings.a), dtype=np.float64)
        b = np.asarray(tuple(cfg.settings.b), dtype=np.float64)
    check_law = getattr(model, "kind", None) is ModelKind.COMPLETE

    rng = SeededRng(cfg.master_seed, shard)
    total = JointCounts(kind)
    done = 0
    while done < size:
        n = min(BATCH, size - done)
        u = rng.uniforms((n, 2 * k))
        lambdas = [uniforms_to_sphere(u[:, 2 * i : 2 * i + 2]) for i in range(k)]
        out = model.evaluate(lambdas, a, b)
        if kind == _m.PAIR:
            x, y = out
            if check_law:
                xy = sign_array(rowdot(lambdas[0], lambdas[1]) - rowdot(a, b))
                bad = np.count_nonzero(x * y != xy)
                if bad:
                    raise ExactLawViolation(f"x*y != sgn(lam1.lam2 - a.b) on {bad} trials")
            total = total + _tally_pair(x, y)
        else:
            total = total + _tally_signs(kind, out)
        done += n
    return total


def run_trials(cfg: RunConfig, workers: int | None = 1) -> JointCounts:
    """Run ``cfg`` and return merged tallies.

    ``workers`` only controls how many shards execute at once; the counts
    are identical for every value.
    """
    sizes = cfg.shard_sizes()
    jobs = [(s, n) for s, n in enumerate(sizes)]
    if workers is None or workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _run_shard(cfg, *j), jobs))
    else:
        parts = [_run_shard(cfg, s, n) for s, n in jobs]
    return reduce(lambda p, q: p + q, parts, JointCounts(cfg.model.outcome_kind))


def correlation_estimate(counts: JointCounts, master_seed: int | None = None) -> EstimateWithError:
    """Estimate <XY> from pair or product tallies."""
    if counts.kind == _m.SINGLE:
        raise UnsupportedModelError("single-party counts carry no correlation")
    if counts.kind == _m.PAIR:
        return _sign_estimate(counts.n_pp + counts.n_mm, counts.n_pm + counts.n_mp, master_seed)
    return _sign_estimate(counts.n_plus, counts.n_minus, master_seed)


def expectation_estimate(counts: JointCounts, master_seed: int | None = None) -> EstimateWithError:
    """Estimate <X> from single-party tallies."""
    if counts.kind != _m.SINGLE:
        raise UnsupportedModelError("expectation_estimate takes single-party counts")
    return _sign_estimate(counts.n_plus, counts.n_minus, master_seed)


def marginal_estimates(
    counts: JointCounts, master_seed: int | None = None
) -> tuple[EstimateWithError, EstimateWithError]:
    """Estimate (<X>, <Y>) from pair tallies.

    Product-only tallies raise: the product rule alone defines no marginals.
    """
    if counts.kind != _m.PAIR:
        raise UnsupportedModelError(
            "product-only model defines no marginals: it fixes only XY, not X or Y"
        )
    x = _sign_estimate(counts.n_pp + counts.n_pm, counts.n_mp + counts.n_mm, master_seed)
    y = _sign_estimate(counts.n_pp + counts.n_mp, counts.n_pm + counts.n_mm, master_seed)
    return x, y


def joint_probability_estimates(counts: JointCounts, master_seed: int | None = None) -> dict[str, EstimateWithError]:
    """Cell frequencies with binomial standard errors, keyed pp/pm/mp/mm."""
    if counts.kind != _m.PAIR:
        raise UnsupportedModelError(
            "product-only model defines no joint probabilities beyond P(same) and P(different)"
        )
    n = counts.total
    if n == 0:
        raise EmptyRunError("no trials in tally")
    out = {}
    for key, c in counts.as_dict().items():
        p = c / n
        out[key] = EstimateWithError(p, math.sqrt(p * (1.0 - p) / n), n, master_seed)
    return out


def estimate_correlation(
    model: ModelSpec, s: SettingPair, trials: int, seed: int = 0, shards: int = 1, workers: int | None = 1
) -> EstimateWithError:
    """Convenience wrapper: run and estimate <XY> in one call."""
    cfg = RunConfig(model, s, trials, seed, shards)
    return correlation_estimate(run_trials(cfg, workers), seed)

