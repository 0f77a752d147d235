"""Closed-form references for the quantities the Monte Carlo engine estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError
from .geometry import UnitVector3, Vector3, cap_solid_angle_above, cap_solid_angle_below, dot, planar_direction
from .models import BLOCH_TOL, SettingPair

SUM_TOL = 1e-12

# Planar CHSH angles in degrees: a, a', b, b'.
STANDARD_CHSH_ANGLES_DEG = (0.0, 90.0, 45.0, 135.0)
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
LOCAL_BOUND = 2.0


def _check_cos(c: float) -> float:
    if not -1.0 <= c <= 1.0:
        raise DomainError(f"cos(theta) = {c!r} outside [-1, 1]")
    return float(c)


@dataclass(frozen=True)
class JointProbabilities:
    pp: float
    pm: float
    mp: float
    mm: float

    def __post_init__(self):
        for p in (self.pp, self.pm, self.mp, self.mm):
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"probability {p!r} outside [0, 1]")
        if abs(self.pp + self.pm + self.mp + self.mm - 1.0) > SUM_TOL:
            raise DomainError("joint probabilities do not sum to 1")

    def as_dict(self) -> dict[str, float]:
        return {"pp": self.pp, "pm": self.pm, "mp": self.mp, "mm": self.mm}

    @property
    def correlation(self) -> float:
        return self.pp + self.mm - self.pm - self.mp


@dataclass(frozen=True)
class ChshSettings:
    a: UnitVector3
    a_prime: UnitVector3
    b: UnitVector3
    b_prime: UnitVector3

    @classmethod
    def planar(cls, angles_deg=STANDARD_CHSH_ANGLES_DEG) -> "ChshSettings":
        """Settings in the xz-plane at the given angles (degrees from +z)."""
        return cls(*(planar_direction(math.radians(t)) for t in angles_deg))

    def pairs(self) -> tuple[SettingPair, SettingPair, SettingPair, SettingPair]:
        """The four setting pairs in CHSH order: (a,b), (a,b'), (a',b), (a',b')."""
        return (
            SettingPair(self.a, self.b),
            SettingPair(self.a, self.b_prime),
            SettingPair(self.a_prime, self.b),
            SettingPair(self.a_prime, self.b_prime),
        )


# Signs applied to the four pair correlations.
CHSH_SIGNS = (1.0, -1.0, 1.0, 1.0)


def singlet_correlation(s: SettingPair) -> float:
    """<XY> = -a.b."""
    return -dot(s.a, s.b)


def singlet_joint_probabilities(cos_theta: float) -> JointProbabilities:
    c = _check_cos(cos_theta)
    same = (1.0 - c) / 4.0
    diff = (1.0 + c) / 4.0
    return JointProbabilities(pp=same, pm=diff, mp=diff, mm=same)


def singlet_conditional(y_given: int, x: int, cos_theta: float) -> float:
    """P(Y = y | X = x) for the singlet, using uniform marginals P(X = x) = 1/2.

    Obtained by dividing the joint probability by the marginal, which gives
    (1 - x*y*cos_theta) / 2.
    """
    if y_given not in (1, -1) or x not in (1, -1):
        raise DomainError("outcomes must be +1 or -1")
    c = _check_cos(cos_theta)
    return (1.0 - x * y_given * c) / 2.0


def single_spin_expectation(P: Vector3, a: UnitVector3) -> float:
    """<X> = P.a for the single-spin sign rule."""
    if math.sqrt(dot(P, P)) > 1.0 + BLOCH_TOL:
        raise DomainError("Bloch vector longer than 1")
    return dot(P, a)


def inner_integral_reduction(s: SettingPair) -> float:
    """Average of sgn(lam1.lam2 - a.b) over lam2 for fixed lam1, via cap areas.

    The region lam1.lam2 > a.b is a cap of solid angle 2*pi*(1 - a.b) and its
    complement has 2*pi*(1 + a.b), so the normalized difference is -a.b
    whatever lam1 is.
    """
    c = s.cos_theta_ab
    return (cap_solid_angle_above(c) - cap_solid_angle_below(c)) / (4.0 * math.pi)


def local_baseline_correlation(theta: float) -> float:
    """<XY> = -1 + 2*theta/pi for the hemisphere model at setting angle theta (radians)."""
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta = {theta!r} outside [0, pi]")
    return -1.0 + 2.0 * theta / math.pi


def local_baseline_correlation_for(s: SettingPair) -> float:
    return local_baseline_correlation(math.acos(s.cos_theta_ab))


def local_baseline_joint_probabilities(theta: float) -> JointProbabilities:
    """Cell probabilities of the hemisphere model; X and Y disagree in sign with probability 1 - theta/pi."""
    t = local_baseline_correlation(theta)
    same = (1.0 + t) / 4.0
    diff = (1.0 - t) / 4.0
    return JointProbabilities(pp=same, pm=diff, mp=diff, mm=same)


def local_baseline_conditional_gap(theta: float) -> float:
    """|P(Y=+1|X=+1) - P(Y=+1|X=-1)| for the hemisphere model: |1 - 2*theta/pi|."""
    return abs(local_baseline_correlation(theta))


def chsh_value(correlation: Callable[[SettingPair], float], settings: ChshSettings) -> float:
    """E(a,b) - E(a,b') + E(a',b) + E(a',b'). Signed; compare magnitudes."""
    return sum(sign * correlation(p) for sign, p in zip(CHSH_SIGNS, settings.pairs()))


def asymmetry_y_flip_rate() -> float:
    """Probability that the complete model's Y flips when A's setting is redrawn.

    All of lam1, lam2, a, a', b drawn independently and uniformly. Averaging
    over lam2 and b in closed form leaves a one-dimensional integral over the
    angle between a and a', which evaluates to (3*pi + 16) / (18*pi).
    """
    return (3.0 * math.pi + 16.0) / (18.0 * math.pi)


def reference_correlation(model_name: str, s: SettingPair) -> float:
    """Exact <XY> for a two-party model in the catalogue."""
    if model_name == "local_baseline":
        return local_baseline_correlation_for(s)
    if model_name in ("complete", "sufficient_condition"):
        return singlet_correlation(s)
    raise DomainError(f"no correlation reference for model {model_name!r}")
