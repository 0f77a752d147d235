"""Unit-sphere primitives: vectors, the sign rule, seeded sampling and cap areas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

UNIT_NORM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


@dataclass(frozen=True)
class Vector3:
    """Plain 3-vector; used for Bloch vectors, whose length may be below one."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise DomainError(f"non-finite vector component in {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def norm(self) -> float:
        return math.sqrt(dot(self, self))

    def __iter__(self):
        return iter((self.x, self.y, self.z))


@dataclass(frozen=True)
class UnitVector3(Vector3):
    """A point on the unit sphere.

    Inputs within 1e-9 of unit length are renormalized; anything further off
    is rejected.
    """

    def __post_init__(self):
        super().__post_init__()
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > RENORMALIZE_TOL:
            raise DomainError(f"vector of norm {n!r} is not a unit vector")
        if n != 1.0:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVector3":
        """Build a unit vector pointing along an arbitrary nonzero (x, y, z)."""
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise DomainError("cannot normalize a zero or non-finite vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_array(cls, arr) -> "UnitVector3":
        x, y, z = (float(c) for c in np.asarray(arr, dtype=np.float64).reshape(3))
        return cls(x, y, z)

    @classmethod
    def from_angles(cls, polar: float, azimuth: float = 0.0) -> "UnitVector3":
        """Spherical angles in radians, polar measured from +z."""
        s = math.sin(polar)
        return cls(s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar))

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(-self.x, -self.y, -self.z)


EZ = UnitVector3(0.0, 0.0, 1.0)


def dot(u, v) -> float:
    """Euclidean inner product of two 3-vectors."""
    ux, uy, uz = u
    vx, vy, vz = v
    return ux * vx + uy * vy + uz * vz


def rowdot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inner product along the last axis, broadcasting (3,) against (n, 3).

    Summation order matches :func:`dot` so scalar and vectorised paths agree
    bit for bit.
    """
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]


def sgn(t: float) -> int:
    """Sign with the tie rule sgn(0) = +1; never returns 0."""
    if not math.isfinite(t):
        raise DomainError(f"sgn of non-finite value {t!r}")
    return 1 if t >= 0 else -1


def sign_array(t: np.ndarray) -> np.ndarray:
    """Vectorised :func:`sgn` returning an int8 array of +1/-1."""
    return np.where(t >= 0, np.int8(1), np.int8(-1))


def cap_solid_angle_above(c: float) -> float:
    """Solid angle of {lam : n.lam > c} on the unit sphere, i.e. 2*pi*(1 - c)."""
    if not -1.0 <= c <= 1.0:
        raise DomainError(f"cap threshold {c!r} outside [-1, 1]")
    return 2.0 * math.pi * (1.0 - c)


def cap_solid_angle_below(c: float) -> float:
    """Complement of :func:`cap_solid_angle_above`: 2*pi*(1 + c)."""
    if not -1.0 <= c <= 1.0:
        raise DomainError(f"cap threshold {c!r} outside [-1, 1]")
    return 2.0 * math.pi * (1.0 + c)


def uniforms_to_sphere(u: np.ndarray) -> np.ndarray:
    """Map pairs of U[0,1) variates (last axis of size 2) onto the unit sphere.

    Archimedes' projection: z is uniform on [-1, 1] and the azimuth uniform
    on [0, 2*pi), which gives the uniform surface measure.
    """
    z = 1.0 - 2.0 * u[..., 0]
    phi = 2.0 * math.pi * u[..., 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    out = np.empty(u.shape[:-1] + (3,), dtype=np.float64)
    out[..., 0] = r * np.cos(phi)
    out[..., 1] = r * np.sin(phi)
    out[..., 2] = z
    return out


def derive_seed(master_seed: int, *keys: int) -> int:
    """Deterministically derive a child 64-bit seed from a master seed and integer keys."""
    ss = np.random.SeedSequence(int(master_seed) % 2**64, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class SeededRng:
    """Counter-indexed random stream.

    ``(master_seed, stream_index)`` pins the sequence: the stream is a PCG64
    generator seeded from ``SeedSequence(master_seed, spawn_key=(stream_index,))``,
    so distinct indices give independent streams. Instances are single-owner;
    create one per shard rather than sharing.
    """

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def uniforms(self, shape) -> np.ndarray:
        """U[0,1) doubles; one 64-bit draw per value, so chunked calls concatenate exactly."""
        return self._gen.random(shape)

    def unit_vectors(self, n: int) -> np.ndarray:
        return uniforms_to_sphere(self.uniforms((n, 2)))


def sample_unit_vector(rng: SeededRng) -> UnitVector3:
    """Draw one point uniformly from the unit sphere, advancing ``rng``."""
    return UnitVector3.from_array(rng.unit_vectors(1)[0])


def planar_direction(theta: float) -> UnitVector3:
    """Unit vector in the xz-plane at angle ``theta`` (radians) from +z."""
    return UnitVector3(math.sin(theta), 0.0, math.cos(theta))
