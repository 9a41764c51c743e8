"""Unit-vector algebra, measurement-setting constructors, and sphere sampling.

Everything downstream (model tables, plane averaging, inequality scans) works
in one fixed right-handed orthonormal frame (X, Y, Z); all results depend only
on relative angles.  Sampling routines take an explicit
``numpy.random.Generator`` so every stochastic result is reproducible from a
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class UnitVector3:
    """A direction on the 2-sphere.  Components must already be normalized;
    use :meth:`normalized` to rescale arbitrary components."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > NORM_TOL:
            raise ValueError(f"components not normalized: |v|^2 = {n2!r}")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "UnitVector3":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_array(cls, arr) -> "UnitVector3":
        x, y, z = (float(c) for c in arr)
        return cls.normalized(x, y, z)

    @property
    def arr(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(-self.x, -self.y, -self.z)


X = UnitVector3(1.0, 0.0, 0.0)
Y = UnitVector3(0.0, 1.0, 0.0)
Z = UnitVector3(0.0, 0.0, 1.0)


def dot(u: UnitVector3, v: UnitVector3) -> float:
    """Standard inner product; in [-1, 1] up to roundoff for unit inputs."""
    return u.x * v.x + u.y * v.y + u.z * v.z


def cross(u: UnitVector3, v: UnitVector3) -> np.ndarray:
    """Right-handed cross product.  Not normalized: the magnitude equals the
    sine of the angle between ``u`` and ``v``."""
    return np.array(
        [
            u.y * v.z - u.z * v.y,
            u.z * v.x - u.x * v.z,
            u.x * v.y - u.y * v.x,
        ]
    )


@dataclass(frozen=True)
class Plane:
    """Oriented plane through the origin: orthonormal in-plane basis (e1, e2)
    plus the normal n = e1 x e2."""

    e1: UnitVector3
    e2: UnitVector3
    n: UnitVector3

    def __post_init__(self) -> None:
        if abs(dot(self.e1, self.e2)) > NORM_TOL:
            raise ValueError("e1 and e2 are not orthogonal")
        if np.max(np.abs(cross(self.e1, self.e2) - self.n.arr)) > NORM_TOL:
            raise ValueError("n must equal e1 x e2")

    @classmethod
    def from_basis(cls, e1: UnitVector3, e2: UnitVector3) -> "Plane":
        return cls(e1, e2, UnitVector3.from_array(cross(e1, e2)))

    @classmethod
    def with_normal(cls, n: UnitVector3) -> "Plane":
        """Complete ``n`` with an arbitrary right-handed in-plane basis."""
        helper = Z if abs(n.z) < 0.9 else X
        e1 = UnitVector3.from_array(np.cross(helper.arr, n.arr))
        e2 = UnitVector3.from_array(np.cross(n.arr, e1.arr))
        return cls(e1, e2, n)


def xy_plane() -> Plane:
    return Plane(X, Y, Z)


def orthogonal_plane(p: Plane) -> Plane:
    """A plane whose normal is orthogonal to that of ``p`` (normal = p.e1)."""
    return Plane(p.e2, p.n, p.e1)


@dataclass(frozen=True)
class Triad:
    """Right-handed orthonormal triple (a1, a2, a3)."""

    a1: UnitVector3
    a2: UnitVector3
    a3: UnitVector3

    def __post_init__(self) -> None:
        for u, v in ((self.a1, self.a2), (self.a2, self.a3), (self.a3, self.a1)):
            if abs(dot(u, v)) > NORM_TOL:
                raise ValueError("triad vectors are not pairwise orthogonal")
        if np.max(np.abs(cross(self.a1, self.a2) - self.a3.arr)) > NORM_TOL:
            raise ValueError("triad is not right-handed (a1 x a2 != a3)")

    @property
    def axes(self) -> tuple[UnitVector3, UnitVector3, UnitVector3]:
        return (self.a1, self.a2, self.a3)


def in_plane_direction(p: Plane, theta: float) -> UnitVector3:
    """Unit vector at counterclockwise angle ``theta`` from e1, about n."""
    c, s = math.cos(theta), math.sin(theta)
    return UnitVector3.normalized(
        c * p.e1.x + s * p.e2.x,
        c * p.e1.y + s * p.e2.y,
        c * p.e1.z + s * p.e2.z,
    )


def vectors_in_plane(p: Plane, theta: float, phi: float) -> tuple[UnitVector3, UnitVector3]:
    """Setting pair (a, b) in plane ``p``: a at angle theta, b at theta + phi.

    By construction a.b = cos(phi) and (a x b).n = sin(phi); angles are
    counterclockwise about the plane normal.
    """
    return in_plane_direction(p, theta), in_plane_direction(p, theta + phi)


def chsh_optimal_settings() -> tuple[UnitVector3, UnitVector3, UnitVector3, UnitVector3]:
    """Coplanar settings (a, b, a', b') in the xy-plane at 90, 45, 0, 135
    degrees, giving a.b = a.b' = a'.b = 1/sqrt(2) and a'.b' = -1/sqrt(2)."""
    p = xy_plane()
    a = in_plane_direction(p, math.pi / 2)
    b = in_plane_direction(p, math.pi / 4)
    a_prime = in_plane_direction(p, 0.0)
    b_prime = in_plane_direction(p, 3 * math.pi / 4)
    return a, b, a_prime, b_prime


def branciard_settings(
    phi: float,
) -> tuple[Triad, tuple[UnitVector3, ...], tuple[UnitVector3, ...]]:
    """Orthogonal triad plus companion settings b_i, b'_i at angles +phi/2
    and -phi/2 from a_i, inside the (a_i, a_{i+1}) plane (indices mod 3)."""
    if not 0.0 <= phi <= math.pi:
        raise ValueError("phi must lie in [0, pi]")
    triad = Triad(X, Y, Z)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    axes = triad.axes
    b, b_prime = [], []
    for i in range(3):
        ai, aj = axes[i], axes[(i + 1) % 3]
        b.append(UnitVector3.normalized(*(c * ai.arr + s * aj.arr)))
        b_prime.append(UnitVector3.normalized(*(c * ai.arr - s * aj.arr)))
    return triad, tuple(b), tuple(b_prime)


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 stream; pass the same seed to reproduce a run."""
    return np.random.default_rng(seed)


def sample_unit_uniform(rng: np.random.Generator) -> UnitVector3:
    """One draw from the uniform distribution on the sphere."""
    z = rng.uniform(-1.0, 1.0)
    az = rng.uniform(0.0, TWO_PI)
    r = math.sqrt(max(0.0, 1.0 - z * z))
    return UnitVector3.normalized(r * math.cos(az), r * math.sin(az), z)


def sample_unit_batch(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 3) array of independent uniform sphere draws."""
    z = rng.uniform(-1.0, 1.0, n)
    az = rng.uniform(0.0, TWO_PI, n)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(az), r * np.sin(az), z])


def sample_cap_batch(
    rng: np.random.Generator, axis: UnitVector3, half_angle: float, n: int
) -> np.ndarray:
    """(n, 3) uniform draws from the spherical cap of the given half-angle
    centered on ``axis``."""
    if not 0.0 <= half_angle <= math.pi:
        raise ValueError("half_angle must lie in [0, pi]")
    frame = Plane.with_normal(axis)
    z = rng.uniform(math.cos(half_angle), 1.0, n)
    az = rng.uniform(0.0, TWO_PI, n)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return (
        np.outer(r * np.cos(az), frame.e1.arr)
        + np.outer(r * np.sin(az), frame.e2.arr)
        + np.outer(z, axis.arr)
    )
