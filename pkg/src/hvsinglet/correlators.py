"""Correlators for each model family: closed forms, seeded Monte-Carlo
estimation, in-plane averages by periodic quadrature, and an independent
sphere-moment oracle for the sixth-moment identity behind the cubic family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Plane, UnitVector3
from .models import (
    InvalidModelError,
    ModelFamily,
    ModelParams,
    Settings,
    _sample_cells,
    _sample_sigma_tau,
)

DEFAULT_PLANE_NODES = 256


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo mean of sigma*tau with its plug-in standard error."""

    mean: float
    stderr: float
    n: int
    seed: int


@dataclass(frozen=True)
class PlaneAverageSpec:
    """In-plane averaging request: settings at relative angle phi, the first
    one uniformly distributed over orientations inside ``plane``."""

    plane: Plane
    phi: float
    quadrature_order: int = DEFAULT_PLANE_NODES

    def __post_init__(self) -> None:
        if self.quadrature_order < 4:
            raise ValueError("quadrature_order must be at least 4")


def _pair_correlator_arrays(params: ModelParams, a: np.ndarray, b: np.ndarray):
    """Correlator (hidden variables already averaged out) for row-paired
    settings; accepts (3,) or (n, 3) arrays."""
    ab = np.sum(a * b, axis=-1)
    fam = params.family
    if fam is ModelFamily.QM:
        return -ab
    if fam is ModelFamily.FHV:
        return -ab / (1.0 + params.eta)
    if fam is ModelFamily.SHV:
        pbar = params.p_mean()
        cross_term = np.sum(np.cross(a, b) * pbar, axis=-1)
        return -(ab + cross_term) / math.sqrt(1.0 + params.p_m**2)
    if fam is ModelFamily.THV:
        z = params.zeta
        return -(1.0 - 3.0 * z / 35.0) * ab + (2.0 * z / 35.0) * ab**3
    raise InvalidModelError(f"no analytic correlator for family {fam.value}")


def analytic_correlator(params: ModelParams, s: Settings) -> float:
    """Closed-form correlator C(a, b) = E[sigma*tau] for the family:

        FHV  -a.b / (1 + eta)
        SHV  -[a.b + (a x b).pbar] / sqrt(1 + pm^2)
        THV  -(1 - 3*zeta/35) a.b + (2*zeta/35) (a.b)^3
        QM   -a.b
    """
    return float(_pair_correlator_arrays(params, s.a.arr, s.b.arr))


def scalar_correlator(params: ModelParams, ab: float) -> float:
    """Correlator as a function of a.b alone, for the families where that is
    the only geometric dependence (everything except SHV)."""
    if params.family is ModelFamily.SHV:
        raise InvalidModelError("SHV correlator depends on the full geometry")
    fam = params.family
    if fam is ModelFamily.QM:
        return -ab
    if fam is ModelFamily.FHV:
        return -ab / (1.0 + params.eta)
    if fam is ModelFamily.THV:
        z = params.zeta
        return -(1.0 - 3.0 * z / 35.0) * ab + (2.0 * z / 35.0) * ab**3
    raise InvalidModelError(f"no analytic correlator for family {fam.value}")


def _combine_moments(parts: list[tuple[int, float, float]]) -> tuple[int, float, float]:
    """Pairwise (tree) reduction of per-shard (count, sum, sum-of-squares)
    partials; depends only on the shard order, not on completion timing."""
    if not parts:
        return (0, 0.0, 0.0)
    while len(parts) > 1:
        merged = []
        for i in range(0, len(parts) - 1, 2):
            n1, s1, q1 = parts[i]
            n2, s2, q2 = parts[i + 1]
            merged.append((n1 + n2, s1 + s2, q1 + q2))
        if len(parts) % 2 == 1:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def mc_correlator(
    params: ModelParams, s: Settings, n: int, seed: int, shards: int = 1
) -> MCEstimate:
    """Empirical correlator: draw hidden states, form each joint table, draw
    outcomes, and average sigma*tau.

    Work is split over ``shards`` deterministic substreams; the result is
    bit-reproducible for a fixed (seed, shards) pair.
    """
    if n < 100:
        raise ValueError("n must be at least 100")
    if shards < 1:
        raise ValueError("shards must be positive")
    streams = np.random.SeedSequence(seed).spawn(shards)
    base, extra = divmod(n, shards)
    parts = []
    for i, ss in enumerate(streams):
        m = base + (1 if i < extra else 0)
        if m == 0:
            continue
        rng = np.random.Generator(np.random.PCG64(ss))
        cells = _sample_cells(params, s, m, rng)
        st = _sample_sigma_tau(cells, rng)
        parts.append((m, float(np.sum(st)), float(np.sum(st * st))))
    count, total, total_sq = _combine_moments(parts)
    mean = total / count
    if count > 1:
        var = max(0.0, (total_sq - total * total / count) / (count - 1))
        stderr = math.sqrt(var / count)
    else:
        stderr = 0.0
    return MCEstimate(mean=mean, stderr=stderr, n=count, seed=seed)


def plane_avg_correlator(
    params: ModelParams, spec: PlaneAverageSpec, theta0: float = 0.0
) -> float:
    """Correlator averaged over the orientation of the setting pair inside a
    plane, the two settings held at relative angle phi.

    Uses the periodic trapezoid rule over the orientation angle, which is
    spectrally accurate for the low-degree trigonometric integrands the
    analytic correlators produce; ``theta0`` shifts the node phase and must
    not change the result.
    """
    m = spec.quadrature_order
    theta = theta0 + np.arange(m) * (2.0 * math.pi / m)
    e1 = spec.plane.e1.arr
    e2 = spec.plane.e2.arr
    a = np.outer(np.cos(theta), e1) + np.outer(np.sin(theta), e2)
    tb = theta + spec.phi
    b = np.outer(np.cos(tb), e1) + np.outer(np.sin(tb), e2)
    return float(np.mean(_pair_correlator_arrays(params, a, b)))


def sphere_moment_oracle(a: UnitVector3, b: UnitVector3, order: int = 24) -> float:
    """Quadrature value of the sphere average <(a.u)^3 (b.u)^3>.

    Gauss-Legendre nodes in the polar cosine crossed with a uniform azimuth
    grid of twice the order; exact for degree-6 polynomials once order >= 4.
    Must reproduce (3/35) x + (2/35) x^3 at x = a.b.
    """
    if order < 4:
        raise ValueError("order must be at least 4 for degree-6 integrands")
    z, w = np.polynomial.legendre.leggauss(order)
    az = (np.arange(2 * order) + 0.5) * (math.pi / order)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ux = np.outer(r, np.cos(az))
    uy = np.outer(r, np.sin(az))
    uz = np.outer(z, np.ones_like(az))
    fa = (a.x * ux + a.y * uy + a.z * uz) ** 3
    fb = (b.x * ux + b.y * uy + b.z * uz) ** 3
    inner = np.mean(fa * fb, axis=1)
    return float(np.sum(w * inner) / 2.0)
