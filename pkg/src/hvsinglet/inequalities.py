"""CHSH, Leggett, and Branciard parameters: values, classical bounds, margins,
violation-window finders, threshold roots, closed forms for cross-checking,
and randomized audits of the two classical bounds.

Window and threshold searches are numeric (bracketing scan plus bisection or
golden-section refinement); the known closed forms are kept alongside so every
numeric result can be compared against an independent expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    Plane,
    UnitVector3,
    branciard_settings,
    chsh_optimal_settings,
    dot,
    orthogonal_plane,
    sample_unit_batch,
    xy_plane,
)
from .models import ModelFamily, ModelParams, Settings, lhv_feasible_c_range
from .correlators import (
    DEFAULT_PLANE_NODES,
    PlaneAverageSpec,
    analytic_correlator,
    plane_avg_correlator,
    scalar_correlator,
)

PI = math.pi

SCAN_NODES = 512
MAX_SEED_NODES = 256
DEFAULT_TOL = 1e-9

INEQUALITIES = ("chsh", "leggett", "branciard")
SCAN_VARIABLES = ("phi", "eta", "zeta", "p_m")


# ------------------------------ closed forms -------------------------------

ETA_MAX_CHSH_FHV = math.sqrt(2.0) - 1.0
ETA_MAX_LEGGETT_FHV = 2.0 * PI**2 - 1.0 - 2.0 * PI * math.sqrt(PI**2 - 1.0)
ETA_MAX_BRANCIARD_FHV = 3.0 / (2.0 * math.sqrt(2.0)) - 1.0
ZETA_MAX_LEGGETT_THV = 70.0 * PI**4 / (40.0 * PI**6 - 18.0 * PI**4 + 6.0 * PI**2 - 1.0)
ZETA_MAX_BRANCIARD_THV = 175.0 * (10.0 - 3.0 * math.sqrt(10.0)) / 216.0
PM_MAX_CHSH_SHV = 1.0

# CHSH decay rate of the cubic family at the optimal settings.  The derived
# slope follows from the sixth-moment identity; the quoted alternative
# 1/(3*sqrt(2)) circulates alongside it but disagrees, so it is carried only
# for flagged comparison (its root is also printed elsewhere as 3.5417,
# although 12 - 6*sqrt(2) = 3.5147).
CHSH_THV_SLOPE_DERIVED = 8.0 * math.sqrt(2.0) / 35.0
CHSH_THV_SLOPE_QUOTED = 1.0 / (3.0 * math.sqrt(2.0))
ZETA_ROOT_CHSH_THV_DERIVED = 35.0 * (2.0 - math.sqrt(2.0)) / 8.0
ZETA_ROOT_CHSH_THV_QUOTED = 12.0 - 6.0 * math.sqrt(2.0)

LEGGETT_QM_ARGMAX_PHI = 2.0 * math.asin(1.0 / (2.0 * PI))
LEGGETT_QM_MAX_MARGIN = 1.0 / PI**2
LEGGETT_QM_WINDOW_HI_PHI = 2.0 * math.asin(1.0 / PI)
BRANCIARD_QM_ARGMAX_SIN = 1.0 / math.sqrt(10.0)
BRANCIARD_QM_MAX_MARGIN = (2.0 / 3.0) * math.sqrt(10.0) - 2.0
BRANCIARD_QM_WINDOW_HI_SIN = 3.0 / 5.0


def leggett_fhv_window_sin(eta: float) -> tuple[float, float]:
    """Closed-form window endpoints in sin(phi/2) for the first family:
    roots of s^2 - (1+eta) s / pi + eta = 0."""
    center = (1.0 + eta) / (2.0 * PI)
    disc = center * center - eta
    if disc < 0.0:
        raise ValueError("eta above the window-existence threshold")
    half = math.sqrt(disc)
    return (center - half, center + half)


def leggett_fhv_argmax_phi(eta: float) -> float:
    return 2.0 * math.asin((1.0 + eta) / (2.0 * PI))


def leggett_fhv_max_margin(eta: float) -> float:
    return -4.0 * eta / (1.0 + eta) + (1.0 + eta) / PI**2


def branciard_fhv_window_sin_derived(eta: float) -> tuple[float, float]:
    """Window endpoints in sin(phi/2) derived from the margin quadratic
    s^2 (1 + k/9) - (2k/3) s + (k - 1) < 0 with k = (1+eta)^2."""
    k = (1.0 + eta) ** 2
    disc = 9.0 - 8.0 * k
    if disc < 0.0:
        raise ValueError("eta above the window-existence threshold")
    half = 3.0 * math.sqrt(disc)
    return ((3.0 * k - half) / (9.0 + k), (3.0 * k + half) / (9.0 + k))


def branciard_fhv_window_center_derived(eta: float) -> float:
    k = (1.0 + eta) ** 2
    return 3.0 * k / (9.0 + k)


def branciard_fhv_window_center_quoted(eta: float) -> float:
    """Alternative printed window center (1+eta)^2/3.  At eta = 0 it implies
    an upper endpoint of 2/3, inconsistent with the reference value 3/5, so
    it is kept only for flagged comparison."""
    return (1.0 + eta) ** 2 / 3.0


def branciard_fhv_argmax_sin(eta: float) -> float:
    return (1.0 + eta) / math.sqrt(9.0 + (1.0 + eta) ** 2)


def branciard_fhv_max_margin(eta: float) -> float:
    return (2.0 / 3.0) * math.sqrt(9.0 + (1.0 + eta) ** 2) / (1.0 + eta) - 2.0


# ------------------------------ report types -------------------------------


@dataclass(frozen=True)
class InequalityReport:
    """One inequality evaluation: value, classical bound, and their margin."""

    name: str
    value: float
    bound: float
    margin: float
    violated: bool
    configuration: dict

    def __post_init__(self) -> None:
        if self.margin != self.value - self.bound:
            raise ValueError("margin must equal value - bound exactly")
        if self.violated != (self.margin > 0.0):
            raise ValueError("violated flag inconsistent with margin")


@dataclass(frozen=True)
class ViolationWindow:
    """Interval of a scan variable with positive margin; empty when no
    violation was found on the scan grid."""

    variable: str
    lower: float
    upper: float
    empty: bool

    def __post_init__(self) -> None:
        if not self.empty and self.lower > self.upper:
            raise ValueError("window endpoints out of order")


@dataclass(frozen=True)
class ThresholdResult:
    """Root of a margin function in one model parameter, with the matching
    closed form (when one is known) for comparison."""

    inequality: str
    variable: str
    found: bool
    root: float | None
    closed_form: float | None = None
    difference: float | None = None


# ------------------------------ parameter values ----------------------------


def chsh_value(
    correlator: Callable[[UnitVector3, UnitVector3], float],
    a: UnitVector3,
    b: UnitVector3,
    a_prime: UnitVector3,
    b_prime: UnitVector3,
) -> float:
    """|C(a,b) + C(a,b') + C(a',b) - C(a',b')| for any correlator function."""
    return abs(
        correlator(a, b)
        + correlator(a, b_prime)
        + correlator(a_prime, b)
        - correlator(a_prime, b_prime)
    )


def chsh_bound() -> float:
    """Classical bound for outcome-independent product models."""
    return 2.0


def leggett_value(
    params: ModelParams,
    p: Plane,
    p_prime: Plane,
    phi: float,
    order: int = DEFAULT_PLANE_NODES,
) -> float:
    """F(phi) = |C_p(phi) + C_p(0)| + |C_p'(phi) + C_p'(0)| with plane-averaged
    correlators over two orthogonal planes."""
    if abs(dot(p.n, p_prime.n)) > 1e-10:
        raise ValueError("plane normals must be orthogonal")
    total = 0.0
    for plane in (p, p_prime):
        c_phi = plane_avg_correlator(params, PlaneAverageSpec(plane, phi, order))
        c_zero = plane_avg_correlator(params, PlaneAverageSpec(plane, 0.0, order))
        total += abs(c_phi + c_zero)
    return total


def leggett_bound(phi: float) -> float:
    """Classical bound 4 - (4/pi) sin|phi/2| for Malus-marginal models."""
    if not -PI <= phi <= PI:
        raise ValueError("phi must lie in [-pi, pi]")
    return 4.0 - (4.0 / PI) * math.sin(abs(phi) / 2.0)


def default_leggett_planes(params: ModelParams) -> tuple[Plane, Plane]:
    """Scoring plane pair: for a mean-carrying p-field the first plane is
    normal to the mean (where the cross term survives averaging); otherwise
    an arbitrary fixed orthogonal pair."""
    if params.family is ModelFamily.SHV:
        pbar = params.p_mean()
        norm = float(np.linalg.norm(pbar))
        if norm > 1e-15:
            p = Plane.with_normal(UnitVector3.from_array(pbar / norm))
            return p, orthogonal_plane(p)
    p = xy_plane()
    return p, orthogonal_plane(p)


def leggett_value_best(
    params: ModelParams, phi: float, order: int = DEFAULT_PLANE_NODES
) -> float:
    """F(phi) on the default plane pair.  Both orientations of the
    normal-aligned plane are evaluated and the larger F is reported, so the
    result does not hinge on a sign convention for the cross term."""
    p, p_prime = default_leggett_planes(params)
    best = leggett_value(params, p, p_prime, phi, order)
    if params.family is ModelFamily.SHV:
        flipped = Plane.with_normal(-p.n)
        best = max(best, leggett_value(params, flipped, orthogonal_plane(flipped), phi, order))
    return best


def branciard_value(params: ModelParams, phi: float) -> float:
    """G(phi) = (1/3) sum_i |C(a_i, b_i) + C(a_i, b'_i)| on the explicit
    orthogonal-triad construction."""
    triad, bs, bps = branciard_settings(phi)
    total = 0.0
    for ai, bi, bpi in zip(triad.axes, bs, bps):
        total += abs(
            analytic_correlator(params, Settings(ai, bi))
            + analytic_correlator(params, Settings(ai, bpi))
        )
    return total / 3.0


def branciard_value_from_scalar(params: ModelParams, phi: float) -> float:
    """Shortcut 2|C(cos(phi/2))| valid when the correlator depends on a.b
    only; retained as a cross-check against the triad evaluation."""
    return 2.0 * abs(scalar_correlator(params, math.cos(phi / 2.0)))


def branciard_bound(phi: float) -> float:
    """Classical bound 2 - (2/3) sin|phi/2| for Malus-marginal models."""
    if not -PI <= phi <= PI:
        raise ValueError("phi must lie in [-pi, pi]")
    return 2.0 - (2.0 / 3.0) * math.sin(abs(phi) / 2.0)


# ------------------------------- margins -----------------------------------


def correlator_fn(params: ModelParams) -> Callable[[UnitVector3, UnitVector3], float]:
    return lambda a, b: analytic_correlator(params, Settings(a, b))


def margin(
    name: str,
    params: ModelParams,
    *,
    phi: float | None = None,
    settings: tuple[UnitVector3, UnitVector3, UnitVector3, UnitVector3] | None = None,
    order: int = DEFAULT_PLANE_NODES,
) -> InequalityReport:
    """Assemble value, bound, margin, and violation flag for one inequality."""
    if name == "chsh":
        a, b, ap, bp = settings if settings is not None else chsh_optimal_settings()
        value = chsh_value(correlator_fn(params), a, b, ap, bp)
        bound = chsh_bound()
        config = {
            "family": params.family.value,
            "settings": "optimal" if settings is None else "custom",
        }
    elif name == "leggett":
        if phi is None:
            raise ValueError("leggett margin requires phi")
        value = leggett_value_best(params, phi, order)
        bound = leggett_bound(phi)
        config = {"family": params.family.value, "phi": phi}
    elif name == "branciard":
        if phi is None:
            raise ValueError("branciard margin requires phi")
        value = branciard_value(params, phi)
        bound = branciard_bound(phi)
        config = {"family": params.family.value, "phi": phi}
    else:
        raise ValueError(f"unknown inequality {name!r}")
    m = value - bound
    return InequalityReport(name, value, bound, m, m > 0.0, config)


def _with_variable(params: ModelParams, variable: str, value: float) -> ModelParams:
    if variable == "eta":
        return params.with_eta(value)
    if variable == "zeta":
        return params.with_zeta(value)
    if variable == "p_m":
        return params.with_pm(value)
    raise ValueError(f"cannot rebind model variable {variable!r}")


def margin_function(
    name: str,
    params: ModelParams,
    variable: str,
    *,
    phi: float | None = None,
    order: int = DEFAULT_PLANE_NODES,
) -> Callable[[float], float]:
    """Margin as a function of one scan variable.

    For phi the model is held fixed.  For a model parameter, CHSH is scored
    at the optimal settings; the angle-dependent inequalities are scored at
    the given phi when provided, otherwise at their maximizing phi.
    """
    if variable not in SCAN_VARIABLES:
        raise ValueError(f"unknown scan variable {variable!r}")
    if variable == "phi":
        if name == "chsh":
            raise ValueError("chsh has no phi dependence")
        return lambda v: margin(name, params, phi=v, order=order).margin

    def f(value: float) -> float:
        p = _with_variable(params, variable, value)
        if name == "chsh":
            return margin("chsh", p).margin
        if phi is not None:
            return margin(name, p, phi=phi, order=order).margin
        # only the max VALUE matters here, and it is flat in phi near the
        # maximizer, so a coarse seed grid and loose tolerance lose nothing
        return max_violation(name, p, "phi", (0.0, PI), tol=1e-5,
                             nodes=64, order=order)[1]

    return f


# --------------------------- search machinery ------------------------------


def _bisect_boundary(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Boundary of {x : f(x) > 0} inside [lo, hi], assuming the predicate
    differs at the endpoints."""
    positive_lo = f(lo) > 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0.0) == positive_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def violation_window(
    name: str,
    params: ModelParams,
    variable: str,
    domain: tuple[float, float],
    tol: float = DEFAULT_TOL,
    *,
    nodes: int = SCAN_NODES,
    phi: float | None = None,
    order: int = DEFAULT_PLANE_NODES,
) -> ViolationWindow:
    """Bracketing scan plus bisection refinement of the positive-margin
    region.  Windows narrower than the scan spacing may be missed; the
    default grid resolves anything wider than ~0.01 rad on [0, pi]."""
    f = margin_function(name, params, variable, phi=phi, order=order)
    lo, hi = domain
    xs = np.linspace(lo, hi, nodes)
    fs = np.array([f(x) for x in xs])
    pos = np.flatnonzero(fs > 0.0)
    if pos.size == 0:
        return ViolationWindow(variable, math.nan, math.nan, True)
    i0, i1 = int(pos[0]), int(pos[-1])
    lower = xs[i0] if i0 == 0 else _bisect_boundary(f, xs[i0 - 1], xs[i0], tol)
    upper = xs[i1] if i1 == nodes - 1 else _bisect_boundary(f, xs[i1], xs[i1 + 1], tol)
    return ViolationWindow(variable, float(lower), float(upper), False)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    x = 0.5 * (lo + hi)
    return x, f(x)


def _parabolic_vertex(
    f: Callable[[float], float], x: float, h: float,
    lo: float, hi: float,
) -> tuple[float, float] | None:
    """Vertex of the parabola through (x - h, x, x + h).

    Near a smooth interior maximum the margin is locally quadratic and so
    flat that golden-section alone localizes the maximizer only to about the
    square root of the evaluation noise; one parabola fit at a spacing well
    above the noise floor recovers the lost digits.
    """
    if x - h <= lo or x + h >= hi:
        return None
    f_minus, f_mid, f_plus = f(x - h), f(x), f(x + h)
    curvature = f_minus - 2.0 * f_mid + f_plus
    if curvature >= 0.0:
        return None
    shift = 0.5 * h * (f_minus - f_plus) / curvature
    if abs(shift) > h:
        return None
    vertex = x + shift
    return vertex, f(vertex)


def max_violation(
    name: str,
    params: ModelParams,
    variable: str,
    domain: tuple[float, float],
    tol: float = 1e-10,
    *,
    nodes: int = MAX_SEED_NODES,
    order: int = DEFAULT_PLANE_NODES,
) -> tuple[float, float]:
    """Maximizer and value of the margin over the domain: grid scan to seed a
    bracket, golden-section refinement, then a parabolic vertex fit."""
    f = margin_function(name, params, variable, order=order)
    lo, hi = domain
    xs = np.linspace(lo, hi, nodes)
    fs = np.array([f(x) for x in xs])
    k = int(np.argmax(fs))
    blo = xs[max(0, k - 1)]
    bhi = xs[min(nodes - 1, k + 1)]
    x, fx = _golden_max(f, blo, bhi, max(tol, 1e-6))
    refined = _parabolic_vertex(f, x, 3e-5, lo, hi)
    if refined is not None and refined[1] >= fx:
        return refined
    if refined is not None:
        # the fit can land a hair below the golden value by noise; prefer
        # the vertex location but report the better of the two values
        return refined[0], max(refined[1], fx)
    return x, fx


def threshold(
    name: str,
    params: ModelParams,
    variable: str,
    domain: tuple[float, float],
    tol: float = DEFAULT_TOL,
    *,
    phi: float | None = None,
    closed_form: float | None = None,
    nodes: int = 65,
    order: int = DEFAULT_PLANE_NODES,
) -> ThresholdResult:
    """Largest parameter value below which the inequality is violated.

    The margin (at fixed phi when given, else maximized over phi) is scanned
    over the domain; the single positive-to-nonpositive sign change is then
    bisected to ``tol``.  The scan also verifies the margin is monotone in
    sign: multiple crossings are rejected.
    """
    f = margin_function(name, params, variable, phi=phi, order=order)
    lo, hi = domain
    xs = np.linspace(lo, hi, nodes)
    fs = np.array([f(x) for x in xs])
    signs = fs > 0.0
    flips = np.flatnonzero(signs[:-1] != signs[1:])
    if not signs[0] or flips.size == 0:
        return ThresholdResult(name, variable, False, None, closed_form, None)
    if flips.size > 1:
        raise ValueError("margin changes sign more than once on the scan grid")
    k = int(flips[0])
    root = _bisect_boundary(f, xs[k], xs[k + 1], tol)
    diff = abs(root - closed_form) if closed_form is not None else None
    return ThresholdResult(name, variable, True, float(root), closed_form, diff)


# ------------------------------ bound audits --------------------------------


def bhv_chsh_search(
    rng: np.random.Generator, trials: int = 10_000, atoms: int = 8
) -> float:
    """Max CHSH value over random mixtures of outcome-independent product
    strategies (random single-party expectations per hidden atom, random
    mixture weights, deterministic corner strategies included)."""
    best = 0.0
    for _ in range(trials):
        vals = rng.uniform(-1.0, 1.0, size=(4, atoms))
        if rng.random() < 0.25:
            vals = np.sign(vals)  # deterministic strategies saturate the bound
        w = rng.random(atoms)
        w /= w.sum()
        aa, ab, ba, bb = vals  # A(a), A(a'), B(b), B(b') per atom
        e = abs(float(np.sum(w * (aa * ba + aa * bb + ab * ba - ab * bb))))
        best = max(best, e)
    return best


def _plane_projection(vecs: np.ndarray, plane: Plane) -> np.ndarray:
    """Complex in-plane coordinates c = v.e1 - i v.e2 of each row vector."""
    return vecs @ plane.e1.arr - 1j * (vecs @ plane.e2.arr)


def _lhv_plane_avg(
    u: np.ndarray, v: np.ndarray, w: np.ndarray, t: np.ndarray,
    plane: Plane, phi: float,
) -> float:
    """Orientation-averaged correlator of a Malus-marginal mixture whose
    per-atom correlation sits at the mix t of its feasibility extremes.

    For settings a, b in a plane, u.a + v.b is a single sinusoid in the
    orientation angle, so the average of |u.a +- v.b| is (2/pi) times its
    amplitude and the average is exact.
    """
    cu = _plane_projection(u, plane)
    cv = _plane_projection(v, plane)
    rot = complex(math.cos(phi), math.sin(phi))
    r_plus = np.abs(cu + cv * rot)
    r_minus = np.abs(cu - cv * rot)
    lower = -1.0 + (2.0 / PI) * r_plus
    upper = 1.0 - (2.0 / PI) * r_minus
    return float(np.sum(w * (t * lower + (1.0 - t) * upper)))


def lhv_leggett_search(
    rng: np.random.Generator, trials: int = 200, atoms: int = 6
) -> float:
    """Max excess of F(phi) over the Leggett bound across random
    Malus-marginal mixtures; nonpositive up to roundoff when the bound holds."""
    worst = -math.inf
    for _ in range(trials):
        plane = Plane.with_normal(UnitVector3.from_array(sample_unit_batch(rng, 1)[0]))
        plane_prime = orthogonal_plane(plane)
        phi = rng.uniform(0.0, PI)
        u = sample_unit_batch(rng, atoms)
        v = sample_unit_batch(rng, atoms) if rng.random() < 0.5 else u.copy()
        w = rng.random(atoms)
        w /= w.sum()
        t = np.ones(atoms) if rng.random() < 0.5 else rng.random(atoms)
        f = 0.0
        for pl in (plane, plane_prime):
            c_phi = _lhv_plane_avg(u, v, w, t, pl, phi)
            c_zero = _lhv_plane_avg(u, v, w, t, pl, 0.0)
            f += abs(c_phi + c_zero)
        worst = max(worst, f - leggett_bound(phi))
    return worst


def lhv_branciard_search(
    rng: np.random.Generator, trials: int = 2000, atoms: int = 6
) -> float:
    """Max excess of G(phi) over the Branciard bound across random
    Malus-marginal mixtures on the triad construction."""
    worst = -math.inf
    for _ in range(trials):
        phi = rng.uniform(0.0, PI)
        triad, bs, bps = branciard_settings(phi)
        u = sample_unit_batch(rng, atoms)
        v = sample_unit_batch(rng, atoms) if rng.random() < 0.5 else u.copy()
        w = rng.random(atoms)
        w /= w.sum()
        t = np.ones(atoms) if rng.random() < 0.5 else rng.random(atoms)
        g = 0.0
        for ai, bi, bpi in zip(triad.axes, bs, bps):
            pair = 0.0
            for bvec in (bi, bpi):
                ua = u @ ai.arr
                vb = v @ bvec.arr
                lo, hi = lhv_feasible_c_range(ua, vb)
                pair += float(np.sum(w * (t * lo + (1.0 - t) * hi)))
            g += abs(pair)
        worst = max(worst, g / 3.0 - branciard_bound(phi))
    return worst
