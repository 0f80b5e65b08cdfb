"""Closed-form demonstration problems with known answers.

Four small studies that exercise the solver stack end to end: a two-item
tie-broken knapsack (the donkey between two hay piles), a two-group truss
whose symmetric optimum pair is split by a load perturbation, the
penalized-compliance surface whose minimizer jumps between the corners and
the center depending on the penalization power, and a one-dimensional
double-well potential whose dual cubic classifies all critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import knapsack

__all__ = [
    "TrussSpec",
    "DoubleWellSpec",
    "CounterexampleResult",
    "DualRoot",
    "TrialityResult",
    "buridan",
    "symmetric_truss",
    "simp_counterexample",
    "double_well_triality",
]


@dataclass(frozen=True)
class TrussSpec:
    """Two-group, two-dof truss with diagonal group stiffnesses
    diag(a, b) and diag(b, a)."""

    a: float = (2.0 - math.sqrt(2.0)) / 2.0
    b: float = (4.0 + math.sqrt(2.0)) / 2.0
    f: tuple = (1.0, 1.0)
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError("group stiffness constants must be positive")


@dataclass(frozen=True)
class DoubleWellSpec:
    """Potential 1/2 beta (1/2 |x|^2 - lam)^2 - x.f."""

    beta: float = 1.0
    lam: float = 2.0
    f: tuple = (0.5,)

    def __post_init__(self):
        if not (self.beta > 0.0 and self.lam > 0.0):
            raise ValueError("beta and lam must be positive")
        object.__setattr__(self, "f", tuple(float(x) for x in self.f))

    @property
    def n(self):
        return len(self.f)


def buridan(w_base, epsilon, perturb=True):
    """Two equal-volume items, budget one: gains (w_base + epsilon, w_base).

    Returns (ExistenceReport, BinaryDensity).  With epsilon = 0 the two
    items tie; the report flags both and the returned pick comes from the
    deterministic ramp tie-break (or DegenerateInstance when ``perturb``
    is disabled).
    """
    if w_base <= 0.0:
        raise ValueError("w_base must be positive")
    instance = knapsack.KnapsackInstance(
        w=np.array([w_base + epsilon, w_base]), v=np.array([1.0, 1.0]), V_target=1.0
    )
    report = knapsack.existence_check(instance)
    params = knapsack.SolveParams(perturb=perturb)
    result = knapsack.solve(instance, params=params)
    return report, result.density


def symmetric_truss(spec, perturb=True):
    """Select one of the two bar groups under the perturbed load.

    Solves equilibrium for the full structure under f = (1 + eps, 1),
    scores both groups by the strain energy they would store, and lets the
    knapsack solver keep one.  Returns (BinaryDensity, potential), where
    the potential is evaluated for the nominal symmetric load at the
    selected group — the quantity that equals -1/2 (1/a + 1/b) for either
    pick.
    """
    a, b = spec.a, spec.b
    K1 = np.diag([a, b])
    K2 = np.diag([b, a])
    f_eps = np.array([spec.f[0] + spec.epsilon, spec.f[1]])
    u0 = np.linalg.solve(K1 + K2, f_eps)
    w = np.array([
        0.5 * (a * u0[0] ** 2 + b * u0[1] ** 2),
        0.5 * (b * u0[0] ** 2 + a * u0[1] ** 2),
    ])
    instance = knapsack.KnapsackInstance(w=w, v=np.array([1.0, 1.0]), V_target=1.0)
    result = knapsack.solve(instance, params=knapsack.SolveParams(perturb=perturb))
    rho = result.density.rho
    K = rho[0] * K1 + rho[1] * K2
    f_nom = np.asarray(spec.f, dtype=float)
    u = np.linalg.solve(K, f_nom)
    potential = 0.5 * u @ K @ u - u @ f_nom
    return result.density, float(potential)


@dataclass(frozen=True)
class CounterexampleResult:
    """Sampled penalized-compliance surface and its boundary minima."""

    grid: np.ndarray             # (m, 3) columns rho1, rho2, value
    boundary_t: np.ndarray       # rho1 samples along rho1 + rho2 = 1
    boundary_values: np.ndarray
    minima: tuple                # (t, value) for each boundary minimum
    argmin: tuple                # (rho1, rho2) of the boundary minimizer


def _penalized_compliance(a, b, f, p):
    f1, f2 = f

    def val(r1, r2):
        return 0.5 * (f1 ** 2 / (a * r1 ** p + b * r2 ** p)
                      + f2 ** 2 / (b * r1 ** p + a * r2 ** p))

    return val


def _golden_min(fun, lo, hi, tol=1e-10):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = fun(x2)
    x = 0.5 * (lo + hi)
    return x, fun(x)


def simp_counterexample(a, b, f=(1.0, 1.0), p=2.0, grid_resolution=1e-4):
    """Sample the penalized compliance on (0,1]^2 and minimize it on the
    material-budget boundary rho1 + rho2 = 1.

    Boundary minima are located with a scan at ``grid_resolution`` plus
    golden-section refinement; endpoints count as candidates.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError("material constants must be positive")
    val = _penalized_compliance(a, b, f, p)
    side = np.linspace(0.05, 1.0, 39)
    r1g, r2g = np.meshgrid(side, side, indexing="ij")
    grid = np.column_stack([r1g.ravel(), r2g.ravel(),
                            val(r1g, r2g).ravel()])
    t = np.arange(0.0, 1.0 + grid_resolution / 2, grid_resolution)
    g = val(t, 1.0 - t)
    minima = []
    if g[0] < g[1]:
        minima.append((float(t[0]), float(g[0])))
    interior = np.flatnonzero((g[1:-1] <= g[:-2]) & (g[1:-1] <= g[2:])) + 1
    for i in interior:
        x, fx = _golden_min(lambda s: val(s, 1.0 - s), t[i - 1], t[i + 1])
        if not any(abs(x - m[0]) < 10 * grid_resolution for m in minima):
            minima.append((float(x), float(fx)))
    if g[-1] < g[-2]:
        minima.append((float(t[-1]), float(g[-1])))
    best = min(minima, key=lambda m: m[1])
    return CounterexampleResult(
        grid=grid,
        boundary_t=t,
        boundary_values=g,
        minima=tuple(minima),
        argmin=(best[0], 1.0 - best[0]),
    )


@dataclass(frozen=True)
class DualRoot:
    """One stationary point of the double-well dual, with its primal mate."""

    varsigma: float
    x: tuple
    potential: float
    dual_potential: float
    kind: str                    # global_min | local_min | local_max


@dataclass(frozen=True)
class TrialityResult:
    roots: tuple                 # DualRoot, sorted by varsigma descending
    symmetric: bool              # True for the f = 0 case
    perturbation_minimizers: tuple = ()


def _dw_potential(spec, x):
    x = np.asarray(x, dtype=float)
    f = np.asarray(spec.f, dtype=float)
    return float(0.5 * spec.beta * (0.5 * np.dot(x, x) - spec.lam) ** 2 - np.dot(x, f))


def _dw_dual(spec, s):
    fn2 = float(np.dot(spec.f, spec.f))
    return -fn2 / (2.0 * s) - 0.5 * s * s / spec.beta - spec.lam * s


def double_well_triality(spec):
    """All real roots of (varsigma/beta + lam) varsigma^2 = |f|^2 / 2,
    classified, with the matching primal critical points x = f / varsigma.

    For f = 0 the dual keeps a single negative critical point -beta*lam
    (the primal local maximum at the origin); the ring of minimizers at
    |x| = sqrt(2 lam) is reported through ``perturbation_minimizers`` as
    the vanishing-perturbation limit.
    """
    f = np.asarray(spec.f, dtype=float)
    fn2 = float(np.dot(f, f))
    if fn2 == 0.0:
        s3 = -spec.beta * spec.lam
        x3 = tuple(0.0 for _ in f)
        root = DualRoot(
            varsigma=s3,
            x=x3,
            potential=_dw_potential(spec, x3),
            dual_potential=float(-0.5 * s3 * s3 / spec.beta - spec.lam * s3),
            kind="local_max",
        )
        r = math.sqrt(2.0 * spec.lam)
        return TrialityResult(
            roots=(root,),
            symmetric=True,
            perturbation_minimizers=(r, -r),
        )
    # varsigma^3 / beta + lam varsigma^2 - |f|^2/2 = 0
    coeffs = [1.0 / spec.beta, spec.lam, 0.0, -0.5 * fn2]
    raw = np.roots(coeffs)
    roots = []
    for z in raw:
        if abs(z.imag) > 1e-8 * max(1.0, abs(z)):
            continue
        s = float(z.real)
        for _ in range(60):  # Newton polish on the depressed residual
            g = s * s * (s / spec.beta + spec.lam) - 0.5 * fn2
            gp = 3.0 * s * s / spec.beta + 2.0 * spec.lam * s
            if gp == 0.0:
                break
            step = g / gp
            s -= step
            if abs(step) <= 1e-16 * max(1.0, abs(s)):
                break
        roots.append(s)
    roots = sorted(set(round(s, 14) for s in roots), reverse=True)
    out = []
    negatives = sorted([s for s in roots if s < 0.0])
    for s in roots:
        if s > 0.0:
            kind = "global_min"
        elif negatives and s == negatives[0]:
            kind = "local_max"      # most negative branch
        else:
            kind = "local_min" if spec.n == 1 else "negative_branch"
        x = tuple(float(fi / s) for fi in f)
        out.append(DualRoot(
            varsigma=s,
            x=x,
            potential=_dw_potential(spec, x),
            dual_potential=_dw_dual(spec, s),
            kind=kind,
        ))
    return TrialityResult(roots=tuple(out), symmetric=False)
