"""Analytic solver for the linear 0-1 knapsack problem via a concave dual.

The primal problem is

    min { -w.rho : v.rho <= V,  rho in {0,1}^n },   w >= 0, v > 0,

i.e. keep the subset of elements with the largest total gain within a
volume budget.  Instead of enumerating subsets, the integer constraint is
relaxed through a penalty parameter ``beta`` and the problem is mapped to
maximizing the strictly concave dual

    D_beta(sigma, tau) = -1/4 * sum_e [ (sigma_e + w_e - tau*v_e)^2 / sigma_e
                                        + sigma_e^2 / beta ] - tau * V

over sigma > 0, tau >= 0.  Stationarity decouples per element into the cubic

    2/beta * sigma_e^3 + sigma_e^2 = theta_e^2,    theta_e = tau*v_e - w_e,

which has exactly one positive root whenever theta_e != 0, plus a scalar
update for the volume multiplier tau.  The binary density is recovered as

    rho_e = (1 - theta_e / sigma_e) / 2,

which lands within O(sigma_e / beta) of {0,1}; doubling beta until the
recovery rounds cleanly yields the exact optimizer together with a duality
certificate.  Uniqueness can be diagnosed up front from the critical
multiplier tau_c (see :func:`tau_critical`); symmetric (tied) instances are
broken by a deterministic ramp perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

__all__ = [
    "KnapsackError",
    "DegenerateTheta",
    "InvalidDual",
    "NotBinary",
    "NonFinite",
    "DegenerateInstance",
    "Unsolved",
    "TooLarge",
    "KnapsackInstance",
    "DualPoint",
    "BinaryDensity",
    "ExistenceReport",
    "TauCritical",
    "InnerResult",
    "Certificate",
    "SolveParams",
    "SolveResult",
    "BruteForceResult",
    "sigma_from_theta",
    "tau_update",
    "dual_objective",
    "dual_objective_beta",
    "inner_fixed_point",
    "recover_density",
    "tau_critical",
    "existence_check",
    "perturb",
    "solve",
    "brute_force",
    "affordable_count",
    "effective_budget",
]

# |theta| at or below this is treated as a vanished cubic right-hand side.
THETA_TOL = 1e-14
# Raw recovered densities must sit this close to {0,1} before rounding.
BINARY_TOL = 1e-6


class KnapsackError(Exception):
    """Base class for knapsack solver failures."""


class DegenerateTheta(KnapsackError):
    """theta_e = 0: the per-element cubic has no positive root."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class InvalidDual(KnapsackError):
    """A dual point violated sigma > 0."""


class NotBinary(KnapsackError):
    """Recovered densities are too far from {0,1}; beta is too small."""

    def __init__(self, message, max_deviation):
        super().__init__(message)
        self.max_deviation = max_deviation


class NonFinite(KnapsackError):
    """An intermediate quantity overflowed or became NaN."""


class DegenerateInstance(KnapsackError):
    """The uniqueness diagnosis failed and perturbation is disabled."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Unsolved(KnapsackError):
    """The dual solve did not certify a binary optimum within the beta cap."""

    def __init__(self, message, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis


class TooLarge(KnapsackError):
    """Instance too large for exhaustive enumeration."""


def _readonly(a):
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class KnapsackInstance:
    """Gains ``w``, volumes ``v`` and budget ``V_target`` of one instance."""

    w: np.ndarray
    v: np.ndarray
    V_target: float

    def __post_init__(self):
        object.__setattr__(self, "w", _readonly(self.w))
        object.__setattr__(self, "v", _readonly(self.v))
        object.__setattr__(self, "V_target", float(self.V_target))
        if self.w.ndim != 1 or self.v.shape != self.w.shape or self.w.size < 1:
            raise ValueError("w and v must be 1-D sequences of equal length >= 1")
        if not np.all(np.isfinite(self.w)) or not np.all(np.isfinite(self.v)):
            raise ValueError("w and v must be finite")
        if np.any(self.v <= 0.0):
            raise ValueError("all volumes must be positive")
        if np.any(self.w < 0.0):
            raise ValueError("all gains must be nonnegative")
        total = float(self.v.sum())
        if not 0.0 < self.V_target <= total * (1.0 + 1e-9):
            raise ValueError(
                f"V_target must lie in (0, sum(v)]; got {self.V_target} vs {total}"
            )

    @property
    def n(self):
        return self.w.size

    @property
    def total_volume(self):
        return float(self.v.sum())

    def ratios(self):
        return self.w / self.v

    def equal_volumes(self):
        return bool(np.all(self.v == self.v[0]))


@dataclass(frozen=True)
class DualPoint:
    """Per-element duals ``sigma`` and the volume multiplier ``tau``."""

    sigma: np.ndarray
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", _readonly(self.sigma))
        object.__setattr__(self, "tau", float(self.tau))
        if np.any(self.sigma <= 0.0) or not np.all(np.isfinite(self.sigma)):
            raise InvalidDual("sigma must be strictly positive and finite")
        if not (self.tau >= 0.0 and math.isfinite(self.tau)):
            raise InvalidDual("tau must be finite and nonnegative")

    def theta(self, instance):
        """Per-element degeneracy indicators tau*v_e - w_e."""
        return self.tau * instance.v - instance.w


@dataclass(frozen=True)
class BinaryDensity:
    """A {0,1} design vector."""

    rho: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", _readonly(self.rho))
        if not np.all((self.rho == 0.0) | (self.rho == 1.0)):
            raise ValueError("rho must be exactly {0,1}-valued")

    @property
    def n(self):
        return self.rho.size

    def volume(self, v):
        return float(np.dot(np.asarray(v, dtype=float), self.rho))

    def support(self):
        return tuple(int(i) for i in np.flatnonzero(self.rho == 1.0))


@dataclass(frozen=True)
class TauCritical:
    """Minimizer of the critical-multiplier objective, with its interval.

    ``value`` is the reported multiplier (interval midpoint when the
    minimizer is a whole interval).  ``hi`` may be ``inf`` when every large
    multiplier is optimal (empty effective budget).
    """

    value: float
    lo: float
    hi: float

    @property
    def is_interval(self):
        return self.hi > self.lo


@dataclass(frozen=True)
class ExistenceReport:
    """Uniqueness diagnosis from the critical multiplier."""

    tau_c: float
    interval: tuple
    degenerate_indices: tuple
    unique: bool


@dataclass(frozen=True)
class InnerResult:
    """Outcome of the alternating dual iteration."""

    point: DualPoint
    iterations: int
    converged: bool
    stalled: bool
    objective: float
    last_delta: float


@dataclass(frozen=True)
class Certificate:
    """Optimality evidence attached to a solve."""

    primal_objective: float      # -w.rho on the original gains
    gain: float                  # w.rho on the original gains
    dual_objective: float        # beta-free dual value at the solution
    dual_objective_beta: float   # penalized dual value at the solution
    residual: float              # |primal - penalized dual| on the solved instance
    beta: float
    budget: float                # effective budget actually enforced
    inner_iterations: int
    converged: bool
    stalled: bool
    perturbed: bool
    trivial: str | None = None


@dataclass(frozen=True)
class SolveParams:
    """Tuning knobs for :func:`solve`."""

    beta0: float | None = None          # default: max(1, 10*max(w))
    beta_doublings: int = 20
    tau0: float = 1.0
    omega1: float = 2e-16
    max_inner: int = 1000
    perturb: bool = True
    perturb_scale: float = 1e-8         # relative to max(w)
    degeneracy_tol: float = 1e-9
    stall_rel: float = 1e-12


@dataclass(frozen=True)
class SolveResult:
    density: BinaryDensity
    point: DualPoint
    certificate: Certificate


@dataclass(frozen=True)
class BruteForceResult:
    objective: float
    optima: tuple  # tuple of index-tuples, every argmax subset


# ---------------------------------------------------------------------------
# per-element cubic
# ---------------------------------------------------------------------------

def _positive_cubic_root(theta_abs, beta):
    """Vectorized unique positive root of 2/beta s^3 + s^2 = theta^2.

    f(s) = s^2 (1 + 2 s / beta) - theta^2 is increasing and convex on s > 0,
    so Newton from any upper bound of the root converges monotonically.
    Both |theta| and (beta theta^2 / 2)^(1/3) are upper bounds; their
    minimum is tight in the respective small- and large-theta regimes.
    """
    t2 = theta_abs * theta_abs
    s = np.minimum(theta_abs, np.cbrt(0.5 * beta * t2))
    inv_b = 2.0 / beta
    for _ in range(80):
        f = s * s * (1.0 + inv_b * s) - t2
        fp = s * (2.0 + 3.0 * inv_b * s)
        step = f / fp
        s = s - step
        if np.all(np.abs(step) <= 4.5e-16 * s):
            break
    return s


def sigma_from_theta(theta, beta):
    """Unique sigma > 0 with 2/beta sigma^3 + sigma^2 = theta^2.

    Accepts scalars or arrays (theta and beta broadcast).  Raises
    :class:`DegenerateTheta` when any |theta| <= 1e-14, where the cubic has
    no positive root and the caller must perturb.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0):
        raise ValueError("beta must be positive")
    th = np.asarray(theta, dtype=float)
    scalar = th.ndim == 0 and beta.ndim == 0
    th_abs = np.abs(np.atleast_1d(th))
    small = th_abs <= THETA_TOL
    if np.any(small):
        e = int(np.flatnonzero(small)[0])
        raise DegenerateTheta(
            f"theta[{e}] = 0 within {THETA_TOL:g}: no positive cubic root", element=e
        )
    s = _positive_cubic_root(th_abs, beta if beta.ndim else float(beta))
    return float(s[0]) if scalar else s


# ---------------------------------------------------------------------------
# dual objective and updates
# ---------------------------------------------------------------------------

def tau_update(sigma, instance, V_gamma=None):
    """Volume-multiplier update, clamped to the KKT sign tau >= 0.

    tau = [sum v_e (1 + w_e / sigma_e) - 2 V] / [sum v_e^2 / sigma_e]
    """
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= 0.0):
        raise InvalidDual("tau_update requires sigma > 0")
    V = instance.V_target if V_gamma is None else float(V_gamma)
    v, w = instance.v, instance.w
    num = float(np.sum(v * (1.0 + w / sig))) - 2.0 * V
    den = float(np.sum(v * v / sig))
    return max(num / den, 0.0)


def dual_objective(point, instance, V_gamma=None):
    """Penalty-free dual value at ``point``; a lower bound on -w.rho."""
    V = instance.V_target if V_gamma is None else float(V_gamma)
    psi = point.sigma + instance.w - point.tau * instance.v
    return float(-0.25 * np.sum(psi * psi / point.sigma) - point.tau * V)


def dual_objective_beta(point, instance, V_gamma, beta):
    """Penalized dual value; strictly concave in (sigma, tau) on sigma > 0."""
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    V = instance.V_target if V_gamma is None else float(V_gamma)
    psi = point.sigma + instance.w - point.tau * instance.v
    quad = np.sum(psi * psi / point.sigma)
    pen = np.sum(point.sigma * point.sigma) / beta
    return float(-0.25 * (quad + pen) - point.tau * V)


def inner_fixed_point(instance, V_gamma, beta, tau0=1.0, omega1=2e-16,
                      max_iters=1000, tau_bounds=None):
    """Alternate the per-element cubic solve with the tau update.

    Stops when the penalized dual value changes by at most ``omega1``.
    Exact theta_e = 0 hits along the way are escaped by a deterministic
    upward nudge of tau; a persistent hit (symmetric tie pulling tau back
    onto a breakpoint) raises :class:`DegenerateTheta` with the element.

    ``tau_bounds``, when given, confines tau to a closed interval known to
    contain only optimal multipliers (the interior of the critical
    interval).  Without it the iteration may creep onto a gain/volume
    breakpoint, where theta of the marginal element sinks into rounding
    noise; the clamp keeps every theta decisively signed.
    """
    if tau0 < 0.0:
        raise ValueError("tau0 must be nonnegative")
    if not (omega1 > 0.0 and max_iters >= 1):
        raise ValueError("omega1 > 0 and max_iters >= 1 required")
    v, w = instance.v, instance.w
    V = float(V_gamma)
    b = float(beta)
    tau = float(tau0)
    if tau_bounds is not None:
        tau = min(max(tau, tau_bounds[0]), tau_bounds[1])
    nudges = 0
    prev_obj = None
    prev_taus = (math.nan, math.nan)
    obj = math.nan
    delta = math.inf
    sigma = None
    for k in range(1, max_iters + 1):
        theta = tau * v - w
        while np.any(np.abs(theta) <= THETA_TOL):
            nudges += 1
            if nudges > 8:
                e = int(np.flatnonzero(np.abs(theta) <= THETA_TOL)[0])
                raise DegenerateTheta(
                    f"tau is pinned on the breakpoint of element {e}", element=e
                )
            tau = tau + 1e-9 * max(1.0, tau)
            theta = tau * v - w
        sigma = _positive_cubic_root(np.abs(theta), b)
        tau = tau_update(sigma, instance, V)
        if tau_bounds is not None:
            tau = min(max(tau, tau_bounds[0]), tau_bounds[1])
        point = DualPoint(sigma, tau)
        obj = dual_objective_beta(point, instance, V, b)
        if not (math.isfinite(obj) and math.isfinite(tau)):
            raise NonFinite(f"non-finite dual state at inner iteration {k}")
        if prev_obj is not None:
            delta = abs(obj - prev_obj)
            if delta <= omega1:
                return InnerResult(point, k, True, False, obj, delta)
        # a tau revisit two steps back means a rounding-level 2-cycle:
        # nothing further can change, report the stall now
        if tau == prev_taus[0]:
            return InnerResult(point, k, False, True, obj, delta)
        prev_taus = (prev_taus[1], tau)
        prev_obj = obj
    return InnerResult(DualPoint(sigma, tau), max_iters, False, True, obj,
                       delta if math.isfinite(delta) else math.inf)


def recover_density(point, instance):
    """Round rho_e = (1 - theta_e/sigma_e)/2 to {0,1}.

    Raises :class:`NotBinary` when any raw value sits farther than 1e-6
    from an integer — the signal that beta must be escalated, never a
    license to round harder.
    """
    theta = point.theta(instance)
    raw = 0.5 * (1.0 - theta / point.sigma)
    rounded = np.where(raw >= 0.5, 1.0, 0.0)
    max_dev = float(np.max(np.abs(raw - rounded)))
    if max_dev > BINARY_TOL:
        raise NotBinary(
            f"raw density deviates {max_dev:.3e} from binary", max_deviation=max_dev
        )
    return BinaryDensity(rounded)


# ---------------------------------------------------------------------------
# budget granularity
# ---------------------------------------------------------------------------

def affordable_count(v, budget):
    """Number of equal-volume elements that fit within ``budget``."""
    v = np.asarray(v, dtype=float)
    ve = float(v[0])
    m = int(math.floor(budget / ve * (1.0 + 1e-12) + 1e-9))
    return max(0, min(v.size, m))


def effective_budget(instance, V=None):
    """Budget actually enforceable by a binary design.

    With equal element volumes the feasible set of v.rho <= V is unchanged
    by snapping V down to a whole number of elements; doing so keeps the
    dual problem away from its degenerate boundary.  Unequal volumes are
    left as given.
    """
    V = instance.V_target if V is None else float(V)
    V = min(V, instance.total_volume)
    if instance.equal_volumes():
        return affordable_count(instance.v, V) * float(instance.v[0])
    return V


# ---------------------------------------------------------------------------
# uniqueness diagnosis
# ---------------------------------------------------------------------------

def tau_critical(instance, V_gamma=None):
    """Minimize sum_e (|w_e - tau v_e| - tau v_e) + 2 tau V over tau >= 0.

    The objective is piecewise linear and convex with breakpoints at the
    gain/volume ratios; its slope on a ratio-free segment is
    2 * (volume of elements priced out - (total - V)).  The minimizer is
    either a single breakpoint or a whole segment; for a segment the
    midpoint is reported along with the segment itself.
    """
    V = effective_budget(instance, V_gamma)
    v, w = instance.v, instance.w
    total = instance.total_volume
    target = total - V
    vol_tol = 1e-9 * max(total, 1.0)
    order = np.argsort(w / v, kind="stable")
    r_sorted = (w / v)[order]
    csum = np.concatenate([[0.0], np.cumsum(v[order])])
    # largest k with cumulative priced-out volume <= target
    k = int(np.searchsorted(csum, target + vol_tol, side="right")) - 1
    if abs(csum[k] - target) <= vol_tol:
        lo = float(r_sorted[k - 1]) if k > 0 else 0.0
        hi = float(r_sorted[k]) if k < instance.n else math.inf
        if hi > lo:
            value = 0.5 * (lo + hi) if math.isfinite(hi) else lo + max(1.0, lo)
            return TauCritical(value, lo, hi)
        return TauCritical(lo, lo, lo)
    # target falls strictly inside element k's volume: kink at its ratio
    t = float(r_sorted[k])
    return TauCritical(t, t, t)


def existence_check(instance, tol=1e-9, V_gamma=None):
    """Flag elements whose breakpoint coincides with the critical multiplier.

    A flagged element makes the dual feasible set collapse and the primal
    optimum non-unique; the instance then needs a symmetry-breaking
    perturbation before the analytic solve applies.  ``tol`` is relative
    to the gain scale; when the minimizer is an interval of width d, no
    element farther than d/4 (in multiplier units) from the reported
    midpoint is flagged, so the interval's own endpoints never trigger.
    """
    tc = tau_critical(instance, V_gamma)
    theta = tc.value * instance.v - instance.w
    w_max = float(instance.w.max())
    scale = w_max if w_max > 0.0 else 1.0
    thr = np.full(instance.n, tol * scale)
    width = tc.hi - tc.lo
    if math.isfinite(width) and width > 0.0:
        thr = np.minimum(thr, 0.25 * width * instance.v)
    thr = np.maximum(thr, 1e-15 * scale)
    degenerate = tuple(int(i) for i in np.flatnonzero(np.abs(theta) <= thr))
    return ExistenceReport(
        tau_c=tc.value,
        interval=(tc.lo, tc.hi),
        degenerate_indices=degenerate,
        unique=len(degenerate) == 0,
    )


def perturb(instance, epsilon):
    """Copy of the instance with a strictly decreasing ramp added to w.

    w_e <- w_e + epsilon * (n - e) / n for 0-based e, which separates tied
    gain/volume ratios deterministically (element 0 is favored).
    """
    n = instance.n
    ramp = epsilon * (n - np.arange(n)) / n
    return replace(instance, w=instance.w + ramp)


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

def _trivial_result(instance, rho, tau, budget, beta, perturbed, reason):
    w = instance.w
    sigma = np.maximum(np.abs(tau * instance.v - w), 1e-12)
    point = DualPoint(sigma, tau)
    gain = float(np.dot(w, rho))
    dual = dual_objective(point, instance, budget)
    dual_b = dual_objective_beta(point, instance, budget, beta)
    cert = Certificate(
        primal_objective=-gain,
        gain=gain,
        dual_objective=dual,
        dual_objective_beta=dual_b,
        residual=abs(-gain - dual_b),
        beta=beta,
        budget=budget,
        inner_iterations=0,
        converged=True,
        stalled=False,
        perturbed=perturbed,
        trivial=reason,
    )
    return SolveResult(BinaryDensity(rho), point, cert)


def solve(instance, V_gamma=None, params=None):
    """Solve the knapsack instance to proven optimality where the dual applies.

    Orchestrates: budget snapping to element granularity, the uniqueness
    diagnosis (with deterministic ramp perturbation of ties), the inner
    dual iteration, binary recovery, and beta escalation on rounding or
    certificate failure.  The certificate's primal objective refers to the
    original gains even when a perturbed copy was solved.
    """
    p = params or SolveParams()
    budget = effective_budget(instance, V_gamma)
    total = instance.total_volume
    n = instance.n
    beta0 = p.beta0 if p.beta0 is not None else max(1.0, 10.0 * float(instance.w.max()))

    if budget >= total * (1.0 - 1e-12):
        return _trivial_result(instance, np.ones(n), 0.0, budget, beta0, False,
                               "budget admits every element")
    if budget < float(np.min(instance.v)) * (1.0 - 1e-12):
        tau = 1.0 + 2.0 * float(np.max(instance.ratios()))
        return _trivial_result(instance, np.zeros(n), tau, budget, beta0, False,
                               "budget admits no element")

    work = instance
    perturbed = False
    report = existence_check(work, tol=p.degeneracy_tol, V_gamma=budget)
    if not report.unique:
        if not p.perturb:
            raise DegenerateInstance(
                f"critical multiplier {report.tau_c:g} pins elements "
                f"{report.degenerate_indices}; multiple optima", report=report
            )
        eps = p.perturb_scale * (float(instance.w.max()) or 1.0)
        work = perturb(instance, eps)
        perturbed = True
        report = existence_check(work, tol=p.degeneracy_tol, V_gamma=budget)
        if not report.unique:
            raise Unsolved(
                "instance remains degenerate after ramp perturbation "
                "(budget not achievable at element granularity)",
                diagnosis=report,
            )

    lo, hi = report.interval
    width = hi - lo
    bounds = (lo + 0.25 * width, hi - 0.25 * width)
    beta = beta0
    beta_cap = beta0 * 2.0 ** p.beta_doublings
    tau0 = p.tau0
    last_failure = None

    def escalate(factor):
        # escalate by whole doublings; the factor is what the measured
        # deviation says is missing, never less than one doubling
        nonlocal beta
        if beta >= beta_cap:
            return False
        doublings = max(1, math.ceil(math.log2(max(factor, 2.0))))
        beta = min(beta * 2.0 ** doublings, beta_cap)
        return True

    while True:
        try:
            inner = inner_fixed_point(work, budget, beta, tau0, p.omega1,
                                      p.max_inner, tau_bounds=bounds)
        except DegenerateTheta as exc:
            if p.perturb and not perturbed:
                eps = p.perturb_scale * (float(instance.w.max()) or 1.0)
                work = perturb(instance, eps)
                perturbed = True
                report = existence_check(work, tol=p.degeneracy_tol, V_gamma=budget)
                if not report.unique:
                    raise Unsolved(
                        "instance remains degenerate after ramp perturbation",
                        diagnosis=report,
                    ) from exc
                lo, hi = report.interval
                width = hi - lo
                bounds = (lo + 0.25 * width, hi - 0.25 * width)
                continue
            raise Unsolved(
                f"inner iteration pinned on a breakpoint ({exc})", diagnosis=exc
            ) from exc
        tau0 = inner.point.tau
        if inner.stalled and inner.last_delta > p.stall_rel * max(1.0, abs(inner.objective)):
            last_failure = f"inner iteration stalled with delta {inner.last_delta:.3e}"
            if not escalate(2.0):
                break
            continue
        try:
            density = recover_density(inner.point, work)
        except NotBinary as exc:
            last_failure = f"recovery off binary by {exc.max_deviation:.3e}"
            if not escalate(2.0 * exc.max_deviation / BINARY_TOL):
                break
            continue
        gain = float(np.dot(instance.w, density.rho))
        work_gain = float(np.dot(work.w, density.rho))
        dual_b = dual_objective_beta(inner.point, work, budget, beta)
        residual = abs(-work_gain - dual_b)
        sig2 = float(np.sum(inner.point.sigma ** 2))
        slack = 1e-8 * max(1.0, abs(work_gain))
        if residual > sig2 / (4.0 * beta) + slack:
            last_failure = f"duality residual {residual:.3e} above certificate bound"
            if not escalate(residual / (sig2 / (4.0 * beta) + slack)):
                break
            continue
        cert = Certificate(
            primal_objective=-gain,
            gain=gain,
            dual_objective=dual_objective(inner.point, work, budget),
            dual_objective_beta=dual_b,
            residual=residual,
            beta=beta,
            budget=budget,
            inner_iterations=inner.iterations,
            converged=inner.converged,
            stalled=inner.stalled,
            perturbed=perturbed,
        )
        return SolveResult(density, inner.point, cert)
    raise Unsolved(
        f"no certified binary solution up to beta = {beta:g}: {last_failure}",
        diagnosis=last_failure,
    )


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _bits16():
    m = np.arange(1 << 16, dtype=np.int64)
    return ((m[:, None] >> np.arange(16)) & 1).astype(float)


def brute_force(instance):
    """Enumerate all subsets; returns the best gain and every argmax subset.

    Intended as a test oracle; limited to n <= 25.
    """
    n = instance.n
    if n > 25:
        raise TooLarge(f"n = {n} exceeds the enumeration limit of 25")
    w, v = instance.w, instance.v
    V = instance.V_target + 1e-9 * max(instance.total_volume, 1.0)
    low = min(n, 16)
    T = _bits16()[: 1 << low, :low]
    gains_low = T @ w[:low]
    vols_low = T @ v[:low]
    best = -math.inf
    best_masks = []
    for hi in range(1 << (n - low)):
        hw = sum(w[low + j] for j in range(n - low) if (hi >> j) & 1)
        hv = sum(v[low + j] for j in range(n - low) if (hi >> j) & 1)
        gains = gains_low + hw
        gains[vols_low + hv > V] = -math.inf
        m = float(gains.max())
        if m > best:
            best = m
            best_masks = []
        if m == best:
            idx = np.flatnonzero(gains == best)
            best_masks.extend(int(x) + (hi << low) for x in idx)
    optima = tuple(
        tuple(e for e in range(n) if (mask >> e) & 1) for mask in sorted(best_masks)
    )
    # canonical objective: same dot-product evaluation a solver certificate uses
    rho = np.zeros(n)
    rho[list(optima[0])] = 1.0
    return BruteForceResult(objective=float(np.dot(w, rho)), optima=optima)
