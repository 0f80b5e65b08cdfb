"""Outer optimization loop: alternate equilibrium solves with analytic
knapsack updates under a geometric volume-reduction schedule.

Each outer step solves the elastic equilibrium at the current layout,
scores every element by the strain energy it would store, and re-selects
the kept subset by the dual knapsack solver at the scheduled budget
V_g = max(V_c, mu * V_{g-1}).  The loop stops once the budget has reached
its target and the selection objective has settled.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import knapsack
from .fem import compliance, element_energies, solve_equilibrium

__all__ = [
    "DriverError",
    "MaxOuterExceeded",
    "CdtConfig",
    "IterationRecord",
    "RunRecord",
    "volume_schedule",
    "stored_energy_gains",
    "primal_upper_objective",
    "run_cdt",
]


class DriverError(Exception):
    """Base class for outer-loop failures."""


class MaxOuterExceeded(DriverError):
    """The outer loop hit its iteration cap without meeting the stop rule."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


@dataclass(frozen=True)
class CdtConfig:
    """Outer-loop parameters (volume fraction, schedule, tolerances)."""

    volfrac: float
    mu: float
    beta0: float | None = None
    tau0: float = 1.0
    omega1: float = 2e-16
    omega2: float = 1e-2
    max_outer: int = 2000
    max_inner: int = 1000
    perturb_scale: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.volfrac <= 1.0:
            raise ValueError("volfrac must lie in (0, 1]")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")
        if self.volfrac < 1.0 and self.mu <= self.volfrac:
            raise ValueError("mu must exceed the volume fraction")
        if not (self.omega1 > 0.0 and self.omega2 > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class IterationRecord:
    """One outer iteration: budget, selection and energy bookkeeping."""

    gamma: int
    inner_iters: int
    volume: float
    compliance: float
    strain_energy: float
    P_u: float
    P_dual: float
    elapsed_ms: float
    V_gamma: float = math.nan
    tau_start: float = math.nan
    tau_end: float = math.nan
    upper_objective: float = math.nan
    fem_ms: float = 0.0
    update_ms: float = 0.0


@dataclass
class RunRecord:
    """Full per-iteration log of one optimization run."""

    method: str
    rows: list = field(default_factory=list)
    converged: bool = False
    final_compliance: float = math.nan
    final_volume: float = math.nan

    @property
    def outer_iterations(self):
        return len(self.rows)


def volume_schedule(V_prev, mu, V_c):
    """Next budget max(V_c, mu * V_prev) of the reduction schedule."""
    return max(float(V_c), float(mu) * float(V_prev))


def stored_energy_gains(model, rho, u):
    """Knapsack gains: the strain energy each element stores right now.

    Solid elements score their full-modulus energy, void ones next to
    nothing.  Ranking by the hypothetical full-modulus energy instead
    makes the alternation unstable: an element dropped across a load path
    sees enormous fictitious strain under the frozen displacement field,
    gets re-selected over genuine load-path material, and the selection
    churns without settling.
    """
    mat = model.material
    scale = (mat.E_min + (mat.E - mat.E_min) * np.asarray(rho, float)) / mat.E
    return element_energies(model, rho, u) * scale


def primal_upper_objective(rho, u, f, w):
    """Selection objective f.u - w.rho at the given state."""
    uvec = u.u if hasattr(u, "u") else np.asarray(u, dtype=float)
    return float(np.dot(np.asarray(f, float), uvec) - np.dot(w, np.asarray(rho, float)))


def run_cdt(model, config):
    """Run the alternating dual-knapsack optimization on ``model``.

    Returns (BinaryDensity, Displacement at the final layout, RunRecord).
    Starts from the fully solid design; stops when the budget has reached
    volfrac and the selection objective changes by at most omega2.
    """
    mesh = model.mesh
    n = mesh.n_elements
    v = mesh.element_volumes()
    V_c = config.volfrac  # V0 = 1 by construction
    rho = np.ones(n)
    V_prev = 1.0
    tau_warm = config.tau0
    P_prev = None
    record = RunRecord(method="cdt")
    converged = False
    for gamma in range(1, config.max_outer + 1):
        t0 = time.perf_counter()
        u = solve_equilibrium(model, rho, strict=False)
        t1 = time.perf_counter()
        w = stored_energy_gains(model, rho, u)
        V_g = volume_schedule(V_prev, config.mu, V_c)
        instance = knapsack.KnapsackInstance(w, v, V_g)
        params = knapsack.SolveParams(
            beta0=config.beta0,
            tau0=tau_warm,
            omega1=config.omega1,
            max_inner=config.max_inner,
            perturb=True,
            perturb_scale=config.perturb_scale,
        )
        result = knapsack.solve(instance, params=params)
        t2 = time.perf_counter()
        rho_new = result.density.rho
        cert = result.certificate
        P_cur = cert.primal_objective
        if P_prev is None:
            P_prev = -float(np.dot(w, rho))  # reference: previous layout, same gains
        record.rows.append(IterationRecord(
            gamma=gamma,
            inner_iters=cert.inner_iterations,
            volume=float(np.dot(v, rho_new)),
            compliance=compliance(u, model.load),
            strain_energy=cert.gain,
            P_u=P_cur,
            P_dual=cert.dual_objective_beta,
            elapsed_ms=(t2 - t0) * 1e3,
            V_gamma=V_g,
            tau_start=tau_warm,
            tau_end=result.point.tau,
            upper_objective=primal_upper_objective(rho_new, u, model.load, w),
            fem_ms=(t1 - t0) * 1e3,
            update_ms=(t2 - t1) * 1e3,
        ))
        settled = abs(P_cur - P_prev) <= config.omega2
        at_floor = V_g <= V_c + 1e-12
        rho = rho_new
        V_prev = V_g
        P_prev = P_cur
        tau_warm = result.point.tau
        if settled and at_floor:
            converged = True
            break
    if not converged:
        raise MaxOuterExceeded(
            f"no convergence in {config.max_outer} outer iterations", record=record
        )
    u_final = solve_equilibrium(model, rho)
    record.converged = True
    record.final_compliance = compliance(u_final, model.load)
    record.final_volume = float(np.dot(v, rho))
    return knapsack.BinaryDensity(rho), u_final, record
