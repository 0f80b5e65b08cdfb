"""Reference methods: penalized continuous densities with optimality-criteria
updates (SIMP), and the greedy keep-the-most-energetic-elements scheme (BESO)
run on the same volume schedule as the dual solver.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from . import knapsack
from .driver import (
    IterationRecord,
    MaxOuterExceeded,
    RunRecord,
    stored_energy_gains,
    volume_schedule,
)
from .fem import (
    assemble,
    compliance,
    element_energies,
    solve_equilibrium,
    strain_energy,
)

__all__ = [
    "SimpConfig",
    "BesoConfig",
    "CostRow",
    "run_simp",
    "run_beso",
    "beso_select",
    "per_iteration_cost_probe",
]


@dataclass(frozen=True)
class SimpConfig:
    penal: float = 3.0
    rmin: float = 1.5
    ft: int = 1            # 0 = no filter, 1 = sensitivity filter
    move: float = 0.2
    eta: float = 0.5       # damping exponent of the OC update
    omega2: float = 1e-2
    max_iters: int = 500
    x_min: float = 1e-3

    def __post_init__(self):
        if self.penal < 1.0:
            raise ValueError("penal must be >= 1")
        if self.rmin < 1.0:
            raise ValueError("rmin must be >= 1")
        if self.ft not in (0, 1):
            raise ValueError("ft must be 0 or 1")


@dataclass(frozen=True)
class BesoConfig:
    mu: float
    omega2: float = 1e-2
    max_outer: int = 2000

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")


def _element_centroids(mesh):
    if mesh.ndim == 2:
        nelx, nely = mesh.dims
        ex, ey = np.meshgrid(np.arange(nelx), np.arange(nely), indexing="ij")
        return np.column_stack([ex.ravel() + 0.5, ey.ravel() + 0.5])
    nelx, nely, nelz = mesh.dims
    ez, ex, ey = np.meshgrid(
        np.arange(nelz), np.arange(nelx), np.arange(nely), indexing="ij"
    )
    return np.column_stack([ex.ravel() + 0.5, ey.ravel() + 0.5, ez.ravel() + 0.5])


def _filter_matrix(mesh, rmin):
    """Sparse H with H_ij = max(0, rmin - dist(centroid_i, centroid_j))."""
    pts = _element_centroids(mesh)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(rmin, output_type="ndarray")
    if pairs.size:
        d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        wgt = rmin - d
        rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(len(pts))])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(len(pts))])
        data = np.concatenate([wgt, wgt, np.full(len(pts), rmin)])
    else:
        rows = cols = np.arange(len(pts))
        data = np.full(len(pts), rmin)
    H = sp.coo_matrix((data, (rows, cols)), shape=(len(pts),) * 2).tocsr()
    return H, np.asarray(H.sum(axis=1)).ravel()


def _oc_update(x, dc, dv, volfrac, move, eta, x_min):
    """Optimality-criteria step with bisection on the volume multiplier."""
    l1, l2 = 0.0, 1e9
    xnew = x
    bisections = 0
    while (l2 - l1) / (l1 + l2 + 1e-30) > 1e-9:
        bisections += 1
        lmid = 0.5 * (l1 + l2)
        cand = x * (np.maximum(-dc, 0.0) / (dv * lmid)) ** eta
        cand = np.clip(cand, x - move, x + move)
        xnew = np.clip(cand, x_min, 1.0)
        if xnew.mean() > volfrac:
            l1 = lmid
        else:
            l2 = lmid
    return xnew, bisections


def run_simp(model, volfrac, config=None):
    """Penalized continuous optimization with OC updates.

    Returns (densities, Displacement, RunRecord).  Non-convergence within
    the iteration cap is reported through record.converged, not raised.
    """
    cfg = config or SimpConfig()
    if not 0.0 < volfrac <= 1.0:
        raise ValueError("volfrac must lie in (0, 1]")
    mesh, mat = model.mesh, model.material
    n = mesh.n_elements
    v = mesh.element_volumes()
    x = np.full(n, volfrac)
    H, Hs = _filter_matrix(mesh, cfg.rmin)
    dv = np.ones(n)
    record = RunRecord(method="simp")
    change = math.inf
    for it in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        u = solve_equilibrium(model, x, penal=cfg.penal)
        t1 = time.perf_counter()
        w = element_energies(model, x, u)       # full-modulus gains
        ce = 2.0 * w / mat.E                    # unit-modulus u_e.K_e u_e
        dc = -cfg.penal * x ** (cfg.penal - 1.0) * (mat.E - mat.E_min) * ce
        if cfg.ft == 1:
            dc = (H @ (x * dc)) / Hs / np.maximum(1e-3, x)
        xnew, bisections = _oc_update(x, dc, dv, volfrac, cfg.move, cfg.eta, cfg.x_min)
        change = float(np.max(np.abs(xnew - x)))
        t2 = time.perf_counter()
        K = assemble(model, x, penal=cfg.penal)
        record.rows.append(IterationRecord(
            gamma=it,
            inner_iters=bisections,
            volume=float(np.dot(v, xnew)),
            compliance=compliance(u, model.load),
            strain_energy=strain_energy(u, K),
            P_u=-float(np.dot(w, xnew)),
            P_dual=math.nan,
            elapsed_ms=(t2 - t0) * 1e3,
            V_gamma=volfrac,
            fem_ms=(t1 - t0) * 1e3,
            update_ms=(t2 - t1) * 1e3,
        ))
        x = xnew
        if change <= cfg.omega2:
            break
    record.converged = change <= cfg.omega2
    u_final = solve_equilibrium(model, x, penal=cfg.penal)
    record.final_compliance = compliance(u_final, model.load)
    record.final_volume = float(np.dot(v, x))
    return x, u_final, record


def beso_select(w, v, budget, current):
    """Greedy subset for one step: highest gains first until the budget
    is filled; ties prefer currently solid elements, then lower index."""
    w = np.asarray(w, dtype=float)
    keep = knapsack.affordable_count(v, budget)
    order = np.lexsort((np.arange(w.size), -np.asarray(current, float), -w))
    rho = np.zeros(w.size)
    rho[order[:keep]] = 1.0
    return rho


def run_beso(model, volfrac, config):
    """Greedy evolutionary baseline on the shared volume schedule.

    Per outer step: equilibrium solve, element gains, keep the top
    elements within the scheduled budget.  Stop rule identical to the
    dual-knapsack driver.
    """
    if not 0.0 < volfrac <= 1.0:
        raise ValueError("volfrac must lie in (0, 1]")
    mesh = model.mesh
    n = mesh.n_elements
    v = mesh.element_volumes()
    V_c = volfrac
    rho = np.ones(n)
    V_prev = 1.0
    P_prev = None
    record = RunRecord(method="beso")
    converged = False
    for gamma in range(1, config.max_outer + 1):
        t0 = time.perf_counter()
        u = solve_equilibrium(model, rho, strict=False)
        t1 = time.perf_counter()
        w = stored_energy_gains(model, rho, u)
        V_g = volume_schedule(V_prev, config.mu, V_c)
        rho_new = beso_select(w, v, V_g, rho)
        t2 = time.perf_counter()
        P_cur = -float(np.dot(w, rho_new))
        if P_prev is None:
            P_prev = -float(np.dot(w, rho))
        record.rows.append(IterationRecord(
            gamma=gamma,
            inner_iters=1,
            volume=float(np.dot(v, rho_new)),
            compliance=compliance(u, model.load),
            strain_energy=float(np.dot(w, rho_new)),
            P_u=P_cur,
            P_dual=math.nan,
            elapsed_ms=(t2 - t0) * 1e3,
            V_gamma=V_g,
            fem_ms=(t1 - t0) * 1e3,
            update_ms=(t2 - t1) * 1e3,
        ))
        settled = abs(P_cur - P_prev) <= config.omega2
        at_floor = V_g <= V_c + 1e-12
        rho = rho_new
        V_prev = V_g
        P_prev = P_cur
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


@dataclass(frozen=True)
class CostRow:
    method: str
    nelx: int
    nely: int
    n_elements: int
    outer_iters: int
    total_s: float
    fem_s: float
    update_s: float


def per_iteration_cost_probe(mesh_sizes, volfrac=0.5, mu=0.97, methods=("cdt", "beso"),
                             build=None):
    """Wall-time comparison across mesh sizes.

    ``mesh_sizes`` is a sequence of (nelx, nely); each method is run to
    convergence on the long cantilever (or a custom ``build`` callable)
    and one CostRow per (method, mesh) is returned.
    """
    from .driver import CdtConfig, run_cdt
    from .problems import build_cantilever2d

    build = build or build_cantilever2d
    rows = []
    for nelx, nely in mesh_sizes:
        model = build(nelx, nely)
        for method in methods:
            t0 = time.perf_counter()
            if method == "cdt":
                _, _, rec = run_cdt(model, CdtConfig(volfrac=volfrac, mu=mu))
            elif method == "beso":
                _, _, rec = run_beso(model, volfrac, BesoConfig(mu=mu))
            else:
                raise ValueError(f"unknown method {method!r}")
            total = time.perf_counter() - t0
            rows.append(CostRow(
                method=method,
                nelx=nelx,
                nely=nely,
                n_elements=model.mesh.n_elements,
                outer_iters=rec.outer_iterations,
                total_s=total,
                fem_s=sum(r.fem_ms for r in rec.rows) * 1e-3,
                update_s=sum(r.update_ms for r in rec.rows) * 1e-3,
            ))
    return rows
