"""Linear-elastic finite elements on structured grids of unit squares/cubes.

Conventions (matching the widely used educational topology-optimization
codes so published load/support indices transfer directly):

* 2-D: nodes are numbered column-wise, top to bottom, left to right;
  node (i, j) has index ``i*(nely+1) + j`` with j increasing downward.
  Each node carries dofs (2*id, 2*id + 1) = (x, y).  Element (ei, ej) has
  index ``ei*nely + ej`` and its 8 dofs are ordered
  [lower-left, lower-right, upper-right, upper-left] x (x, y).
* 3-D: the 2-D layout is repeated per z-layer; node (i, j, k) has index
  ``k*(nelx+1)*(nely+1) + i*(nely+1) + j`` and three dofs (x, y, z).
  Element dofs list the k-layer quad first, then the k+1 layer.
* Geometry for analytic checks: node (i, j[, k]) sits at physical
  coordinates (i, -j[, k]), i.e. the y axis of the stored grid points
  downward on screen.

All elements are unit-sized; element volumes are normalized to 1/n so the
design domain always has unit volume.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "FemError",
    "SolverBreakdown",
    "Mesh",
    "Material",
    "StructuralModel",
    "Displacement",
    "element_stiffness_2d",
    "element_stiffness_3d",
    "element_dof_map",
    "assemble",
    "free_dofs",
    "solve_equilibrium",
    "element_energies",
    "compliance",
    "strain_energy",
]


class FemError(Exception):
    """Base class for finite-element failures."""


class SolverBreakdown(FemError):
    """The linear solve failed or left an unacceptable residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Mesh:
    """Structured grid of unit square (2-D) or cube (3-D) elements."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) not in (2, 3) or any(d < 1 for d in dims):
            raise ValueError("dims must be 2 or 3 positive element counts")

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def element_size(self):
        # unit squares/cubes; volumes are normalized separately so the
        # design domain always totals one
        return 1.0

    @property
    def n_elements(self):
        return int(np.prod(self.dims))

    @property
    def n_nodes(self):
        return int(np.prod([d + 1 for d in self.dims]))

    @property
    def n_dofs(self):
        return self.ndim * self.n_nodes

    def element_volumes(self):
        n = self.n_elements
        return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class Material:
    """Isotropic material with an ersatz modulus for void elements."""

    E: float = 1.0
    nu: float = 0.3
    E_min: float = 1e-9

    def __post_init__(self):
        if not (self.E > self.E_min > 0.0):
            raise ValueError("need E > E_min > 0")
        if not (0.0 <= self.nu < 0.5):
            raise ValueError("need 0 <= nu < 0.5")


@dataclass(frozen=True)
class StructuralModel:
    """Mesh, material, supports and loads of one boundary-value problem."""

    mesh: Mesh
    material: Material
    fixed_dofs: np.ndarray
    load: np.ndarray

    def __post_init__(self):
        fixed = np.unique(np.asarray(self.fixed_dofs, dtype=int))
        load = np.array(self.load, dtype=float)
        load.flags.writeable = False
        fixed.flags.writeable = False
        object.__setattr__(self, "fixed_dofs", fixed)
        object.__setattr__(self, "load", load)
        ndof = self.mesh.n_dofs
        if fixed.size == 0:
            raise ValueError("at least one dof must be fixed")
        if fixed.min() < 0 or fixed.max() >= ndof:
            raise ValueError("fixed dof index out of range")
        if load.shape != (ndof,) or not np.all(np.isfinite(load)):
            raise ValueError("load must be a finite vector over all dofs")
        if np.any(load[fixed] != 0.0):
            raise ValueError("load must vanish on fixed dofs")

    @property
    def n_elements(self):
        return self.mesh.n_elements


@dataclass(frozen=True)
class Displacement:
    """Nodal displacement vector, zero at fixed dofs."""

    u: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        u.flags.writeable = False
        object.__setattr__(self, "u", u)


def element_stiffness_2d(material):
    """8x8 plane-stress stiffness of a unit Q4 element at unit modulus.

    Closed form for the bilinear quadrilateral; symmetric, PSD, rank 5.
    """
    nu = material.nu
    k = np.array([
        0.5 - nu / 6.0, 0.125 + nu / 8.0, -0.25 - nu / 12.0, -0.125 + 3.0 * nu / 8.0,
        -0.25 + nu / 12.0, -0.125 - nu / 8.0, nu / 6.0, 0.125 - 3.0 * nu / 8.0,
    ])
    idx = np.array([
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ])
    return k[idx] / (1.0 - nu * nu)


def _h8_local_nodes():
    # unit cube, bottom quad counterclockwise then top quad
    return np.array([
        [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0],
    ])


def elasticity_matrix_3d(nu):
    """6x6 isotropic elasticity matrix at unit modulus (Voigt order
    xx, yy, zz, yz, xz, xy)."""
    lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = 0.5 / (1.0 + nu)
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[np.arange(3), np.arange(3)] += 2.0 * mu
    D[np.arange(3, 6), np.arange(3, 6)] = mu
    return D


def element_stiffness_3d(material):
    """24x24 stiffness of a unit H8 element at unit modulus.

    2x2x2 Gauss integration, exact for the trilinear brick; symmetric,
    PSD, rank 18.
    """
    nu = material.nu
    D = elasticity_matrix_3d(nu)
    nodes = _h8_local_nodes()
    g = 0.5 + np.array([-1.0, 1.0]) / (2.0 * np.sqrt(3.0))
    K = np.zeros((24, 24))
    for gx in g:
        for gy in g:
            for gz in g:
                dN = _h8_shape_gradients(gx, gy, gz, nodes)
                B = np.zeros((6, 24))
                B[0, 0::3] = dN[:, 0]
                B[1, 1::3] = dN[:, 1]
                B[2, 2::3] = dN[:, 2]
                B[3, 1::3] = dN[:, 2]
                B[3, 2::3] = dN[:, 1]
                B[4, 0::3] = dN[:, 2]
                B[4, 2::3] = dN[:, 0]
                B[5, 0::3] = dN[:, 1]
                B[5, 1::3] = dN[:, 0]
                K += 0.125 * B.T @ D @ B
    return 0.5 * (K + K.T)


def _h8_shape_gradients(x, y, z, nodes):
    # trilinear shape-function gradients on the unit cube at point (x, y, z)
    s = nodes
    dN = np.empty((8, 3))
    for a in range(8):
        fx = s[a, 0] * x + (1.0 - s[a, 0]) * (1.0 - x)
        fy = s[a, 1] * y + (1.0 - s[a, 1]) * (1.0 - y)
        fz = s[a, 2] * z + (1.0 - s[a, 2]) * (1.0 - z)
        gx = 2.0 * s[a, 0] - 1.0
        gy = 2.0 * s[a, 1] - 1.0
        gz = 2.0 * s[a, 2] - 1.0
        dN[a] = [gx * fy * fz, fx * gy * fz, fx * fy * gz]
    return dN


@lru_cache(maxsize=32)
def element_dof_map(dims):
    """(n_elements, dofs-per-element) array of global dof indices."""
    if len(dims) == 2:
        nelx, nely = dims
        ex, ey = np.meshgrid(np.arange(nelx), np.arange(nely), indexing="ij")
        n1 = (ex * (nely + 1) + ey).ravel()      # upper-left node
        bl = n1 + 1
        br = n1 + nely + 2
        tr = n1 + nely + 1
        tl = n1
        nodes = np.stack([bl, br, tr, tl], axis=1)
        edof = np.empty((nelx * nely, 8), dtype=np.int64)
        edof[:, 0::2] = 2 * nodes
        edof[:, 1::2] = 2 * nodes + 1
    else:
        nelx, nely, nelz = dims
        ex, ey, ez = np.meshgrid(
            np.arange(nelx), np.arange(nely), np.arange(nelz), indexing="ij"
        )
        layer = (nelx + 1) * (nely + 1)
        # element order: z-layer outermost, then column-major within a layer
        order = (ez * nelx * nely + ex * nely + ey).ravel()
        n1 = (ez * layer + ex * (nely + 1) + ey).ravel()
        bl = n1 + 1
        br = n1 + nely + 2
        tr = n1 + nely + 1
        tl = n1
        quad = np.stack([bl, br, tr, tl], axis=1)
        nodes = np.concatenate([quad, quad + layer], axis=1)
        edof = np.empty((nelx * nely * nelz, 24), dtype=np.int64)
        edof[:, 0::3] = 3 * nodes
        edof[:, 1::3] = 3 * nodes + 1
        edof[:, 2::3] = 3 * nodes + 2
        inv = np.empty_like(order)
        inv[order] = np.arange(order.size)
        edof = edof[inv]
    edof.flags.writeable = False
    return edof


def _unit_ke(mesh, material):
    if mesh.ndim == 2:
        return element_stiffness_2d(material)
    return element_stiffness_3d(material)


def assemble(model, rho, penal=1.0):
    """Sparse symmetric stiffness with modulus E_min + (E - E_min) rho^penal.

    Returns the full-dof matrix; boundary conditions are applied by
    reduction to free dofs at solve time (no penalty terms).
    """
    mesh, mat = model.mesh, model.material
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (mesh.n_elements,):
        raise ValueError(
            f"rho has shape {rho.shape}, expected ({mesh.n_elements},)"
        )
    if np.any(rho < -1e-12) or np.any(rho > 1.0 + 1e-12):
        raise ValueError("rho values must lie in [0, 1]")
    ke = _unit_ke(mesh, mat)
    edof = element_dof_map(mesh.dims)
    scale = mat.E_min + (mat.E - mat.E_min) * rho ** penal
    m = ke.shape[0]
    data = (scale[:, None, None] * ke[None, :, :]).ravel()
    rows = np.repeat(edof, m, axis=1).ravel()
    cols = np.tile(edof, (1, m)).ravel()
    K = sp.coo_matrix((data, (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs))
    return K.tocsc()


def free_dofs(model):
    return np.setdiff1d(np.arange(model.mesh.n_dofs), model.fixed_dofs)


def solve_equilibrium(model, rho, penal=1.0, strict=True):
    """Displacement with K(rho) u = f on the free dofs.

    Sparse LU factorization with iterative refinement; conjugate gradients
    with a Jacobi preconditioner as fallback.  The relative residual on
    free dofs must reach 1e-10 or :class:`SolverBreakdown` is raised.

    ``strict=False`` returns the best-effort solution instead of raising:
    transient designs during optimization can contain corner-hinged
    chains whose near-mechanism modes push the attainable residual above
    the target; the caller inspects ``Displacement.residual``.
    """
    K = assemble(model, rho, penal)
    free = free_dofs(model)
    f = model.load
    u = np.zeros(model.mesh.n_dofs)
    f_free = f[free]
    fnorm = float(np.linalg.norm(f_free))
    if fnorm == 0.0:
        return Displacement(u, 0.0)
    Kff = K[free][:, free].tocsc()
    u_free = None
    res = math.inf
    try:
        lu = spla.splu(Kff)
        u_free = lu.solve(f_free)
        # iterative refinement recovers accuracy lost to the huge
        # solid/ersatz stiffness contrast of nearly binary designs
        res = float(np.linalg.norm(Kff @ u_free - f_free)) / fnorm
        for _ in range(8):
            if res <= 1e-13:
                break
            u_try = u_free + lu.solve(f_free - Kff @ u_free)
            res_try = float(np.linalg.norm(Kff @ u_try - f_free)) / fnorm
            if res_try >= res:
                break
            u_free, res = u_try, res_try
    except RuntimeError:
        u_free = None
    if u_free is not None and (res <= 1e-10 or not strict):
        u[free] = u_free
        return Displacement(u, res)
    diag = Kff.diagonal()
    if np.any(diag <= 0.0):
        raise SolverBreakdown("stiffness diagonal not positive; system not SPD")
    M = sp.diags(1.0 / diag)
    u_cg, info = spla.cg(Kff, f_free, rtol=1e-12, atol=0.0, maxiter=20000, M=M)
    res_cg = float(np.linalg.norm(Kff @ u_cg - f_free)) / fnorm
    if (info != 0 or res_cg > 1e-10) and strict:
        raise SolverBreakdown(
            f"linear solve residual {res_cg:.3e} exceeds 1e-10 (cg info {info})",
            residual=res_cg,
        )
    u[free] = u_cg
    return Displacement(u, res_cg)


def element_energies(model, rho, u):
    """Per-element gains w_e = 1/2 E u_e . K_e u_e at full modulus.

    The gain measures what each element would store under the current
    displacement field, independent of its present density (``rho`` is
    accepted for interface symmetry and shape checking only).
    """
    mesh, mat = model.mesh, model.material
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (mesh.n_elements,):
        raise ValueError("rho length must match the element count")
    uvec = u.u if isinstance(u, Displacement) else np.asarray(u, dtype=float)
    ke = _unit_ke(mesh, mat)
    ue = uvec[element_dof_map(mesh.dims)]
    w = 0.5 * mat.E * np.einsum("ni,ij,nj->n", ue, ke, ue)
    return np.maximum(w, 0.0)


def compliance(u, f):
    """Work of the applied load at equilibrium, 1/2 f.u."""
    uvec = u.u if isinstance(u, Displacement) else np.asarray(u, dtype=float)
    return 0.5 * float(np.dot(np.asarray(f, dtype=float), uvec))


def strain_energy(u, K):
    """Stored energy 1/2 u.K u for a (sparse) stiffness K."""
    uvec = u.u if isinstance(u, Displacement) else np.asarray(u, dtype=float)
    return 0.5 * float(uvec @ (K @ uvec))
