"""Benchmark structural models on structured grids.

Load and support placement follows the conventions of the standard
educational 2-D/3-D topology-optimization codes, so published node and
dof indices carry over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fem import Material, Mesh, StructuralModel

__all__ = [
    "ProblemSpec",
    "build_mbb",
    "build_cantilever2d",
    "build_cantilever3d",
    "build_problem",
    "PROBLEM_KINDS",
]

PROBLEM_KINDS = ("mbb2d", "cantilever2d", "cantilever3d")


@dataclass(frozen=True)
class ProblemSpec:
    """Benchmark selection: which domain, how many elements, load size."""

    kind: str
    dims: tuple
    load: float = 1.0
    material: Material = field(default_factory=Material)

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        need = 3 if self.kind == "cantilever3d" else 2
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) != need or any(d < 1 for d in dims):
            raise ValueError(f"{self.kind} needs {need} positive dims")


def build_mbb(nelx, nely, load=1.0, material=None):
    """Half MBB beam: unit downward point load at the top-left node,
    symmetry rollers (x fixed) on the left edge, vertical support at the
    bottom-right corner node."""
    if nelx < 2 or nely < 2:
        raise ValueError("MBB needs nelx, nely >= 2")
    mesh = Mesh((nelx, nely))
    f = np.zeros(mesh.n_dofs)
    f[1] = -float(load)                      # y-dof of node (0, 0)
    left_x = 2 * np.arange(nely + 1)         # x-dofs of nodes (0, j)
    corner = mesh.n_dofs - 1                 # y-dof of node (nelx, nely)
    fixed = np.concatenate([left_x, [corner]])
    return StructuralModel(mesh, material or Material(), fixed, f)


def build_cantilever2d(nelx, nely, load=1.0, material=None):
    """Long cantilever: left edge fully clamped, unit downward load at the
    bottom-right corner node."""
    mesh = Mesh((nelx, nely))
    f = np.zeros(mesh.n_dofs)
    tip = nelx * (nely + 1) + nely           # node (nelx, nely)
    f[2 * tip + 1] = -float(load)
    fixed = np.arange(2 * (nely + 1))        # both dofs of nodes (0, j)
    return StructuralModel(mesh, material or Material(), fixed, f)


def build_cantilever3d(nelx, nely, nelz, load=1.0, material=None):
    """3-D cantilever: the x = 0 face fully clamped; a line load of unit
    total magnitude spread along the lower free edge (nodes with i = nelx,
    j = nely, all k), acting in -y."""
    mesh = Mesh((nelx, nely, nelz))
    layer = (nelx + 1) * (nely + 1)
    f = np.zeros(mesh.n_dofs)
    k = np.arange(nelz + 1)
    edge_nodes = k * layer + nelx * (nely + 1) + nely
    f[3 * edge_nodes + 1] = -float(load) / (nelz + 1)
    face = (k[:, None] * layer + np.arange(nely + 1)[None, :]).ravel()
    fixed = np.concatenate([3 * face, 3 * face + 1, 3 * face + 2])
    return StructuralModel(mesh, material or Material(), fixed, f)


def build_problem(spec):
    """Construct the StructuralModel described by a ProblemSpec."""
    if spec.kind == "mbb2d":
        return build_mbb(*spec.dims, load=spec.load, material=spec.material)
    if spec.kind == "cantilever2d":
        return build_cantilever2d(*spec.dims, load=spec.load, material=spec.material)
    return build_cantilever3d(*spec.dims, load=spec.load, material=spec.material)
