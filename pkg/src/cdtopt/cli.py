"""Command-line interface and output serialization.

Subcommands: ``run`` (a benchmark with one method), ``demo`` (the
closed-form studies), ``probe`` (wall-time sweep).  Densities are written
as portable graymaps, convergence logs as CSV.  A plain ``key = value``
config file can seed any flag; explicit flags win.  Exit codes: 0 success,
1 usage error, 2 solver error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analytic, knapsack
from .baselines import BesoConfig, SimpConfig, per_iteration_cost_probe, run_beso, run_simp
from .driver import CdtConfig, DriverError, run_cdt
from .fem import FemError
from .problems import ProblemSpec, build_problem

__all__ = [
    "UsageError",
    "CliInvocation",
    "parse_cli",
    "write_density_pgm",
    "write_runrecord_csv",
    "main",
]

OUT_DIR_ENV = "CDTOPT_OUT"
CSV_HEADER = "gamma,inner_iters,volume,compliance,strain_energy,P_u,P_dual,elapsed_ms"


class UsageError(Exception):
    """Bad flags or config values."""


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    options: dict


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_run(sub):
    p = sub.add_parser("run", help="optimize a benchmark problem")
    p.add_argument("--problem", choices=("mbb", "cantilever", "cantilever3d"),
                   default="mbb")
    p.add_argument("--nelx", type=int, default=60)
    p.add_argument("--nely", type=int, default=20)
    p.add_argument("--nelz", type=int, default=4)
    p.add_argument("--volfrac", type=float, default=0.4)
    p.add_argument("--mu", type=float, default=0.97)
    p.add_argument("--method", choices=("cdt", "simp", "beso"), default="cdt")
    p.add_argument("--E", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.3)
    p.add_argument("--emin", type=float, default=1e-9)
    p.add_argument("--tau0", type=float, default=1.0)
    p.add_argument("--omega1", type=float, default=2e-16)
    p.add_argument("--omega2", type=float, default=1e-2)
    p.add_argument("--penal", type=float, default=3.0)
    p.add_argument("--rmin", type=float, default=1.5)
    p.add_argument("--ft", type=int, default=1)
    p.add_argument("--max-outer", type=int, default=2000)
    p.add_argument("--load", type=float, default=1.0)
    p.add_argument("--ascii-pgm", action="store_true",
                   help="write plain-text P2 graymaps instead of binary P5")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def _add_demo(sub):
    p = sub.add_parser("demo", help="run a closed-form demonstration")
    p.add_argument("--name", required=True,
                   choices=("buridan", "truss", "simp-surface", "double-well"))
    p.add_argument("--w-base", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--no-perturb", action="store_true",
                   help="disable the deterministic tie-break perturbation")
    p.add_argument("--a", type=float, default=(2.0 - math.sqrt(2.0)) / 2.0)
    p.add_argument("--b", type=float, default=(4.0 + math.sqrt(2.0)) / 2.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--resolution", type=float, default=1e-4)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--f", type=float, default=0.5)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def _add_probe(sub):
    p = sub.add_parser("probe", help="wall-time sweep over mesh sizes")
    p.add_argument("--sizes", default="20x8,40x16,60x24,80x30",
                   help="comma-separated nelx x nely pairs, e.g. 20x8,40x16")
    p.add_argument("--volfrac", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.97)
    p.add_argument("--methods", default="cdt,beso")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def _read_config(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line not of the form key = value: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def parse_cli(argv):
    """Parse argv into a typed invocation; raises UsageError on bad input."""
    parser = _Parser(prog="cdtopt", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    _add_run(sub)
    _add_demo(sub)
    _add_probe(sub)

    # config-file values replace defaults; flags that differ from their
    # default were given explicitly and win over the file
    ns = parser.parse_args(argv)
    if getattr(ns, "config", None):
        file_values = _read_config(ns.config)
        base = vars(parser.parse_args([ns.subcommand]))
        merged = dict(base)
        for key, raw in file_values.items():
            if key not in merged:
                raise UsageError(f"unknown config key {key!r}")
            current = merged[key]
            if isinstance(current, bool):
                merged[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                merged[key] = int(raw)
            elif isinstance(current, float):
                merged[key] = float(raw)
            else:
                merged[key] = raw
        for key, value in vars(ns).items():
            if key not in base or value != base[key]:
                merged[key] = value
        ns = argparse.Namespace(**merged)

    opts = vars(ns).copy()
    cmd = opts.pop("subcommand")
    if cmd == "run":
        if not 0.0 < opts["volfrac"] <= 1.0:
            raise UsageError(f"volfrac must lie in (0, 1], got {opts['volfrac']}")
        if not 0.0 < opts["mu"] < 1.0:
            raise UsageError(f"mu must lie in (0, 1), got {opts['mu']}")
        for d in ("nelx", "nely", "nelz"):
            if opts[d] < 1:
                raise UsageError(f"{d} must be positive")
    return CliInvocation(subcommand=cmd, options=opts)


def _out_dir(options):
    out = options.get("out") or os.environ.get(OUT_DIR_ENV) or "./out"
    os.makedirs(out, exist_ok=True)
    return out


def write_density_pgm(rho, mesh, path, ascii_format=False):
    """Write densities as graymaps: solid black, void white, row-major
    top-to-bottom.  3-D meshes produce one file per z-layer with a
    ``_z###`` suffix."""
    rho = np.asarray(rho, dtype=float)
    if mesh.ndim == 3:
        nelx, nely, nelz = mesh.dims
        written = []
        per_layer = nelx * nely
        stem, ext = os.path.splitext(path)
        for k in range(nelz):
            layer = rho[k * per_layer:(k + 1) * per_layer]
            written.append(_write_pgm_2d(layer, (nelx, nely),
                                         f"{stem}_z{k:03d}{ext or '.pgm'}",
                                         ascii_format))
        return written
    return [_write_pgm_2d(rho, mesh.dims, path, ascii_format)]


def _write_pgm_2d(rho, dims, path, ascii_format):
    nelx, nely = dims
    # element e = ex*nely + ey; pixel (row ey, col ex)
    img = np.rint(255.0 * (1.0 - rho.reshape(nelx, nely).T)).astype(np.uint8)
    try:
        if ascii_format:
            lines = [f"P2\n{nelx} {nely}\n255\n"]
            lines += [" ".join(str(int(p)) for p in row) + "\n" for row in img]
            with open(path, "w", encoding="ascii") as fh:
                fh.writelines(lines)
        else:
            with open(path, "wb") as fh:
                fh.write(f"P5\n{nelx} {nely}\n255\n".encode("ascii"))
                fh.write(img.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write graymap {path}: {exc}") from exc
    return path


def read_pgm(path):
    """Read back a P5/P2 graymap written by :func:`write_density_pgm`."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields = data.split(maxsplit=4)
    magic, width, height, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic == b"P5":
        img = np.frombuffer(fields[4][:width * height], dtype=np.uint8)
    elif magic == b"P2":
        img = np.array(fields[4].split(), dtype=int)
    else:
        raise ValueError(f"not a graymap: {magic!r}")
    return img.reshape(height, width)


def write_runrecord_csv(record, path):
    """One row per outer iteration, 12 significant digits, LF newlines."""
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in record.rows:
                fields = [
                    str(r.gamma), str(r.inner_iters),
                    f"{r.volume:.12g}", f"{r.compliance:.12g}",
                    f"{r.strain_energy:.12g}", f"{r.P_u:.12g}",
                    f"{r.P_dual:.12g}", f"{r.elapsed_ms:.12g}",
                ]
                fh.write(",".join(fields) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write record {path}: {exc}") from exc
    return path


def _cmd_run(options):
    kind = {"mbb": "mbb2d", "cantilever": "cantilever2d",
            "cantilever3d": "cantilever3d"}[options["problem"]]
    dims = ((options["nelx"], options["nely"], options["nelz"])
            if kind == "cantilever3d" else (options["nelx"], options["nely"]))
    from .fem import Material
    spec = ProblemSpec(kind=kind, dims=dims, load=options["load"],
                       material=Material(E=options["E"], nu=options["nu"],
                                         E_min=options["emin"]))
    model = build_problem(spec)
    method = options["method"]
    if method == "cdt":
        cfg = CdtConfig(volfrac=options["volfrac"], mu=options["mu"],
                        tau0=options["tau0"], omega1=options["omega1"],
                        omega2=options["omega2"], max_outer=options["max_outer"])
        density, _, record = run_cdt(model, cfg)
        rho = density.rho
    elif method == "beso":
        density, _, record = run_beso(model, options["volfrac"],
                                      BesoConfig(mu=options["mu"],
                                                 omega2=options["omega2"],
                                                 max_outer=options["max_outer"]))
        rho = density.rho
    else:
        rho, _, record = run_simp(model, options["volfrac"],
                                  SimpConfig(penal=options["penal"],
                                             rmin=options["rmin"],
                                             ft=options["ft"],
                                             omega2=options["omega2"]))
    out = _out_dir(options)
    tag = f"{options['problem']}_{method}"
    write_density_pgm(rho, model.mesh, os.path.join(out, f"{tag}_density.pgm"),
                      ascii_format=options.get("ascii_pgm", False))
    write_runrecord_csv(record, os.path.join(out, f"{tag}_record.csv"))
    print(f"{tag}: {record.outer_iterations} outer iterations, "
          f"volume {record.final_volume:.6g}, "
          f"compliance {record.final_compliance:.6g}, "
          f"converged {record.converged}")
    return 0


def _cmd_demo(options):
    out = _out_dir(options)
    name = options["name"]
    perturb = not options.get("no_perturb", False)
    if name == "buridan":
        report, density = analytic.buridan(options["w_base"], options["epsilon"],
                                           perturb=perturb)
        print(f"tau_c {report.tau_c:.6g} interval {report.interval} "
              f"unique {report.unique} pick {density.support()}")
    elif name == "truss":
        spec = analytic.TrussSpec(a=options["a"], b=options["b"],
                                  epsilon=options["epsilon"])
        density, potential = analytic.symmetric_truss(spec, perturb=perturb)
        print(f"kept group {density.support()} potential {potential:.6g}")
    elif name == "simp-surface":
        res = analytic.simp_counterexample(options["a"], options["b"],
                                           p=options["p"],
                                           grid_resolution=options["resolution"])
        path = os.path.join(out, "simp_surface.csv")
        with open(path, "w", newline="") as fh:
            wtr = csv.writer(fh, lineterminator="\n")
            wtr.writerow(["rho1", "rho2", "value"])
            for r1, r2, val in res.grid:
                wtr.writerow([f"{r1:.12g}", f"{r2:.12g}", f"{val:.12g}"])
        print(f"boundary argmin {res.argmin} minima {res.minima} -> {path}")
    else:
        spec = analytic.DoubleWellSpec(beta=options["beta"], lam=options["lam"],
                                       f=(options["f"],))
        res = analytic.double_well_triality(spec)
        path = os.path.join(out, "double_well_roots.csv")
        with open(path, "w", newline="") as fh:
            wtr = csv.writer(fh, lineterminator="\n")
            wtr.writerow(["varsigma", "x", "potential", "dual_potential", "kind"])
            for root in res.roots:
                wtr.writerow([f"{root.varsigma:.12g}", f"{root.x[0]:.12g}",
                              f"{root.potential:.12g}",
                              f"{root.dual_potential:.12g}", root.kind])
        for root in res.roots:
            print(f"varsigma {root.varsigma:+.6g} x {root.x[0]:+.6g} "
                  f"potential {root.potential:+.6g} [{root.kind}]")
        if res.symmetric:
            print(f"perturbation minimizers {res.perturbation_minimizers}")
    return 0


def _cmd_probe(options):
    sizes = []
    for token in options["sizes"].split(","):
        nelx, nely = token.lower().split("x")
        sizes.append((int(nelx), int(nely)))
    methods = tuple(options["methods"].split(","))
    rows = per_iteration_cost_probe(sizes, volfrac=options["volfrac"],
                                    mu=options["mu"], methods=methods)
    out = _out_dir(options)
    path = os.path.join(out, "cost_probe.csv")
    with open(path, "w", newline="") as fh:
        wtr = csv.writer(fh, lineterminator="\n")
        wtr.writerow(["method", "nelx", "nely", "n_elements", "outer_iters",
                      "total_s", "fem_s", "update_s"])
        for r in rows:
            wtr.writerow([r.method, r.nelx, r.nely, r.n_elements, r.outer_iters,
                          f"{r.total_s:.12g}", f"{r.fem_s:.12g}",
                          f"{r.update_s:.12g}"])
    for r in rows:
        print(f"{r.method} {r.nelx}x{r.nely}: {r.outer_iters} iters "
              f"{r.total_s:.3f}s")
    print(path)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        invocation = parse_cli(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        if invocation.subcommand == "run":
            return _cmd_run(invocation.options)
        if invocation.subcommand == "demo":
            return _cmd_demo(invocation.options)
        return _cmd_probe(invocation.options)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (knapsack.KnapsackError, FemError, DriverError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
