"""Batch driver: run a case over a mesh family across refinements, write an
error/EOC table as CSV, optionally export fields and tractions.

Exit codes: 0 all checks passed, 1 a numerical check failed, 2 bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .analysis import ErrorReport, energy_error, eoc, l2_error
from .assembly import MaterialParams, assemble, assemble_forms
from .cases import case_names, get_case
from .fespace import reconstruct
from .mesh import MeshFamilySpec, build_mesh
from .solver import SolverError, solve
from .tractions import check_equilibrium, check_local_balance, numerical_tractions

CSV_HEADER = ("mesh_id,h,ndofs,nnz,energy_err,energy_eoc,l2_err,l2_eoc,"
              "balance_residual,equilibrium_residual")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    case: str
    family: str | None = None
    levels: list[int] = field(default_factory=list)
    files: list[str] = field(default_factory=list)
    mu: float | None = None
    lam: float | None = None
    quad_degree: int = 10
    solver: str = "direct"
    solver_tol: float = 1e-10
    consistency: str = "navier"
    out: str | None = None
    check_tractions: bool = False
    export_vtk: str | None = None
    dump_matrix: str | None = None

    def validate(self) -> None:
        if self.case not in case_names():
            raise ConfigError(f"unknown case '{self.case}' "
                              f"(available: {', '.join(case_names())})")
        if not self.levels and not self.files:
            raise ConfigError("refinement list is empty: give --levels or files")
        if self.levels and self.files:
            raise ConfigError("give either --levels or files, not both")
        if self.levels != sorted(self.levels) or len(set(self.levels)) != len(self.levels):
            raise ConfigError("levels must be strictly increasing")
        if any(n < 1 for n in self.levels):
            raise ConfigError("levels must be positive")
        if self.quad_degree < 1:
            raise ConfigError("quadrature degree must be >= 1")
        if self.solver not in ("direct", "cg"):
            raise ConfigError(f"unknown solver '{self.solver}'")
        if self.consistency not in ("navier", "symmetric"):
            raise ConfigError(f"unknown consistency variant '{self.consistency}'")


def _fmt(x) -> str:
    """Six significant digits, scientific; empty for missing values."""
    return "" if x is None else f"{x:.5e}"


@dataclass
class StudyReport:
    config: RunConfig
    rows: list[ErrorReport]
    ok: bool

    def csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                r.mesh_id, _fmt(r.h), str(r.n_dofs), str(r.nnz),
                _fmt(r.energy_error), _fmt(r.energy_eoc),
                _fmt(r.l2_error), _fmt(r.l2_eoc),
                _fmt(r.balance_residual), _fmt(r.equilibrium_residual),
            ]))
        return "\n".join(lines) + "\n"


def run_study(config: RunConfig) -> StudyReport:
    """Build -> assemble -> solve -> measure for every refinement level."""
    config.validate()
    case = get_case(config.case, mu=config.mu, lam=config.lam)
    mat = MaterialParams(case.mu, case.lam)

    rows: list[ErrorReport] = []
    ok = True
    runs = config.levels if config.levels else config.files
    for lvl in runs:
        if config.levels:
            spec = case.mesh_spec(config.family, int(lvl))
            mesh_id = f"{spec.family}-n{lvl}"
        else:
            spec = case.mesh_spec("file", 1, path=str(lvl))
            mesh_id = str(lvl).rsplit("/", 1)[-1]
        mesh = build_mesh(spec)
        system = assemble(mesh, mat, case, quad_degree=config.quad_degree,
                          consistency=config.consistency)
        u_h, _ = solve(system, method=config.solver, tol=config.solver_tol)

        row = ErrorReport(
            mesh_id=mesh_id, h=mesh.h, n_dofs=system.n_dofs, nnz=system.nnz,
            energy_error=energy_error(u_h, case.u, system, config.quad_degree),
            l2_error=l2_error(u_h, case.u, mesh, config.quad_degree))

        if config.check_tractions:
            tr = numerical_tractions(u_h, mat, consistency=config.consistency,
                                     g=case.g, degree=config.quad_degree)
            bal = check_local_balance(tr, system)
            equ = check_equilibrium(tr)
            row.balance_residual = bal.rel_residual
            row.equilibrium_residual = equ.rel_residual
            if not (bal.ok and equ.ok):
                ok = False
        if config.export_vtk:
            export_vtk(u_h, mesh, f"{config.export_vtk.rstrip('/')}/{config.case}_{mesh_id}.vtk")
        if config.dump_matrix:
            system.dump_matrix(f"{config.dump_matrix.rstrip('/')}/{config.case}_{mesh_id}.mtx")
        rows.append(row)

    hs = [r.h for r in rows]
    if len(rows) >= 2:
        for i, v in enumerate(eoc([r.energy_error for r in rows], hs)):
            rows[i + 1].energy_eoc = v
        for i, v in enumerate(eoc([r.l2_error for r in rows], hs)):
            rows[i + 1].l2_eoc = v
    return StudyReport(config, rows, ok)


# -- VTK export --------------------------------------------------------------------

def export_vtk(u_h, mesh, path: str) -> None:
    """Legacy ASCII VTK unstructured grid with the cell unknowns as cell data
    and the vertex-averaged reconstruction as point data."""
    d = mesh.dim
    field = reconstruct(u_h)
    cell_vals = u_h.cell_values()

    # vertex-averaged reconstruction
    acc = np.zeros((mesh.n_vertices, d))
    cnt = np.zeros(mesh.n_vertices)
    for c in range(mesh.n_cells):
        vids = mesh.cell_vertex_ids(c)
        acc[vids] += field.evaluate(np.full(len(vids), c), mesh.vertices[vids])
        cnt[vids] += 1.0
    point_vals = acc / np.maximum(cnt, 1.0)[:, None]

    def vec3(v):
        return " ".join(f"{x:.17e}" for x in (list(v) + [0.0] * (3 - d)))

    lines = ["# vtk DataFile Version 3.0", "polyelast displacement field",
             "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_vertices} double"]
    lines += [vec3(p) for p in mesh.vertices]

    conn: list[str] = []
    types: list[int] = []
    total = 0
    for c in range(mesh.n_cells):
        vids = mesh.cell_vertex_ids(c)
        if d == 2:
            conn.append(f"{len(vids)} " + " ".join(map(str, vids)))
            total += len(vids) + 1
            types.append(7)  # VTK_POLYGON
        elif len(vids) == 4 and len(mesh.cell_face_ids(c)) == 4:
            conn.append("4 " + " ".join(map(str, vids)))
            total += 5
            types.append(10)  # VTK_TETRA
        else:
            fids = mesh.cell_face_ids(c)
            stream = [str(len(fids))]
            n = 1
            for f in fids:
                fl = mesh.face_vertex_ids(f)
                stream.append(str(len(fl)) + " " + " ".join(map(str, fl)))
                n += len(fl) + 1
            conn.append(f"{n} " + " ".join(stream))
            total += n + 1
            types.append(42)  # VTK_POLYHEDRON

    lines.append(f"CELLS {mesh.n_cells} {total}")
    lines += conn
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines += [str(t) for t in types]
    lines.append(f"CELL_DATA {mesh.n_cells}")
    lines.append("VECTORS displacement double")
    lines += [vec3(v) for v in cell_vals]
    lines.append(f"POINT_DATA {mesh.n_vertices}")
    lines.append("VECTORS reconstruction double")
    lines += [vec3(v) for v in point_vals]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- argument handling ---------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polyelast",
        description="Convergence studies for the lowest-order hybrid "
                    "discretisation of linear elasticity on polytopal meshes.")
    p.add_argument("--config", help="JSON file with any of the other options")
    p.add_argument("--case", choices=case_names(), help="test case id")
    p.add_argument("--family", help="mesh family (case default when omitted)")
    p.add_argument("--levels", help="comma-separated resolutions, e.g. 4,8,16")
    p.add_argument("--files", help="comma-separated mesh files (instead of levels)")
    p.add_argument("--mu", type=float, help="shear coefficient override")
    p.add_argument("--lambda", dest="lam", type=float, help="second coefficient override")
    p.add_argument("--quad-degree", type=int, help="quadrature exactness degree (default 10)")
    p.add_argument("--solver", choices=("direct", "cg"), help="linear solver (default direct)")
    p.add_argument("--consistency", choices=("navier", "symmetric"),
                   help="consistency-term variant (default navier)")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--check-tractions", action="store_true", default=None,
                   help="verify local balance and interface equilibrium")
    p.add_argument("--export-vtk", metavar="DIR", help="write one VTK file per level")
    p.add_argument("--dump-matrix", metavar="DIR", help="write MatrixMarket files per level")
    return p


def _config_from_args(argv) -> RunConfig:
    args = _build_parser().parse_args(argv)
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config '{args.config}': {exc}") from exc
        unknown = set(data) - {f.name for f in RunConfig.__dataclass_fields__.values()}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def override(key, value):
        if value is not None:
            data[key] = value

    override("case", args.case)
    override("family", args.family)
    if args.levels is not None:
        try:
            data["levels"] = [int(t) for t in args.levels.split(",") if t]
        except ValueError as exc:
            raise ConfigError(f"bad --levels '{args.levels}'") from exc
    if args.files is not None:
        data["files"] = [t for t in args.files.split(",") if t]
    override("mu", args.mu)
    override("lam", args.lam)
    override("quad_degree", args.quad_degree)
    override("solver", args.solver)
    override("consistency", args.consistency)
    override("out", args.out)
    override("check_tractions", args.check_tractions)
    override("export_vtk", args.export_vtk)
    override("dump_matrix", args.dump_matrix)
    if "case" not in data:
        raise ConfigError("no case given (use --case or a config file)")
    return RunConfig(**data)


def main(argv=None) -> int:
    try:
        config = _config_from_args(argv)
        config.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_study(config)
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = report.csv()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
