"""``torsionlab`` command line: run one job on a JSON input and write a JSON report.

Exit codes: 0 when every check passes, 1 for a failed check or invariant
violation, 2 when the job or its input cannot be parsed, 3 when a numerical
routine does not converge.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .schemas import (
    REPORT_SCHEMA,
    SchemaError,
    boundary_model_from_doc,
    canonical_json,
    complex_from_doc,
    load_document,
    spectrum_from_doc,
    twisted_from_doc,
)

__all__ = ["JobSpec", "Check", "Report", "run", "main", "build_parser", "EXIT_OK", "EXIT_FAILED", "EXIT_PARSE", "EXIT_NUMERIC"]

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("validate", "torsion", "identity", "cylinder", "wellposed", "cohomology")


class NumericalFailure(RuntimeError):
    """Wraps non-convergence so it maps to exit code 3."""


@dataclass(frozen=True)
class JobSpec:
    """One CLI invocation."""

    command: str
    input: str | None = None
    theta: float | None = None
    lam: float | None = None
    eta_trivial: float = 0.0
    rank_e: int = 1
    seed: int = 0
    tol: float = 1e-8
    out: str | None = None
    csv: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        if self.theta is not None and not (-math.pi / 2 < self.theta < 0):
            raise SchemaError("theta must lie in (-pi/2, 0)")
        if self.lam is not None and not self.lam >= 0:
            raise SchemaError("lambda must be non-negative")
        if not self.tol > 0:
            raise SchemaError("tolerance must be positive")
        if self.rank_e < 1:
            raise SchemaError("rank-e must be positive")

    def echo(self) -> dict:
        return {"command": self.command, "input": self.input, "theta": self.theta, "lambda": self.lam,
                "eta_trivial": self.eta_trivial, "rank_e": self.rank_e, "seed": self.seed, "tol": self.tol}


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {"name": self.name, "residual": float(self.residual), "tolerance": float(self.tolerance), "passed": bool(self.passed)}


@dataclass
class Report:
    job: JobSpec
    checks: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "job": self.job.echo(),
            "checks": [c.as_dict() for c in self.checks],
            "payload": self.payload,
            "passed": self.passed,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return canonical_json(self.as_dict())


def _need_input(job: JobSpec) -> dict:
    if job.input is None:
        raise SchemaError(f"command {job.command!r} needs --input")
    return load_document(job.input)


# ----- commands --------------------------------------------------------------

def _validate(job: JobSpec, rep: Report):
    from .boundary_model import BoundaryModelError, check_assumptions
    from .graded_complex import validate

    doc = _need_input(job)
    kind = doc.get("kind", "complex")
    rep.payload["kind"] = kind
    if kind == "complex":
        C = complex_from_doc(doc)
        v = validate(C)
        rep.payload["residuals"] = dict(sorted(v.checks.items()))
        rep.payload["violations"] = [{"location": x.location, "message": x.message, "residual": x.residual} for x in v.violations]
        worst = max((x.residual for x in v.violations), default=0.0)
        rep.checks.append(Check("structural invariants", worst, 1e-10, v.valid))
        for x in v.violations:
            rep.checks.append(Check(f"{x.location}: {x.message}", x.residual, 1e-10, False))
    elif kind == "boundary_model":
        try:
            M = boundary_model_from_doc(doc)
        except BoundaryModelError as exc:
            rep.payload["violations"] = [{"location": "model", "message": str(exc)}]
            rep.checks.append(Check(f"model: {exc}", math.inf, 0.0, False))
            return
        a = check_assumptions(M)
        rep.payload["assumptions"] = {"A": a.A, "B": a.B, "dims": a.dims}
        rep.checks.append(Check("assumption A", 0.0 if a.A else 1.0, 0.0))
        rep.checks.append(Check("assumption B", 0.0 if a.B else 1.0, 0.0))
    elif kind == "twisted_complex":
        spec = twisted_from_doc(doc)
        d = spec.flatness_defect()
        rep.checks.append(Check("holonomy flatness", d, 1e-10))
    elif kind == "boundary_spectrum":
        from .cylinder_heat import pairing_defect

        pd = pairing_defect(spectrum_from_doc(doc))
        rep.payload["pairing"] = pd
        rep.checks.append(Check("spectral pairing", pd["spectral"], 1e-9))
        rep.checks.append(Check("empty end sides", pd["ends"], 0))
        rep.checks.append(Check("harmonic symmetry", pd["harmonic"], 0))
    else:
        raise SchemaError(f"cannot validate documents of kind {kind!r}")


def _validated_complex(job: JobSpec, rep: Report):
    from .graded_complex import validate

    doc = _need_input(job)
    C = complex_from_doc(doc)
    v = validate(C)
    if not v.valid:
        for x in v.violations:
            rep.checks.append(Check(f"{x.location}: {x.message}", x.residual, 0.0, False))
        return None, doc
    return C, doc


def _torsion(job: JobSpec, rep: Report):
    from .det_line import cohomology_basis
    from .graded_complex import admissible_windows, signature_operator
    from .zeta_eta import rho_element, torsion_report

    C, _ = _validated_complex(job, rep)
    if C is None:
        return
    tr = torsion_report(C, lam=job.lam, theta=job.theta, eta_trivial=job.eta_trivial, rank_e=job.rank_e)
    rep.payload.update(tr.as_dict())
    rep.checks.append(Check("log-determinant identity (mod 2 pi i)", tr.identity_residual, job.tol))
    if tr.ray_singer is not None:
        rep.checks.append(Check("Ray-Singer norm equals 1", abs(tr.ray_singer - 1.0), job.tol))
    h = cohomology_basis(C)
    others = [w for w in admissible_windows(signature_operator(C), count=3) if abs(w - tr.lam) > 1e-9]
    if others:
        alt = rho_element(C, others[-1], tr.theta, h).coefficient
        ref = tr.rho.coefficient
        rel = abs(alt - ref) / max(abs(ref), 1e-300)
        rep.payload["second_window"] = others[-1]
        rep.checks.append(Check("window independence", rel, max(job.tol, 1e-9)))


def _identity(job: JobSpec, rep: Report):
    from .zeta_eta import default_window, window_decomposition, logdet_identity_check

    C, doc = _validated_complex(job, rep)
    if C is None:
        return
    lam = default_window(C) if job.lam is None else job.lam
    ident = logdet_identity_check(C, job.theta, lam)
    rep.payload["identity"] = {k: ident[k] for k in ("lhs", "rhs", "theta", "residual", "xi", "eta")}
    rep.checks.append(Check("log-determinant identity (mod 2 pi i)", ident["residual"], job.tol))
    boundary = spectrum_from_doc(doc["boundary_spectrum"]) if "boundary_spectrum" in doc else None
    dec = window_decomposition(C, lam, job.theta, boundary=boundary)
    rep.payload["decomposition"] = {k: v for k, v in dec.items()}
    rep.checks.append(Check("torsion decomposition", dec["residual"], job.tol))


def _cylinder(job: JobSpec, rep: Report):
    from .cylinder_heat import cylinder_trace, mellin_zeta0, pairing_defect, samples_to_csv, zeta0_plus_k

    doc = _need_input(job)
    model = spectrum_from_doc(doc)
    degrees = [int(doc["degree"])] if "degree" in doc else list(range(model.m + 1))
    rows = []
    worst = 0.0
    for q in degrees:
        z_minus = zeta0_plus_k(q, model, "minus")
        z_plus = zeta0_plus_k(q, model, "plus")
        o_minus = mellin_zeta0(q, model, "minus")
        o_plus = mellin_zeta0(q, model, "plus")
        res = max(abs(o_minus - z_minus), abs(o_plus - z_plus))
        worst = max(worst, res)
        rows.append({"degree": q, "zeta0": z_minus, "zeta0_plus_side": z_plus, "mellin": o_minus,
                     "mellin_plus_side": o_plus, "mellin_residual": res, "negation_residual": abs(z_minus + z_plus)})
        rep.checks.append(Check(f"degree {q}: closed form vs Mellin limit", res, 1e-6))
        rep.checks.append(Check(f"degree {q}: plus side is the negation", abs(z_minus + z_plus), 0.0))
    rep.payload["degrees"] = rows
    if len(rows) == 1:
        rep.payload["zeta0"] = rows[0]["zeta0"]
        rep.payload["mellin_residual"] = rows[0]["mellin_residual"]
    rep.payload["pairing"] = pairing_defect(model)
    if job.csv:
        ts = np.geomspace(1e-4, 1.0, 41)
        q = degrees[0]
        samples = [(float(t), cylinder_trace(q, float(t), model)) for t in ts]
        with open(job.csv, "w", encoding="utf-8", newline="") as fh:
            samples_to_csv(samples, fh)
        rep.payload["csv"] = {"path": job.csv, "degree": q, "rows": len(samples)}


def _wellposed(job: JobSpec, rep: Report):
    from .symbols import wellposedness_sweep

    doc = load_document(job.input) if job.input else {}
    count = int(doc.get("count", 100))
    shapes = tuple(tuple(int(x) for x in s) for s in doc.get("shapes", [[2, 1], [2, 2], [4, 1]]))
    rows = wellposedness_sweep(np.random.default_rng(job.seed), count, shapes)
    failures = sum(1 for r in rows if not r["well_posed"])
    rep.payload.update({"samples": len(rows), "failures": failures, "shapes": [list(s) for s in shapes], "count": count})
    for k, n in shapes:
        for which in ("minus", "plus"):
            bad = sum(1 for r in rows if r["base_dim"] == k and r["n"] == n and r["which"] == which and not r["well_posed"])
            rep.checks.append(Check(f"{which} projection, base {k}, rank {n}", bad, 0))


def _cohomology(job: JobSpec, rep: Report):
    from .twisted_cochain import cohomology_report, middle_dim_check

    spec = twisted_from_doc(_need_input(job))
    cr = cohomology_report(spec)
    rep.payload.update(cr.as_dict())
    rep.checks.append(Check("Euler characteristic", 0 if cr.euler_ok else 1, 0))
    rep.checks.append(Check("long exact sequence", max((abs(d) for d in cr.les_defects), default=0), 0, cr.les_ok))
    mid = cr.middle_degree
    dim_y = cr.boundary[mid] if 0 <= mid < len(cr.boundary) else 0
    rep.checks.append(Check("middle boundary cohomology is twice rank j*", abs(dim_y - 2 * cr.rank_jstar), 0, middle_dim_check(cr)))


_HANDLERS: dict[str, Callable[[JobSpec, Report], None]] = {
    "validate": _validate,
    "torsion": _torsion,
    "identity": _identity,
    "cylinder": _cylinder,
    "wellposed": _wellposed,
    "cohomology": _cohomology,
}


def run(job: JobSpec) -> tuple[Report, int]:
    """Execute a job; never raises for bad input or numerical trouble."""
    from .cylinder_heat import QuadratureError
    from .graded_complex import ComplexError
    from .linalg_core import LinalgError

    rep = Report(job)
    try:
        _HANDLERS[job.command](job, rep)
    except SchemaError as exc:
        rep.error = f"parse: {exc}"
        return rep, EXIT_PARSE
    except (QuadratureError, np.linalg.LinAlgError, NumericalFailure) as exc:
        rep.error = f"numerical: {exc}"
        return rep, EXIT_NUMERIC
    except (ComplexError, LinalgError) as exc:
        rep.error = f"invariant: {exc}"
        return rep, EXIT_FAILED
    return rep, EXIT_OK if rep.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torsionlab", description="Refined torsion workbench for finite models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="JSON input document")
    p.add_argument("--theta", type=float, help="cut angle in (-pi/2, 0)")
    p.add_argument("--lambda", dest="lam", type=float, help="spectral window radius")
    p.add_argument("--eta-trivial", type=float, default=0.0, help="eta invariant of the trivial-line operator")
    p.add_argument("--rank-e", type=int, default=1, help="rank of the flat bundle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8, help="tolerance for identity residuals")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--csv", help="cylinder: also write trace samples (t,value) to this file")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        job = JobSpec(args.command, args.input, args.theta, args.lam, args.eta_trivial, args.rank_e, args.seed, args.tol, args.out, args.csv)
    except SchemaError as exc:
        print(f"torsionlab: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep, code = run(job)
    text = rep.to_json()
    if job.out:
        with open(job.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rep.error:
        print(f"torsionlab: {rep.error}", file=sys.stderr)
    else:
        for c in rep.checks:
            if not c.passed:
                print(f"torsionlab: FAILED {c.name} (residual {c.residual:.3g}, tolerance {c.tolerance:.3g})", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
