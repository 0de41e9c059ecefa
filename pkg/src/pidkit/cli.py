"""Command-line front end.

    pidkit compute --method {delta,broja,lambda,ipid} --input F [--out F2]
    pidkit blackwell --input F
    pidkit risk-audit --input F --losses N --seed S [--verbose]
    pidkit sweep --input F --grid A:B:logsteps=N --csv F2

Exit codes: 0 success, 1 invalid input, 2 non-convergence, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone
from typing import List, Optional, Union

import numpy as np

from . import __version__
from .atoms import PidAtoms, validate
from .blackwell import lambda_matrices, lecam_deficiency, psd_min_eig, sufficiency_discrete
from .broja import symmetry_check, tilde_pid
from .config import SolverConfig
from .delta import delta_pid
from .ipid import BoundViolation, ipid
from .lagrangian import check_grid, lambda_pid, lambda_sweep, log_grid
from .prob import Channel, DiscreteTriple, GaussianTriple, InvalidArgument, SingularModelError
from .risk import risk_gap_audit

EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def as_dict(self) -> dict:
        d = {"error": "invalid_input", "message": str(self)}
        if self.field is not None:
            d["field"] = self.field
        if self.line is not None:
            d["line"] = self.line
        return d


# ---------------------------------------------------------------------------
# input


def _sizes(doc: dict, key: str) -> tuple:
    block = doc.get(key)
    if not isinstance(block, dict):
        raise InputError(f"'{key}' must be an object with keys m, x, y", key)
    out = []
    for k in "mxy":
        v = block.get(k)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise InputError(f"'{key}.{k}' must be a positive integer, got {v!r}", f"{key}.{k}")
        out.append(v)
    return tuple(out)


def _numbers(doc: dict, key: str, n: int) -> np.ndarray:
    arr = doc.get(key)
    if not isinstance(arr, list):
        raise InputError(f"'{key}' must be a flat array of numbers", key)
    if len(arr) != n:
        raise InputError(f"'{key}' has {len(arr)} entries, expected {n}", key)
    for i, v in enumerate(arr):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise InputError(f"'{key}[{i}]' is not a number: {v!r}", f"{key}[{i}]")
    return np.array(arr, dtype=float)


def parse_document(doc) -> Union[DiscreteTriple, GaussianTriple]:
    if not isinstance(doc, dict):
        raise InputError("top level must be a JSON object")
    kind = doc.get("kind")
    try:
        if kind == "discrete":
            m, x, y = _sizes(doc, "alphabet_sizes")
            pmf = _numbers(doc, "pmf", m * x * y)
            try:
                return DiscreteTriple(pmf.reshape(m, x, y))
            except InvalidArgument as e:
                raise InputError(str(e), "pmf") from None
        if kind == "gaussian":
            dims = _sizes(doc, "dims")
            n = sum(dims)
            cov = _numbers(doc, "cov", n * n)
            try:
                return GaussianTriple(dims, cov.reshape(n, n))
            except InvalidArgument as e:
                raise InputError(str(e), "cov") from None
    except InputError:
        raise
    raise InputError(f"'kind' must be 'discrete' or 'gaussian', got {kind!r}", "kind")


def parse_input(path: str) -> Union[DiscreteTriple, GaussianTriple]:
    """Read an input document; raises :class:`InputError` with field or line detail."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e.msg}", line=e.lineno) from None
    return parse_document(doc)


def document_for(dist: Union[DiscreteTriple, GaussianTriple]) -> dict:
    if isinstance(dist, GaussianTriple):
        m, x, y = dist.dims
        return {"kind": "gaussian", "dims": {"m": m, "x": x, "y": y}, "cov": dist.cov.ravel().tolist()}
    m, x, y = dist.sizes
    return {"kind": "discrete", "alphabet_sizes": {"m": m, "x": x, "y": y}, "pmf": dist.pmf.ravel().tolist()}


# ---------------------------------------------------------------------------
# output


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Channel):
        return {"kernel": jsonable(obj.kernel), "degenerate": list(obj.degenerate)}
    if hasattr(obj, "__dataclass_fields__"):
        return {k: jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if hasattr(obj, "nats"):
        return float(obj.bits)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def _emit(doc: dict, out: Optional[str]):
    text = dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header(command: str, cfg: SolverConfig) -> dict:
    return {
        "tool": "pidkit",
        "version": __version__,
        "command": command,
        "units": "bits",
        "config": cfg.as_dict(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def atoms_document(atoms: PidAtoms, dist, cfg: SolverConfig, command: str = "compute") -> dict:
    diag = {k: v for k, v in atoms.diagnostics.items() if k != "extractors"}
    doc = _header(command, cfg)
    doc.update({
        "method": atoms.method,
        "atoms": atoms.as_dict(),
        "atoms_display": dict(zip(("ui_x", "ui_y", "ri", "si"), atoms.display_bits())),
        "diagnostics": diag,
        "validation": validate(atoms, dist),
    })
    return doc


# ---------------------------------------------------------------------------
# commands


def _config(args) -> SolverConfig:
    kw = {}
    for name in ("tol", "restarts", "seed", "t_cap", "t_rank", "threads"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "lam", None) is not None:
        kw["lam"] = args.lam
    try:
        return SolverConfig(**kw)
    except ValueError as e:
        raise InputError(str(e)) from None


def _require_discrete(dist, method):
    if not isinstance(dist, DiscreteTriple):
        raise InputError(f"method '{method}' needs a discrete model", "kind")


def cmd_compute(args) -> int:
    dist = parse_input(args.input)
    cfg = _config(args)
    method = args.method
    if method == "delta":
        _require_discrete(dist, method)
        atoms, _ = delta_pid(dist, cfg)
    elif method == "broja":
        _require_discrete(dist, method)
        atoms = tilde_pid(dist, cfg)
        sym = symmetry_check(dist, cfg)
        atoms.diagnostics.update(symmetry=sym)
    elif method == "lambda":
        _require_discrete(dist, method)
        if args.lam is None:
            raise InputError("method 'lambda' needs --lambda", "lambda")
        atoms, _ = lambda_pid(dist, args.lam, cfg)
    else:
        atoms, _ = ipid(dist, cfg)
    _emit(atoms_document(atoms, dist, cfg), args.out)
    return EXIT_OK if atoms.diagnostics.get("converged", True) else EXIT_NONCONV


def cmd_blackwell(args) -> int:
    dist = parse_input(args.input)
    cfg = _config(args)
    doc = _header("blackwell", cfg)
    if isinstance(dist, DiscreteTriple):
        px, py = dist.channel("X", "M"), dist.channel("Y", "M")
        xy = sufficiency_discrete(px, py)
        yx = sufficiency_discrete(py, px)
        doc.update({
            "kind": "discrete",
            "x_sufficient_for_y": {"sufficient": xy.sufficient, "residual": xy.residual, "witness": xy.witness},
            "y_sufficient_for_x": {"sufficient": yx.sufficient, "residual": yx.residual, "witness": yx.witness},
            "lecam": {"y_emulating_x": lecam_deficiency(px, py), "x_emulating_y": lecam_deficiency(py, px)},
        })
    else:
        lam = lambda_matrices(dist)
        e_yx = psd_min_eig(lam.lambda_y - lam.lambda_x)
        e_xy = psd_min_eig(lam.lambda_x - lam.lambda_y)
        doc.update({
            "kind": "gaussian",
            "lambda_x": lam.lambda_x,
            "lambda_y": lam.lambda_y,
            "y_sufficient_for_x": {"sufficient": e_yx >= -1e-8, "min_eig": e_yx},
            "x_sufficient_for_y": {"sufficient": e_xy >= -1e-8, "min_eig": e_xy},
        })
    _emit(doc, args.out)
    return EXIT_OK


def cmd_risk_audit(args) -> int:
    dist = parse_input(args.input)
    _require_discrete(dist, "risk-audit")
    cfg = _config(args)
    rep = risk_gap_audit(dist, cfg, n_losses=args.losses, seed=cfg.seed)
    doc = _header("risk-audit", cfg)
    doc.update(rep.as_dict(verbose=args.verbose))
    _emit(doc, args.out)
    if not rep.ok():
        sys.stderr.write(json.dumps(jsonable({"error": "bound_violation", "offending": rep.offending})) + "\n")
        return EXIT_INTERNAL
    return EXIT_OK


def parse_grid(text: str) -> List[float]:
    """``A:B:logsteps=N`` (log-spaced, inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3 or not parts[2].startswith("logsteps="):
                raise InputError(f"grid must look like A:B:logsteps=N, got {text!r}", "grid")
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2][len("logsteps="):])
            if lo <= 0 or hi <= 0 or n < 1:
                raise InputError("log grid needs positive endpoints and N >= 1", "grid")
            if n > 1 and hi <= lo:
                raise InputError("grid must be strictly increasing", "grid")
            grid = log_grid(lo, hi, n) if n > 1 else [lo]
        else:
            grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}", "grid") from None
    try:
        return check_grid(grid)
    except InvalidArgument as e:
        raise InputError(str(e), "grid") from None


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    dist = parse_input(args.input)
    _require_discrete(dist, "sweep")
    cfg = _config(args)
    fh = open(args.csv, "w", newline="", encoding="utf-8") if args.csv else sys.stdout
    status = EXIT_OK
    try:
        w = csv.writer(fh)
        w.writerow(["lambda", "total_bits", "kl_bits", "cmi_bits", "converged"])
        fh.flush()
        results = lambda_sweep(dist, args.direction, grid, cfg, warm_start=not args.no_warm_start)
        for r in results:
            w.writerow([repr(r.lam), repr(r.total.bits), repr(r.kl_part.bits), repr(r.cmi_part.bits),
                        str(r.converged).lower()])
            fh.flush()
            if not r.converged:
                status = EXIT_NONCONV
    finally:
        if fh is not sys.stdout:
            fh.close()
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pidkit", description="Bivariate information decompositions.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver=True):
        sp.add_argument("--input", required=True, help="JSON model document")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--threads", type=int, help="solver threads (default: PIDKIT_THREADS or all cores)")
        if solver:
            sp.add_argument("--tol", type=float, help="objective tolerance in bits (default 1e-9)")
            sp.add_argument("--restarts", type=int, help="random restarts (default 16)")
            sp.add_argument("--seed", type=int, help="random seed (default 42)")

    c = sub.add_parser("compute", help="compute PID atoms")
    common(c)
    c.add_argument("--method", required=True, choices=["delta", "broja", "lambda", "ipid"])
    c.add_argument("--lambda", dest="lam", type=float, help="multiplier for --method lambda")
    c.add_argument("--t-cap", dest="t_cap", type=int, help="largest extractor alphabet (default kM+1)")
    c.add_argument("--t-rank", dest="t_rank", type=int, help="extractor rank for Gaussian models (default dM)")
    c.set_defaults(func=cmd_compute)

    b = sub.add_parser("blackwell", help="sufficiency in both directions and Le Cam deficiencies")
    common(b, solver=False)
    b.set_defaults(func=cmd_blackwell)

    r = sub.add_parser("risk-audit", help="audit the deficiency risk bound on sampled losses")
    common(r)
    r.add_argument("--losses", type=int, default=20)
    r.add_argument("--verbose", action="store_true", help="include per-loss rows")
    r.set_defaults(func=cmd_risk_audit)

    s = sub.add_parser("sweep", help="Lagrangian family over a grid of multipliers (CSV)")
    common(s)
    s.add_argument("--method", default="lambda", choices=["lambda"])
    s.add_argument("--grid", required=True, help="A:B:logsteps=N or comma-separated values")
    s.add_argument("--csv", help="CSV output path (default stdout)")
    s.add_argument("--direction", default="X", choices=["X", "Y"])
    s.add_argument("--no-warm-start", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return p


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as e:
        sys.stderr.write(json.dumps(e.as_dict()) + "\n")
        return EXIT_INPUT
    except (InvalidArgument, SingularModelError) as e:
        sys.stderr.write(json.dumps({"error": "invalid_input", "message": str(e)}) + "\n")
        return EXIT_INPUT
    except BoundViolation as e:
        sys.stderr.write(json.dumps(jsonable({"error": "internal", "message": str(e),
                                              "diagnostics": e.diagnostics})) + "\n")
        return EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001 - the exit code contract covers everything else
        sys.stderr.write(json.dumps({"error": "internal", "message": f"{type(e).__name__}: {e}"}) + "\n")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_command())
