"""Command-line front end.

    weakctx weakvalue --scenario aav100.json
    weakctx check --scenario zw2.json --sigma 10
    weakctx scan --scenario zw2.json --sigma-grid 0.5,1,2,5,10,100
    weakctx bound --scenario zw2.json --sigma 10 --bins 200

Reports go to stdout as JSON (CSV for ``scan`` and ``sample --format csv``).
Exit status is 0 on success, 1 for bad input and 2 when a numerical
routine (quadrature or LP) fails.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import contextuality, montecarlo, pointer
from .errors import NumericalError, ValidationError
from .hilbert import Operator, State, max_norm, validate_projector
from .quadrature import DEFAULT_TOL
from .weakvalues import detect_anomaly, projector_weak_values, weak_value


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- scenario files -----------------------------------------------------------


def _complex(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(u, (int, float)) for u in v):
        return complex(v[0], v[1])
    raise ValidationError(f"expected a number or [re, im] pair, got {v!r}")


def _vector(v, name: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ValidationError(f"'{name}' must be a non-empty list")
    return np.array([_complex(u) for u in v], dtype=complex)


def _matrix(m, name: str) -> np.ndarray:
    if not isinstance(m, list) or not m or not all(isinstance(r, list) for r in m):
        raise ValidationError(f"'{name}' must be a list of rows")
    rows = [[_complex(u) for u in r] for r in m]
    if any(len(r) != len(rows) for r in rows):
        raise ValidationError(f"'{name}' must be square")
    return np.array(rows, dtype=complex)


def _projector(spec, dim: int) -> np.ndarray:
    if isinstance(spec, list) and spec and all(isinstance(k, int) and not isinstance(k, bool) for k in spec):
        if any(k < 0 or k >= dim for k in spec):
            raise ValidationError(f"basis index out of range for dimension {dim}")
        diag = np.zeros(dim)
        diag[list(spec)] = 1.0
        return np.diag(diag).astype(complex)
    return _matrix(spec, "pi")


def parse_scenario(data: dict) -> dict:
    """Validated pieces of a scenario file: psi, phi, pi, sigma and observable (each optional but psi/phi)."""
    if not isinstance(data, dict):
        raise ValidationError("scenario file must hold a JSON object")
    for key in ("psi", "phi"):
        if key not in data:
            raise ValidationError(f"scenario is missing '{key}'")
    psi = State(_vector(data["psi"], "psi"))
    phi = State(_vector(data["phi"], "phi"))
    dim = int(data.get("dimension", psi.dim))
    if psi.dim != dim or phi.dim != dim:
        raise ValidationError(f"states must have the declared dimension {dim}")
    out: dict[str, Any] = {"psi": psi, "phi": phi, "pi": None, "sigma": None, "observable": None}
    if data.get("pi") is not None:
        pi = _projector(data["pi"], dim)
        if pi.shape != (dim, dim) or not validate_projector(pi):
            raise ValidationError("'pi' is not a projector")
        out["pi"] = Operator(pi, hermitian=True)
    if data.get("observable") is not None:
        a = _matrix(data["observable"], "observable")
        if a.shape != (dim, dim):
            raise ValidationError("'observable' has the wrong dimension")
        out["observable"] = Operator(a)
    if data.get("sigma") is not None:
        sigma = data["sigma"]
        if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or not sigma > 0 or not math.isfinite(sigma):
            raise ValidationError(f"sigma must be a positive number, got {sigma!r}")
        out["sigma"] = float(sigma)
    return out


def load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario file is not valid JSON: {exc}") from exc
    return parse_scenario(data)


def _scenario(parts: dict, sigma: Optional[float]) -> pointer.Scenario:
    if parts["pi"] is None:
        raise ValidationError("this command needs a projector 'pi' in the scenario")
    sigma = sigma if sigma is not None else parts["sigma"]
    if sigma is None:
        raise ValidationError("no sigma given (use --sigma or a 'sigma' field)")
    return pointer.Scenario(parts["psi"], parts["phi"], parts["pi"], sigma)


# -- serialization -------------------------------------------------------------


def cjson(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def mjson(m) -> list:
    return [[cjson(v) for v in row] for row in np.asarray(m)]


def _finite(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _finite(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump(obj) -> str:
    return json.dumps(_finite(obj), indent=2, allow_nan=False) + "\n"


# -- subcommands ---------------------------------------------------------------


def cmd_weakvalue(args, parts) -> str:
    a = parts["observable"] if parts["observable"] is not None else parts["pi"]
    if a is None:
        raise ValidationError("weakvalue needs an 'observable' or 'pi' in the scenario")
    psi, phi = parts["psi"], parts["phi"]
    aw = weak_value(a, psi, phi)
    report = detect_anomaly(a, psi, phi)
    out = {
        "p_phi": abs(complex(np.vdot(phi.amplitudes, psi.amplitudes))) ** 2,
        "weak_value": cjson(aw.value),
        "projector_weak_values": [
            {"eigenvalue": e, "weak_value": cjson(w.value)} for e, w in projector_weak_values(a, psi, phi)
        ],
        "anomaly": {
            "eigen_range": list(report.eigen_range),
            "re_weak_value": report.re_weak_value,
            "anomalous": report.anomalous,
            "witness_eigenvalue": report.witness_eigenvalue,
            "witness_weak_value": None if report.witness_weak_value is None else cjson(report.witness_weak_value.value),
            "witness_projector": None if report.witness_projector is None else mjson(report.witness_projector.matrix),
        },
    }
    if parts["pi"] is not None:
        out["pi_weak_value"] = cjson(weak_value(parts["pi"], psi, phi).value)
    return dump(out)


def cmd_measure(args, parts) -> str:
    s = _scenario(parts, args.sigma)
    pm = pointer.disturbance(s)
    return dump(
        {
            "sigma": s.sigma,
            "delta": pm.delta,
            "p_d": pm.p_d,
            "norm_sq": pm.norm_sq,
            "E_d": mjson(pm.E_d.matrix),
            "E_d_is_projector": validate_projector(pm.E_d),
            "S": mjson(pm.S.matrix),
            "decomposition_residual": pm.decomposition_residual(),
            "postselection_rate": pm.postselection_rate(),
        }
    )


def cmd_check(args, parts) -> str:
    s = _scenario(parts, args.sigma)
    rep = contextuality.check_conditions(s, args.tol if args.tol is not None else contextuality.RESIDUAL_TOL)
    return dump({"sigma": s.sigma, **rep.as_dict()})


def _grid(text: Optional[str]) -> list[float]:
    if not text:
        raise ValidationError("scan needs --sigma-grid")
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --sigma-grid: {exc}") from exc


def cmd_scan(args, parts) -> str:
    if parts["pi"] is None:
        raise ValidationError("scan needs a projector 'pi' in the scenario")
    tol = args.tol if args.tol is not None else contextuality.RESIDUAL_TOL
    res = contextuality.sigma_scan(parts["psi"], parts["phi"], parts["pi"], _grid(args.sigma_grid), tol)
    if (args.format or "csv") == "csv":
        return res.to_csv()
    return dump(
        {
            "sigma_threshold": res.sigma_threshold,
            "rows": [{"sigma": sg, **r.as_dict()} for sg, r in res.rows],
        }
    )


def cmd_bound(args, parts) -> str:
    s = _scenario(parts, args.sigma)
    problem = contextuality.build_nc_problem(s, args.bins, args.tail_sigmas)
    res = contextuality.nc_bound_lp(problem)
    return dump(
        {
            "sigma": s.sigma,
            "bins": problem.n_bins,
            "p_phi": problem.p_phi,
            "p_d": problem.p_d,
            "lp_optimum": res.lp_optimum,
            "analytic_bound": res.analytic_bound,
            "p_minus": res.p_minus,
            "gap_to_quantum": res.gap_to_quantum,
            "sound": res.sound,
            "pivots": res.iterations,
            "bin_edges": problem.edges.tolist(),
            "certificate": res.certificate(),
        }
    )


def cmd_sample(args, parts) -> str:
    s = _scenario(parts, args.sigma)
    batch = montecarlo.sample(s, args.n, args.seed, args.shards)
    if args.format == "csv":
        return batch.to_csv()
    pm = pointer.p_minus(s)
    return dump(
        {
            "sigma": s.sigma,
            "n": batch.n,
            "seed": args.seed,
            "p_minus": montecarlo.estimate_p_minus(batch, s).as_dict(),
            "p_minus_conditional": montecarlo.estimate_p_minus_conditional(batch).as_dict(),
            "pass_rate": montecarlo.estimate_pass_rate(batch).as_dict(),
            "closed_form": {
                "p_minus": pm.exact,
                "p_minus_conditional": pm.conditional,
                "pass_rate": pointer.disturbance(s).postselection_rate(),
            },
        }
    )


def cmd_xcheck(args, parts) -> str:
    s = _scenario(parts, args.sigma)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    tail = args.tail_sigmas
    pm = pointer.p_minus(s)
    dist = pointer.disturbance(s)
    quad_pm = pointer.p_minus_quadrature(s, tol=tol, tail_sigmas=tail)
    quad_rate = pointer.p_minus_quadrature(s, upper=math.inf, tol=tol, tail_sigmas=tail) * s.p_phi
    quad_S = pointer.disturbance_quadrature(s, tol=tol, tail_sigmas=tail)
    quad_E = pointer.povm_total_quadrature(s, tol=tol, tail_sigmas=tail)
    ints, qints = pointer.abc(s.sigma), pointer.abc_quadrature(s.sigma, tol=tol, tail_sigmas=tail)
    return dump(
        {
            "sigma": s.sigma,
            "tol": tol,
            "tail_sigmas": tail,
            "p_minus": {"closed_form": pm.exact, "quadrature": quad_pm, "residual": abs(pm.exact - quad_pm)},
            "postselection_rate": {
                "closed_form": dist.postselection_rate(),
                "quadrature": quad_rate,
                "residual": abs(dist.postselection_rate() - quad_rate),
            },
            "S_residual": max_norm(quad_S - dist.S.matrix),
            "povm_completeness_residual": max_norm(quad_E - np.eye(s.dim)),
            "abc_residuals": {
                "A": abs(ints.A - qints.A),
                "B": abs(ints.B - qints.B),
                "C": abs(ints.C - qints.C),
            },
        }
    )


COMMANDS = {
    "weakvalue": (cmd_weakvalue, "weak value, projector weak values and anomaly report"),
    "measure": (cmd_measure, "overlap Delta, disturbance p_d, E_d and S"),
    "check": (cmd_check, "margins of the four contextuality conditions"),
    "scan": (cmd_scan, "condition report over a sigma grid (CSV)"),
    "bound": (cmd_bound, "LP noncontextual bound on p_minus with certificate"),
    "sample": (cmd_sample, "Monte Carlo estimates (JSON) or raw events (CSV)"),
    "xcheck": (cmd_xcheck, "closed forms against quadrature"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakctx", description="Anomalous weak values and their noncontextual bound.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--sigma", type=float, help="pointer width (overrides the file)")
        p.add_argument("--sigma-grid", help="comma-separated increasing sigmas (scan)")
        p.add_argument("--bins", type=int, default=200, help="pointer bins for the LP (bound)")
        p.add_argument("--n", type=int, default=100_000, help="Monte Carlo sample size")
        p.add_argument("--seed", type=int, default=montecarlo.DEFAULT_SEED, help="64-bit RNG seed")
        p.add_argument("--shards", type=int, default=1, help="Monte Carlo shards")
        p.add_argument(
            "--tol",
            type=float,
            help="residual tolerance for check/scan (default 1e-10); quadrature tolerance for xcheck (default 1e-12)",
        )
        p.add_argument("--tail-sigmas", type=float, default=pointer.TAIL_SIGMAS, help="truncation in units of sigma")
        p.add_argument("--format", choices=("json", "csv"), help="output format (scan, sample)")
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.n < 1 or args.bins < 1 or args.shards < 1:
            raise ValidationError("--n, --bins and --shards must be positive")
        if not args.tail_sigmas > 0:
            raise ValidationError("--tail-sigmas must be positive")
        parts = load_scenario(args.scenario)
        text = COMMANDS[args.command][0](args, parts)
    except ValidationError as exc:
        print(f"weakctx: invalid input: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"weakctx: numerical failure: {exc}", file=sys.stderr)
        return 2
    out.write(text)
    return 0


def main() -> None:
    sys.exit(run())
