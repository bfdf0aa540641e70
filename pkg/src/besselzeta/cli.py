"""Command-line front end.

    besselzeta det --nu 0.5 --l 1 --q 1
    besselzeta poles --rb --nu 1 --a 1 --kmax 1
    besselzeta invariants --nu 1 --q 2 --l 1 --route all
    besselzeta verify --output csv

Every report carries the keys inputs, route, value, err_estimate and checks.
Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, field

from . import heat_trace as ht
from . import mellin_oracle, regprod, specfun, zeta_core
from .errors import BesselZetaError, DomainError
from .heat_trace import OperatorParams

__all__ = ["RunConfig", "Check", "Report", "run", "verify_suite", "to_json", "main"]

COMMANDS = ("zeros", "heat", "zeta", "poles", "invariants", "det", "verify")
ROUTES = ("closed_form", "comparison", "mellin", "all")

DEFAULT_ACCURACY = 1e-8
MELLIN_ACCURACY = 1e-4

GRID_NU = (0.0, 0.25, 0.5, 1.0, 2.5)
GRID_Q = (0.1, 1.0, 5.0)
GRID_L = (0.5, 1.0, math.pi)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: OperatorParams
    mode: str = "operator"
    route: str = "closed_form"
    accuracy: float | None = None
    output: str = "json"
    kmax: int = 5
    count: int = 10
    s: float | None = None
    t: float | None = None


@dataclass
class Check:
    name: str
    value: float
    reference: float
    tol: float
    inputs: dict = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return abs(self.value - self.reference)

    @property
    def passed(self) -> bool:
        return self.delta <= self.tol

    def as_dict(self) -> dict:
        return {"name": self.name, "inputs": self.inputs, "value": self.value,
                "reference": self.reference, "delta": self.delta, "tol": self.tol,
                "pass": self.passed}


@dataclass
class Report:
    inputs: dict
    route: str
    value: object
    err_estimate: float | None = None
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"inputs": self.inputs, "route": self.route, "value": self.value,
                "err_estimate": self.err_estimate,
                "checks": [c.as_dict() for c in self.checks]}


# ---------------------------------------------------------------------------
# Serialization


def _json_value(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_value(str(k), indent, 0)}: {_json_value(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _json_value(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _json_value(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent: int = 2) -> str:
    """JSON text with every float written as %.17g (non-finite floats become null)."""
    return _json_value(obj, indent, 0) + "\n"


def _fmt(v) -> str:
    return format(v, ".17g") if isinstance(v, float) else str(v)


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if report.checks:
        writer.writerow(["check", "inputs", "value", "reference", "delta", "tol", "pass"])
        for c in report.checks:
            inputs = ";".join(f"{k}={_fmt(v)}" for k, v in c.inputs.items())
            writer.writerow([c.name, inputs, _fmt(c.value), _fmt(c.reference),
                             _fmt(c.delta), _fmt(c.tol), c.passed])
    else:
        writer.writerow(["key", "value"])
        rows = report.value.items() if isinstance(report.value, dict) else [("value", report.value)]
        for k, v in rows:
            if isinstance(v, (list, tuple)):
                v = ";".join(_fmt(x) for x in v)
            writer.writerow([k, _fmt(v)])
    return buf.getvalue()


def to_text(report: Report) -> str:
    lines = [f"route: {report.route}",
             "inputs: " + ", ".join(f"{k}={_fmt(v)}" for k, v in report.inputs.items())]
    if isinstance(report.value, dict):
        lines += [f"{k}: {_fmt(v)}" for k, v in report.value.items()]
    elif report.value is not None:
        lines.append(f"value: {_fmt(report.value)}")
    if report.err_estimate is not None:
        lines.append(f"err_estimate: {_fmt(report.err_estimate)}")
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        where = " ".join(f"{k}={_fmt(v)}" for k, v in c.inputs.items())
        lines.append(f"{status} {c.name} {where} delta={c.delta:.3e} tol={c.tol:.1e}")
    if report.checks:
        lines.append(f"{sum(c.passed for c in report.checks)}/{len(report.checks)} checks passed")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Commands


def _inputs(cfg: RunConfig) -> dict:
    p = cfg.params
    if cfg.mode == "rb":
        return {"mode": "rb", "nu": p.nu, "a": p.q}
    return {"mode": "operator", **p.as_dict()}


def _accuracy(cfg: RunConfig, route: str) -> float:
    if cfg.accuracy is not None:
        return cfg.accuracy
    return MELLIN_ACCURACY if route == "mellin" else DEFAULT_ACCURACY


def _invariants(route: str, params: OperatorParams) -> zeta_core.ZetaInvariants:
    if route == "closed_form":
        return zeta_core.closed_form_invariants(params)
    if route == "comparison":
        return regprod.invariants_via_comparison(params)
    return mellin_oracle.mellin_invariants(params)


def _cmd_zeros(cfg: RunConfig) -> Report:
    table = specfun.zero_table(cfg.params.nu, cfg.count)
    zeros = [float(x) for x in table[:cfg.count]]
    return Report({"nu": cfg.params.nu, "count": cfg.count}, "zero_table", zeros,
                  float(table.tol))


def _cmd_heat(cfg: RunConfig) -> Report:
    p = cfg.params
    if cfg.t is not None:
        return Report({**_inputs(cfg), "t": cfg.t}, "spectral_sum",
                      ht.heat_trace(cfg.t, p), 1e-15)
    closed = ht.closed_form_expansion(p, order=2)
    if cfg.route == "closed_form":
        return Report(_inputs(cfg), "closed_form", {"coeffs": list(closed.coeffs)}, None)
    fit = ht.fit_heat_coefficients(p)
    value = {"coeffs": list(fit.coeffs[:3]), "stderr": list(fit.stderr[:3])}
    checks = []
    if cfg.route == "all":
        for i in range(3):
            tol = max(3.0 * fit.stderr[i], 1e-14)
            checks.append(Check(f"a{i}_fit_vs_closed_form", fit[i], closed[i], tol))
    return Report(_inputs(cfg), "fit" if cfg.route != "all" else "all", value,
                  max(fit.stderr[:3]), checks)


def _cmd_zeta(cfg: RunConfig) -> Report:
    if cfg.s is None:
        raise DomainError("zeta needs --s")
    p = cfg.params
    s = 0.5 * cfg.s if cfg.mode == "rb" else cfg.s
    inputs = {**_inputs(cfg), "s": cfg.s}
    checks = []
    route = cfg.route
    if route in ("closed_form", "comparison"):
        route = "direct" if s > 0.5 else "mellin"
    direct = None
    if route in ("direct", "all") and s > 0.5:
        direct, derr = zeta_core.zeta_direct(s, p, accuracy=min(_accuracy(cfg, "direct"), 1e-10),
                                             full_output=True)
    if route == "direct":
        return Report(inputs, "direct", direct, derr)
    value, err = mellin_oracle.continue_zeta(s, mellin_oracle.default_split(p), full_output=True)
    if direct is not None:
        checks.append(Check("mellin_vs_direct", value, direct, 1e-7, {"s": cfg.s}))
    return Report(inputs, "mellin" if route != "all" else "all", value, err, checks)


def _cmd_poles(cfg: RunConfig) -> Report:
    p = cfg.params
    scale = 2.0 if cfg.mode == "rb" else 1.0
    poles = [zeta_core.pole_data(k, p) for k in range(cfg.kmax + 1)]
    value = {
        "locations": [scale * x.location for x in poles],
        "residues": [scale * x.residue for x in poles],
        "caveats": [x.caveat for x in poles],
    }
    checks = []
    if cfg.route in ("mellin", "all"):
        split = mellin_oracle.default_split(p)
        for x in poles[:2]:
            r = mellin_oracle.numeric_residue(x.location, split)
            tol = 1e-5 if x.k == 0 else 1e-4
            checks.append(Check("numeric_residue", scale * r, scale * x.residue, tol,
                                {"location": scale * x.location}))
    return Report({**_inputs(cfg), "kmax": cfg.kmax}, "closed_form", value, None, checks)


def _cmd_invariants(cfg: RunConfig) -> Report:
    p = cfg.params
    scale = 0.5 if cfg.mode == "rb" else 1.0
    routes = ("closed_form", "comparison", "mellin") if cfg.route == "all" else (cfg.route,)
    results = {r: _invariants(r, p) for r in routes}
    first = results[routes[0]]
    value = {"value0": first.value0, "deriv0": scale * first.deriv0}
    checks = []
    if cfg.route == "all":
        ref = results["closed_form"]
        for r in ("comparison", "mellin"):
            checks.append(Check(f"deriv0_{r}_vs_closed_form", scale * results[r].deriv0,
                                scale * ref.deriv0, _accuracy(cfg, r)))
        checks.append(Check("value0_mellin_vs_closed_form", results["mellin"].value0,
                            ref.value0, 1e-6))
    return Report(_inputs(cfg), cfg.route, value, scale * first.err, checks)


def _cmd_det(cfg: RunConfig) -> Report:
    p = cfg.params
    if cfg.route not in ("closed_form", "all"):
        inv = _invariants(cfg.route, p)
        log_det = -inv.deriv0
        err = inv.err
    else:
        log_det = -zeta_core.zeta_deriv_at_zero(p)
        err = zeta_core.closed_form_invariants(p).err
    if cfg.mode == "rb":
        log_det *= 0.5
    try:
        det = math.exp(log_det)
    except OverflowError:
        det = None
    value = {"det": det, "log_det": log_det, "overflow": det is None}
    return Report(_inputs(cfg), cfg.route if cfg.route != "all" else "closed_form",
                  value, err)


def verify_suite(nus=GRID_NU, qs=GRID_Q, ls=GRID_L) -> Report:
    """Cross-route agreement over the default grid."""
    checks = []
    for nu, q, l in itertools.product(nus, qs, ls):
        p = OperatorParams(nu, q, l)
        where = p.as_dict()
        closed = zeta_core.closed_form_invariants(p)
        comp = regprod.invariants_via_comparison(p)
        mell = mellin_oracle.mellin_invariants(p)
        checks.append(Check("deriv0_comparison_vs_closed_form", comp.deriv0, closed.deriv0,
                            DEFAULT_ACCURACY, where))
        checks.append(Check("deriv0_mellin_vs_closed_form", mell.deriv0, closed.deriv0,
                            MELLIN_ACCURACY, where))
        checks.append(Check("value0_mellin_vs_closed_form", mell.value0, closed.value0,
                            1e-6, where))
        c_acc = regprod.product_constant(regprod.comparison_data(p), check=False)
        c_closed = regprod.closed_form_product_constant(p)
        checks.append(Check("logC_accelerated_vs_closed_form", math.log(c_acc),
                            math.log(c_closed), 1e-9, where))
    for q, l in itertools.product(qs, ls):
        p = OperatorParams(0.5, q, l)
        checks.append(Check("det_half_integer", zeta_core.regularized_determinant(p).log,
                            math.log(2.0 * math.sinh(q * l) / q), 1e-10, p.as_dict()))
    grid = {"nu": list(nus), "q": list(qs), "l": list(ls)}
    n_pass = sum(c.passed for c in checks)
    return Report(grid, "all", {"passed": n_pass, "total": len(checks)}, None, checks)


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute `cfg`; returns (exit status, serialized report)."""
    if cfg.command == "verify":
        report = verify_suite()
    else:
        report = globals()[f"_cmd_{cfg.command}"](cfg)
    if cfg.output == "csv":
        text = to_csv(report)
    elif cfg.output == "text":
        text = to_text(report)
    else:
        text = to_json(report.as_dict())
    return (0 if report.ok else 1), text


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="besselzeta",
        description="Zeta invariants and determinants of the Bessel operator L_nu + q^2 on (0, l].",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--nu", type=float, default=0.5)
    parser.add_argument("--q", type=float, default=1.0)
    parser.add_argument("--l", type=float, default=1.0)
    parser.add_argument("--a", type=float, default=None,
                        help="shift a of the Bessel zeta function (implies --rb)")
    parser.add_argument("--rb", action="store_true",
                        help="Bessel zeta mode: l = pi, q = a, s-scale doubled")
    parser.add_argument("--route", choices=ROUTES, default="closed_form")
    parser.add_argument("--kmax", type=int, default=5)
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--accuracy", type=float, default=None)
    parser.add_argument("--s", type=float, default=None)
    parser.add_argument("--t", type=float, default=None)
    parser.add_argument("--output", choices=("json", "csv", "text"), default="json")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    rb = args.rb or args.a is not None
    if rb:
        params = OperatorParams.rb(args.nu, args.a if args.a is not None else args.q)
    else:
        params = OperatorParams(args.nu, args.q, args.l)
    if args.kmax < 0 or args.count < 1:
        raise DomainError("--kmax must be >= 0 and --count >= 1")
    if args.accuracy is not None and not args.accuracy > 0:
        raise DomainError("--accuracy must be positive")
    return RunConfig(args.command, params, "rb" if rb else "operator", args.route,
                     args.accuracy, args.output, args.kmax, args.count, args.s, args.t)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        status, text = run(cfg)
    except DomainError as exc:
        print(f"besselzeta: error: {exc}", file=sys.stderr)
        return 2
    except BesselZetaError as exc:
        print(f"besselzeta: numeric failure: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
