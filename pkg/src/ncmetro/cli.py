"""Command-line entry point.

Subcommands: classify, generator, qfi, fig2a, fig2b, fig3, example1,
switch, dvbound.  Operator pairs come either from a named preset
(``--preset shear-k1|xp-constant|squeeze-inf``) or from inline expressions
(``--g "X^2" --h "P"``).  Angles accept rational multiples of pi
(``pi/4``, ``-3*pi/2``) as well as plain floats; N accepts a single value,
a range ``1..12``, or a comma list ``8,16,32``.

A ``--config FILE`` may hold ``key = value`` lines mirroring the long flags;
explicit command-line flags win.  Exit codes: 0 success, 2 validation
error, 3 numerical-trust failure.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import experiments, io
from .errors import NcmetroError, NumericalTrustError, ValidationError
from .expressions import format_polynomial, parse_operator
from .fock import (
    DEFAULT_DIM,
    DEFAULT_STEP,
    dv_bound_check,
    dv_saturating_probe,
    qfi_numeric,
)
from .gaussian import gaussian_probe, qfi_linear_generator
from .generators import local_generator, qcrb_rmse
from .ladder import DEFAULT_ADJOINT_CAP, classify_pair
from .protocols import PRESETS, EncodingProtocol, ProbeDescriptor, build_preset

_PI_RE = re.compile(r"^(-?)(?:(\d+(?:\.\d*)?)\*?)?pi(?:/(\d+(?:\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Parse 'pi/4', '-3*pi/2', or a plain float literal."""
    text = text.strip()
    match = _PI_RE.match(text)
    if match:
        sign = -1.0 if match.group(1) else 1.0
        num = float(match.group(2)) if match.group(2) else 1.0
        den = float(match.group(3)) if match.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"cannot parse angle {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    """Parse '5', '1..12', or '8,16,32' into a sorted list of ints."""
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        if "," in text:
            return sorted(int(part) for part in text.split(","))
        return [int(text)]
    except ValueError:
        raise ValidationError(f"cannot parse integer list {text!r}") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise ValidationError(f"cannot parse complex number {text!r}") from None


@dataclass
class RunConfig:
    """Validated invocation: the command plus every parameter it needs."""

    command: str
    preset: str | None = None
    g_expr: str | None = None
    h_expr: str | None = None
    n_list: list[int] = field(default_factory=list)
    lambda_bar: float = 0.1
    aux: float = 0.1
    theta: float = math.pi / 4.0
    alpha: complex = 0j
    xi_bar: float = 0.1
    dim: int = DEFAULT_DIM
    step: float = DEFAULT_STEP
    nu: int = 1
    cap: int = DEFAULT_ADJOINT_CAP
    x: float = 0.1
    p: float = 0.2
    k_list: list[int] = field(default_factory=list)
    k_max: int = 0
    mode: str = "control"
    engine: str = "gaussian"
    pair: str = "qubit"
    out: str | None = None
    format: str = "csv"


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # raise instead of sys.exit so callers can map codes
        raise ValidationError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="ncmetro", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value file mirroring the flags")
        p.add_argument("--out", help="output file path")
        p.add_argument("--format", choices=io.FORMATS, default="csv")

    def add_pair(p):
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--g", dest="g_expr", help="inline H_g expression")
        p.add_argument("--h", dest="h_expr", help="inline H_lambda expression")

    def add_protocol(p):
        add_pair(p)
        p.add_argument("--N", dest="n_spec", default="1", help="N value/range/list")
        p.add_argument("--lam", type=float, default=0.1, help="target parameter")
        p.add_argument(
            "--aux",
            "--s",
            "--xi",
            "--gbar",
            dest="aux",
            type=float,
            default=0.1,
            help="auxiliary strength (s_bar / xi_bar / g_bar per preset)",
        )
        p.add_argument("--alpha", default="0", help="coherent probe amplitude")

    p = sub.add_parser("classify", help="classify an operator pair")
    add_pair(p)
    p.add_argument("--cap", type=int, default=DEFAULT_ADJOINT_CAP)
    add_common(p)

    p = sub.add_parser("generator", help="local generator of a protocol")
    add_protocol(p)
    add_common(p)

    p = sub.add_parser("qfi", help="QFI of a protocol")
    add_protocol(p)
    p.add_argument("--engine", choices=("gaussian", "fock", "both"), default="gaussian")
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--nu", type=int, default=1, help="QCRB repetition count")
    add_common(p)

    p = sub.add_parser("fig2a", help="leading-coefficient scan over N")
    p.add_argument("--K", dest="k_spec", default="1,4,6")
    p.add_argument("--N", dest="n_spec", default="1..20")
    add_common(p)

    p = sub.add_parser("fig2b", help="leading-coefficient scan over K")
    p.add_argument("--N", dest="n_spec", default="6,10,16,20")
    p.add_argument("--kmax", type=int, default=0, help="default: max(N) + 4")
    add_common(p)

    p = sub.add_parser("fig3", help="squeeze-protocol QFI/CFI scan")
    p.add_argument("--N", dest="n_spec", default="1..12")
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--alpha", default="0.3")
    p.add_argument("--theta", default="pi/4")
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    add_common(p)

    p = sub.add_parser("example1", help="finite-index scaling fit")
    p.add_argument("--N", dest="n_spec", default="8..64")
    p.add_argument("--s", dest="aux", type=float, default=0.2)
    p.add_argument("--preset", choices=sorted(PRESETS), default="shear-k1")
    p.add_argument("--lam", type=float, default=0.1)
    add_common(p)

    p = sub.add_parser("switch", help="two-order superposition scaling fit")
    p.add_argument("--N", dest="n_spec", default="1..6")
    p.add_argument("--x", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--mode", choices=("control", "joint", "definite"), default="control")
    add_common(p)

    p = sub.add_parser("dvbound", help="finite-dimension QFI bound scan")
    p.add_argument("--N", dest="n_spec", default="1..50")
    p.add_argument("--gbar", dest="aux", type=float, default=0.1)
    p.add_argument("--pair", choices=("qubit", "qutrit"), default="qubit")
    add_common(p)

    return parser


def _load_config_file(path: str) -> list[str]:
    """Turn 'key = value' lines into flag tokens inserted before user flags."""
    tokens: list[str] = []
    try:
        text = open(path).read()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValidationError(f"{path}:{lineno}: empty key")
        tokens.extend([f"--{key}", value])
    return tokens


def parse_config(argv: list[str]) -> RunConfig:
    """Parse and validate an argv vector into a RunConfig.

    Unknown flags or config keys are rejected; every numeric parameter is
    checked against the preconditions of the targeted operation before any
    computation starts.
    """
    if not argv:
        raise ValidationError("missing command")
    if "--config" in argv:
        idx = argv.index("--config")
        if idx + 1 >= len(argv):
            raise ValidationError("--config requires a file path")
        file_tokens = _load_config_file(argv[idx + 1])
        rest = argv[1 : idx] + argv[idx + 2 :]
        argv = [argv[0]] + file_tokens + rest
    namespace = _build_parser().parse_args(argv)
    return _namespace_to_config(namespace)


def _namespace_to_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    cfg.out = getattr(ns, "out", None)
    cfg.format = getattr(ns, "format", "csv")
    cfg.preset = getattr(ns, "preset", None)
    cfg.g_expr = getattr(ns, "g_expr", None)
    cfg.h_expr = getattr(ns, "h_expr", None)
    if hasattr(ns, "n_spec"):
        cfg.n_list = parse_int_list(ns.n_spec)
    if hasattr(ns, "k_spec"):
        cfg.k_list = parse_int_list(ns.k_spec)
    for attr, target in (
        ("lam", "lambda_bar"),
        ("aux", "aux"),
        ("xi", "xi_bar"),
        ("dim", "dim"),
        ("step", "step"),
        ("nu", "nu"),
        ("cap", "cap"),
        ("x", "x"),
        ("p", "p"),
        ("kmax", "k_max"),
        ("mode", "mode"),
        ("engine", "engine"),
        ("pair", "pair"),
    ):
        if hasattr(ns, attr):
            setattr(cfg, target, getattr(ns, attr))
    if hasattr(ns, "theta"):
        cfg.theta = parse_angle(ns.theta)
    if hasattr(ns, "alpha"):
        cfg.alpha = parse_complex(ns.alpha)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    needs_pair = cfg.command in ("classify", "generator", "qfi")
    if needs_pair:
        if cfg.preset is None and not (cfg.g_expr and cfg.h_expr):
            raise ValidationError(
                f"{cfg.command} needs --preset or both --g and --h expressions"
            )
        if cfg.preset is not None and (cfg.g_expr or cfg.h_expr):
            raise ValidationError("give either --preset or inline expressions, not both")
        for expr in (cfg.g_expr, cfg.h_expr):
            if expr is not None:
                parse_operator(expr)  # malformed expressions fail at parse time
    if cfg.command == "classify" and cfg.cap < 2:
        raise ValidationError("--cap must be at least 2")
    if cfg.command in ("generator", "qfi") and len(cfg.n_list) != 1:
        raise ValidationError(f"{cfg.command} takes a single --N value")
    if cfg.command in ("generator", "qfi", "fig3", "example1", "switch", "dvbound"):
        if cfg.n_list and min(cfg.n_list) < 1:
            raise ValidationError("--N values must be at least 1")
    if cfg.command in ("qfi", "fig3", "switch"):
        if cfg.dim < 8:
            raise ValidationError("--dim must be at least 8")
        if cfg.step <= 0:
            raise ValidationError("--step must be positive")
    if cfg.command == "qfi" and cfg.nu < 1:
        raise ValidationError("--nu must be at least 1")
    if cfg.command == "fig3" and cfg.xi_bar <= 0:
        raise ValidationError("--xi must be positive")
    if cfg.command == "fig2a":
        if any(k < 0 for k in cfg.k_list):
            raise ValidationError("--K values must be non-negative")
        if any(n < 1 for n in cfg.n_list):
            raise ValidationError("--N values must be at least 1")
    if cfg.command == "fig2b":
        if any(n < 1 for n in cfg.n_list):
            raise ValidationError("--N values must be at least 1")
        if cfg.k_max == 0:
            cfg.k_max = max(cfg.n_list) + 4
        if cfg.k_max < max(cfg.n_list) + 1:
            raise ValidationError("--kmax must be at least max(N) + 1")
    if cfg.command == "switch" and cfg.x * cfg.p == 0 and cfg.mode == "control":
        raise ValidationError("control-mode switch scan needs x and p nonzero")


def _protocol_from_config(cfg: RunConfig, n: int) -> EncodingProtocol:
    probe = (
        ProbeDescriptor.coherent(cfg.alpha)
        if cfg.alpha != 0
        else ProbeDescriptor.vacuum()
    )
    if cfg.preset:
        return build_preset(cfg.preset, n, cfg.lambda_bar, cfg.aux, probe)
    return EncodingProtocol(
        h_lambda=parse_operator(cfg.h_expr),
        h_g=parse_operator(cfg.g_expr),
        n_applications=n,
        lambda_bar=cfg.lambda_bar,
        g_bar=cfg.aux,
        probe=probe,
    )


def _config_echo(cfg: RunConfig) -> dict:
    echo = {}
    for key, value in vars(cfg).items():
        if isinstance(value, complex):
            echo[key] = [value.real, value.imag]
        else:
            echo[key] = value
    return echo


def _fit_dict(fit: experiments.FitResult) -> dict:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
    }


def _run_classify(cfg: RunConfig) -> io.ResultEnvelope:
    if cfg.preset:
        protocol = build_preset(cfg.preset, 1, 0.0, 0.0)
        g, h = protocol.h_g, protocol.h_lambda
    else:
        g = parse_operator(cfg.g_expr)
        h = parse_operator(cfg.h_expr)
    report = classify_pair(g, h, cap=cfg.cap)
    constant = report.constant_value
    value = {
        "kind": report.kind,
        "nilpotency_index": report.nilpotency_index,
        "constant_value": None if constant is None else [constant.real, constant.imag],
        "closure_p": report.closure_p,
        "cap": report.cap,
        "tower": [format_polynomial(entry) for entry in report.tower],
    }
    columns = ["kind", "nilpotency_index", "constant_re", "constant_im", "closure_p"]
    rows = [[
        report.kind,
        report.nilpotency_index,
        None if constant is None else constant.real,
        None if constant is None else constant.imag,
        report.closure_p,
    ]]
    return io.ResultEnvelope(
        command="classify", config=_config_echo(cfg), columns=columns, rows=rows,
        value=value,
    )


def _run_generator(cfg: RunConfig) -> io.ResultEnvelope:
    protocol = _protocol_from_config(cfg, cfg.n_list[0])
    result = local_generator(protocol)
    columns = ["m", "n", "coeff_re", "coeff_im"]
    rows = [
        [m, n, c.real, c.imag]
        for (m, n), c in sorted(result.generator.terms.items())
    ]
    value = {
        "generator": format_polynomial(result.generator),
        "truncation_used": result.truncation_used,
        "closed_form": result.closed_form,
    }
    return io.ResultEnvelope(
        command="generator", config=_config_echo(cfg), columns=columns, rows=rows,
        value=value,
    )


def _run_qfi(cfg: RunConfig) -> io.ResultEnvelope:
    protocol = _protocol_from_config(cfg, cfg.n_list[0])
    columns = ["engine", "qfi", "rmse_qcrb", "trusted"]
    rows = []
    trust = {}
    if cfg.engine in ("gaussian", "both"):
        gen = local_generator(protocol).generator
        qfi = qfi_linear_generator(gaussian_probe(protocol.probe), gen)
        rows.append(["gaussian", qfi, qcrb_rmse(qfi, cfg.nu), 1])
    if cfg.engine in ("fock", "both"):
        estimate = qfi_numeric(protocol, dim=cfg.dim, step=cfg.step)
        rows.append([
            "fock", estimate.value, qcrb_rmse(estimate.value, cfg.nu),
            1 if estimate.trusted else 0,
        ])
        trust = {
            "rel_disagreement": estimate.rel_disagreement,
            "dim_used": estimate.dim,
        }
    value = {row[0]: row[1] for row in rows}
    return io.ResultEnvelope(
        command="qfi", config=_config_echo(cfg), columns=columns, rows=rows,
        value=value, trust=trust,
    )


def _run_dvbound(cfg: RunConfig) -> io.ResultEnvelope:
    if cfg.pair == "qubit":
        h_g = np.array([[0, 1], [1, 0]], dtype=complex) / 2.0
        h_l = np.array([[1, 0], [0, -1]], dtype=complex) / 2.0
    else:
        sq2 = math.sqrt(2.0)
        h_g = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / sq2
        h_l = np.diag([1.0, 0.0, -1.0]).astype(complex)
    probe = dv_saturating_probe(h_l)
    report = dv_bound_check(h_g, h_l, cfg.n_list, cfg.aux, probe)
    columns = ["N", "qfi", "bound", "ratio"]
    rows = [[row.n, row.qfi, row.bound, row.ratio] for row in report.rows]
    value = {
        "spectral_spread": report.spectral_spread,
        "max_ratio": report.max_ratio,
    }
    return io.ResultEnvelope(
        command="dvbound", config=_config_echo(cfg), columns=columns, rows=rows,
        value=value,
    )


def run_config(cfg: RunConfig) -> io.ResultEnvelope:
    """Execute a validated RunConfig and assemble the result envelope."""
    start = time.perf_counter()
    if cfg.command == "classify":
        envelope = _run_classify(cfg)
    elif cfg.command == "generator":
        envelope = _run_generator(cfg)
    elif cfg.command == "qfi":
        envelope = _run_qfi(cfg)
    elif cfg.command == "fig2a":
        scan = experiments.fig2a_scan(cfg.k_list, cfg.n_list)
        envelope = io.envelope_from_scan("fig2a", _config_echo(cfg), scan)
    elif cfg.command == "fig2b":
        scan = experiments.fig2b_scan(cfg.n_list, cfg.k_max)
        envelope = io.envelope_from_scan(
            "fig2b", _config_echo(cfg), scan, value={"k_peak": scan.metadata["k_peak"]}
        )
    elif cfg.command == "fig3":
        scan = experiments.fig3_scan(
            cfg.n_list, xi_bar=cfg.xi_bar, alpha=cfg.alpha, theta=cfg.theta,
            x_bar=cfg.lambda_bar, dim=cfg.dim, step=cfg.step,
        )
        trust = {
            str(row["N"]): row["fock_trusted"] for row in scan.rows
        }
        envelope = io.envelope_from_scan("fig3", _config_echo(cfg), scan, trust=trust)
    elif cfg.command == "example1":
        scan = experiments.example1_scan(
            cfg.n_list, cfg.aux, preset=cfg.preset or "shear-k1", x_bar=cfg.lambda_bar
        )
        fit = experiments.fit_loglog_slope([(r["N"], r["qfi"]) for r in scan.rows])
        envelope = io.envelope_from_scan(
            "example1", _config_echo(cfg), scan, value={"fit": _fit_dict(fit)}
        )
    elif cfg.command == "switch":
        scan = experiments.switch_scan(
            cfg.n_list, cfg.x, cfg.p, dim=cfg.dim, step=cfg.step, mode=cfg.mode
        )
        fit = experiments.fit_loglog_slope([(r["N"], r["qfi"]) for r in scan.rows])
        envelope = io.envelope_from_scan(
            "switch", _config_echo(cfg), scan, value={"fit": _fit_dict(fit)}
        )
    elif cfg.command == "dvbound":
        envelope = _run_dvbound(cfg)
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown command {cfg.command!r}")
    envelope.duration_s = time.perf_counter() - start
    envelope.timestamp = datetime.now(timezone.utc).isoformat()
    return envelope


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = parse_config(argv)
        envelope = run_config(cfg)
        text = io.emit(envelope, cfg.format, cfg.out)
    except NumericalTrustError as exc:
        print(f"numerical-trust failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, NcmetroError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
