"""Command-line front end for the certified Bessel positivity toolkit.

Exit codes: 0 certified success, 1 certified negative verdict,
2 usage or domain error, 3 indeterminate at the precision cap.
All results go to stdout; diagnostics go to stderr.  The precision cap
can also be set through the TPBESSEL_PRECISION_CAP environment
variable (a --precision-cap flag wins over it).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .scalar import (
    DEFAULT_PRECISION,
    DEFAULT_PRECISION_CAP,
    CertificationError,
    CertifiedReal,
    DomainError,
    PrecisionCapWarning,
    from_exact,
    precision,
)
from . import bessel as _bessel
from . import kernels as _kernels
from . import heatflow as _heatflow
from .positivity import (
    GrassmannVerdict,
    TPVerdict,
    check_grassmann_point,
    check_tp,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INDETERMINATE = 3


@dataclass(frozen=True)
class RunConfig:
    precision_start: int
    precision_cap: int
    target_rad: Fraction
    output_format: str
    seed: int

    def __post_init__(self):
        if self.precision_start > self.precision_cap:
            raise DomainError("starting precision exceeds the cap")
        if self.target_rad <= 0:
            raise DomainError("target radius must be positive")


def _env_cap() -> int:
    raw = os.environ.get("TPBESSEL_PRECISION_CAP")
    if raw is None:
        return DEFAULT_PRECISION_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"TPBESSEL_PRECISION_CAP={raw!r} is not an integer")
    if cap < 2:
        raise DomainError("TPBESSEL_PRECISION_CAP must be at least 2")
    return cap


def _parse_number(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse {what} value {text!r}")


def _parse_numbers(text: str, what: str) -> Tuple[Fraction, ...]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise DomainError(f"empty {what} list")
    return tuple(_parse_number(t.strip(), what) for t in items)


def _parse_ints(text: str, what: str) -> Tuple[int, ...]:
    try:
        return tuple(int(t.strip()) for t in text.split(",") if t.strip())
    except ValueError:
        raise DomainError(f"cannot parse {what} list {text!r}")


def _parse_range(text: str, what: str) -> Tuple[int, int]:
    for sep in ("..", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            try:
                return int(lo), int(hi)
            except ValueError:
                break
    raise DomainError(f"cannot parse {what} range {text!r}; use LO..HI")


def _parse_order(text: str):
    try:
        return int(text)
    except ValueError:
        return _parse_number(text, "order")


def _emit(obj, cfg: RunConfig, human_lines) -> None:
    if cfg.output_format == "human":
        for line in human_lines:
            print(line)
    else:
        print(json.dumps(obj, indent=2))


def _ball_str(b: CertifiedReal) -> str:
    return repr(b)


def _tp_exit(verdict: TPVerdict, strict: bool) -> int:
    if verdict is TPVerdict.STRICTLY_POSITIVE:
        return EXIT_OK
    if verdict is TPVerdict.NONNEGATIVE:
        return EXIT_OK if not strict else EXIT_NEGATIVE
    if verdict is TPVerdict.VIOLATED:
        return EXIT_NEGATIVE
    return EXIT_INDETERMINATE


def _grassmann_exit(verdict: GrassmannVerdict) -> int:
    if verdict in (GrassmannVerdict.STRICTLY_TOTALLY_POSITIVE,
                   GrassmannVerdict.NORMALIZABLE_POSITIVE):
        return EXIT_OK
    if verdict is GrassmannVerdict.NOT_POSITIVE:
        return EXIT_NEGATIVE
    return EXIT_INDETERMINATE


def _matrix_from_flags(ns, cfg: RunConfig):
    """Build the KernelMatrix a subcommand addresses.  Either --matrix
    (JSON: a serialized matrix object or a plain array of rows) or the
    family flags."""
    tr = cfg.target_rad
    if getattr(ns, "matrix", None):
        text = ns.matrix.strip()
        if text.startswith("["):
            rows = json.loads(text)
            return _kernels.KernelMatrix.literal(rows)
        return _kernels.KernelMatrix.from_json(json.loads(text))
    family = getattr(ns, "family", "bessel")
    if family == "bessel":
        if ns.k is None or ns.x is None:
            raise DomainError("bessel family needs --k and --x")
        return _kernels.build_bessel_matrix(_parse_ints(ns.k, "k"),
                                            _parse_numbers(ns.x, "x"), tr)
    if family == "toeplitz":
        if ns.x is None or ns.rows is None or ns.cols is None:
            raise DomainError("toeplitz family needs --x, --rows, --cols")
        return _kernels.build_toeplitz_bessel(
            _parse_number(ns.x, "x"),
            _parse_range(ns.rows, "rows"), _parse_range(ns.cols, "cols"), tr)
    if family == "karlin":
        if ns.alpha is None or ns.lam is None or ns.xs is None or ns.ys is None:
            raise DomainError("karlin family needs --alpha, --lambda, --xs, --ys")
        return _kernels.build_karlin_matrix(
            _parse_number(ns.alpha, "alpha"), _parse_number(ns.lam, "lambda"),
            _parse_numbers(ns.xs, "xs"), _parse_numbers(ns.ys, "ys"), tr)
    if family == "vandermonde":
        if ns.xs is None or ns.ys is None:
            raise DomainError("vandermonde family needs --xs and --ys")
        return _kernels.build_vandermonde(_parse_numbers(ns.xs, "xs"),
                                          _parse_numbers(ns.ys, "ys"), tr)
    raise DomainError(f"unknown kernel family {family!r}")


def _draw_instance(rng, l: int, m: int, k_cap: int, x_cap: float):
    """One random (k, x) pair: k strictly increasing in [0, k_cap],
    x strictly increasing in (0, x_cap]."""
    k = tuple(int(v) for v in np.sort(rng.choice(k_cap + 1, size=m, replace=False)))
    while True:
        raw = np.sort(rng.uniform(1e-3, x_cap, size=l))
        if len(set(raw.tolist())) == l:
            break
    x = tuple(float(v) for v in raw)
    return k, x


def cmd_bessel(ns, cfg: RunConfig) -> int:
    order = _parse_order(ns.order)
    # the input ball must be tighter than the requested output radius,
    # else no escalation can reach the target
    tr = cfg.target_rad
    need = 64
    while Fraction(1, 2 ** need) > tr and need < cfg.precision_cap:
        need *= 2
    x = from_exact(_parse_number(ns.x, "x"),
                   bits=min(max(cfg.precision_start, need + 32), cfg.precision_cap))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PrecisionCapWarning)
        if ns.quadrature is not None:
            if not isinstance(order, int):
                raise DomainError("quadrature evaluation needs an integer order")
            ball = _bessel.bessel_i_quadrature(order, x, ns.quadrature)
        else:
            ball = _bessel.bessel_i(order, x, target_rad=cfg.target_rad,
                                    start_bits=cfg.precision_start,
                                    cap_bits=cfg.precision_cap)
    capped = any(issubclass(w.category, PrecisionCapWarning) for w in caught)
    met = ball.rad <= cfg.target_rad or ns.quadrature is not None
    payload = {"order": str(order), "x": ns.x, "value": ball.to_json(),
               "target_rad_met": bool(met)}
    _emit(payload, cfg, [f"I_{order}({ns.x}) = {_ball_str(ball)}"])
    return EXIT_INDETERMINATE if (capped and not met) else EXIT_OK


def cmd_check_tp(ns, cfg: RunConfig) -> int:
    if ns.sample is not None:
        return _sample_check_tp(ns, cfg)
    with precision(cfg.precision_start):
        M = _matrix_from_flags(ns, cfg)
        order = ns.order if ns.order is not None else min(M.nrows, M.ncols)
        cert = check_tp(M, order, strict=ns.strict, cap_bits=cfg.precision_cap)
    payload = {"family": M.family, "shape": [M.nrows, M.ncols],
               "strict": ns.strict, "certificate": cert.to_json()}
    lines = [f"verdict: {cert.verdict.value}",
             f"minors checked: {cert.minors_checked} (orders 1..{cert.order_checked})"]
    if cert.min_margin is not None:
        lines.append(f"min margin: {_ball_str(cert.min_margin)}")
    if cert.witness is not None:
        sel, det = cert.witness
        lines.append(f"witness minor rows={list(sel.rows)} cols={list(sel.cols)} "
                     f"det={_ball_str(det)}")
    _emit(payload, cfg, lines)
    return _tp_exit(cert.verdict, ns.strict)


def _sample_check_tp(ns, cfg: RunConfig) -> int:
    if getattr(ns, "family", "bessel") != "bessel":
        raise DomainError("--sample is only wired to the bessel family")
    rng = np.random.default_rng(cfg.seed)
    counts = {v.value: 0 for v in TPVerdict}
    worst = EXIT_OK
    with precision(cfg.precision_start):
        for _ in range(ns.sample):
            m = int(rng.integers(1, 6))
            k, x = _draw_instance(rng, m, m, 15, 10.0)
            M = _kernels.build_bessel_matrix(k, x, cfg.target_rad)
            cert = check_tp(M, m, strict=ns.strict, cap_bits=cfg.precision_cap)
            counts[cert.verdict.value] += 1
            worst = max(worst, _tp_exit(cert.verdict, ns.strict))
    payload = {"seed": cfg.seed, "trials": ns.sample, "verdicts": counts}
    _emit(payload, cfg, [f"seed {cfg.seed}, {ns.sample} trials: {counts}"])
    return worst


def _wide_bessel_matrix(ns, cfg: RunConfig):
    """The l x m matrix (I_{k_j}(x_i)) behind a subspace point; demands l < m."""
    k = _parse_ints(ns.k, "k")
    x = _parse_numbers(ns.x, "x")
    if len(x) >= len(k):
        raise DomainError("need strictly fewer arguments than orders (l < m)")
    return _kernels.build_bessel_matrix(k, x, cfg.target_rad)


def cmd_pluecker(ns, cfg: RunConfig) -> int:
    with precision(cfg.precision_start):
        if getattr(ns, "matrix", None):
            M = _matrix_from_flags(ns, cfg)
        else:
            if ns.k is None or ns.x is None:
                raise DomainError("need --matrix or both --k and --x")
            M = _wide_bessel_matrix(ns, cfg)
        report = check_grassmann_point(M, cap_bits=cfg.precision_cap)
    vec = report.pluecker_vector
    payload = {"verdict": report.verdict.value, **vec.to_json()}
    lines = [f"p_{tuple(s)} = {_ball_str(c)}"
             for s, c in zip(vec.column_sets, vec.coordinates)]
    lines.append(f"verdict: {report.verdict.value}")
    _emit(payload, cfg, lines)
    return _grassmann_exit(report.verdict)


def cmd_grassmann(ns, cfg: RunConfig) -> int:
    if ns.sample is not None:
        return _sample_grassmann(ns, cfg)
    with precision(cfg.precision_start):
        if getattr(ns, "matrix", None):
            M = _matrix_from_flags(ns, cfg)
        else:
            if ns.k is None or ns.x is None:
                raise DomainError("need --matrix or both --k and --x")
            M = _wide_bessel_matrix(ns, cfg)
        report = check_grassmann_point(M, cap_bits=cfg.precision_cap)
    payload = report.to_json()
    _emit(payload, cfg, [f"verdict: {report.verdict.value}",
                         f"reason: {report.reason}"])
    return _grassmann_exit(report.verdict)


def _sample_grassmann(ns, cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    counts = {v.value: 0 for v in GrassmannVerdict}
    worst = EXIT_OK
    with precision(cfg.precision_start):
        for _ in range(ns.sample):
            l = int(rng.integers(2, 4))
            m = int(rng.integers(4, 6))
            k, x = _draw_instance(rng, l, m, 15, 10.0)
            M = _kernels.build_bessel_matrix(k, x, cfg.target_rad)
            report = check_grassmann_point(M, cap_bits=cfg.precision_cap)
            counts[report.verdict.value] += 1
            worst = max(worst, _grassmann_exit(report.verdict))
    payload = {"seed": cfg.seed, "trials": ns.sample, "verdicts": counts}
    _emit(payload, cfg, [f"seed {cfg.seed}, {ns.sample} trials: {counts}"])
    return worst


def cmd_heatflow(ns, cfg: RunConfig) -> int:
    window = _heatflow.index_window(ns.m, ns.kmax)
    w = _parse_numbers(ns.w, "w") if getattr(ns, "w", None) else ()
    if ns.heatflow_command == "residual":
        rep = _heatflow.residual_check(_parse_number(ns.x1, "x1"), w, window,
                                       _parse_number(ns.h, "h"),
                                       magnitude_floor=ns.floor)
        lines = [f"interior max relative residual: {rep.max_rel_interior:.3e} "
                 f"at k={rep.argmax_interior}",
                 f"boundary max relative residual: {rep.max_rel_boundary:.3e}",
                 f"components: {rep.interior_included} interior, "
                 f"{rep.boundary_included} boundary, {rep.excluded_below_floor} below floor"]
        _emit(rep.to_json(), cfg, lines)
        return EXIT_OK
    if ns.heatflow_command == "integrate":
        traj = _heatflow.flow_integrate(w, window, _parse_number(ns.X1, "X1"),
                                        step=float(_parse_number(ns.step, "step")),
                                        samples=ns.samples)
        if cfg.output_format == "csv":
            sys.stdout.write(traj.to_csv())
        else:
            payload = traj.to_json()
            payload["endpoint"] = {str(k): v for k, v in traj.final().items()}
            _emit(payload, cfg,
                  [f"steps: {traj.n_steps} of {traj.step:.3e}",
                   f"cone min over trajectory: {traj.cone_min:.3e}",
                   f"window truncation bound at endpoint: {traj.truncation_bound}"])
        return EXIT_OK
    if ns.heatflow_command == "bound":
        try:
            rep = _heatflow.l2_bound(_parse_number(ns.R, "R"), ns.m, window,
                                     grid_points=ns.grid, z_grid_points=ns.zgrid)
        except CertificationError as exc:
            print(json.dumps({"error": str(exc)}) if cfg.output_format != "human"
                  else f"bound violated: {exc}")
            return EXIT_NEGATIVE
        c_r, partial = rep
        _emit(rep.to_json(), cfg,
              [f"C(R) = {c_r:.6g}", f"max grid squared sum = {partial:.6g}",
               "certified: squared sums stay below C(R)"])
        return EXIT_OK
    raise DomainError(f"unknown heatflow subcommand {ns.heatflow_command!r}")


def _add_config_flags(p: argparse.ArgumentParser, top: bool) -> None:
    # on subparsers the defaults are suppressed so a flag given before
    # the subcommand is not clobbered by an unset one after it
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--precision-start", type=int, default=d(DEFAULT_PRECISION),
                   help="working precision in bits (default 64)")
    p.add_argument("--precision-cap", type=int, default=d(None),
                   help="escalation cap in bits (default: TPBESSEL_PRECISION_CAP or 4096)")
    p.add_argument("--target-rad", default=d("1e-20"),
                   help="requested enclosure radius (decimal, default 1e-20)")
    p.add_argument("--format", choices=("human", "json", "csv"),
                   default=d("human"), dest="output_format",
                   help="output format (default human)")
    p.add_argument("--seed", type=int, default=d(0),
                   help="seed for sampling commands (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tpbessel",
        description="Certified Bessel kernels, total positivity, and heat flow.")
    _add_config_flags(p, top=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_config_flags(common, top=False)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bessel", parents=[common], help="evaluate a certified I_order(x)")
    b.add_argument("--j", "--order", dest="order", required=True,
                   help="order: integer, or nonnegative real for the series")
    b.add_argument("--x", required=True, help="argument")
    b.add_argument("--quadrature", type=int, default=None, metavar="NODES",
                   help="use the integral evaluation with this many nodes")
    b.set_defaults(func=cmd_bessel)

    t = sub.add_parser("check-tp", parents=[common], help="certify total positivity of a kernel matrix")
    t.add_argument("family", choices=("bessel", "toeplitz", "karlin", "vandermonde"),
                   nargs="?", default="bessel")
    t.add_argument("--k", help="comma-separated orders (bessel)")
    t.add_argument("--x", help="comma-separated arguments (bessel) or scalar (toeplitz)")
    t.add_argument("--rows", help="row range LO..HI (toeplitz)")
    t.add_argument("--cols", help="column range LO..HI (toeplitz)")
    t.add_argument("--alpha", help="kernel exponent (karlin)")
    t.add_argument("--lambda", dest="lam", help="kernel rate (karlin)")
    t.add_argument("--xs", help="comma-separated row arguments (karlin, vandermonde)")
    t.add_argument("--ys", help="comma-separated column arguments (karlin, vandermonde)")
    t.add_argument("--matrix", help="explicit matrix JSON (array of rows, or serialized)")
    t.add_argument("--order", type=int, default=None,
                   help="largest minor order (default: full)")
    t.add_argument("--strict", action=argparse.BooleanOptionalAction, default=False,
                   help="demand strict positivity (default: nonnegativity suffices)")
    t.add_argument("--sample", type=int, default=None, metavar="N",
                   help="check N seeded random square bessel instances instead")
    t.set_defaults(func=cmd_check_tp)

    pl = sub.add_parser("pluecker", parents=[common], help="maximal minors of a wide matrix")
    pl.add_argument("--k", help="comma-separated orders for the Bessel row map")
    pl.add_argument("--x", help="comma-separated arguments, fewer than orders")
    pl.add_argument("--matrix", help="explicit matrix JSON")
    pl.set_defaults(func=cmd_pluecker)

    g = sub.add_parser("grassmann", parents=[common], help="positivity verdict for a subspace point")
    g.add_argument("--k", help="comma-separated orders for the Bessel row map")
    g.add_argument("--x", help="comma-separated arguments, fewer than orders")
    g.add_argument("--matrix", help="explicit matrix JSON")
    g.add_argument("--sample", type=int, default=None, metavar="N",
                   help="check N seeded random instances instead")
    g.set_defaults(func=cmd_grassmann)

    h = sub.add_parser("heatflow", parents=[common], help="lattice heat-flow checks")
    hs = h.add_subparsers(dest="heatflow_command", required=True)
    hr = hs.add_parser("residual", parents=[common], help="central-difference residual of the flow equation")
    hr.add_argument("--m", type=int, required=True)
    hr.add_argument("--w", default="", help="comma-separated offsets (m-1 values)")
    hr.add_argument("--kmax", type=int, required=True)
    hr.add_argument("--x1", required=True)
    hr.add_argument("--h", default="1e-4", help="difference step (default 1e-4)")
    hr.add_argument("--floor", type=float, default=1e-12,
                    help="relative magnitude floor (default 1e-12)")
    hr.set_defaults(func=cmd_heatflow)
    hi = hs.add_parser("integrate", parents=[common], help="integrate the flow and report the trajectory")
    hi.add_argument("--m", type=int, required=True)
    hi.add_argument("--w", default="", help="comma-separated offsets (m-1 values)")
    hi.add_argument("--kmax", type=int, required=True)
    hi.add_argument("--X1", required=True)
    hi.add_argument("--step", default="1e-3")
    hi.add_argument("--samples", type=int, default=11)
    hi.set_defaults(func=cmd_heatflow)
    hb = hs.add_parser("bound", parents=[common], help="certify the squared-sum bound C(R)")
    hb.add_argument("--m", type=int, required=True)
    hb.add_argument("--R", required=True)
    hb.add_argument("--kmax", type=int, required=True)
    hb.add_argument("--grid", type=int, default=25)
    hb.add_argument("--zgrid", type=int, default=1000)
    hb.set_defaults(func=cmd_heatflow)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        cap = ns.precision_cap if ns.precision_cap is not None else _env_cap()
        cfg = RunConfig(ns.precision_start, cap,
                        _parse_number(ns.target_rad, "target radius"),
                        ns.output_format, ns.seed)
        return ns.func(ns, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
