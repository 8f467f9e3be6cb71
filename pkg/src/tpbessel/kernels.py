"""Constructors for the kernel matrix families, over certified entries.

Every matrix keeps enough provenance (family tag plus parameters and
row/column keys) to recompute any single entry at a higher working
precision.  The positivity routines lean on that: an undecidable minor
triggers recomputation of just the entries it touches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

from .scalar import (
    CertifiedReal,
    DomainError,
    current_precision,
    escalate_precision,
    exp,
    from_exact,
    mul,
    pow_int,
    pow_real,
    precision,
    sqrt,
    zero,
)
from .bessel import bessel_i

DEFAULT_TARGET_RAD = 1e-20


def _as_fraction(v, what: str = "value") -> Fraction:
    try:
        if isinstance(v, str):
            return Fraction(v)
        return Fraction(v)
    except (ValueError, TypeError) as e:
        raise DomainError(f"{what} is not an exact real: {v!r}") from e


def check_index_tuple(k: Sequence[int]) -> Tuple[int, ...]:
    """Validate a strictly increasing tuple of nonnegative integers."""
    kk = tuple(k)
    if len(kk) == 0:
        raise DomainError("empty index tuple")
    for v in kk:
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise DomainError(f"not in K_m: entries must be integers >= 0, got {v!r}")
    if any(a >= b for a, b in zip(kk, kk[1:])):
        raise DomainError(f"not in K_m: indices must be strictly increasing, got {kk}")
    return kk


def check_argument_tuple(x: Sequence, allow_zero_first: bool = False) -> Tuple[Fraction, ...]:
    """Validate a strictly increasing tuple of positive reals.

    A leading zero is tolerated when allow_zero_first is set (the flow's
    initial condition evaluates every determinant at first argument 0).
    """
    xs = tuple(_as_fraction(v, "argument") for v in x)
    if len(xs) == 0:
        raise DomainError("empty argument tuple")
    if (xs[0] < 0) or (xs[0] == 0 and not allow_zero_first):
        raise DomainError(f"not in X_l: arguments must be positive, got {xs[0]}")
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise DomainError("not in X_l: arguments must be strictly increasing")
    return xs


EntryFn = Callable[[object, object], CertifiedReal]


@dataclass(frozen=True)
class KernelMatrix:
    """Immutable grid of certified entries with recomputation provenance."""

    entries: Tuple[Tuple[CertifiedReal, ...], ...]
    family: str
    params: dict = field(compare=False)
    row_keys: Tuple = ()
    col_keys: Tuple = ()
    entry_fn: Optional[EntryFn] = field(default=None, compare=False, repr=False)

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def entry(self, i: int, j: int) -> CertifiedReal:
        return self.entries[i][j]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "KernelMatrix":
        rows = tuple(rows)
        cols = tuple(cols)
        if any(a >= b for a, b in zip(rows, rows[1:])) or any(
            a >= b for a, b in zip(cols, cols[1:])
        ):
            raise DomainError("selector indices must be strictly increasing")
        if rows and not (0 <= rows[0] and rows[-1] < self.nrows):
            raise DomainError("row selector out of range")
        if cols and not (0 <= cols[0] and cols[-1] < self.ncols):
            raise DomainError("column selector out of range")
        return KernelMatrix(
            entries=tuple(tuple(self.entries[i][j] for j in cols) for i in rows),
            family=self.family,
            params=self.params,
            row_keys=tuple(self.row_keys[i] for i in rows),
            col_keys=tuple(self.col_keys[j] for j in cols),
            entry_fn=self.entry_fn,
        )

    def recomputed(self, bits: int) -> "KernelMatrix":
        """Fresh evaluation of every entry at the given working precision."""
        if self.entry_fn is None:
            return self
        with precision(bits):
            new = tuple(
                tuple(self.entry_fn(rk, ck) for ck in self.col_keys)
                for rk in self.row_keys
            )
        return KernelMatrix(new, self.family, self.params, self.row_keys,
                            self.col_keys, self.entry_fn)

    def built_bits(self) -> int:
        return max(
            (e.mid.precision for row in self.entries for e in row),
            default=current_precision(),
        )

    # -- serialization --------------------------------------------------

    def to_json(self, digits: Optional[int] = None) -> dict:
        return {
            "family": self.family,
            "params": {k: _key_out(v) for k, v in self.params.items()},
            "row_keys": [_key_out(k) for k in self.row_keys],
            "col_keys": [_key_out(k) for k in self.col_keys],
            "entries": [[e.to_json(digits) for e in row] for row in self.entries],
        }

    def to_csv(self) -> str:
        lines = [f"# family={self.family}; midpoints only, radii dropped (lossy)"]
        lines.append(",".join(f"k={_key_out(k)}" for k in self.col_keys))
        for row in self.entries:
            lines.append(",".join(str(e.mid) for e in row))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_json(obj: dict) -> "KernelMatrix":
        family = obj["family"]
        params = {k: _key_in(v) for k, v in obj["params"].items()}
        row_keys = tuple(_key_in(v) for v in obj["row_keys"])
        col_keys = tuple(_key_in(v) for v in obj["col_keys"])
        entries = tuple(
            tuple(CertifiedReal.from_json(e) for e in row) for row in obj["entries"]
        )
        entry_fn = _entry_fn_for(family, params)
        return KernelMatrix(entries, family, params, row_keys, col_keys, entry_fn)

    @staticmethod
    def literal(rows: Sequence[Sequence]) -> "KernelMatrix":
        """Matrix of exactly known values (ints, floats, fractions, strings)."""
        vals = [[_as_fraction(v, "entry") for v in row] for row in rows]
        if not vals or not vals[0]:
            raise DomainError("empty matrix")
        if any(len(r) != len(vals[0]) for r in vals):
            raise DomainError("ragged rows")
        params = {"values": [[str(v) for v in row] for row in vals]}
        fn = _entry_fn_for("explicit", params)
        entries = tuple(
            tuple(fn(i, j) for j in range(len(vals[0]))) for i in range(len(vals))
        )
        return KernelMatrix(entries, "explicit", params,
                            tuple(range(len(vals))), tuple(range(len(vals[0]))), fn)


def _key_out(k):
    if isinstance(k, Fraction):
        return str(k)
    if isinstance(k, (list, tuple)):
        return [_key_out(v) for v in k]
    return k


def _key_in(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, list):
        return tuple(_key_in(x) for x in v)
    return v


def _entry_fn_for(family: str, params: dict) -> Optional[EntryFn]:
    if family == "bessel":
        return lambda xk, kk: bessel_i(int(kk), from_exact(xk))
    if family == "toeplitz":
        x = _as_fraction(params["x"])
        return lambda rk, ck: bessel_i(int(ck) - int(rk), from_exact(x))
    if family == "karlin":
        alpha = _as_fraction(params["alpha"])
        lam = _as_fraction(params["lambda"])
        return lambda xk, yk: _kappa_recipe(alpha, lam, _as_fraction(xk) - _as_fraction(yk))
    if family == "vandermonde":
        return lambda xk, yk: _vandermonde_entry(_as_fraction(xk), _as_fraction(yk))
    if family == "explicit":
        values = params["values"]
        return lambda i, j: from_exact(Fraction(values[int(i)][int(j)]))
    return None


def _escalated_grid(row_keys, col_keys, fn: EntryFn, target_rad) -> Tuple[Tuple[CertifiedReal, ...], ...]:
    return tuple(
        tuple(
            escalate_precision(lambda rk=rk, ck=ck: fn(rk, ck), target_rad,
                               start_bits=current_precision())
            for ck in col_keys
        )
        for rk in row_keys
    )


def build_bessel_matrix(k: Sequence[int], x: Sequence, target_rad=DEFAULT_TARGET_RAD,
                        allow_zero_first: bool = False) -> KernelMatrix:
    """Matrix with entry (i, j) enclosing I_{k_j}(x_i).

    Rows follow the arguments x (increasing positive reals), columns the
    orders k (increasing nonnegative integers).  Each entry is escalated
    until its radius is at most target_rad.
    """
    kk = check_index_tuple(k)
    xs = check_argument_tuple(x, allow_zero_first=allow_zero_first)
    fn = _entry_fn_for("bessel", {})
    return KernelMatrix(
        entries=_escalated_grid(xs, kk, fn, target_rad),
        family="bessel",
        params={},
        row_keys=xs,
        col_keys=kk,
        entry_fn=fn,
    )


def _as_index_interval(r) -> Tuple[int, int]:
    if isinstance(r, range):
        if len(r) == 0 or r.step != 1:
            raise DomainError("index interval must be a nonempty unit-step range")
        return (r.start, r.stop - 1)
    lo, hi = r
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise DomainError("empty index interval")
    return (lo, hi)


def build_toeplitz_bessel(x, row_range, col_range,
                          target_rad=DEFAULT_TARGET_RAD) -> KernelMatrix:
    """Window of the constant-diagonal matrix with entry (m, s) = I_{s-m}(x).

    Ranges are inclusive integer intervals, given as (lo, hi) pairs or
    unit-step range objects.  Negative orders reduce by the symmetry
    I_{-j} = I_j.
    """
    xf = _as_fraction(x, "x")
    if xf <= 0:
        raise DomainError("Toeplitz window needs x > 0")
    rlo, rhi = _as_index_interval(row_range)
    clo, chi = _as_index_interval(col_range)
    params = {"x": xf}
    fn = _entry_fn_for("toeplitz", params)
    rows = tuple(range(rlo, rhi + 1))
    cols = tuple(range(clo, chi + 1))
    return KernelMatrix(
        entries=_escalated_grid(rows, cols, fn, target_rad),
        family="toeplitz",
        params=params,
        row_keys=rows,
        col_keys=cols,
        entry_fn=fn,
    )


def _kappa_recipe(alpha: Fraction, lam: Fraction, x: Fraction) -> CertifiedReal:
    """kappa_alpha(x; lam) at the current working precision."""
    if x < 0:
        return zero()
    if x == 0:
        # series limit of (x/lam)^{alpha/2} I_alpha(2 sqrt(x lam)):
        # the x^alpha factors cancel, leaving e^{-lam} for alpha = 0
        # and 0 for alpha > 0
        if alpha == 0:
            return exp(-from_exact(lam))
        return zero()
    xb = from_exact(x)
    lb = from_exact(lam)
    arg = mul(from_exact(2), sqrt(mul(xb, lb)))
    order = int(alpha) if alpha.denominator == 1 else alpha
    bess = bessel_i(order, arg)
    ratio = xb / lb
    half = Fraction(alpha, 2)
    if half.denominator == 1:
        power = pow_int(ratio, int(half))
    elif half.denominator == 2:
        power = mul(pow_int(ratio, int(half - Fraction(1, 2))), sqrt(ratio))
    else:
        power = pow_real(ratio, from_exact(half))
    damp = exp(-(xb + lb))
    return mul(mul(damp, power), bess)


def karlin_kappa(alpha, lam, x, target_rad=None) -> CertifiedReal:
    """Certified kappa_alpha(x; lam): e^{-(x+lam)} (x/lam)^{alpha/2} I_alpha(2 sqrt(x lam))
    for x >= 0 and exactly 0 for x < 0."""
    a = _as_fraction(alpha, "alpha")
    l = _as_fraction(lam, "lambda")
    xf = _as_fraction(x, "x")
    if l <= 0:
        raise DomainError("lambda must be positive")
    if a < 0:
        raise DomainError("alpha must be nonnegative")
    if target_rad is None:
        return _kappa_recipe(a, l, xf)
    return escalate_precision(lambda: _kappa_recipe(a, l, xf), target_rad,
                              start_bits=current_precision())


def build_karlin_matrix(alpha, lam, xs: Sequence, ys: Sequence,
                        target_rad=DEFAULT_TARGET_RAD) -> KernelMatrix:
    """Matrix with entry (i, j) = kappa_alpha(x_i - y_j; lam).

    The difference x_i - y_j is formed exactly, so the piecewise zero
    branch (negative arguments) is decided without rounding doubt.
    """
    a = _as_fraction(alpha, "alpha")
    l = _as_fraction(lam, "lambda")
    if l <= 0:
        raise DomainError("lambda must be positive")
    if a <= 1:
        # the kernel is only totally positive of useful order for
        # exponents above 1; smaller exponents go through karlin_kappa
        raise DomainError("alpha must exceed 1")
    xf = tuple(_as_fraction(v, "xs") for v in xs)
    yf = tuple(_as_fraction(v, "ys") for v in ys)
    if any(p >= q for p, q in zip(xf, xf[1:])) or any(p >= q for p, q in zip(yf, yf[1:])):
        raise DomainError("xs and ys must be strictly increasing")
    if not xf or not yf:
        raise DomainError("empty grid")
    params = {"alpha": a, "lambda": l}
    fn = _entry_fn_for("karlin", params)
    return KernelMatrix(
        entries=_escalated_grid(xf, yf, fn, target_rad),
        family="karlin",
        params=params,
        row_keys=xf,
        col_keys=yf,
        entry_fn=fn,
    )


def _vandermonde_entry(x: Fraction, y: Fraction) -> CertifiedReal:
    if y.denominator == 1:
        return pow_int(from_exact(x), int(y))
    return pow_real(from_exact(x), from_exact(y))


def build_vandermonde(xs: Sequence, ys: Sequence,
                      target_rad=DEFAULT_TARGET_RAD) -> KernelMatrix:
    """Generalized Vandermonde matrix with entry (i, j) = x_i ** y_j.

    Integer exponents are computed by repeated multiplication (exact for
    rational x); fractional exponents go through exp(y ln x).
    """
    xf = tuple(_as_fraction(v, "xs") for v in xs)
    yf = tuple(_as_fraction(v, "ys") for v in ys)
    if not xf or not yf:
        raise DomainError("empty grid")
    if xf[0] <= 0 or any(p >= q for p, q in zip(xf, xf[1:])):
        raise DomainError("xs must be strictly increasing and positive")
    if yf[0] < 0 or any(p >= q for p, q in zip(yf, yf[1:])):
        raise DomainError("ys must be strictly increasing and nonnegative")
    fn = _entry_fn_for("vandermonde", {})
    return KernelMatrix(
        entries=_escalated_grid(xf, yf, fn, target_rad),
        family="vandermonde",
        params={},
        row_keys=xf,
        col_keys=yf,
        entry_fn=fn,
    )


def matrix_to_json_str(m: KernelMatrix, digits: Optional[int] = None) -> str:
    return json.dumps(m.to_json(digits))
