"""Ball arithmetic over MPFR: certified reals stored as midpoint and radius.

A CertifiedReal encloses an unknown true value v: |v - mid| <= rad.  Every
operation here is outward conservative, so enclosures survive arbitrary
composition.  Midpoints are computed at the current working precision
(round to nearest); radii live at a fixed low precision and are always
rounded up.  Working precision is a context variable, so concurrent
workers can escalate independently without locking.
"""

from __future__ import annotations

import threading
import warnings
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Optional, Union

import gmpy2
from gmpy2 import mpfr

DEFAULT_PRECISION = 64
DEFAULT_PRECISION_CAP = 4096
RAD_BITS = 32

_NEAREST = gmpy2.RoundToNearest
_UP = gmpy2.RoundUp        # toward +infinity
_DOWN = gmpy2.RoundDown    # toward -infinity


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class CertificationError(RuntimeError):
    """A rigorous conclusion could not be reached."""


class PrecisionCapWarning(RuntimeWarning):
    """Escalation hit the precision cap; the result is best-effort."""


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1
    INDETERMINATE = 2


_prec_var: ContextVar[int] = ContextVar("tpbessel_precision", default=DEFAULT_PRECISION)


def current_precision() -> int:
    return _prec_var.get()


@contextmanager
def precision(bits: int):
    """Run a block at the given working precision (in bits)."""
    if bits < 2:
        raise ValueError("precision must be at least 2 bits")
    token = _prec_var.set(int(bits))
    try:
        yield
    finally:
        _prec_var.reset(token)


# Contexts are mutable (they carry sticky flags), so cache them per thread.
_tls = threading.local()


def _ctx(bits: int, mode) -> gmpy2.context:
    cache = getattr(_tls, "ctx_cache", None)
    if cache is None:
        cache = {}
        _tls.ctx_cache = cache
    key = (bits, mode)
    ctx = cache.get(key)
    if ctx is None:
        ctx = gmpy2.context(precision=bits, round=mode)
        cache[key] = ctx
    return ctx


def _rup() -> gmpy2.context:
    return _ctx(RAD_BITS, _UP)


def _rdn() -> gmpy2.context:
    return _ctx(RAD_BITS, _DOWN)


_eps_cache: dict[int, mpfr] = {}


def _eps(bits: int) -> mpfr:
    # 2**-bits, exact; bounds a half ulp relative to the midpoint magnitude
    e = _eps_cache.get(bits)
    if e is None:
        e = gmpy2.exp2(mpfr(-bits, 32))
        _eps_cache[bits] = e
    return e


_ZERO = mpfr(0, RAD_BITS)


def _neg_exact(x: mpfr) -> mpfr:
    # negation at the operand's own precision never rounds; the bare
    # Python operator would round through the 53-bit thread context
    return _ctx(max(x.precision, 2), _NEAREST).minus(x)


def _abs_exact(x: mpfr) -> mpfr:
    return x if x >= 0 else _neg_exact(x)


@dataclass(frozen=True)
class CertifiedReal:
    """Midpoint-radius enclosure of a real number."""

    mid: mpfr
    rad: mpfr

    # -- queries ------------------------------------------------------

    def sign(self) -> Sign:
        """Certified sign.  ZERO only when the enclosure is a single point."""
        if self.rad == 0:
            if self.mid == 0:
                return Sign.ZERO
            return Sign.POSITIVE if self.mid > 0 else Sign.NEGATIVE
        # exact subtraction/addition happens before the directed rounding,
        # so the sign of the rounded endpoint is trustworthy
        if self.mid > 0 and _rdn().sub(self.mid, self.rad) > 0:
            return Sign.POSITIVE
        if self.mid < 0 and _rup().add(self.mid, self.rad) < 0:
            return Sign.NEGATIVE
        return Sign.INDETERMINATE

    @property
    def is_exact(self) -> bool:
        return self.rad == 0

    def lower(self) -> mpfr:
        """Rigorous lower endpoint (rounded down)."""
        return _ctx(max(self.mid.precision, RAD_BITS), _DOWN).sub(self.mid, self.rad)

    def upper(self) -> mpfr:
        return _ctx(max(self.mid.precision, RAD_BITS), _UP).add(self.mid, self.rad)

    def mag(self) -> mpfr:
        """Upper bound on |v| over the enclosure."""
        return _rup().add(_abs_exact(self.mid), self.rad)

    def mig(self) -> mpfr:
        """Lower bound on |v| over the enclosure (0 if it straddles zero)."""
        m = _rdn().sub(_abs_exact(self.mid), self.rad)
        return m if m > 0 else _ZERO

    def contains(self, value) -> bool:
        """Whether the exact number `value` lies in the enclosure."""
        if isinstance(value, CertifiedReal):
            raise TypeError("contains() expects an exact number, not a ball")
        v = _exact_to_fraction(value)
        mid = _exact_to_fraction(self.mid)
        rad = _exact_to_fraction(self.rad)
        return mid - rad <= v <= mid + rad

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return CertifiedReal(_neg_exact(self.mid), self.rad)

    def __abs__(self):
        return CertifiedReal(_abs_exact(self.mid), self.rad)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return pow_int(self, n)

    # -- formatting ----------------------------------------------------

    def __repr__(self) -> str:
        if self.rad == 0:
            return f"{_dec_str(self.mid, 17)} (exact)"
        return f"{_dec_str(self.mid, 17)} +/- {_dec_str(self.rad, 3)}"

    def to_json(self, digits: Optional[int] = None) -> dict:
        """Serialize as decimal strings.

        The radius is widened to absorb the decimal rounding of the
        midpoint, so the decoded ball always contains this one.
        """
        if digits is None:
            digits = int(self.mid.precision * 0.30103) + 8
        mid_s = _dec_str(self.mid, digits)
        rup = _rup()
        rad = self.rad
        if self.mid != 0 and Fraction(mid_s.replace("e", "E")) != _exact_to_fraction(self.mid):
            # decimal printed to D significant digits is within
            # |mid| * 10**(2-D) of the binary midpoint
            wid = rup.mul(_abs_exact(self.mid), mpfr(f"1e{2 - digits}", RAD_BITS, context=rup))
            rad = rup.add(rad, wid)
        return {"mid": mid_s, "rad": _dec_str(rad, 8)}

    @staticmethod
    def from_json(obj: dict) -> "CertifiedReal":
        mid_s = str(obj["mid"])
        rad_s = str(obj["rad"])
        bits = max(current_precision(), 4 * len(mid_s) + 8)
        lo = mpfr(mid_s, bits, context=_ctx(bits, _DOWN))
        hi = mpfr(mid_s, bits, context=_ctx(bits, _UP))
        ball = ball_from_endpoints(lo, hi, bits)
        rad = mpfr(rad_s, RAD_BITS, context=_rup())
        if rad < 0:
            raise ValueError("radius must be nonnegative")
        return CertifiedReal(ball.mid, _rup().add(ball.rad, rad))


def _dec_str(x: mpfr, ndigits: int) -> str:
    """Decimal scientific form of an mpfr, via exact digit extraction."""
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    digs, exp, _ = x.digits(10, ndigits)
    sign = ""
    if digs.startswith("-"):
        sign = "-"
        digs = digs[1:]
    digs = digs.rstrip("0") or "0"
    if len(digs) == 1:
        mant = digs
    else:
        mant = digs[0] + "." + digs[1:]
    return f"{sign}{mant}e{exp - 1:+d}"


def _exact_to_fraction(v) -> Fraction:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    if isinstance(v, mpfr):
        n, d = v.as_integer_ratio()
        return Fraction(int(n), int(d))
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"cannot interpret {type(v).__name__} as an exact number")


def _coerce(v) -> "CertifiedReal":
    if isinstance(v, CertifiedReal):
        return v
    return from_exact(v)


def from_exact(value, bits: Optional[int] = None) -> CertifiedReal:
    """Enclose an exactly known number (int, float, Fraction, decimal string).

    The radius is zero whenever the value is representable at the working
    precision; otherwise it is the width of the directed-rounding hull.
    """
    if isinstance(value, CertifiedReal):
        raise TypeError("value is already a ball; from_exact expects an exact number")
    if bits is None:
        bits = current_precision()
    if isinstance(value, str):
        value = value.strip()
        try:
            value = Fraction(value)
        except ValueError as e:
            raise DomainError(f"not a decimal number: {value!r}") from e
    if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
        raise DomainError("cannot enclose a non-finite float")
    lo = mpfr(value, bits, context=_ctx(bits, _DOWN))
    hi = mpfr(value, bits, context=_ctx(bits, _UP))
    if lo == hi:
        return CertifiedReal(lo, _ZERO)
    return ball_from_endpoints(lo, hi, bits)


def zero() -> CertifiedReal:
    return CertifiedReal(mpfr(0, RAD_BITS), _ZERO)


def one() -> CertifiedReal:
    return CertifiedReal(mpfr(1, RAD_BITS), _ZERO)


def ball_from_endpoints(lo: mpfr, hi: mpfr, bits: Optional[int] = None) -> CertifiedReal:
    """Smallest representable ball containing [lo, hi]."""
    if bits is None:
        bits = current_precision()
    if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
        raise CertificationError("non-finite endpoint")
    if lo > hi:
        raise ValueError("lo > hi")
    near = _ctx(bits, _NEAREST)
    m = near.mul(near.add(lo, hi), mpfr("0.5"))
    rup = _rup()
    r1 = rup.sub(m, lo)
    r2 = rup.sub(hi, m)
    return CertifiedReal(m, r1 if r1 > r2 else r2)


def _finish(m: mpfr, r: mpfr, near: gmpy2.context) -> CertifiedReal:
    """Attach the midpoint rounding slop if the last nearest op was inexact."""
    if not gmpy2.is_finite(m):
        raise CertificationError("midpoint overflowed or is undefined")
    if near.inexact:
        rup = _rup()
        r = rup.add(r, rup.mul(_abs_exact(m), _eps(near.precision)))
    return CertifiedReal(m, r)


def add(a: CertifiedReal, b: CertifiedReal) -> CertifiedReal:
    bits = current_precision()
    near = _ctx(bits, _NEAREST)
    near.clear_flags()
    m = near.add(a.mid, b.mid)
    if a.rad == 0 and b.rad == 0:
        return _finish(m, _ZERO, near)
    return _finish(m, _rup().add(a.rad, b.rad), near)


def sub(a: CertifiedReal, b: CertifiedReal) -> CertifiedReal:
    bits = current_precision()
    near = _ctx(bits, _NEAREST)
    near.clear_flags()
    m = near.sub(a.mid, b.mid)
    if a.rad == 0 and b.rad == 0:
        return _finish(m, _ZERO, near)
    return _finish(m, _rup().add(a.rad, b.rad), near)


def mul(a: CertifiedReal, b: CertifiedReal) -> CertifiedReal:
    bits = current_precision()
    near = _ctx(bits, _NEAREST)
    near.clear_flags()
    m = near.mul(a.mid, b.mid)
    if a.rad == 0 and b.rad == 0:
        return _finish(m, _ZERO, near)
    rup = _rup()
    # |a b - am bm| <= |am| rb + |bm| ra + ra rb
    r = rup.add(
        rup.add(rup.mul(_abs_exact(a.mid), b.rad), rup.mul(_abs_exact(b.mid), a.rad)),
        rup.mul(a.rad, b.rad),
    )
    return _finish(m, r, near)


def div(a: CertifiedReal, b: CertifiedReal) -> CertifiedReal:
    bmig = b.mig()
    if bmig <= 0:
        raise DomainError("division by an enclosure containing zero")
    bits = current_precision()
    near = _ctx(bits, _NEAREST)
    near.clear_flags()
    m = near.div(a.mid, b.mid)
    if a.rad == 0 and b.rad == 0:
        return _finish(m, _ZERO, near)
    rup = _rup()
    # |a/b - am/bm| <= (|am| rb + |bm| ra) / (|bm| (|bm| - rb))
    bm = _abs_exact(b.mid)
    num = rup.add(rup.mul(_abs_exact(a.mid), b.rad), rup.mul(bm, a.rad))
    rdn = _rdn()
    den = rdn.mul(bm, rdn.sub(bm, b.rad))
    if den <= 0:
        raise DomainError("division by an enclosure containing zero")
    return _finish(m, rup.div(num, den), near)


def _monotone_hull(a: CertifiedReal, fname: str, bits: int) -> CertifiedReal:
    dn = _ctx(bits, _DOWN)
    up = _ctx(bits, _UP)
    lo_in = dn.sub(a.mid, a.rad)
    hi_in = up.add(a.mid, a.rad)
    lo = getattr(dn, fname)(lo_in)
    hi = getattr(up, fname)(hi_in)
    return ball_from_endpoints(lo, hi, bits)


def exp(a: CertifiedReal) -> CertifiedReal:
    return _monotone_hull(a, "exp", current_precision())


def log(a: CertifiedReal) -> CertifiedReal:
    if _rdn().sub(a.mid, a.rad) <= 0:
        raise DomainError("log requires a strictly positive enclosure")
    return _monotone_hull(a, "log", current_precision())


def sqrt(a: CertifiedReal) -> CertifiedReal:
    bits = current_precision()
    dn = _ctx(bits, _DOWN)
    lo_in = dn.sub(a.mid, a.rad)
    if lo_in < 0:
        raise DomainError("sqrt requires a nonnegative enclosure")
    up = _ctx(bits, _UP)
    lo = dn.sqrt(lo_in)
    hi = up.sqrt(up.add(a.mid, a.rad))
    return ball_from_endpoints(lo, hi, bits)


def _lipschitz1(a: CertifiedReal, fname: str) -> CertifiedReal:
    # for cos and sin: |f(x) - f(mid)| <= |x - mid|, then one rounding
    bits = current_precision()
    near = _ctx(bits, _NEAREST)
    near.clear_flags()
    m = getattr(near, fname)(a.mid)
    r = a.rad
    if near.inexact:
        rup = _rup()
        r = rup.add(r, _eps(bits))  # |f| <= 1 so half an ulp is at most 2**-bits
    return CertifiedReal(m, r)


def cos(a: CertifiedReal) -> CertifiedReal:
    return _lipschitz1(a, "cos")


def sin(a: CertifiedReal) -> CertifiedReal:
    return _lipschitz1(a, "sin")


def const_pi() -> CertifiedReal:
    bits = current_precision()
    lo = _ctx(bits, _DOWN).const_pi()
    hi = _ctx(bits, _UP).const_pi()
    return ball_from_endpoints(lo, hi, bits)


def pow_int(a: CertifiedReal, n: int) -> CertifiedReal:
    """a**n by binary exponentiation (exact for n == 0)."""
    if n < 0:
        return div(one(), pow_int(a, -n))
    result = one()
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def pow_real(a: CertifiedReal, y: CertifiedReal) -> CertifiedReal:
    """a**y for positive a, via exp(y log a)."""
    return exp(mul(y, log(a)))


def certified_sign(x: CertifiedReal) -> Sign:
    """Sign decision that never lies: POSITIVE/NEGATIVE only when provable."""
    return x.sign()


def escalate_precision(
    compute: Callable[[], CertifiedReal],
    target_rad,
    start_bits: int = DEFAULT_PRECISION,
    cap_bits: int = DEFAULT_PRECISION_CAP,
) -> CertifiedReal:
    """Re-run `compute` at doubling working precision until rad <= target_rad.

    `compute` must read the working precision from the ambient context
    (every operation in this module does).  If the cap is reached the
    tightest enclosure seen is returned and a PrecisionCapWarning is
    emitted; the enclosure itself remains valid.
    """
    target = mpfr(target_rad, RAD_BITS, context=_rdn())
    if target < 0:
        raise ValueError("target_rad must be nonnegative")
    best: Optional[CertifiedReal] = None
    bits = int(start_bits)
    while True:
        with precision(bits):
            value = compute()
        if best is None or value.rad < best.rad:
            best = value
        if value.rad <= target:
            return value
        if bits >= cap_bits:
            warnings.warn(
                f"target radius {_dec_str(target, 3)} not reached at the "
                f"{cap_bits}-bit precision cap (got {_dec_str(best.rad, 3)})",
                PrecisionCapWarning,
                stacklevel=2,
            )
            return best
        bits = min(2 * bits, cap_bits)


Number = Union[int, float, Fraction, str, CertifiedReal]
