"""Certified total positivity: determinants, minors, Plücker coordinates.

Determinant enclosures come from interval Gaussian elimination with
largest-mignitude pivoting.  When no pivot can be certified nonzero the
matrix entries are recomputed at doubled precision through their
provenance and the elimination is retried; at the precision cap a
division-free expansion supplies an honest (possibly sign-indeterminate)
enclosure.  Verdicts never overstate: Positive/Negative claims always
rest on an interval excluding zero.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

from .scalar import (
    CertifiedReal,
    DomainError,
    DEFAULT_PRECISION_CAP,
    PrecisionCapWarning,
    Sign,
    add,
    div,
    mul,
    one,
    precision,
    sub,
    zero,
)
from .kernels import (
    DEFAULT_TARGET_RAD,
    KernelMatrix,
    build_bessel_matrix,
    check_argument_tuple,
    check_index_tuple,
)


class TPVerdict(Enum):
    STRICTLY_POSITIVE = "StrictlyPositive"
    NONNEGATIVE = "Nonnegative"
    INDETERMINATE = "Indeterminate"
    VIOLATED = "Violated"


class GrassmannVerdict(Enum):
    STRICTLY_TOTALLY_POSITIVE = "StrictlyTotallyPositive"
    NORMALIZABLE_POSITIVE = "NormalizablePositive"
    NOT_POSITIVE = "Not"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class MinorSelector:
    """Strictly increasing row and column index sets of equal cardinality."""

    rows: Tuple[int, ...]
    cols: Tuple[int, ...]

    def to_json(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols)}


@dataclass(frozen=True)
class TPCertificate:
    order_checked: int
    verdict: TPVerdict
    minors_checked: int
    min_margin: Optional[CertifiedReal]
    witness: Optional[Tuple[MinorSelector, CertifiedReal]]

    def satisfied(self, strict: bool) -> bool:
        if strict:
            return self.verdict is TPVerdict.STRICTLY_POSITIVE
        return self.verdict in (TPVerdict.STRICTLY_POSITIVE, TPVerdict.NONNEGATIVE)

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            sel, det = self.witness
            w = {**sel.to_json(), "det": det.to_json()}
        return {
            "order": self.order_checked,
            "verdict": self.verdict.value,
            "minors_checked": self.minors_checked,
            "min_margin": None if self.min_margin is None else self.min_margin.to_json(),
            "witness": w,
        }


@dataclass(frozen=True)
class PlueckerVector:
    """Maximal minors in lexicographic column-set order (0-based sets)."""

    column_sets: Tuple[Tuple[int, ...], ...]
    coordinates: Tuple[CertifiedReal, ...]

    def to_json(self) -> dict:
        return {
            "column_sets": [list(s) for s in self.column_sets],
            "coordinates": [c.to_json() for c in self.coordinates],
        }


def _ge_det(entries, bits: int) -> Optional[CertifiedReal]:
    """Interval Gaussian elimination at the given precision.

    Returns an enclosure, an exact zero when a pivot column vanishes
    identically, or None when no pivot can be certified nonzero (the
    caller escalates).
    """
    p = len(entries)
    with precision(bits):
        a = [list(row) for row in entries]
        negate = False
        det = one()
        for i in range(p):
            if i == p - 1:
                det = mul(det, a[i][i])
                break
            best_r = -1
            best_mig = None
            all_exact_zero = True
            for r in range(i, p):
                e = a[r][i]
                if not (e.is_exact and e.mid == 0):
                    all_exact_zero = False
                mg = e.mig()
                if mg > 0 and (best_mig is None or mg > best_mig):
                    best_mig, best_r = mg, r
            if all_exact_zero:
                return zero()
            if best_r < 0:
                return None
            if best_r != i:
                a[i], a[best_r] = a[best_r], a[i]
                negate = not negate
            piv = a[i][i]
            for r in range(i + 1, p):
                lead = a[r][i]
                if lead.is_exact and lead.mid == 0:
                    continue
                f = div(lead, piv)
                for c in range(i + 1, p):
                    a[r][c] = sub(a[r][c], mul(f, a[i][c]))
            det = mul(det, piv)
        return -det if negate else det


def _expansion_det(entries, bits: int) -> CertifiedReal:
    """Division-free column-subset expansion; always yields an enclosure."""
    p = len(entries)
    with precision(bits):
        acc = {0: one()}
        for r in range(p):
            nxt: dict[int, CertifiedReal] = {}
            for mask, val in acc.items():
                for c in range(p):
                    bit = 1 << c
                    if mask & bit:
                        continue
                    term = mul(val, entries[r][c])
                    if (mask >> (c + 1)).bit_count() & 1:
                        term = -term
                    cur = nxt.get(mask | bit)
                    nxt[mask | bit] = term if cur is None else add(cur, term)
            acc = nxt
        return acc[(1 << p) - 1]


def det_certified(M: KernelMatrix, target_rad=None,
                  cap_bits: int = DEFAULT_PRECISION_CAP) -> CertifiedReal:
    """Certified determinant enclosure of a square KernelMatrix.

    Escalates entry precision through the matrix provenance until the
    sign is decided (and, when target_rad is given, the radius is small
    enough).  If the cap is exhausted the best enclosure found is
    returned with a PrecisionCapWarning; it may straddle zero but it
    never excludes the true determinant.
    """
    if M.nrows != M.ncols:
        raise DomainError(f"determinant needs a square matrix, got {M.shape}")
    p = M.nrows
    current = M
    bits = current.built_bits()
    best: Optional[CertifiedReal] = None
    while True:
        result = _ge_det(current.entries, bits)
        if result is None or result.sign() is Sign.INDETERMINATE:
            # structural zeros survive the division-free expansion exactly,
            # while pivot swaps in the elimination can smear them out
            alt = _expansion_det(current.entries, bits)
            if result is None or alt.sign() is not Sign.INDETERMINATE or alt.rad < result.rad:
                result = alt
        if result is not None:
            if best is None or result.rad < best.rad:
                best = result
            decided = result.sign() is not Sign.INDETERMINATE
            tight = target_rad is None or result.rad <= target_rad
            if decided and tight:
                return result
        if bits >= cap_bits or M.entry_fn is None:
            break
        bits = min(2 * bits, cap_bits)
        current = M.recomputed(bits)
    if best is None:
        best = _expansion_det(current.entries, bits)
    warnings.warn(
        f"determinant of a {p}x{p} matrix undecided at the {cap_bits}-bit cap",
        PrecisionCapWarning,
        stacklevel=2,
    )
    return best


def enumerate_minors(M: KernelMatrix, order: int, target_rad=None,
                     cap_bits: int = DEFAULT_PRECISION_CAP
                     ) -> Iterator[Tuple[MinorSelector, CertifiedReal]]:
    """All order x order minors, lexicographic in (row_set, col_set).

    Validates eagerly, then yields lazily (each minor is certified on
    demand, so early exits skip the remaining work).
    """
    if not (1 <= order <= min(M.nrows, M.ncols)):
        raise DomainError(f"minor order {order} out of range for shape {M.shape}")

    def _walk():
        for rows in itertools.combinations(range(M.nrows), order):
            for cols in itertools.combinations(range(M.ncols), order):
                sub_m = M.submatrix(rows, cols)
                yield MinorSelector(rows, cols), det_certified(
                    sub_m, target_rad=target_rad, cap_bits=cap_bits)

    return _walk()


def check_tp(M: KernelMatrix, max_order: int, strict: bool = True,
             cap_bits: int = DEFAULT_PRECISION_CAP) -> TPCertificate:
    """Exhaustive minor-sign certification up to the given order.

    The `strict` flag does not change what is computed, only what
    `certificate.satisfied(strict)` later demands; the verdict records
    the strongest property the minors actually exhibit.  Enumeration
    stops early only on a certified negative minor.
    """
    if not (1 <= max_order <= min(M.nrows, M.ncols)):
        raise DomainError(f"max_order {max_order} out of range for shape {M.shape}")
    checked = 0
    min_margin: Optional[CertifiedReal] = None
    first_zero: Optional[Tuple[MinorSelector, CertifiedReal]] = None
    first_indet: Optional[Tuple[MinorSelector, CertifiedReal]] = None
    for order in range(1, max_order + 1):
        for sel, det in enumerate_minors(M, order, cap_bits=cap_bits):
            checked += 1
            s = det.sign()
            if s is Sign.POSITIVE:
                if min_margin is None or det.lower() < min_margin.lower():
                    min_margin = det
            elif s is Sign.NEGATIVE:
                return TPCertificate(max_order, TPVerdict.VIOLATED, checked,
                                     min_margin, (sel, det))
            elif s is Sign.ZERO:
                if first_zero is None:
                    first_zero = (sel, det)
            else:
                if first_indet is None:
                    first_indet = (sel, det)
    if first_indet is not None:
        return TPCertificate(max_order, TPVerdict.INDETERMINATE, checked,
                             min_margin, first_indet)
    if first_zero is not None:
        return TPCertificate(max_order, TPVerdict.NONNEGATIVE, checked,
                             min_margin, first_zero)
    return TPCertificate(max_order, TPVerdict.STRICTLY_POSITIVE, checked,
                         min_margin, None)


def pluecker(M: KernelMatrix, target_rad=None,
             cap_bits: int = DEFAULT_PRECISION_CAP) -> PlueckerVector:
    """All maximal (nrows x nrows) minors, lexicographic in column set."""
    l, m = M.shape
    if l >= m:
        raise DomainError(f"need a wide matrix (rows < cols), got {M.shape}")
    rows = tuple(range(l))
    sets = []
    coords = []
    for cols in itertools.combinations(range(m), l):
        sets.append(cols)
        coords.append(det_certified(M.submatrix(rows, cols),
                                    target_rad=target_rad, cap_bits=cap_bits))
    return PlueckerVector(tuple(sets), tuple(coords))


@dataclass(frozen=True)
class GrassmannReport:
    verdict: GrassmannVerdict
    pluecker_vector: PlueckerVector
    witness: Optional[Tuple[Tuple[int, ...], CertifiedReal]]
    reason: str

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            cols, det = self.witness
            w = {"cols": list(cols), "det": det.to_json()}
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "witness": w,
            "pluecker": self.pluecker_vector.to_json(),
        }


def check_grassmann_point(M: KernelMatrix,
                          cap_bits: int = DEFAULT_PRECISION_CAP) -> GrassmannReport:
    """Classify the row span of M under the Plücker embedding.

    All maximal minors certified positive gives the strictly totally
    positive verdict; all certified negative is reported as positive up
    to the global normalization by -1.  A certified zero coordinate or a
    certified sign conflict rules the point out (this covers rank
    deficiency, where every coordinate vanishes).
    """
    pv = pluecker(M, cap_bits=cap_bits)
    signs = [c.sign() for c in pv.coordinates]
    for s, cols, c in zip(signs, pv.column_sets, pv.coordinates):
        if s is Sign.INDETERMINATE:
            return GrassmannReport(GrassmannVerdict.INDETERMINATE, pv, (cols, c),
                                   "a coordinate could not be signed at the precision cap")
        if s is Sign.ZERO:
            return GrassmannReport(GrassmannVerdict.NOT_POSITIVE, pv, (cols, c),
                                   "a maximal minor is exactly zero")
    lead = signs[0]
    for s, cols, c in zip(signs, pv.column_sets, pv.coordinates):
        if s is not lead:
            return GrassmannReport(GrassmannVerdict.NOT_POSITIVE, pv, (cols, c),
                                   "maximal minors with certified opposite signs")
    if lead is Sign.POSITIVE:
        return GrassmannReport(GrassmannVerdict.STRICTLY_TOTALLY_POSITIVE, pv, None,
                               "all maximal minors certified positive")
    return GrassmannReport(GrassmannVerdict.NORMALIZABLE_POSITIVE, pv, None,
                           "all maximal minors certified negative; "
                           "normalizing by -1 makes them positive")


def h_k_map(k: Sequence[int], x: Sequence, target_rad=DEFAULT_TARGET_RAD,
            cap_bits: int = DEFAULT_PRECISION_CAP) -> PlueckerVector:
    """Plücker coordinates of the point reached from arguments x under the
    kernel rows I_{k_j}; requires fewer arguments than orders."""
    kk = check_index_tuple(k)
    xs = check_argument_tuple(x)
    if len(xs) >= len(kk):
        raise DomainError("need strictly fewer arguments than orders (l < m)")
    return pluecker(build_bessel_matrix(kk, xs, target_rad), cap_bits=cap_bits)


def pluecker_nonproportional(u: PlueckerVector, v: PlueckerVector) -> bool:
    """Certify that two Plücker vectors are not proportional.

    True when some 2x2 cross determinant u_i v_j - u_j v_i is certified
    nonzero; False means proportionality could not be excluded (it does
    NOT certify proportionality).
    """
    if u.column_sets != v.column_sets:
        raise DomainError("vectors index different column sets")
    n = len(u.coordinates)
    for i in range(n):
        for j in range(i + 1, n):
            cross = sub(mul(u.coordinates[i], v.coordinates[j]),
                        mul(u.coordinates[j], v.coordinates[i]))
            if cross.sign() in (Sign.POSITIVE, Sign.NEGATIVE):
                return True
    return False


def sign_changes(v: Sequence[float]) -> int:
    """Sign alternations in a real sequence after deleting zeros."""
    signs = []
    for t in v:
        t = float(t)
        if t > 0:
            signs.append(1)
        elif t < 0:
            signs.append(-1)
    if not signs:
        raise DomainError("sign_changes is undefined for the zero vector")
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)
