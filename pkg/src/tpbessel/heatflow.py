"""Discrete heat flow on windows of strictly increasing index tuples.

The state space is the set of tuples 0 <= k_1 < ... < k_m <= k_max.  The
lattice Laplacian acts through unit shifts of single components with
three reading rules: a shift that collides with a neighboring component
reads as zero, a shift of the first component below zero reflects evenly
(f at -1 equals f at +1), and a shift of the last component above k_max
reads as zero (window truncation).  The flow f' = laplacian(f) + m f
collapses to f' = B f where B has one entry 1/2 per surviving neighbor
(1 where the reflection doubles a neighbor), so B is entrywise
nonnegative and the positive cone is exactly invariant, even in floating
point.

Window truncation error (the one knowingly non-certified ingredient of
the integrator) is bounded as follows.  Each dropped neighbor lies just
outside the window, where |f| is at most D = m! R'^{k_max+1}/(k_max+1)!
* M^{m-1} with R' = X1 + w_m and M = max |I_j| on [0, R'].  The
truncated and full systems then differ by a defect of size at most D/2
per boundary component, and since the operator norm of B is at most m,
the endpoint error is at most X1 * (D/2) * e^{m X1}.  This bound is
computed and attached to every trajectory (when R' > 1 and k_max + 1 >=
R'^2 make the ingredient inequality applicable).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

import gmpy2
from gmpy2 import mpfr

from .scalar import (
    CertifiedReal,
    CertificationError,
    DomainError,
    _ctx,
    _rup,
    from_exact,
    mul,
    pow_int,
    precision,
)
from .bessel import bessel_i, tail_bound
from .kernels import build_bessel_matrix, _as_fraction
from .positivity import det_certified

IndexTuple = Tuple[int, ...]


@dataclass(frozen=True)
class IndexWindow:
    """All tuples 0 <= k_1 < ... < k_m <= k_max, in colexicographic order."""

    m: int
    k_max: int
    members: Tuple[IndexTuple, ...]
    position: Mapping[IndexTuple, int] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.position

    def interior_mask(self) -> np.ndarray:
        """True for components whose Laplacian no window truncation touches
        (last index at least two below the cap)."""
        return np.array([p[-1] <= self.k_max - 2 for p in self.members])


def index_window(m: int, k_max: int) -> IndexWindow:
    if m < 1:
        raise DomainError("m must be at least 1")
    if k_max < m - 1:
        raise DomainError(f"k_max={k_max} leaves no valid tuple for m={m}")
    members = tuple(sorted(itertools.combinations(range(k_max + 1), m),
                           key=lambda t: tuple(reversed(t))))
    position = {p: i for i, p in enumerate(members)}
    return IndexWindow(m, k_max, members, position)


def _neighbor_weights(p: IndexTuple, window: IndexWindow) -> Dict[IndexTuple, float]:
    """Surviving unit-shift neighbors of p with their 1/2 weights summed.

    Implements the three reading rules; a reflected neighbor coinciding
    with an ordinary one accumulates weight 1.
    """
    out: Dict[IndexTuple, float] = {}
    m = window.m

    def put(q: IndexTuple):
        out[q] = out.get(q, 0.0) + 0.5

    for s in range(m):
        # downward shift
        if s == 0 and p[0] == 0:
            q = (1,) + p[1:]
            if m == 1 or p[1] != 1:          # collision reads as zero
                if q[-1] <= window.k_max:
                    put(q)
        else:
            q = p[:s] + (p[s] - 1,) + p[s + 1:]
            if s == 0 or q[s] != p[s - 1]:
                put(q)
        # upward shift
        q = p[:s] + (p[s] + 1,) + p[s + 1:]
        if s < m - 1:
            if q[s] != p[s + 1]:
                put(q)
        elif q[s] <= window.k_max:           # truncation reads as zero
            put(q)
    return out


def discrete_laplacian(f: Mapping[IndexTuple, float], p, window: IndexWindow) -> float:
    """Value of the lattice Laplacian of f at p under the reading rules."""
    p = tuple(p)
    if p not in window:
        raise DomainError(f"{p} is not in the window")
    acc = 0.0
    for q, wgt in _neighbor_weights(p, window).items():
        acc += wgt * float(f[q])
    return acc - window.m * float(f[p])


_flow_matrix_cache: Dict[Tuple[int, int], sp.csr_matrix] = {}


def flow_matrix(window: IndexWindow) -> sp.csr_matrix:
    """Sparse B with f' = B f; entries are the surviving neighbor weights."""
    key = (window.m, window.k_max)
    cached = _flow_matrix_cache.get(key)
    if cached is not None:
        return cached
    rows, cols, vals = [], [], []
    for i, p in enumerate(window.members):
        for q, wgt in _neighbor_weights(p, window).items():
            rows.append(i)
            cols.append(window.position[q])
            vals.append(wgt)
    n = len(window)
    B = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    _flow_matrix_cache[key] = B
    return B


def _check_offsets(w, m: int) -> Tuple[Fraction, ...]:
    ws = tuple(_as_fraction(v, "offset") for v in w)
    if len(ws) != m - 1:
        raise DomainError(f"need {m - 1} offsets for m={m}, got {len(ws)}")
    if any(v <= 0 for v in ws) or any(a >= b for a, b in zip(ws, ws[1:])):
        raise DomainError("offsets must be strictly increasing and positive")
    return ws


@dataclass(frozen=True)
class FlowState:
    x1: float
    w: Tuple[float, ...]
    window: IndexWindow
    f: Mapping[IndexTuple, float]

    def __post_init__(self):
        if self.x1 < 0:
            raise DomainError("x1 must be nonnegative")
        _check_offsets(self.w, self.window.m)
        missing = [p for p in self.window.members if p not in self.f]
        if missing:
            raise DomainError(f"state vector misses {len(missing)} components")


def flow_rhs(state: FlowState) -> Dict[IndexTuple, float]:
    """Right-hand side laplacian(f) + m f, cross-checked against the
    equivalent neighbor-sum form B f before returning."""
    window = state.window
    via_laplacian = {
        p: discrete_laplacian(state.f, p, window) + window.m * float(state.f[p])
        for p in window.members
    }
    vec = np.array([float(state.f[p]) for p in window.members])
    via_matrix = flow_matrix(window) @ vec
    scale = max(1.0, float(np.max(np.abs(via_matrix))))
    for i, p in enumerate(window.members):
        if abs(via_laplacian[p] - via_matrix[i]) > 1e-12 * scale:
            raise CertificationError(
                f"the two right-hand-side forms disagree at {p}")
    return {p: float(via_matrix[i]) for i, p in enumerate(window.members)}


def f_direct(x1, w, window: IndexWindow, target_rad=1e-30) -> Dict[IndexTuple, CertifiedReal]:
    """Certified determinant values f_k at arguments (x1, x1+w_2, ..., x1+w_m)
    for every k in the window.

    All orders up to k_max are evaluated once into a shared matrix; each
    k picks its columns, so escalation never rebuilds foreign entries.
    """
    x1f = _as_fraction(x1, "x1")
    if x1f < 0:
        raise DomainError("x1 must be nonnegative")
    ws = _check_offsets(w, window.m)
    args = (x1f,) + tuple(x1f + v for v in ws)
    big = build_bessel_matrix(tuple(range(window.k_max + 1)), args,
                              target_rad=min(1e-20, float(target_rad) * 1e-2),
                              allow_zero_first=True)
    all_rows = tuple(range(window.m))
    out = {}
    for k in window.members:
        out[k] = det_certified(big.submatrix(all_rows, k), target_rad=target_rad)
    return out


@dataclass(frozen=True, eq=False)
class ResidualReport:
    x1: float
    w: Tuple[float, ...]
    h: float
    magnitude_floor: float
    max_rel_interior: float
    argmax_interior: Optional[IndexTuple]
    max_rel_boundary: float
    interior_included: int
    boundary_included: int
    excluded_below_floor: int
    per_component: Dict[IndexTuple, Tuple[float, float, bool]]  # (residual, rel, interior)

    def to_json(self) -> dict:
        return {
            "x1": self.x1,
            "w": list(self.w),
            "h": self.h,
            "magnitude_floor": self.magnitude_floor,
            "max_rel_interior": self.max_rel_interior,
            "argmax_interior": list(self.argmax_interior) if self.argmax_interior else None,
            "max_rel_boundary": self.max_rel_boundary,
            "interior_included": self.interior_included,
            "boundary_included": self.boundary_included,
            "excluded_below_floor": self.excluded_below_floor,
        }


def residual_check(x1, w, window: IndexWindow, h, magnitude_floor: float = 1e-12,
                   target_rad=1e-36) -> ResidualReport:
    """Central-difference check of f' = laplacian(f) + m f on certified values.

    The derivative of f_direct in x1 is approximated by a second-order
    central difference and compared with the algebraic right-hand side.
    Components are compared relative to their own |rhs|, and components
    with |rhs| below magnitude_floor times the largest |rhs| are skipped
    (their quotients measure nothing but noise).  Components whose last
    index is within one of the cap are reported separately: truncation
    contaminates their Laplacian.
    """
    x1f = _as_fraction(x1, "x1")
    hf = _as_fraction(h, "h")
    if hf <= 0 or x1f - hf <= 0:
        raise DomainError("need 0 < h < x1")
    f_lo = f_direct(x1f - hf, w, window, target_rad)
    f_hi = f_direct(x1f + hf, w, window, target_rad)
    f_md = f_direct(x1f, w, window, target_rad)

    ctx = _ctx(256, gmpy2.RoundToNearest)
    two_h = mpfr(2 * hf, 256)
    fd = {p: ctx.div(ctx.sub(f_hi[p].mid, f_lo[p].mid), two_h)
          for p in window.members}
    mids = {p: f_md[p].mid for p in window.members}
    rhs = {}
    for p in window.members:
        acc = mpfr(0)
        for q, wgt in _neighbor_weights(p, window).items():
            acc = ctx.add(acc, ctx.mul(mpfr(wgt), mids[q]))
        rhs[p] = acc

    scale = max(abs(v) for v in rhs.values())
    floor = magnitude_floor * float(scale) if scale > 0 else 0.0
    interior = window.interior_mask()
    per = {}
    max_int, arg_int, max_bnd = 0.0, None, 0.0
    n_int = n_bnd = n_excl = 0
    for i, p in enumerate(window.members):
        resid = float(ctx.sub(fd[p], rhs[p]))
        mag = abs(float(rhs[p]))
        if mag <= floor:
            n_excl += 1
            continue
        rel = abs(resid) / mag
        per[p] = (resid, rel, bool(interior[i]))
        if interior[i]:
            n_int += 1
            if rel > max_int:
                max_int, arg_int = rel, p
        else:
            n_bnd += 1
            max_bnd = max(max_bnd, rel)
    return ResidualReport(float(x1f), tuple(float(v) for v in w), float(hf),
                          magnitude_floor, max_int, arg_int, max_bnd,
                          n_int, n_bnd, n_excl, per)


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    window: IndexWindow
    w: Tuple[float, ...]
    x1_samples: np.ndarray
    values: np.ndarray          # shape (samples, len(window))
    cone_min: float
    truncation_bound: Optional[float]
    step: float
    n_steps: int

    def final(self) -> Dict[IndexTuple, float]:
        last = self.values[-1]
        return {p: float(last[i]) for i, p in enumerate(self.window.members)}

    def to_csv(self) -> str:
        header = ["x1"] + ["k=" + "-".join(map(str, p)) for p in self.window.members]
        lines = [",".join(header)]
        for x, row in zip(self.x1_samples, self.values):
            lines.append(",".join([repr(float(x))] + [repr(float(v)) for v in row]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "w": list(self.w),
            "X1": float(self.x1_samples[-1]),
            "step": self.step,
            "n_steps": self.n_steps,
            "cone_min": self.cone_min,
            "truncation_bound": self.truncation_bound,
            "samples": [float(x) for x in self.x1_samples],
        }


def _truncation_bound(window: IndexWindow, X1: Fraction, ws: Sequence[Fraction]) -> Optional[float]:
    """Endpoint error bound of the derivation in the module docstring,
    or None when its hypotheses (R' > 1, k_max+1 >= R'^2) fail."""
    r_prime = X1 + (ws[-1] if ws else 0)
    j = window.k_max + 1
    if r_prime <= 1 or j < r_prime * r_prime:
        return None
    with precision(64):
        d_ball = tail_bound(j, r_prime)
        if window.m > 1:
            m_ball = bessel_i(0, from_exact(r_prime))  # max of |I_j| on [0, R']
            d_ball = mul(d_ball, pow_int(m_ball, window.m - 1))
        d_ball = mul(d_ball, from_exact(math.factorial(window.m)))
    rup = _rup()
    x_hi = mpfr(X1, 64, context=rup)
    half_d = rup.mul(d_ball.mag(), mpfr("0.5"))
    growth = rup.exp(rup.mul(mpfr(window.m), x_hi))
    return float(rup.mul(rup.mul(x_hi, half_d), growth))


def flow_integrate(w, window: IndexWindow, X1, step: float = 1e-3,
                   samples: int = 11, target_rad=1e-30) -> FlowTrajectory:
    """Classical fourth-order fixed-step integration of f' = B f from the
    certified initial state f_direct(0, w) up to x1 = X1.

    The componentwise minimum over every accepted step is monitored
    (cone invariance); with B entrywise nonnegative it cannot go below
    zero here, but the monitor reports it rather than assuming it.
    """
    x_end = _as_fraction(X1, "X1")
    if x_end <= 0:
        raise DomainError("X1 must be positive")
    if not (isinstance(step, (int, float, Fraction)) and float(step) > 0):
        raise DomainError("step must be positive")
    ws = _check_offsets(w, window.m)

    f0 = f_direct(0, w, window, target_rad)
    f = np.array([float(f0[p].mid) for p in window.members])
    B = flow_matrix(window)
    n_steps = max(1, round(float(x_end) / float(step)))
    h = float(x_end) / n_steps
    samples = max(2, int(samples))
    record_at = {round(i * n_steps / (samples - 1)) for i in range(samples)}

    xs = [0.0]
    rows = [f.copy()]
    cone_min = float(np.min(f))
    for n in range(1, n_steps + 1):
        k1 = B @ f
        k2 = B @ (f + (h / 2) * k1)
        k3 = B @ (f + (h / 2) * k2)
        k4 = B @ (f + h * k3)
        f = f + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        cone_min = min(cone_min, float(np.min(f)))
        if n in record_at:
            xs.append(n * h)
            rows.append(f.copy())
    return FlowTrajectory(window, tuple(float(v) for v in ws), np.array(xs),
                          np.vstack(rows), cone_min,
                          _truncation_bound(window, x_end, ws), h, n_steps)


@dataclass(frozen=True)
class L2BoundReport:
    c_r: float
    partial_sum_max: float
    m_bound: float
    series_tail: float
    grid: Tuple[Tuple[Tuple[float, ...], float], ...]  # ((x1, *w), sum) per point

    def __iter__(self):
        return iter((self.c_r, self.partial_sum_max))

    def to_json(self) -> dict:
        return {
            "C_R": self.c_r,
            "partial_sum_max": self.partial_sum_max,
            "M": self.m_bound,
            "series_tail": self.series_tail,
            "grid_points": len(self.grid),
        }


def l2_bound(R, m: int, window: IndexWindow, grid_points: int = 25,
             z_grid_points: int = 1000, target_rad=1e-25) -> L2BoundReport:
    """Squared-sum bound: certifies sum over the window of f_k^2 stays
    below C(R) = (m! M^{m-1})^2 * sum over K_m of R^{2 k_m}/(k_m!)^2.

    M is the maximum of |I_j| over [0, R]: scanned on a z-grid for
    j < ceil(R^2) (the series is increasing in z, and the grid contains
    the right endpoint, so the scan maximum is the true maximum), topped
    off with the factorial tail bound for every larger order.  The K_m
    sum is taken exactly over k_m <= k_max and closed with a geometric
    ratio-test tail.  Partial sums use certified upper endpoints on a
    deterministic grid of (x1, w) with x1 + w_m <= R.
    """
    if window.m != m:
        raise DomainError("window dimension mismatch")
    Rf = _as_fraction(R, "R")
    if Rf <= 1:
        raise DomainError("R must exceed 1")
    rup = _rup()
    rdn = _ctx(64, gmpy2.RoundDown)

    # M = sup |I_j| on [0, R] over all orders: grid scan below ceil(R^2)
    # (series increasing in z and the grid contains the right endpoint,
    # so the scan maximum is the true maximum), factorial bound above
    j0 = math.ceil(Rf * Rf)
    m_val = mpfr(0)
    m_lo = mpfr(0)
    for j in range(j0):
        for i in range(1, z_grid_points + 1):
            ball = bessel_i(j, from_exact(Fraction(Rf * i, z_grid_points)))
            u = ball.mag()
            if u > m_val:
                m_val = u
            lo = ball.lower()
            if lo > m_lo:
                m_lo = lo
    t_tail = tail_bound(j0, Rf).mag()
    if t_tail > m_val:
        m_val = t_tail

    # exact window part of the K_m sum, then a ratio-test tail
    s_exact = Fraction(0)
    for t in range(m - 1, window.k_max + 1):
        s_exact += math.comb(t, m - 1) * Rf ** (2 * t) / Fraction(math.factorial(t)) ** 2
    t1 = window.k_max + 1
    q = Rf * Rf / ((t1 + 1 - m) * t1)
    if q >= 1:
        raise DomainError("window too small for a convergent tail at this R")
    a_next = math.comb(t1, m - 1) * Rf ** (2 * t1) / Fraction(math.factorial(t1)) ** 2
    s_tail = a_next / (1 - q)

    fact_hi = mpfr(math.factorial(m), 64, context=rup)
    fact_lo = mpfr(math.factorial(m), 64, context=rdn)
    if m > 1:
        factor_hi = rup.mul(fact_hi, _pow_ctx(m_val, m - 1, rup))
        factor_lo = rdn.mul(fact_lo, _pow_ctx(m_lo, m - 1, rdn))
    else:
        factor_hi, factor_lo = fact_hi, fact_lo
    c_r_hi = rup.mul(rup.mul(factor_hi, factor_hi),
                     mpfr(s_exact + s_tail, 64, context=rup))
    c_r_lo = rdn.mul(rdn.mul(factor_lo, factor_lo),
                     mpfr(s_exact, 64, context=rdn))

    # deterministic evaluation grid: x1 + w_m <= R, right endpoint included
    points = []
    if m == 1:
        for i in range(1, grid_points + 1):
            points.append((Fraction(Rf * i, grid_points), ()))
    else:
        g = max(1, math.isqrt(grid_points))
        for i, jj in itertools.product(range(1, g + 1), range(1, g + 1)):
            if len(points) >= grid_points:
                break
            x1 = Fraction(Rf * i, 2 * g)
            d = Fraction(Rf * jj, 2 * g * (m - 1))
            points.append((x1, tuple(d * s for s in range(1, m))))

    grid_out = []
    worst = mpfr(0)
    for x1, ws in points:
        vals = f_direct(x1, ws, window, target_rad)
        acc = mpfr(0)
        for ball in vals.values():
            u = ball.mag()
            acc = rup.add(acc, rup.mul(u, u))
        grid_out.append(((float(x1),) + tuple(float(v) for v in ws), float(acc)))
        if acc > worst:
            worst = acc
    if not (worst < c_r_lo):
        raise CertificationError(
            f"squared-sum {float(worst)} is not below the bound {float(c_r_lo)}")
    return L2BoundReport(float(c_r_hi), float(worst), float(m_val),
                         float(s_tail), tuple(grid_out))


def _pow_ctx(v: mpfr, n: int, ctx) -> mpfr:
    out = mpfr(1)
    for _ in range(n):
        out = ctx.mul(out, v)
    return out
