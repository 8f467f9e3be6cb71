"""Index windows, the lattice Laplacian, certified initial data, the
finite-difference consistency check, flow integration, and the l2 bound."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from tpbessel.bessel import bessel_i
from tpbessel.heatflow import (
    FlowState,
    discrete_laplacian,
    f_direct,
    flow_integrate,
    flow_matrix,
    flow_rhs,
    index_window,
    l2_bound,
    residual_check,
)
from tpbessel.scalar import CertificationError, DomainError, precision

SEED = 20260819


def test_window_members_small():
    assert index_window(1, 2).members == ((0,), (1,), (2,))
    assert index_window(2, 2).members == ((0, 1), (0, 2), (1, 2))
    w = index_window(3, 4)
    assert len(w) == 10
    assert w.members[0] == (0, 1, 2)
    assert w.members[-1] == (2, 3, 4)
    # colexicographic: last coordinate is the slowest
    lasts = [p[-1] for p in w.members]
    assert lasts == sorted(lasts)


def test_window_count_and_membership():
    w = index_window(2, 14)
    assert len(w) == math.comb(15, 2)
    assert (0, 14) in w
    assert (14, 0) not in w
    assert (0, 15) not in w
    assert w.position[(0, 1)] == 0


def test_window_validation():
    with pytest.raises(DomainError):
        index_window(0, 3)
    with pytest.raises(DomainError):
        index_window(3, 1)


def test_window_interior_mask():
    w = index_window(2, 4)
    mask = w.interior_mask()
    for p, inside in zip(w.members, mask):
        assert inside == (p[-1] <= 2)


def indicator(q, window):
    return {p: (1.0 if p == q else 0.0) for p in window.members}


def test_laplacian_indicator_values():
    w2 = index_window(2, 6)
    assert discrete_laplacian(indicator((0, 1), w2), (0, 1), w2) == -2.0
    w1 = index_window(1, 6)
    assert discrete_laplacian(indicator((1,), w1), (0,), w1) == 1.0
    assert discrete_laplacian(indicator((0,), w1), (0,), w1) == -1.0


def test_laplacian_rejects_foreign_point():
    w = index_window(2, 4)
    f = indicator((0, 1), w)
    with pytest.raises(DomainError):
        discrete_laplacian(f, (0, 9), w)


def test_flow_matrix_weights():
    w = index_window(2, 2)
    B = flow_matrix(w).toarray()
    # (0,1) only survives an upward shift of its second index
    i = w.position[(0, 1)]
    assert B[i, w.position[(0, 2)]] == 0.5
    assert B[i].sum() == 0.5
    # values are half-weights, possibly merged
    vals = set(np.unique(B)) - {0.0}
    assert vals <= {0.5, 1.0}
    assert (B >= 0).all()


def test_flow_matrix_single_row_case():
    w = index_window(1, 3)
    B = flow_matrix(w).toarray()
    # reflected and ordinary neighbors of (0,) coincide at (1,)
    assert list(B[w.position[(0,)]]) == [0.0, 1.0, 0.0, 0.0]


def test_flow_rhs_matches_componentwise_form():
    rng = np.random.default_rng(SEED)
    w = index_window(2, 5)
    f = {p: float(v) for p, v in zip(w.members, rng.uniform(0, 1, len(w)))}
    state = FlowState(0.5, (1.0,), w, f)
    rhs = flow_rhs(state)
    for p in w.members:
        expect = discrete_laplacian(f, p, w) + 2 * f[p]
        assert abs(rhs[p] - expect) < 1e-12


def test_flow_state_validation():
    w = index_window(2, 3)
    f = {p: 1.0 for p in w.members}
    with pytest.raises(DomainError):
        FlowState(-0.1, (1.0,), w, f)
    with pytest.raises(DomainError):
        FlowState(0.5, (), w, f)          # wrong offset count
    with pytest.raises(DomainError):
        FlowState(0.5, (2.0, 1.0), index_window(3, 4),
                  {p: 1.0 for p in index_window(3, 4).members})
    short = dict(f)
    del short[(0, 1)]
    with pytest.raises(DomainError):
        FlowState(0.5, (1.0,), w, short)


def test_f_direct_initial_condition_m2():
    w = index_window(2, 4)
    f0 = f_direct(0, (1,), w, target_rad=1e-25)
    with precision(96):
        expect = bessel_i(1, 1)
    assert abs(float(f0[(0, 1)].mid) - float(expect.mid)) < 1e-20
    # rows with no order-0 column vanish identically at x1 = 0
    assert f0[(1, 2)].is_exact and f0[(1, 2)].mid == 0
    assert f0[(2, 3)].is_exact and f0[(2, 3)].mid == 0
    # f[(0,k)] at x1 = 0 reduces to a single transcendental value
    with precision(96):
        expect2 = bessel_i(3, 1)
    assert abs(float(f0[(0, 3)].mid) - float(expect2.mid)) < 1e-20


def test_f_direct_m1_is_plain_evaluation():
    w = index_window(1, 5)
    vals = f_direct(Fraction(3, 2), (), w, target_rad=1e-25)
    for j in range(6):
        with precision(96):
            expect = bessel_i(j, Fraction(3, 2))
        assert abs(float(vals[(j,)].mid) - float(expect.mid)) < 1e-20


def test_f_direct_validation():
    w = index_window(2, 4)
    with pytest.raises(DomainError):
        f_direct(-1, (1,), w)
    with pytest.raises(DomainError):
        f_direct(1, (), w)
    with pytest.raises(DomainError):
        f_direct(1, (2, 1), index_window(3, 4))


def test_residual_small_and_second_order():
    w = index_window(2, 10)
    r1 = residual_check(Fraction(1, 2), (1,), w, Fraction(1, 10 ** 4))
    assert r1.max_rel_interior < 1e-6
    assert r1.interior_included > 0
    r2 = residual_check(Fraction(1, 2), (1,), w, Fraction(1, 2 * 10 ** 4))
    ratio = r1.max_rel_interior / r2.max_rel_interior
    assert 3.5 < ratio < 4.5          # central difference is second order


def test_residual_validation_and_report_shape():
    w = index_window(2, 6)
    with pytest.raises(DomainError):
        residual_check(Fraction(1, 2), (1,), w, Fraction(1, 2))
    with pytest.raises(DomainError):
        residual_check(Fraction(1, 2), (1,), w, 0)
    rep = residual_check(Fraction(1, 2), (1,), w, Fraction(1, 10 ** 3))
    obj = rep.to_json()
    for key in ("x1", "w", "h", "max_rel_interior", "max_rel_boundary",
                "interior_included", "boundary_included", "excluded_below_floor"):
        assert key in obj
    json.dumps(obj)
    assert rep.interior_included + rep.boundary_included + rep.excluded_below_floor == len(w)


def test_flow_endpoint_matches_direct():
    w = index_window(2, 8)
    traj = flow_integrate((1,), w, Fraction(1, 2), step=1e-3, samples=5)
    direct = f_direct(Fraction(1, 2), (1,), w, target_rad=1e-25)
    final = traj.final()
    mask = w.interior_mask()
    worst = max(abs(final[p] - float(direct[p].mid))
                for p, inside in zip(w.members, mask) if inside)
    assert worst < 1e-6
    assert traj.cone_min >= -1e-12


def test_flow_trajectory_outputs():
    w = index_window(2, 5)
    traj = flow_integrate((1,), w, Fraction(1, 10), step=1e-3, samples=6)
    csv = traj.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0].startswith("x1,k=0-1,")
    assert len(lines) == 1 + 6
    assert len(lines[0].split(",")) == 1 + len(w)
    obj = traj.to_json()
    assert obj["samples"][0] == 0.0
    assert obj["samples"][-1] == pytest.approx(0.1)
    json.dumps(obj)


def test_flow_truncation_bound_cases():
    # hypotheses fail: argument reach at most 1
    t1 = flow_integrate((), index_window(1, 6), Fraction(1, 2), step=1e-2, samples=2)
    assert t1.truncation_bound is None
    # window too short for the reach
    t2 = flow_integrate((), index_window(1, 2), 2, step=1e-2, samples=2)
    assert t2.truncation_bound is None
    # documented shape: bound is tiny and certified
    t3 = flow_integrate((1,), index_window(2, 14), 1, step=1e-2, samples=2)
    assert t3.truncation_bound is not None
    assert t3.truncation_bound < 1e-6


def test_flow_validation():
    w = index_window(2, 5)
    with pytest.raises(DomainError):
        flow_integrate((1,), w, 0)
    with pytest.raises(DomainError):
        flow_integrate((1,), w, 1, step=0)
    with pytest.raises(DomainError):
        flow_integrate((), w, 1)


def test_l2_bound_small():
    w = index_window(1, 12)
    rep = l2_bound(2, 1, w, grid_points=5, z_grid_points=40, target_rad=1e-20)
    c_r, partial = rep
    assert partial < c_r
    assert rep.m_bound > 0
    assert len(rep.grid) == 5
    json.dumps(rep.to_json())


def test_l2_bound_validation():
    with pytest.raises(DomainError):
        l2_bound(1, 1, index_window(1, 10))
    # tail ratio at least one: no convergent majorant from this window
    with pytest.raises(DomainError):
        l2_bound(3, 1, index_window(1, 2))
