"""
Total positivity certificates for kernel matrices
=================================================

A matrix is certified strictly totally positive by evaluating every
minor up to a requested order in ball arithmetic and proving each sign.
Escalation re-derives entries from their recipes when a minor is too
close to call at the current precision.
"""

import numpy as np

from tpbessel import (
    KernelMatrix,
    TPVerdict,
    build_bessel_matrix,
    build_karlin_matrix,
    build_toeplitz_bessel,
    build_vandermonde,
    check_tp,
    det_certified,
    sign_changes,
)

# -- Bessel kernel matrices are strictly totally positive --------------------

M = build_bessel_matrix((0, 1, 2), ("0.5", 1, 2))
cert = check_tp(M, 3, strict=True)
print("bessel 3x3:", cert.verdict.value, "after", cert.minors_checked, "minors")
print("smallest margin:", cert.min_margin)

# -- a Toeplitz window of the same family -------------------------------------

T = build_toeplitz_bessel(2, range(4), range(4))
print("toeplitz 4x4:", check_tp(T, 3, strict=True).verdict.value)

# -- the translation kernel admits exact zeros --------------------------------

# entries vanish exactly when x_i < y_j, so some minors are exactly zero:
# nonnegative, but not strictly positive
K = build_karlin_matrix(3, 1, (0.5, 1.5, 4.0), (0.1, 2.0, 3.0))
ck = check_tp(K, 3, strict=False)
print("karlin 3x3:", ck.verdict.value)

# -- generalized Vandermonde x^y ----------------------------------------------

V = build_vandermonde((1, 2, 3), (0, 1, 2))
print("vandermonde 3x3:", check_tp(V, 3, strict=True).verdict.value)

# -- a violation is reported with a witness -----------------------------------

L = KernelMatrix.literal([["1", "2"], ["3", "4"]])
cl = check_tp(L, 2)
sel, det = cl.witness
print("literal [[1,2],[3,4]]:", cl.verdict.value,
      "witness minor", sel.rows, sel.cols, "=", det)

# the determinant enclosure of an exact matrix is exact
print("det:", det_certified(L))

# -- certified positivity has teeth: variation diminishing --------------------

rng = np.random.default_rng(7)
B = build_bessel_matrix((0, 2, 5, 9), (0.5, 1.0, 2.5, 6.0))
assert check_tp(B, 4, strict=True).verdict is TPVerdict.STRICTLY_POSITIVE
A = np.array([[float(B.entry(i, j).mid) for j in range(4)] for i in range(4)])
for _ in range(5):
    v = rng.standard_normal(4)
    print(f"sign changes: v has {sign_changes(v)}, Av has {sign_changes(A @ v)}")
