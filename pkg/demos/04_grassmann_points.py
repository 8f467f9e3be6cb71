"""
Plucker coordinates and positive subspace points
================================================

A wide l x m matrix spans an l-dimensional subspace; its maximal minors
are the Plucker coordinates of that subspace.  When all coordinates can
be certified positive (after a global sign flip if needed), the point is
a positive point of the corresponding Grassmannian.
"""

from tpbessel import (
    GrassmannVerdict,
    KernelMatrix,
    build_bessel_matrix,
    check_grassmann_point,
    h_k_map,
    pluecker,
    pluecker_nonproportional,
)

# -- coordinates of a Bessel row map ------------------------------------------

# rows are evaluations x -> (I_{k_1}(x), ..., I_{k_m}(x)) at l points
M = build_bessel_matrix((0, 1, 2, 3), (0.5, 1.0))
vec = pluecker(M)
for cols, coord in zip(vec.column_sets, vec.coordinates):
    print(f"p_{cols} = {coord}")

report = check_grassmann_point(M)
print("verdict:", report.verdict.value)

# -- the same point through the row-map helper --------------------------------

vec2 = h_k_map((0, 1, 2, 3), (0.5, 1.0))
print("same coordinates via the map:", [str(c) for c in vec2.coordinates][:2], "...")

# -- a global sign flip is allowed ---------------------------------------------

N = KernelMatrix.literal([["-1", "0", "1"], ["0", "1", "2"]])
print("all-negative coordinates:", check_grassmann_point(N).verdict.value)

# -- sign conflicts and rank collapse are rejected ------------------------------

C = KernelMatrix.literal([["1", "0", "1"], ["0", "1", "-2"]])
print("conflicting signs:", check_grassmann_point(C).verdict.value)

R = KernelMatrix.literal([["1", "2", "3"], ["2", "4", "6"]])
print("rank deficient:", check_grassmann_point(R).verdict.value)
assert check_grassmann_point(R).verdict is GrassmannVerdict.NOT_POSITIVE

# -- distinct argument tuples give distinct points -------------------------------

va = pluecker(build_bessel_matrix((0, 1, 2, 3), (0.5, 1.0)))
vb = pluecker(build_bessel_matrix((0, 1, 2, 3), (0.5, 2.0)))
print("points distinguished:", pluecker_nonproportional(va, vb))
