"""
Rigorous modified Bessel values I_j(x)
======================================

The series evaluation carries a certified truncation bound, so each
value is an enclosure.  An independent quadrature rule gives a second
enclosure; the two must overlap, and they do.
"""

from fractions import Fraction

from tpbessel import (
    bessel_i,
    bessel_i_quadrature,
    from_exact,
    generating_partial_sum,
    precision,
    tail_bound,
)
from tpbessel.scalar import exp, sub

# -- point values at a requested radius -------------------------------------

v = bessel_i(0, 1, target_rad=Fraction(1, 10 ** 30))
print("I_0(1) =", v)

# negative integer orders fold onto positive ones
print("I_-3(2) =", bessel_i(-3, 2))
print("I_3(2)  =", bessel_i(3, 2))

# real orders go through a certified Gamma evaluation
print("I_{1/2}(1) =", bessel_i(Fraction(1, 2), 1))

# -- the quadrature route agrees --------------------------------------------

with precision(96):
    x = from_exact(Fraction(5))
    series = bessel_i(7, x)
    quad = bessel_i_quadrature(7, x, 256)
print("series:    ", series)
print("quadrature:", quad)
overlap = abs(float(series.mid) - float(quad.mid)) <= float(series.rad) + float(quad.rad)
print("enclosures overlap:", overlap)

# -- order tails die factorially --------------------------------------------

# for |z| <= R every order j sits below R^j / j! (up to the ratio factor),
# so a certified upper bound for the whole tail is cheap
for r, j in ((2, 4), (3, 9)):
    print(f"tail bound for orders >= {j} on |z| <= {r}:", tail_bound(j, r))

# -- the two-sided generating identity ---------------------------------------

# I_0(y) + sum_j I_j(y) (z^j + z^-j) telescopes to e^{(y/2)(z + 1/z)};
# at z = 1 the right side is e^y
with precision(128):
    total = generating_partial_sum(2, 1, 40)
    target = exp(from_exact(2))
    gap = sub(total, target)
print("partial sum at z=1:", total)
print("e^2:               ", target)
print("difference:        ", gap)
