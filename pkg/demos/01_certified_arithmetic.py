"""
Certified arithmetic with midpoint-radius enclosures
====================================================

Every number here is a ball: a midpoint with a radius that is guaranteed
to cover the true value.  Operations round outward, so a chain of them
can be trusted end to end.
"""

from fractions import Fraction

from tpbessel import (
    Sign,
    certified_sign,
    escalate_precision,
    from_exact,
    precision,
)
from tpbessel.scalar import div, exp, mul, sqrt, sub

# -- exact inputs keep a zero radius when they are dyadic ------------------

a = from_exact(Fraction(3, 8))
print("3/8 encloses as:", a)            # exact: representable in binary

b = from_exact("0.1")                   # decimal strings are parsed exactly
print("0.1 encloses as:", b)            # tiny radius: 1/10 is not dyadic

# -- signs are decided only when the whole ball is on one side -------------

tiny = sub(mul(b, from_exact(10)), from_exact(1))   # 10 * 0.1 - 1
print("sign of 10*0.1 - 1:", certified_sign(tiny).name)

# exact dyadic cancellation stays exact, so zero is certified as zero
dy = sub(mul(a, from_exact(2)), from_exact(Fraction(3, 4)))
print("sign of 2*(3/8) - 3/4:", certified_sign(dy).name)

# -- the working precision is an ambient context ---------------------------

with precision(64):
    r64 = sqrt(from_exact(2))
with precision(256):
    r256 = sqrt(from_exact(2))
print("sqrt(2) at 64 bits: ", r64)
print("sqrt(2) at 256 bits:", r256)

# -- escalation re-runs a recipe at doubling precision ---------------------

# the recipe reads the ambient precision, so each re-run starts from the
# exact inputs and lands on a tighter enclosure
value = escalate_precision(lambda: exp(from_exact(1)), target_rad=Fraction(1, 10 ** 40))
print("e to 1e-40:", value)
assert certified_sign(sub(value, from_exact(Fraction(27, 10)))) is Sign.POSITIVE
print("certified: e > 2.7")

# division by a ball that straddles zero is refused rather than guessed
try:
    div(from_exact(1), tiny)
except Exception as exc:
    print("division by a straddling ball:", type(exc).__name__)
