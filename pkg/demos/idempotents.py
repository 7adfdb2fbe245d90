"""Idempotents splitting Z(x1, x2*x3 - 1) u Z(x1*x3 - x2^2) in 3-space."""

from edrc.certificates import idempotents_kollar, verify_idempotents
from edrc.exactpoly import parse_poly

V = ("x1", "x2", "x3")
comps = [[parse_poly("x1", V), parse_poly("x2*x3 - 1", V)], [parse_poly("x1*x3 - x2^2", V)]]
idem = idempotents_kollar(comps, [2, 2])
for e in idem.idempotents:
    print("e =", e)
print("degrees", idem.degrees, "cap", idem.bound, "verified", verify_idempotents(V, comps, idem.idempotents))
