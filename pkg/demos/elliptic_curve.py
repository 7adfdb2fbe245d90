"""The curve y^2 = x^3 - x, with and without its four points y = 0.

Pass --pipeline to also run the patch pipeline (about half a minute)."""

import sys
import time

from edrc.engine import closed_variety_cohomology, full_pipeline
from edrc.exactpoly import parse_poly
from edrc.hypercoh import hypersurface_cohomology
from edrc.ring import format_form

V = ("x", "y")
f = "y^2 - x^3 + x"

t = time.perf_counter()
res = closed_variety_cohomology(V, [f])
print(f"X = Z(f):           dims {res.dims_list()}  ({time.perf_counter() - t:.2f}s)")
for w in res.representatives[1]:
    print("   H^1:", format_form(w))

t = time.perf_counter()
hs = hypersurface_cohomology(parse_poly(f, V), parse_poly("2*y", V))
print(f"Z(f) minus Z(2y):   dims {hs.dims_list()}  ({time.perf_counter() - t:.2f}s)")
for w, st in zip(hs.representatives[1], hs.stamps[1]):
    print(f"   H^1: {format_form(w)}   stamp {st}")
print("   printed bounds:", hs.extra["bounds"])

if "--pipeline" in sys.argv:
    t = time.perf_counter()
    pipe = full_pipeline(V, [[f]])
    print(f"pipeline:           dims {pipe.dims_list()}  ({time.perf_counter() - t:.2f}s)")
