"""H^*(Z(xy - 1)) by the closed-variety route and by the patch pipeline."""

from edrc.engine import closed_variety_cohomology, full_pipeline, same_classes
from edrc.ring import format_form

V = ("x", "y")

closed = closed_variety_cohomology(V, ["x*y - 1"])
pipe = full_pipeline(V, [["x*y - 1"]])

for name, res in (("closed", closed), ("pipeline", pipe)):
    print(f"{name:9s} dims {res.dims_list()}")
    for p, forms in sorted(res.representatives.items()):
        for w in forms:
            print(f"          H^{p}: {format_form(w)}")

R = closed.representatives[1][0].ring
print("same H^1 classes:", same_classes(R, 1, closed.representatives[1], pipe.representatives[1]))
for c in pipe.extra["components"][0]["charts"]:
    print("chart", c["matrix"], "f =", c["f"], "g =", c["g"], "chart dims", c["dims"])
