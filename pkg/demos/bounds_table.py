"""Main degree bound for small (p, m, D)."""

from edrc.engine import bounds_report

print(f"{'p':>2} {'m':>2} {'D':>2}  bound")
for p in (1, 2):
    for m in (1, 2):
        for D in (2, 3):
            v = bounds_report(p=p, m=m, D=D).values["main"]
            print(f"{p:2d} {m:2d} {D:2d}  {v:.3e}  ({len(str(v))} digits)")
