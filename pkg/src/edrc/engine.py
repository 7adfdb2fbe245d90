"""Orchestration: bounds, the closed-variety route, the patch pipeline, jobs.

Truncations never start at the printed bounds, which are astronomically large
even for plane curves.  Computations start from small windows and grow until
dimensions settle; the bounds are reported next to the observed stamps.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cech import Cover, TotalCochain, CechCochain, thm53_bound, zigzag_collapse
from .certificates import (find_certificate, idempotents_jelonek, idempotents_kollar, ns_bound,
                           ns_branches, verify_certificate, verify_idempotents)
from .exactpoly import MultiPoly, NEG_INF, ParseError, parse_poly
from .gysin import GysinSetup, QuotientForm, lambda_map, residue, thm62_bound, to_V, v_simplify
from .hypercoh import (CohomologyResult, cech_de_rham_complex, closed_cohomology, default_dim,
                       hypersurface_cohomology, rank_mod_exact, stabilized_cohomology,
                       thm71_bound)
from .resolve import patch_cover, transport_forms
from .ring import AffineRing, DiffForm, filtration_stamp, format_form, sort_sign


class PreconditionError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# bounds


def main_bound(p: int, m: int, D: int) -> int:
    e = 2 * p * m + 6 * m
    return 2 ** (e + 2) * p ** (e + 1) * D ** (4 * p * m + 10 * m + 1) + D ** (m + 1)


def prop31_bound(D: int, m: int) -> int:
    return D ** (m + 1)


def prop32_bound(n: int, D: int) -> int:
    # (n + 1) D^2 / 4, rounded down: it only ever caps integer degrees
    return int(Fraction((n + 1) * D * D, 4))


def thm22_bound(n: int, Ds: Sequence[int]) -> int:
    out = n + 1
    for x in Ds:
        out *= x
    return out


def lemma51_bound(D: int, s: int, d1: int, m: int) -> int:
    return 2 * D * (s * d1) ** m


_NEEDS = {
    "main": ("p", "m", "D"),
    "prop31": ("D", "m"),
    "prop32": ("n", "D"),
    "cor41": ("n", "D", "m"),
    "thm21": ("D", "d", "t", "m", "n"),
    "thm22": ("n", "Ds"),
    "lemma51": ("D", "s", "d1", "m"),
    "thm53": ("d", "D", "l", "s", "m", "d1"),
    "thm62": ("d0", "d1", "s", "deg_alpha"),
    "thm71": ("p", "d", "dp"),
}


@dataclass
class BoundReport:
    inputs: dict
    values: dict = field(default_factory=dict)
    missing: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"inputs": self.inputs, "values": self.values, "missing": self.missing}


def bounds_report(require: Sequence[str] = (), **inputs) -> BoundReport:
    """Every formula whose inputs are present, as exact integers.

    Formulas named in ``require`` must be computable."""
    given = {k: v for k, v in inputs.items() if v is not None}
    rep = BoundReport(dict(sorted(given.items())))
    for name, needs in _NEEDS.items():
        absent = [k for k in needs if k not in given]
        if absent:
            rep.missing[name] = absent
            continue
        g = given
        if name == "main":
            v = main_bound(g["p"], g["m"], g["D"])
        elif name == "prop31":
            v = prop31_bound(g["D"], g["m"])
        elif name == "prop32":
            v = prop32_bound(g["n"], g["D"])
        elif name == "cor41":
            v = min(prop31_bound(g["D"], g["m"]), prop32_bound(g["n"], g["D"]))
        elif name == "thm21":
            v = ns_branches(g["D"], g["d"], g["t"], g["m"], g["n"])
        elif name == "thm22":
            v = thm22_bound(g["n"], g["Ds"])
        elif name == "lemma51":
            v = lemma51_bound(g["D"], g["s"], g["d1"], g["m"])
        elif name == "thm53":
            v = thm53_bound(g["d"], g["D"], g["l"], g["s"], g["m"], g["d1"])
        elif name == "thm62":
            v = thm62_bound(g["d0"], g["d1"], g["s"], g["deg_alpha"])
        else:
            v = thm71_bound(g["p"], g["d"], g["dp"])
        rep.values[name] = v
    bad = [r for r in require if r in rep.missing]
    if bad:
        raise PreconditionError("missing inputs: " + "; ".join(
            f"{r} needs {', '.join(rep.missing[r])}" for r in bad))
    return rep


def degree_bound(p: int, m: int, n: int, D: int) -> int:
    """Ceiling printed beside H^p representatives: the main bound for p >= 1,
    the idempotent degree bound min(D^(m+1), (n+1)D^2/4) for p = 0."""
    if p >= 1:
        return main_bound(p, m, D)
    return min(prop31_bound(D, m), prop32_bound(n, D))


# routes


def _ring(vars, generators) -> AffineRing:
    gens = [g if isinstance(g, MultiPoly) else parse_poly(g, vars) for g in generators]
    gens = [g for g in gens if not g.is_zero()]
    if any(g.is_constant() for g in gens):
        raise PreconditionError("the ideal contains a nonzero constant: X is empty")
    return AffineRing(vars, gens)


def degree_guess(ring: AffineRing) -> int:
    """Product of generator degrees, a Bezout bound for deg X."""
    out = 1
    for g in ring.generators:
        out *= max(int(g.degree()), 1)
    return out


def closed_variety_cohomology(vars, generators, truncation: dict | None = None,
                              dim: int | None = None) -> CohomologyResult:
    """Direct route: the global-section de Rham complex of k[X]."""
    ring = _ring(vars, generators)
    degree = (truncation or {}).get("d")
    res = closed_cohomology(ring, dim=dim, degree=degree)
    m = default_dim(ring) if dim is None else dim
    D = degree_guess(ring)
    res.extra["route"] = "closed"
    res.extra["bounds"] = {p: degree_bound(p, m, len(vars), D) for p in res.dims}
    return res


def _level_forms(cx, level: int, coch: dict, s: int) -> TotalCochain:
    cells: dict = {}
    for I, (p, num) in coch.items():
        q = len(I) - 1
        w = DiffForm._raw(cx.ring, p, {K: a for K, a in num.items() if not a.is_zero()},
                          cx.divisor(I), s)
        cells.setdefault(q, CechCochain(q, p, {})).entries[I] = w
    return TotalCochain(level, cells)


def _tidy(w: DiffForm) -> DiffForm:
    """Normal form of a glued global form, kept only if it is no larger."""
    if w.order != 0 or not w.num:
        return w
    try:
        nf = w.ring.form_normal_form(w.num, w.p)
    except ValueError:
        return w
    v = DiffForm._raw(w.ring, w.p, nf, w.divisor, 0)
    return v if filtration_stamp(v).degree_d <= filtration_stamp(w).degree_d else w


def _component(ring: AffineRing, m: int, D: int, seed: int, s: int, patience: int,
               patch_route: bool) -> dict:
    out = {"charts": [], "dims": {}, "forms": {}, "stamps": {}, "certified": {}, "thm53": {},
           "windows": {}}
    try:
        cover_data = patch_cover(ring, m, D, seed=seed)
    except Exception as exc:
        raise StageError("patch_cover", exc) from exc
    divisors = cover_data.divisors
    for chart in cover_data.charts:
        info = {"matrix": [[int(x) for x in row] for row in chart.matrix], "f": str(chart.f),
                "g": str(chart.g_x)}
        if patch_route:
            try:
                hr = hypersurface_cohomology(chart.f, chart.g, p_max=m)
                moved = {p: transport_forms(chart, ring, ws) for p, ws in hr.representatives.items()}
            except Exception as exc:
                raise StageError("patch_cohomology", exc) from exc
            info["dims"] = hr.dims_list()
            info["transported"] = {p: len(ws) for p, ws in moved.items()}
            info["certified"] = hr.all_certified
        out["charts"].append(info)
    cover = Cover(ring, divisors, D, m)
    cx = cech_de_rham_complex(ring, divisors)
    d1 = cover.d1
    for level in range(m + 1):
        try:
            lr = stabilized_cohomology(cx, level, s, level + 1, patience=patience)
        except Exception as exc:
            raise StageError("cech_de_rham", exc) from exc
        forms, stamps = [], []
        bound = None
        for coch, deg in zip(lr.representatives, lr.degrees):
            try:
                z = zigzag_collapse(cover, _level_forms(cx, level, coch, s))
            except Exception as exc:
                raise StageError("zigzag", exc) from exc
            z.form = _tidy(z.form)
            st = filtration_stamp(z.form)
            b = thm53_bound(int(deg), D, level, s, m, d1)
            bound = b if bound is None else max(bound, b)
            if st.degree_d != NEG_INF and st.degree_d > b:
                raise StageError("zigzag", AssertionError(f"stamp {tuple(st)} exceeds {b}"))
            forms.append(z.form)
            stamps.append(tuple(st))
        out["dims"][level] = lr.dim
        out["forms"][level] = forms
        out["stamps"][level] = stamps
        out["certified"][level] = lr.certified
        out["thm53"][level] = bound
        out["windows"][level] = lr.windows
    out["cover_certificate_degree"] = cover_data.certificate.achieved_degree
    return out


def full_pipeline(vars, components: Sequence[Sequence], dims: Sequence[int] | None = None,
                  degrees: Sequence[int] | None = None, seed: int = 0, s: int = 1,
                  patience: int = 2, patch_route: bool = True,
                  method: str = "kollar") -> CohomologyResult:
    """Per component: patch cover, per-chart hypersurface cohomology moved to
    the patches, Cech-de Rham total complex of the cover, zig-zag to global
    forms.  Components are glued back with idempotents."""
    t_start = time.perf_counter()
    rings = [_ring(vars, c) for c in components]
    if not rings:
        raise PreconditionError("no components given")
    ms = list(dims) if dims is not None else [default_dim(r) for r in rings]
    Ds = list(degrees) if degrees is not None else [degree_guess(r) for r in rings]
    res = CohomologyResult()
    res.extra["route"] = "pipeline"
    t0 = time.perf_counter()
    if len(rings) > 1:
        gens = [list(r.generators) for r in rings]
        try:
            if method == "jelonek":
                idem = idempotents_jelonek([(g, D, m) for g, D, m in zip(gens, Ds, ms)])
            else:
                idem = idempotents_kollar(gens, Ds)
        except Exception as exc:
            raise StageError("idempotents", exc) from exc
        es = idem.idempotents
        res.extra["idempotent_degrees"] = idem.degrees
    else:
        es = [MultiPoly.const(tuple(vars), 1)]
    res.timings["idempotents"] = time.perf_counter() - t0
    comps = []
    for i, (ring, m, D) in enumerate(zip(rings, ms, Ds)):
        t0 = time.perf_counter()
        comps.append(_component(ring, m, D, seed + i, s, patience, patch_route))
        res.timings[f"component{i}"] = time.perf_counter() - t0
    top = max(ms)
    for p in range(top + 1):
        forms, stamps, cert = [], [], True
        for i, c in enumerate(comps):
            if p not in c["dims"]:
                continue
            for w in c["forms"][p]:
                if len(comps) > 1:
                    w = DiffForm._raw(w.ring, w.p, {K: a * es[i] for K, a in w.num.items()},
                                      w.divisor, w.order)
                forms.append(w)
                stamps.append(tuple(filtration_stamp(w)))
            cert = cert and c["certified"][p]
        res.dims[p] = len(forms)
        res.representatives[p] = forms
        res.stamps[p] = stamps
        res.certified[p] = cert
    n = len(vars)
    Dtot = sum(Ds)
    res.extra["bounds"] = {p: degree_bound(p, max(ms), n, Dtot) for p in res.dims}
    res.extra["components"] = [{k: c[k] for k in ("charts", "dims", "stamps", "thm53", "windows",
                                                  "cover_certificate_degree")} for c in comps]
    res.timings["total"] = time.perf_counter() - t_start
    return res


def same_classes(ring: AffineRing, p: int, a: Sequence[DiffForm], b: Sequence[DiffForm]) -> bool:
    """a and b span the same subspace of H^p (tested in a degree window)."""
    ra = rank_mod_exact(ring, p, a)
    rb = rank_mod_exact(ring, p, b)
    return ra == rb == rank_mod_exact(ring, p, list(a) + list(b))


# jobs


MODES = ("bounds", "certificate", "idempotents", "cohomology-closed", "cohomology-pipeline",
         "hypersurface-cohomology", "residue", "resolve")

_REQUIRED = {
    "certificate": ("vars", "generators"),
    "idempotents": ("vars", "components"),
    "cohomology-closed": ("vars",),
    "cohomology-pipeline": ("vars",),
    "hypersurface-cohomology": ("vars", "f", "g"),
    "residue": ("vars", "f", "g", "form"),
    "resolve": ("vars", "ideal"),
}


@dataclass
class JobSpec:
    mode: str
    vars: list = field(default_factory=list)
    ideal: list = field(default_factory=list)        # generators of X
    generators: list = field(default_factory=list)   # certificate inputs g_i
    components: list = field(default_factory=list)
    dims: list | None = None
    degrees: list | None = None
    f: str | None = None
    g: str | None = None
    form: dict | None = None
    p_max: int | None = None
    truncation: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    order: int = 1
    apply_lambda: bool = False
    route: str = "closed"
    method: str = "kollar"
    cap: int | None = None
    seed: int = 0
    output: str | None = None

    def validate(self):
        if self.mode not in MODES:
            raise PreconditionError(f"unknown mode {self.mode!r}")
        for k in _REQUIRED.get(self.mode, ()):
            v = getattr(self, k)
            if v is None or (k != "ideal" and isinstance(v, (list, dict, str)) and not v):
                raise PreconditionError(f"mode {self.mode} needs field {k!r}")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "JobSpec":
        if not isinstance(data, dict) or "mode" not in data:
            raise PreconditionError("job must be an object with a 'mode' field")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(data) - known)
        if extra:
            raise PreconditionError(f"unknown job fields: {', '.join(extra)}")
        return cls(**data).validate()

    @classmethod
    def from_json(cls, text: str) -> "JobSpec":
        return cls.from_dict(json.loads(text))


# running jobs


def _num(v):
    if v == NEG_INF or v is None:
        return None
    return int(v)


def parse_form(text_map: dict, vars, field_name: str = "form") -> tuple:
    """{"dx^dy": "poly", "": "poly"} -> (p, {index tuple: MultiPoly}).

    Keys list differentials of the given variables; reordering picks up the sign."""
    num: dict = {}
    p = None
    for key, val in text_map.items():
        key = key.strip()
        names = [] if key in ("", "1") else [t.strip() for t in key.split("^")]
        idx = []
        for t in names:
            if not t.startswith("d") or t[1:] not in vars:
                raise ParseError(f"{field_name}: bad differential {t!r}", 1, 1)
            idx.append(list(vars).index(t[1:]))
        if len(set(idx)) != len(idx):
            continue
        if p is None:
            p = len(idx)
        elif p != len(idx):
            raise PreconditionError(f"{field_name}: mixed form degrees")
        a = parse_poly(str(val), vars) * sort_sign(idx)
        I = tuple(sorted(idx))
        num[I] = num[I] + a if I in num else a
    return (p or 0), {I: a for I, a in num.items() if not a.is_zero()}


def _polys(texts, vars, what):
    out = []
    for t in texts:
        try:
            out.append(parse_poly(t, vars) if isinstance(t, str) else t)
        except ParseError as exc:
            raise ParseError(f"{what} {t!r}: {exc.msg}", exc.line, exc.col) from None
    return out


def _rep_json(p: int, w: DiffForm, certified: bool) -> dict:
    st = filtration_stamp(w)
    return {"p": p, "form": format_form(w), "order": int(w.order), "degree": _num(st.degree_d),
            "certified": bool(certified)}


def _result_json(res: CohomologyResult, extra: dict | None = None) -> dict:
    reps = []
    for p in sorted(res.representatives):
        for w in res.representatives[p]:
            reps.append(_rep_json(p, w, res.certified.get(p, False)))
    out = {"dims": res.dims_list(), "representatives": reps,
           "bounds": {str(p): v for p, v in sorted(res.extra.get("bounds", {}).items())},
           "certified": {str(p): bool(c) for p, c in sorted(res.certified.items())},
           "stopping_rule": "degree windows grow from the start window until the dimension "
                            "repeats; coboundary margins must also agree",
           "timings": dict(res.timings)}
    if extra:
        out.update(extra)
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float):
        return None if x != x or x in (float("inf"), float("-inf")) else x
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, MultiPoly):
        return str(x)
    try:
        return int(x)
    except (TypeError, ValueError):
        return str(x)


def _stage(name):
    def wrap(fn):
        def inner(*a, **k):
            try:
                return fn(*a, **k)
            except (PreconditionError, ParseError, StageError):
                raise
            except ValueError as exc:
                if type(exc).__name__.endswith("Precondition"):
                    raise PreconditionError(str(exc)) from exc
                raise StageError(name, exc) from exc
            except (RuntimeError, AssertionError, ArithmeticError) as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


@_stage("bounds")
def _job_bounds(job: JobSpec) -> dict:
    rep = bounds_report(**job.bounds)
    return {"dims": [], "representatives": [], "bounds": rep.values,
            "inputs": rep.inputs, "missing": rep.missing, "timings": {}}


@_stage("certificate")
def _job_certificate(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    ring = _ring(vars, _polys(job.ideal, vars, "ideal generator"))
    gs = _polys(job.generators, vars, "generator")
    m = job.dims[0] if job.dims else default_dim(ring)
    D = job.degrees[0] if job.degrees else degree_guess(ring)
    d = max(max(int(g.degree()), 1) for g in gs)
    bound = ns_bound(D, d, len(gs), m, len(vars))
    cap = bound if job.cap is None else job.cap
    t0 = time.perf_counter()
    cert = find_certificate(ring, gs, cap)
    ok = verify_certificate(ring, cert)
    if not ok:
        raise AssertionError("certificate failed verification")
    return {"dims": [], "representatives": [], "bounds": {"thm21": bound, "cap": cap},
            "cofactors": [str(h) for h in cert.cofactors],
            "achieved_degree": cert.achieved_degree, "verified": ok, "certified": {"all": ok},
            "timings": {"certificate": time.perf_counter() - t0}}


@_stage("idempotents")
def _job_idempotents(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    comps = [_polys(c, vars, "component generator") for c in job.components]
    t0 = time.perf_counter()
    Ds = job.degrees or [degree_guess(AffineRing(vars, c)) for c in comps]
    if job.method == "jelonek":
        ms = job.dims or [max(len(vars) - len(c), 0) for c in comps]
        idem = idempotents_jelonek([(c, D, m) for c, D, m in zip(comps, Ds, ms)])
    else:
        idem = idempotents_kollar(comps, Ds)
    ok = verify_idempotents(vars, comps, idem.idempotents)
    return {"dims": [], "representatives": [], "bounds": {"cap": idem.bound},
            "idempotents": [str(e) for e in idem.idempotents], "degrees": idem.degrees,
            "max_degree": idem.max_degree, "method": idem.method, "verified": ok,
            "certified": {"all": ok}, "timings": {"idempotents": time.perf_counter() - t0}}


def _job_cohomology(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    if job.mode == "cohomology-pipeline" or job.route == "pipeline":
        comps = job.components or [job.ideal]
        comps = [_polys(c, vars, "ideal generator") for c in comps]
        res = _stage("pipeline")(full_pipeline)(vars, comps, job.dims, job.degrees, seed=job.seed)
        extra = {"route": "pipeline", "components": res.extra.get("components", [])}
        if "idempotent_degrees" in res.extra:
            extra["idempotent_degrees"] = res.extra["idempotent_degrees"]
    else:
        gens = _polys(job.ideal, vars, "ideal generator")
        dim = job.dims[0] if job.dims else None
        res = _stage("closed")(closed_variety_cohomology)(vars, gens, job.truncation, dim)
        extra = {"route": "closed", "truncation": res.truncation}
    return _result_json(res, _jsonable(extra))


@_stage("hypersurface")
def _job_hypersurface(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    f, g = _polys([job.f, job.g], vars, "polynomial")
    res = hypersurface_cohomology(f, g, p_max=job.p_max, degree=job.truncation.get("d"))
    extra = {"route": "hypersurface", "residue_checks": res.extra.get("residue_checks", {}),
             "gamma_violations": res.extra.get("gamma_violations", []),
             "truncation": res.truncation}
    return _result_json(res, _jsonable(extra))


@_stage("residue")
def _job_residue(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    f, g = _polys([job.f, job.g], vars, "polynomial")
    setup = GysinSetup(f, g)
    if setup.empty:
        raise PreconditionError("f is constant: V is empty")
    t0 = time.perf_counter()
    p, num = parse_form(job.form, setup.A_vars)
    if job.apply_lambda:
        w = lambda_map(setup, num, p)
    else:
        w = QuotientForm(p, num, job.order)
    r = residue(setup, w)
    out_p = max(w.p - 2, 0)
    v = v_simplify(to_V(setup, r.form, out_p)) if w.p >= 2 else None
    B = DiffForm(AffineRing(setup.A_vars, []), out_p, r.form) if r.form else None
    return {"dims": [], "representatives": [_rep_json(out_p, v, True)] if v is not None else [],
            "residue": format_form(B) if B is not None else "0",
            "residue_degree": _num(r.degree), "bounds": {"thm62": r.bound},
            "x0": setup.x0, "gamma_violations": list(setup.violations),
            "timings": {"residue": time.perf_counter() - t0}}


@_stage("resolve")
def _job_resolve(job: JobSpec) -> dict:
    vars = tuple(job.vars)
    ring = _ring(vars, _polys(job.ideal, vars, "ideal generator"))
    m = job.dims[0] if job.dims else default_dim(ring)
    D = job.degrees[0] if job.degrees else degree_guess(ring)
    t0 = time.perf_counter()
    cov = patch_cover(ring, m, D, seed=job.seed)
    charts = [{"matrix": [[int(x) for x in row] for row in c.matrix], "u_vars": list(c.u_vars),
               "f": str(c.f), "g": str(c.g_x), "w": [str(x) for x in c.w], "attempt": c.attempt}
              for c in cov.charts]
    cert = cov.certificate
    return {"dims": [], "representatives": [], "bounds": {"prop31": prop31_bound(D, m)},
            "charts": charts,
            "cover_certificate": {"cofactors": [str(h) for h in cert.cofactors],
                                  "achieved_degree": cert.achieved_degree} if cert else None,
            "timings": {"resolve": time.perf_counter() - t0}}


_RUNNERS = {
    "bounds": _job_bounds,
    "certificate": _job_certificate,
    "idempotents": _job_idempotents,
    "cohomology-closed": _job_cohomology,
    "cohomology-pipeline": _job_cohomology,
    "hypersurface-cohomology": _job_hypersurface,
    "residue": _job_residue,
    "resolve": _job_resolve,
}


def run_job(job: JobSpec) -> dict:
    """Result JSON for a validated job."""
    job.validate()
    return _jsonable(_RUNNERS[job.mode](job))


def uncertified(result: dict) -> bool:
    return any(not c for c in result.get("certified", {}).values()) or \
        any(not r.get("certified", True) for r in result.get("representatives", []))
