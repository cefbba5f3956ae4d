"""Seeded identity, law, and flux batteries.

Shared by the CLI and the acceptance tests so both report the same
numbers for the same (config, seed, flags).  Every battery returns a
plain dict::

    {"battery": <name>, "pass": bool, "tolerances": {...},
     "checks": [{"name": ..., "value": ..., "tolerance": ...,
                 "pass": bool, ...}, ...]}

with residuals reported relative to the scale of the largest
constituent term unless marked absolute.

Randomness uses numpy's PCG64 generator explicitly (a fixed, documented
algorithm), so a seed reproduces the same points, fields, and reports
on every platform.
"""

from __future__ import annotations

import math

import numpy as np

from . import clifford, exprdsl, mass
from .chart import MetricChart, conformal_rescale, metric_jets, scale_coordinates
from .config import LoadedConfig
from .curvature import christoffels, codiff_oneform, curvature
from .exprdsl import Call, Num, Var, eadd, emul
from .jets import evaluate_jet, seed_point
from .spinor import (SpinorFieldSpec, dirac_composed, dirac_squared_expansion,
                     h_jet, lichnerowicz_I_residual, lichnerowicz_II_residual,
                     make_spinor_spec, norm_identity_residual, spinor_calc,
                     spinor_jets, spinor_values)
from .weyl import weyl_scalar

__all__ = [
    "TOLERANCES",
    "rng_for",
    "sample_points",
    "random_spinor_spec",
    "identity_battery",
    "clifford_battery",
    "curvature_battery",
    "laws_battery",
    "witten_battery",
]

TOLERANCES = {
    # relative, jet-exact identities
    "two_path_rel": 1e-10,
    "weyl_scalar_covariance_rel": 1e-10,
    "lichnerowicz_rel": 1e-8,
    "dirac_expansion_rel": 1e-8,
    "norm_identity_rel": 1e-8,
    # Clifford algebra
    "clifford_exact": 0.0,
    "clifford_identity": 1e-14,
    # mass laws
    "mass_law_rel": 5e-3,
    "scaling_match": 1e-6,
    "aggregate_consistency": 1e-9,
    # spinor flux
    "witten_rel": 1e-2,
    "witten_imag": 1e-8,
}


def rng_for(seed: int) -> np.random.Generator:
    """The package RNG: PCG64 seeded explicitly."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_points(chart: MetricChart, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points in the annulus [5 r_min, 50 r_min], shape (n, count)."""
    n = chart.n
    d = rng.normal(size=(n, count))
    d /= np.sqrt(np.sum(d * d, axis=0))
    r = chart.r_min * rng.uniform(5.0, 50.0, size=count)
    return d * r


def _random_part(n: int, rng: np.random.Generator):
    """Low-degree polynomial plus a trig term, with short coefficients."""
    c = np.round(rng.uniform(-1.0, 1.0, size=4), 3)
    idx = rng.integers(1, n + 1, size=4)
    e = Num(float(c[0]))
    e = eadd(e, emul(Num(float(c[1])), Var(f"x{idx[0]}")))
    e = eadd(e, emul(Num(float(c[2])),
                     emul(Var(f"x{idx[1]}"), Var(f"x{idx[2]}"))))
    e = eadd(e, emul(Num(float(c[3])), Call("sin", (Var(f"x{idx[3]}"),))))
    return e


def random_spinor_spec(n: int, rng: np.random.Generator,
                       weight: float) -> SpinorFieldSpec:
    """A spinor field with random polynomial+trig components."""
    comps = [(_random_part(n, rng), _random_part(n, rng))
             for _ in range(clifford.build_rep(n).N)]
    return make_spinor_spec(comps, weight)


def _chart_theta(chart: MetricChart):
    """None when the chart's Lee form is identically zero."""
    trivial = all(isinstance(t, Num) and t.value == 0.0 for t in chart.lee)
    return None if trivial else chart.lee


def _check(name: str, value: float, tolerance: float, **extra) -> dict:
    entry = {"name": name, "value": float(value), "tolerance": float(tolerance),
             "pass": bool(value <= tolerance)}
    entry.update(extra)
    return entry


def _finish(battery: str, checks: list, tolerances: dict, **extra) -> dict:
    out = {"battery": battery, "checks": checks,
           "pass": all(c["pass"] for c in checks), "tolerances": tolerances}
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# identities

def identity_battery(chart: MetricChart, points: int = 100, seed: int = 42,
                     jet_order: int = 2, clifford_trials: int = 1000) -> dict:
    """All pointwise identities on one chart at seeded random points."""
    rng = rng_for(seed)
    n = chart.n
    pts = sample_points(chart, points, rng)
    theta_src = _chart_theta(chart)

    md = metric_jets(chart, pts, order=jet_order)
    _, coords = seed_point(pts, jet_order)
    theta = None
    if theta_src is not None:
        theta = [evaluate_jet(t, coords, chart.params) for t in theta_src]
    calc = spinor_calc(md, theta)
    k = 0.5 * (2.0 - n)

    checks = []
    tol = TOLERANCES

    cv = curvature(christoffels(md))
    if theta is not None:
        wd = weyl_scalar(cv, theta, check_two_path=False)
        scal_weyl = wd.scal.value
        # divergence two-path (trace of nabla theta vs -codifferential)
        a = wd.trace_nabla_theta.value
        b = -codiff_oneform(md, theta).value
        scale = max(1.0, float(np.max(np.abs(a))))
        checks.append(_check("weyl-scalar-two-path",
                             float(np.max(np.abs(a - b))) / scale,
                             tol["two_path_rel"]))
    else:
        scal_weyl = cv.scal.value

    # conformal covariance: f Scal(fg, theta - df/2f) = Scal(g, theta)
    f_src = "1 + 0.3/sqrt(r^2 + 1)"
    resc = conformal_rescale(chart, f_src)
    md2 = metric_jets(resc, pts, order=jet_order)
    th2 = [evaluate_jet(t, coords, resc.params) for t in resc.lee]
    wd2 = weyl_scalar(curvature(christoffels(md2)), th2, check_two_path=False)
    fv = exprdsl.evaluate(exprdsl.parse(f_src), pts, chart.params)
    lhs = fv * wd2.scal.value
    scale = max(1.0, float(np.max(np.abs(scal_weyl))))
    checks.append(_check("weyl-scalar-conformal-covariance",
                         float(np.max(np.abs(lhs - scal_weyl))) / scale,
                         tol["weyl_scalar_covariance_rel"]))

    # spinor identities on two independent random fields
    spec_psi = random_spinor_spec(n, rng, k)
    spec_phi = random_spinor_spec(n, rng, k)
    psi = spinor_jets(spec_psi, coords, chart.params)
    phi = spinor_jets(spec_phi, coords, chart.params)

    res, scale = lichnerowicz_I_residual(calc, psi)
    checks.append(_check("lichnerowicz-first",
                         float(np.max(np.abs(res))) / scale,
                         tol["lichnerowicz_rel"]))

    pairing = lichnerowicz_II_residual(calc, psi, phi)
    sc = pairing["scale"]
    checks.append(_check("lichnerowicz-pairing",
                         float(np.max(np.abs(pairing["main"]))) / sc,
                         tol["lichnerowicz_rel"]))
    checks.append(_check("pairing-connection-part",
                         float(np.max(np.abs(pairing["first"]))) / sc,
                         tol["lichnerowicz_rel"]))
    checks.append(_check("pairing-dirac-part",
                         float(np.max(np.abs(pairing["second"]))) / sc,
                         tol["lichnerowicz_rel"]))

    if theta is not None:
        d2 = spinor_values(dirac_composed(calc, psi, k))
        ex = spinor_values(dirac_squared_expansion(calc, psi, k))
        scale = max(1.0, float(np.max(np.abs(d2))))
        checks.append(_check("dirac-square-expansion",
                             float(np.max(np.abs(d2 - ex))) / scale,
                             tol["dirac_expansion_rel"]))

    direction = rng.normal(size=n)
    direction /= math.sqrt(float(np.sum(direction * direction)))
    nres = norm_identity_residual(calc, psi, direction)
    nscale = max(1.0, float(np.max(np.abs(h_jet(psi, psi).re.value))))
    checks.append(_check("norm-identity",
                         float(np.max(np.abs(nres))) / nscale,
                         tol["norm_identity_rel"]))

    cliff = clifford_battery(n, trials=clifford_trials, seed=seed)
    checks.extend(cliff["checks"])

    used = {key: tol[key] for key in
            ("two_path_rel", "weyl_scalar_covariance_rel", "lichnerowicz_rel",
             "dirac_expansion_rel", "norm_identity_rel", "clifford_exact",
             "clifford_identity")}
    return _finish("identities", checks, used, chart=chart.name,
                   points=points, seed=seed, jet_order=jet_order)


def clifford_battery(n: int, trials: int = 1000, seed: int = 42) -> dict:
    """Algebra relations (exact) and the module identities (1e-14)."""
    rng = rng_for(seed)
    rep = clifford.build_rep(n)
    tol = TOLERANCES
    checks = []

    # anticommutators: gamma_a gamma_b + gamma_b gamma_a = -2 delta_ab
    worst = 0.0
    for a in range(n):
        for b in range(n):
            acom = rep.gamma[a] @ rep.gamma[b] + rep.gamma[b] @ rep.gamma[a]
            target = -2.0 * np.eye(rep.N) if a == b else np.zeros((rep.N, rep.N))
            worst = max(worst, float(np.max(np.abs(acom - target))))
    checks.append(_check("clifford-anticommutators", worst, tol["clifford_exact"]))

    worst = max(float(np.max(np.abs(g + np.conjugate(g.T))))
                for g in rep.gamma)
    checks.append(_check("clifford-anti-hermitian", worst, tol["clifford_exact"]))

    # metric compatibility: h(x.psi, phi) + h(psi, x.phi) = 0
    worst_c = 0.0
    worst_w = 0.0
    for _ in range(trials):
        x = rng.normal(size=n)
        x /= math.sqrt(float(np.sum(x * x)))
        psi = rng.normal(size=rep.N) + 1j * rng.normal(size=rep.N)
        psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)))
        phi = rng.normal(size=rep.N) + 1j * rng.normal(size=rep.N)
        phi /= math.sqrt(float(np.sum(np.abs(phi) ** 2)))
        xpsi = clifford.mul_vector(rep, x, psi)
        xphi = clifford.mul_vector(rep, x, phi)
        worst_c = max(worst_c, abs(clifford.inner(rep, xpsi, phi)
                                   + clifford.inner(rep, psi, xphi)))

        # x . (omega . psi) = (x wedge omega) . psi - (x contract omega) . psi
        p = int(rng.integers(1, n + 1))
        omega = np.zeros((n,) * p)
        for _k in range(3):
            idxs = tuple(sorted(rng.choice(n, size=p, replace=False).tolist()))
            clifford._fill_antisym(omega, idxs, float(rng.normal()))
        nrm = math.sqrt(float(np.sum(omega * omega)))
        if nrm > 0.0:
            omega = omega / nrm
        om_psi = clifford.mul_form(rep, p, omega, psi)
        lhs = clifford.mul_vector(rep, x, om_psi)
        rhs = -clifford.mul_form(rep, p - 1, clifford.contract(x, omega, p), psi)
        if p + 1 <= n:
            rhs = rhs + clifford.mul_form(rep, p + 1, clifford.wedge(x, omega, p), psi)
        worst_w = max(worst_w, float(np.max(np.abs(lhs - rhs))))
    checks.append(_check("clifford-pairing-compatibility", worst_c,
                         tol["clifford_identity"]))
    checks.append(_check("clifford-wedge-contract", worst_w,
                         tol["clifford_identity"]))

    used = {"clifford_exact": tol["clifford_exact"],
            "clifford_identity": tol["clifford_identity"]}
    return _finish("clifford", checks, used, n=n, trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# curvature summary

def curvature_battery(chart: MetricChart, points: int = 50, seed: int = 42,
                      jet_order: int = 2) -> dict:
    """Curvature magnitudes and internal consistency at random points."""
    rng = rng_for(seed)
    pts = sample_points(chart, points, rng)
    md = metric_jets(chart, pts, order=jet_order)
    cd = christoffels(md)
    cv = curvature(cd)
    n = chart.n

    stats = {
        "max_abs_christoffel": float(max(np.max(np.abs(cd.christoffel[k][i][j].value))
                                         for k in range(n) for i in range(n)
                                         for j in range(n))),
        "max_abs_riemann": float(max(np.max(np.abs(cv.riemann[l][k][i][j].value))
                                     for l in range(n) for k in range(n)
                                     for i in range(n) for j in range(n))),
        "max_abs_ricci": float(max(np.max(np.abs(cv.ricci[i][j].value))
                                   for i in range(n) for j in range(n))),
        "max_abs_scal": float(np.max(np.abs(cv.scal.value))),
    }
    checks = []
    theta_src = _chart_theta(chart)
    if theta_src is not None:
        _, coords = seed_point(pts, jet_order)
        theta = [evaluate_jet(t, coords, chart.params) for t in theta_src]
        from .curvature import codiff_oneform
        wd = weyl_scalar(cv, theta, check_two_path=False)
        a = wd.trace_nabla_theta.value
        b = -codiff_oneform(md, theta).value
        scale = max(1.0, float(np.max(np.abs(a))))
        checks.append(_check("weyl-scalar-two-path",
                             float(np.max(np.abs(a - b))) / scale,
                             TOLERANCES["two_path_rel"]))
        stats["max_abs_weyl_scal"] = float(np.max(np.abs(wd.scal.value)))

    used = {"two_path_rel": TOLERANCES["two_path_rel"]} if checks else {}
    out = _finish("curvature", checks, used, chart=chart.name,
                  points=points, seed=seed, jet_order=jet_order)
    out["stats"] = stats
    return out


# ---------------------------------------------------------------------------
# mass laws

def laws_battery(cfg: LoadedConfig, radii=None, measure: str = "euclidean",
                 seed: int = 42, expected_total: float | None = None) -> dict:
    """Global mass laws for a chart or an end system."""
    tol = TOLERANCES
    checks = []
    details = {}

    if cfg.kind == "end_system":
        system = cfg.system
        n = system.n
        rep = mass.weyl_mass(system, radii=radii, measure=measure)
        singles = [mass.weyl_mass(e.chart, radii=radii, measure=measure).limit
                   for e in system.ends]
        combined = sum(e.a ** (0.5 * (n - 2)) * m
                       for e, m in zip(system.ends, singles))
        scale = max(1.0, abs(combined))
        checks.append(_check("weyl-mass-multi-end-consistency",
                             abs(rep.limit - combined) / scale,
                             tol["aggregate_consistency"]))
        if expected_total is not None:
            checks.append(_check("weyl-mass-multi-end-expected",
                                 abs(rep.limit - expected_total) / max(1.0, abs(expected_total)),
                                 tol["mass_law_rel"]))
        details["per_end"] = singles
        details["total"] = rep.limit
        used = {k: tol[k] for k in ("aggregate_consistency", "mass_law_rel")}
        out = _finish("laws", checks, used, config=cfg.name, measure=measure)
        out["details"] = details
        return out

    chart = cfg.chart
    n = chart.n

    # two-path conformal change of the metric mass, two factors
    factors = ("1 + 1/sqrt(r^2 + 1)", "1 + 0.3/sqrt(r^2 + 1)")
    change_records = []
    for f in factors:
        rec = mass.two_path_mass_delta(chart, f, radii=radii, measure=measure)
        scale = max(1.0, abs(rec["path_a"]), abs(rec["path_b"]))
        checks.append(_check(f"mass-conformal-change[{f}]",
                             abs(rec["path_a"] - rec["path_b"]) / scale,
                             tol["mass_law_rel"]))
        err_budget = rec["flux_equality"]["budget"] + 1e-9 * scale
        checks.append(_check(f"gradient-flux-agreement[{f}]",
                             rec["flux_equality"]["diff"], err_budget,
                             budget=err_budget, absolute=True))
        change_records.append(rec)
    details["conformal_change"] = change_records

    # conformal invariance of the Weyl-structure mass
    base = mass.weyl_mass(chart, radii=radii, measure=measure)
    resc = conformal_rescale(chart, factors[1])
    moved = mass.weyl_mass(resc, radii=radii, measure=measure)
    scale = max(1.0, abs(base.limit))
    checks.append(_check("weyl-mass-conformal-invariance",
                         abs(base.limit - moved.limit) / scale,
                         tol["mass_law_rel"]))
    details["weyl_mass"] = base.limit
    details["weyl_mass_rescaled"] = moved.limit

    # coordinate scaling: matched finite radii, exact change of variables
    a = 4.0
    s = a ** (0.5 * (n - 2))
    scaled = scale_coordinates(chart, a)
    rr = radii if radii is not None else mass.default_radii(chart)
    worst = 0.0
    pairs = []
    for r in rr:
        f0 = mass.weyl_flux(chart, float(r), measure=measure)
        fs = mass.weyl_flux(scaled, math.sqrt(a) * float(r), measure=measure)
        mismatch = abs(fs - s * f0) / max(1.0, abs(f0), abs(fs))
        worst = max(worst, mismatch)
        pairs.append({"r": float(r), "flux": f0, "flux_scaled": fs})
    checks.append(_check("weyl-mass-coordinate-scaling", worst,
                         tol["scaling_match"], a=a, expected_ratio=s))
    details["scaling"] = pairs

    used = {k: tol[k] for k in ("mass_law_rel", "scaling_match")}
    out = _finish("laws", checks, used, config=cfg.name, measure=measure,
                  seed=seed)
    out["details"] = details
    return out


# ---------------------------------------------------------------------------
# spinor flux vs mass

def _asymptotic_value(spec: SpinorFieldSpec, chart: MetricChart) -> np.ndarray:
    """The field's value at a far reference point on the first axis."""
    far = np.zeros((chart.n, 1))
    far[0, 0] = 1e7 * chart.r_min
    _, coords = seed_point(far, 1)
    psi = spinor_jets(spec, coords, chart.params)
    return spinor_values(psi)[:, 0]


def witten_battery(cfg: LoadedConfig, radii=None, measure: str = "euclidean") -> dict:
    """Spinor boundary flux against one quarter mass times |psi_0|^2."""
    chart = cfg.any_chart()
    tol = TOLERANCES
    if radii is None:
        radii = mass.default_radii(chart)
    radii = tuple(float(r) for r in radii)

    mrep = mass.weyl_mass(chart, radii=radii, measure=measure)
    specs = list(cfg.spinors)
    if not specs:
        N = clifford.rep_dim(chart.n)
        zero = ("0", "0")
        base = [[zero] * N for _ in range(3)]
        base[0][0] = ("1", "0")
        base[1][min(1, N - 1)] = ("1", "0")
        base[2][0] = ("0.6", "0")
        base[2][min(1, N - 1)] = ("0", "0.8")
        k = 0.5 * (2.0 - chart.n)
        specs = [(f"const{i}", make_spinor_spec(rows, k))
                 for i, rows in enumerate(base)]

    checks = []
    fields = []
    for name, spec in specs:
        psi0 = _asymptotic_value(spec, chart)
        nrm2 = float(np.sum(np.abs(psi0) ** 2))
        series = [mass.witten_flux(chart, spec, r, measure=measure) for r in radii]
        real_series = [v.real for v in series]
        imag_max = max(abs(v.imag) for v in series)
        ext = mass.extrapolate(list(zip(radii, real_series)),
                               p_bounds=(0.3, 2.0 * chart.n),
                               fallback_p=chart.tau)
        expect = 0.25 * mrep.limit * nrm2
        scale = max(1.0, abs(expect))
        checks.append(_check(f"witten-limit[{name}]",
                             abs(ext.limit - expect) / scale,
                             tol["witten_rel"]))
        checks.append(_check(f"witten-imag[{name}]", imag_max,
                             tol["witten_imag"], absolute=True))
        fields.append({"name": name, "norm2": nrm2, "series": real_series,
                       "limit": ext.limit, "expected": expect,
                       "imag_max": imag_max})

    used = {k: tol[k] for k in ("witten_rel", "witten_imag")}
    out = _finish("witten", checks, used, config=cfg.name, measure=measure)
    out["mass"] = mrep.limit
    out["radii"] = list(radii)
    out["fields"] = fields
    return out
