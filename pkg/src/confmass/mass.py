"""Sphere quadrature, boundary fluxes, radius extrapolation, and masses.

Fluxes are surface integrals over coordinate spheres S_r.  Two measure
conventions are supported everywhere:

* ``euclidean``: nu = x/r, flat area element;
* ``g``: nu = the g-unit vector along x/r, area element induced by g.

Their limits agree on valid charts and the suite asserts it; reported
masses default to the raw convention (no 1/(2(n-1) omega_{n-1})
factor), with ``normalize="adm"`` dividing by that constant.

The mass of a Weyl structure combines the metric mass with the Lee-form
flux as

    m(D) = m(g0) - 2 (n-1) lim_r  integral_{S_r} theta_0(nu) dA.

The sign of the Lee term is fixed by conformal invariance: with it,
m(D) computed against g0 and against f g0 (rescaling the Lee form
accordingly) agree, and the spinor boundary flux converges to
(1/4) m(D) |psi_0|^2 for asymptotically constant psi_0.  Both facts are
enforced by the acceptance tests.

Determinism: quadrature nodes are evaluated in fixed 32-node chunks and
reduced with a fixed pairwise tree (see util), so every flux is
byte-identical no matter the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from . import exprdsl, util
from .chart import End, EndSystem, MetricChart, conformal_rescale, metric_jets
from .jets import evaluate_jet, seed_point
from .spinor import (SpinorFieldSpec, cliff_vector_jets, covd_coord, covd_frame,
                     h_jet, mat_apply, s_add, s_truncate, spinor_calc_light,
                     spinor_jets)

__all__ = [
    "SphereRule",
    "MassReport",
    "ExtrapolationResult",
    "sphere_rule",
    "adm_flux",
    "lee_flux",
    "gradient_flux",
    "weyl_flux",
    "witten_flux",
    "extrapolate",
    "riemannian_mass",
    "weyl_mass",
    "two_path_mass_delta",
    "sphere_area",
]

DEFAULT_ORDERS = {3: 48, 4: 24, 5: 12, 6: 12}


def sphere_area(n: int, r: float = 1.0) -> float:
    """Surface area of S_r in R^n: 2 pi^{n/2} / Gamma(n/2) * r^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0) * r ** (n - 1)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes on S_r with Euclidean surface weights."""

    r: float
    nodes: np.ndarray  # (n, M)
    weights: np.ndarray  # (M,)

    @property
    def count(self) -> int:
        return self.nodes.shape[1]


def sphere_rule(n: int, r: float, orders: int | None = None) -> SphereRule:
    """Product quadrature on the coordinate sphere of radius r.

    n=3 uses Gauss-Legendre in cos(polar) x uniform azimuth; n in 4..6
    iterates Gauss-Legendre rules over the polar angles with their
    sin-power Jacobians, again with a uniform (trigonometrically exact)
    azimuth.  ``orders`` is the Gauss-Legendre node count (azimuth gets
    twice that).
    """
    if not 3 <= n <= 6:
        raise ValueError(f"sphere_rule supports 3 <= n <= 6, got {n}")
    if r <= 0:
        raise ValueError("radius must be positive")
    N = int(orders) if orders is not None else DEFAULT_ORDERS[n]
    if N < 2:
        raise ValueError("quadrature order must be >= 2")
    M = 2 * N
    phi = 2.0 * math.pi * np.arange(M) / M
    wphi = np.full(M, 2.0 * math.pi / M)

    if n == 3:
        t, wt = leggauss(N)
        st = np.sqrt(1.0 - t ** 2)
        x = np.empty((3, N * M))
        cosphi, sinphi = np.cos(phi), np.sin(phi)
        x[0] = (st[:, None] * cosphi[None, :]).ravel()
        x[1] = (st[:, None] * sinphi[None, :]).ravel()
        x[2] = np.broadcast_to(t[:, None], (N, M)).ravel()
        w = (wt[:, None] * wphi[None, :]).ravel()
        return SphereRule(r=float(r), nodes=r * x, weights=(r ** 2) * w)

    # polar angles theta_1..theta_{n-2} in (0, pi), azimuth phi
    xi, wxi = leggauss(N)
    theta = 0.5 * math.pi * (xi + 1.0)
    wtheta = 0.5 * math.pi * wxi
    grids = [theta] * (n - 2) + [phi]
    wlist = []
    for k in range(n - 2):
        wlist.append(wtheta * np.sin(theta) ** (n - 2 - k))
    wlist.append(wphi)
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*wlist, indexing="ij")
    w = np.ones_like(wmesh[0])
    for wm in wmesh:
        w = w * wm
    x = np.empty((n,) + mesh[0].shape)
    sin_prod = np.ones_like(mesh[0])
    for k in range(n - 2):
        x[k] = sin_prod * np.cos(mesh[k])
        sin_prod = sin_prod * np.sin(mesh[k])
    x[n - 2] = sin_prod * np.cos(mesh[n - 2])
    x[n - 1] = sin_prod * np.sin(mesh[n - 2])
    nodes = r * x.reshape(n, -1)
    weights = (r ** (n - 1)) * w.ravel()
    return SphereRule(r=float(r), nodes=nodes, weights=weights)


# ---------------------------------------------------------------------------
# measure factors

def _small_det(A: np.ndarray) -> np.ndarray:
    """Determinant of (..., d, d) arrays by cofactor expansion (d <= 5)."""
    d = A.shape[-1]
    if d == 1:
        return A[..., 0, 0]
    if d == 2:
        return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    acc = None
    cols = list(range(d))
    for j in range(d):
        rest = cols[:j] + cols[j + 1:]
        minor = _small_det(A[..., 1:, :][..., :, rest])
        term = ((-1.0) ** j) * A[..., 0, j] * minor
        acc = term if acc is None else acc + term
    return acc


def _metric_values(chart: MetricChart, X: np.ndarray) -> np.ndarray:
    """g_ij values at columns of X as an (B, n, n) array."""
    n = chart.n
    B = X.shape[1]
    G = np.empty((B, n, n))
    for i in range(n):
        for j in range(i, n):
            v = np.broadcast_to(np.asarray(
                exprdsl.evaluate(chart.metric[i][j], X, chart.params),
                dtype=np.float64), (B,))
            G[:, i, j] = v
            G[:, j, i] = v
    return G


def _measure_factors(chart: MetricChart, X: np.ndarray, measure: str):
    """Outward normal components nu (n, B) and area factor (B,).

    The factor multiplies the Euclidean quadrature weights; for the
    ``g`` measure nu is the g-unit radial vector and the factor is the
    induced-area density sqrt(det T^t G T) over a Householder tangent
    basis.
    """
    n, B = X.shape
    r = np.sqrt(np.sum(X * X, axis=0))
    xhat = X / r
    if measure == "euclidean":
        return xhat, np.ones(B)
    if measure != "g":
        raise ValueError(f"unknown measure {measure!r} (euclidean | g)")
    G = _metric_values(chart, X)
    qn = np.einsum("ib,bij,jb->b", xhat, G, xhat)
    nu = xhat / np.sqrt(qn)
    # Householder reflection sending e_n to -s*xhat; first n-1 columns
    # span the tangent space of S_r at each node
    s = np.where(xhat[n - 1] >= 0.0, 1.0, -1.0)
    v = xhat.copy()
    v[n - 1] += s
    vn = np.sum(v * v, axis=0)
    H = np.eye(n)[None, :, :] - 2.0 * np.einsum("ib,jb->bij", v, v) / vn[:, None, None]
    T = H[:, :, : n - 1]
    induced = np.einsum("bki,bkl,blj->bij", T, G, T)
    fac = np.sqrt(_small_det(induced))
    return nu, fac


# ---------------------------------------------------------------------------
# fluxes

def _flux(chart: MetricChart, r: float, integrand, measure: str,
          orders: int | None, dtype=np.float64):
    if r < 2.0 * chart.r_min:
        raise ValueError(f"flux radius {r} below validity (need >= {2.0 * chart.r_min})")
    rule = sphere_rule(chart.n, r, orders)
    X, w = rule.nodes, rule.weights

    def chunk(a: int, b: int) -> np.ndarray:
        Xc = X[:, a:b]
        nu, fac = _measure_factors(chart, Xc, measure)
        vals = integrand(Xc, nu)
        return np.asarray(vals, dtype=dtype) * fac * w[a:b]

    parts = util.chunked_map(chunk, rule.count)
    return util.pairwise_sum(np.concatenate(parts))


def adm_flux(chart: MetricChart, r: float, measure: str = "euclidean",
             orders: int | None = None) -> float:
    """Integral over S_r of (d_i g_ij - d_j g_ii) nu_j."""
    n = chart.n

    def integrand(Xc, nu):
        md = metric_jets(chart, Xc, order=1, check_spd=False)
        dg = [[[md.g[i][j].derive(k).value for k in range(n)]
               for j in range(n)] for i in range(n)]
        acc = np.zeros(Xc.shape[1])
        for j in range(n):
            sj = np.zeros(Xc.shape[1])
            for i in range(n):
                sj = sj + dg[i][j][i] - dg[i][i][j]
            acc = acc + sj * nu[j]
        return acc

    return float(_flux(chart, r, integrand, measure, orders))


def lee_flux(chart: MetricChart, r: float, measure: str = "euclidean",
             orders: int | None = None) -> float:
    """Integral over S_r of theta(nu)."""
    n = chart.n

    def integrand(Xc, nu):
        acc = np.zeros(Xc.shape[1])
        for j in range(n):
            tj = np.broadcast_to(np.asarray(
                exprdsl.evaluate(chart.lee[j], Xc, chart.params),
                dtype=np.float64), (Xc.shape[1],))
            acc = acc + tj * nu[j]
        return acc

    return float(_flux(chart, r, integrand, measure, orders))


def gradient_flux(chart: MetricChart, f, r: float, measure: str = "euclidean",
                  orders: int | None = None, over_f: bool = False) -> float:
    """Integral over S_r of df(nu), or of (df/f)(nu) with ``over_f``."""
    n = chart.n
    ast = exprdsl.parse(f) if isinstance(f, str) else f
    dfs = [exprdsl.derivative(ast, f"x{i + 1}") for i in range(n)]

    def integrand(Xc, nu):
        B = Xc.shape[1]
        acc = np.zeros(B)
        for j in range(n):
            vj = np.broadcast_to(np.asarray(
                exprdsl.evaluate(dfs[j], Xc, chart.params), dtype=np.float64), (B,))
            acc = acc + vj * nu[j]
        if over_f:
            fv = np.broadcast_to(np.asarray(
                exprdsl.evaluate(ast, Xc, chart.params), dtype=np.float64), (B,))
            acc = acc / fv
        return acc

    return float(_flux(chart, r, integrand, measure, orders))


def weyl_flux(chart: MetricChart, r: float, measure: str = "euclidean",
              orders: int | None = None) -> float:
    """ADM flux minus 2(n-1) times the Lee flux (per-radius mass series)."""
    n = chart.n
    return adm_flux(chart, r, measure, orders) \
        - 2.0 * (n - 1) * lee_flux(chart, r, measure, orders)


def witten_flux(chart: MetricChart, spec: SpinorFieldSpec, r: float,
                measure: str = "euclidean", orders: int | None = None) -> complex:
    """Integral over S_r of omega_psi(nu), with
    omega_psi(X) = h(psi, X^flat . Dirac psi + D_X psi) at weight (2-n)/2.

    The imaginary part is a diagnostic: it must vanish in the limit.
    """
    n = chart.n
    k = 0.5 * (2.0 - n)
    has_theta = not all(_is_zero(t) for t in chart.lee)

    def integrand(Xc, nu):
        B = Xc.shape[1]
        md = metric_jets(chart, Xc, order=1, check_spd=False)
        _, coords = seed_point(Xc, 1)
        theta = None
        if has_theta:
            theta = [evaluate_jet(t, coords, chart.params) for t in chart.lee]
        calc = spinor_calc_light(md, theta)
        psi = spinor_jets(spec, coords, chart.params)
        Dc = covd_coord(calc, psi, k, riemannian=(theta is None))
        F = covd_frame(calc, psi, k, riemannian=(theta is None), coord_fields=Dc)
        dpsi = None
        for a in range(n):
            t = mat_apply(calc.rep.gamma[a], F[a])
            dpsi = t if dpsi is None else s_add(dpsi, t)
        psi0 = s_truncate(psi, 0)
        out = np.zeros(B, dtype=np.complex128)
        for j in range(n):
            xflat = [calc.frame.S[j][a].truncate(0) for a in range(n)]
            cl = cliff_vector_jets(calc.rep, xflat, dpsi)
            omega_j = h_jet(psi0, s_add(cl, Dc[j])).value
            out = out + omega_j * nu[j]
        return out

    return complex(_flux(chart, r, integrand, measure, orders, dtype=np.complex128))


def _is_zero(ast) -> bool:
    return isinstance(ast, exprdsl.Num) and ast.value == 0.0


# ---------------------------------------------------------------------------
# extrapolation

@dataclass(frozen=True)
class ExtrapolationResult:
    limit: float
    error: float
    p: float
    coefficient: float
    fallback: bool = False


def _power_fit(r: np.ndarray, v: np.ndarray, p: float):
    basis = r ** (-p)
    A = np.stack([np.ones_like(r), basis], axis=1)
    sol, *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = float(np.sqrt(np.mean((A @ sol - v) ** 2)))
    return float(sol[0]), float(sol[1]), resid


def _power_fit_refined(r: np.ndarray, v: np.ndarray, p: float) -> float:
    """Limit of a two-term fit m + c r^-p + d r^-(p+1).

    The shift against the one-term fit estimates the truncation error of
    the power-law model.
    """
    A = np.stack([np.ones_like(r), r ** (-p), r ** (-(p + 1.0))], axis=1)
    sol, *_ = np.linalg.lstsq(A, v, rcond=None)
    return float(sol[0])


def extrapolate(samples, p_bounds: tuple = (0.3, 8.0),
                fallback_p: float | None = None) -> ExtrapolationResult:
    """Fit value(r) = limit + c r^{-p} and estimate the limit.

    Needs >= 4 samples at increasing radii with successive ratios
    >= 1.5.  p is optimized inside ``p_bounds`` (coarse grid plus a
    bounded scalar minimization).  The error estimate is twice the
    largest of four probes: the fit residual, the limit shift when the
    smallest radius is dropped (p kept, and p re-optimized), and the
    limit shift under a two-term fit with an r^-(p+1) correction; the
    factor two covers the systematic part those probes underestimate
    on slowly converging series.  If the optimization degenerates, p
    falls back to ``fallback_p`` (flagged in the result).
    """
    pts = sorted((float(r), float(v)) for r, v in samples)
    if len(pts) < 4:
        raise ValueError(f"extrapolation needs >= 4 samples, got {len(pts)}")
    r = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(r[1:] / r[:-1] < 1.5):
        raise ValueError("radii must increase with ratio >= 1.5")

    spread = float(np.max(np.abs(v - v.mean())))
    scale = max(np.max(np.abs(v)), 1e-300)
    if spread <= 1e-13 * scale:
        return ExtrapolationResult(limit=float(v[-1]), error=0.0, p=0.0,
                                   coefficient=0.0)

    lo, hi = p_bounds

    def best_p(rr: np.ndarray, vv: np.ndarray) -> float:
        def resid_of(p: float) -> float:
            return _power_fit(rr, vv, p)[2]

        grid = np.linspace(lo, hi, 64)
        rg = [resid_of(p) for p in grid]
        best = int(np.argmin(rg))
        try:
            span = grid[1] - grid[0]
            blo = max(lo, grid[best] - span)
            bhi = min(hi, grid[best] + span)
            opt = minimize_scalar(resid_of, bounds=(blo, bhi), method="bounded")
            return float(opt.x) if np.isfinite(opt.x) else float(grid[best])
        except Exception:
            return float(grid[best])

    fallback = False
    p = best_p(r, v)
    m_inf, c, resid = _power_fit(r, v, p)
    if not (np.isfinite(m_inf) and np.isfinite(resid)):
        if fallback_p is None:
            raise ValueError("power-law fit failed and no fallback exponent given")
        p = float(fallback_p)
        m_inf, c, resid = _power_fit(r, v, p)
        fallback = True
    m_drop_keep, _, _ = _power_fit(r[1:], v[1:], p)
    m_drop_re, _, _ = _power_fit(r[1:], v[1:], best_p(r[1:], v[1:]))
    m_aug = _power_fit_refined(r, v, p)
    error = 2.0 * max(resid, abs(m_inf - m_drop_keep),
                      abs(m_inf - m_drop_re), abs(m_inf - m_aug))
    return ExtrapolationResult(limit=m_inf, error=error, p=p, coefficient=c,
                               fallback=fallback)


# ---------------------------------------------------------------------------
# masses

@dataclass(frozen=True)
class MassReport:
    kind: str  # "riemannian" | "weyl"
    radii: tuple
    flux: tuple  # per-radius series of the reported quantity
    limit: float
    error: float
    measure: str
    normalize: str
    components: dict
    warnings: tuple = ()

    def csv_rows(self):
        """(r, flux, cumulative extrapolation) rows; the cumulative
        column holds the running extrapolated limit once 4 samples
        exist, before that the latest flux."""
        rows = []
        for k in range(len(self.radii)):
            if k + 1 >= 4:
                est = extrapolate(list(zip(self.radii[:k + 1], self.flux[:k + 1]))).limit
            else:
                est = self.flux[k]
            rows.append((self.radii[k], self.flux[k], est))
        return rows


def default_radii(chart: MetricChart) -> tuple:
    return tuple(20.0 * (2.0 ** k) * chart.r_min for k in range(4))


def _normalizer(n: int, normalize: str) -> float:
    if normalize == "raw":
        return 1.0
    if normalize == "adm":
        return 1.0 / (2.0 * (n - 1) * sphere_area(n))
    raise ValueError(f"unknown normalization {normalize!r} (raw | adm)")


def riemannian_mass(chart: MetricChart, radii=None, measure: str = "euclidean",
                    normalize: str = "raw", orders: int | None = None) -> MassReport:
    """Extrapolated ADM-type flux of the chart metric."""
    n = chart.n
    if radii is None:
        radii = default_radii(chart)
    radii = tuple(float(r) for r in radii)
    flux = tuple(adm_flux(chart, r, measure, orders) for r in radii)
    ext = extrapolate(list(zip(radii, flux)), p_bounds=(0.3, 2.0 * n),
                      fallback_p=chart.tau)
    norm = _normalizer(n, normalize)
    warnings = ("extrapolation fell back to the declared decay rate",) if ext.fallback else ()
    return MassReport(kind="riemannian", radii=radii,
                      flux=tuple(f * norm for f in flux),
                      limit=ext.limit * norm, error=ext.error * norm,
                      measure=measure, normalize=normalize,
                      components={"riemannian": ext.limit * norm, "lee": 0.0,
                                  "total": ext.limit * norm},
                      warnings=warnings)


def _end_mass(chart: MetricChart, radii, measure, orders):
    n = chart.n
    if radii is None:
        radii = default_radii(chart)
    radii = tuple(float(r) for r in radii)
    adm = [adm_flux(chart, r, measure, orders) for r in radii]
    lee = [lee_flux(chart, r, measure, orders) for r in radii]
    series = tuple(a - 2.0 * (n - 1) * l for a, l in zip(adm, lee))
    ea = extrapolate(list(zip(radii, adm)), p_bounds=(0.3, 2.0 * n),
                     fallback_p=chart.tau)
    el = extrapolate(list(zip(radii, lee)), p_bounds=(0.3, 2.0 * n),
                     fallback_p=chart.tau + 1.0)
    riem = ea.limit
    leepart = -2.0 * (n - 1) * el.limit
    err = ea.error + 2.0 * (n - 1) * el.error
    warn = []
    if ea.fallback or el.fallback:
        warn.append("extrapolation fell back to the declared decay rate")
    return radii, series, riem, leepart, err, tuple(warn)


def weyl_mass(system, radii=None, measure: str = "euclidean",
              normalize: str = "raw", orders: int | None = None) -> MassReport:
    """Mass of an asymptotically flat Weyl structure.

    Accepts a chart, an End, or an EndSystem; per end,
    m_l = m(g0) - 2(n-1) lim lee_flux, and the total weighs each end by
    a_l^{(n-2)/2}.
    """
    if isinstance(system, MetricChart):
        system = EndSystem(ends=(End(chart=system),), name=system.name)
    elif isinstance(system, End):
        system = EndSystem(ends=(system,), name=system.chart.name)
    n = system.n
    norm = _normalizer(n, normalize)

    parts = []
    warnings: list = []
    total = 0.0
    err = 0.0
    for endobj in system.ends:
        radii_l, series, riem, leepart, e, warn = _end_mass(
            endobj.chart, radii, measure, orders)
        w = endobj.a ** (0.5 * (n - 2))
        parts.append({"a": endobj.a, "radii": radii_l,
                      "flux": tuple(f * norm for f in series),
                      "riemannian": riem * norm, "lee": leepart * norm,
                      "total": (riem + leepart) * norm})
        warnings.extend(warn)
        total += w * (riem + leepart)
        err += w * e

    first = parts[0]
    components = {
        "riemannian": first["riemannian"], "lee": first["lee"],
        "total": total * norm,
    }
    if len(parts) > 1:
        components["ends"] = parts
        components["riemannian"] = sum(p["a"] ** (0.5 * (n - 2)) * p["riemannian"] for p in parts)
        components["lee"] = sum(p["a"] ** (0.5 * (n - 2)) * p["lee"] for p in parts)
    return MassReport(kind="weyl", radii=first["radii"], flux=first["flux"],
                      limit=total * norm, error=err * norm, measure=measure,
                      normalize=normalize, components=components,
                      warnings=tuple(dict.fromkeys(warnings)))


def two_path_mass_delta(chart: MetricChart, f, radii=None, measure: str = "euclidean",
                   orders: int | None = None) -> dict:
    """Two-path check of the conformal mass-change law.

    Path A is the mass of the rescaled chart (f g); path B adds
    (n-1) times the negative limit of the df(nu) flux to the mass of g.
    The companion record compares the limits of (df/f)(nu) and df(nu)
    fluxes, which must agree.
    """
    n = chart.n
    ast = exprdsl.parse(f) if isinstance(f, str) else f
    if radii is None:
        radii = default_radii(chart)
    radii = tuple(float(r) for r in radii)

    resc = conformal_rescale(chart, ast)
    path_a = riemannian_mass(resc, radii, measure, "raw", orders)

    base = riemannian_mass(chart, radii, measure, "raw", orders)
    df_series = [gradient_flux(chart, ast, r, measure, orders) for r in radii]
    dff_series = [gradient_flux(chart, ast, r, measure, orders, over_f=True)
                  for r in radii]
    e_df = extrapolate(list(zip(radii, df_series)), p_bounds=(0.3, 2.0 * n),
                       fallback_p=chart.tau + 1.0)
    e_dff = extrapolate(list(zip(radii, dff_series)), p_bounds=(0.3, 2.0 * n),
                        fallback_p=chart.tau + 1.0)
    path_b = base.limit + (n - 1.0) * (-e_df.limit)

    scale = max(abs(path_a.limit), abs(path_b), 1e-300)
    return {
        "path_a": path_a.limit,
        "path_b": path_b,
        "base_mass": base.limit,
        "delta": path_a.limit - path_b,
        "rel_delta": abs(path_a.limit - path_b) / scale,
        "errors": {"path_a": path_a.error, "base": base.error,
                   "df": e_df.error, "df_over_f": e_dff.error},
        "flux_equality": {
            "df_limit": e_df.limit,
            "df_over_f_limit": e_dff.limit,
            "diff": abs(e_df.limit - e_dff.limit),
            "budget": e_df.error + e_dff.error,
        },
        "radii": radii,
        "measure": measure,
    }
