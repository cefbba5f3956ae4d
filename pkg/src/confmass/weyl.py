"""Weyl connections: torsion-free connections preserving a conformal class.

A Weyl structure on (M, [g]) is encoded against a background metric g by
its Lee form theta (a 1-form); the associated connection has coefficients

    G~^k_ij = G^k_ij + theta_i d^k_j + theta_j d^k_i - g_ij theta^k.

Under a conformal change g -> f g the same connection is encoded by
theta - df / (2 f) (see ``chart.conformal_rescale``), and its scalar
curvature scales by f^{-1} (weight -2 in the convention where a weight-w
quantity picks up f^{w/2}).

``weyl_scalar`` evaluates the contracted second Bianchi reduction

    Scal^D = Scal^g - 2 (n-1) tr_g(nabla theta) - (n-1)(n-2) |theta|^2_g

and cross-checks tr_g(nabla theta) against the negative codifferential
along the way; ``weyl_scalar_via_curvature`` instead contracts the
curvature tensor of G~ directly and serves as an independent oracle for
the reduction (no symmetrization is applied: the antisymmetric part of
the Ricci-type contraction drops under the g^{ij} trace).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import MetricData
from .curvature import (ConnectionData, CurvatureData, christoffels,
                        codiff_oneform, curvature, trace_covd_oneform)
from .jets import Jet

__all__ = [
    "WeylData",
    "TwoPathError",
    "weyl_connection",
    "theta_norm2",
    "weyl_scalar",
    "weyl_scalar_via_curvature",
]

TWO_PATH_TOL = 1e-11


class TwoPathError(ArithmeticError):
    """Raised when redundant evaluations of one quantity disagree."""


def _trunc(j: Jet, order: int) -> Jet:
    return j if j.space.order == order else j.truncate(order)


@dataclass
class WeylData:
    """Weyl-connection sample built over a metric connection sample."""

    cd: ConnectionData
    theta: list  # Lee form component jets
    gamma: list  # [k][i][j] Weyl connection coefficients
    trace_nabla_theta: Jet
    norm2_theta: Jet
    scal: Jet  # scalar curvature of the Weyl connection


def weyl_connection(cd: ConnectionData, theta: list) -> list:
    """Connection coefficients of the Weyl connection for Lee form theta."""
    md = cd.md
    n = md.chart.n
    tgt = min(cd.order, theta[0].space.order)
    th = [_trunc(t, tgt) for t in theta]
    g = [[_trunc(md.g[i][j], tgt) for j in range(n)] for i in range(n)]
    ginv = [[_trunc(md.ginv[i][j], tgt) for j in range(n)] for i in range(n)]
    thup = []
    for k in range(n):
        acc = ginv[k][0] * th[0]
        for l in range(1, n):
            acc = acc + ginv[k][l] * th[l]
        thup.append(acc)

    gam = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                acc = _trunc(cd.christoffel[k][i][j], tgt) - g[i][j] * thup[k]
                if k == j:
                    acc = acc + th[i]
                if k == i:
                    acc = acc + th[j]
                gam[k][i][j] = acc
                gam[k][j][i] = acc
    return gam


def theta_norm2(md: MetricData, theta: list, order: int | None = None) -> Jet:
    """|theta|^2_g = g^{ij} theta_i theta_j."""
    n = md.chart.n
    tgt = theta[0].space.order if order is None else order
    th = [_trunc(t, tgt) for t in theta]
    ginv = [[_trunc(md.ginv[i][j], tgt) for j in range(n)] for i in range(n)]
    acc = None
    for i in range(n):
        for j in range(n):
            t = ginv[i][j] * th[i] * th[j]
            acc = t if acc is None else acc + t
    return acc


def weyl_scalar(cv: CurvatureData, theta: list,
                check_two_path: bool = True) -> WeylData:
    """Scalar curvature of the Weyl connection with Lee form theta.

    The divergence term is computed both as g^{ij} nabla_i theta_j and as
    -delta(theta); with ``check_two_path`` the two evaluations must agree
    to TWO_PATH_TOL (relative to scale) or TwoPathError is raised.
    """
    cd = cv.cd
    md = cd.md
    n = md.chart.n
    tgt = cv.order

    tr = trace_covd_oneform(cd, theta)
    if check_two_path:
        other = -codiff_oneform(md, theta)
        a, b = tr.value, other.value
        err = float(np.max(np.abs(a - b)))
        scale = max(1.0, float(np.max(np.abs(a))))
        if err > TWO_PATH_TOL * scale:
            raise TwoPathError(
                f"divergence paths disagree: |diff|={err:.3e} at scale {scale:.3e}")

    tr = _trunc(tr, tgt)
    nrm = _trunc(theta_norm2(md, theta), tgt)
    scal = cv.scal - (2.0 * (n - 1)) * tr - float((n - 1) * (n - 2)) * nrm
    gam = weyl_connection(cd, theta)
    return WeylData(cd=cd, theta=theta, gamma=gam, trace_nabla_theta=tr,
                    norm2_theta=nrm, scal=scal)


def weyl_scalar_via_curvature(cd: ConnectionData, theta: list) -> Jet:
    """Scal^D by contracting the Weyl connection's curvature tensor.

    Independent of :func:`weyl_scalar`: the coefficients G~ are formed
    first and then run through the ordinary curvature contraction.
    """
    gam = weyl_connection(cd, theta)
    fake = ConnectionData(md=cd.md, christoffel=gam)
    return curvature(fake).scal


def weyl_data(md: MetricData, theta: list, check_two_path: bool = True) -> WeylData:
    """One-call pipeline: connection, curvature, and Weyl scalar."""
    cv = curvature(christoffels(md))
    return weyl_scalar(cv, theta, check_two_path=check_two_path)
