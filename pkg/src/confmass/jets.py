"""Dense truncated Taylor ("jet") arithmetic in several variables.

A jet of order K at a point stores the Taylor coefficients
c_alpha = d^alpha f / alpha!  for all multi-indices |alpha| <= K, laid out
in graded order (grades 0..K, lexicographically ascending within each
grade).  Arithmetic is exact truncated polynomial arithmetic; elementary
functions are lifted by Horner composition of the univariate Taylor
polynomial with the value-free part of the argument.

Coefficients are numpy arrays of shape (m,) for a single point or (m, B)
for a batch of B points, where m = C(nvars + order, order).  All batched
kernels are plain vectorized numpy with fixed iteration order (the
multiplication uses a precomputed pair table and np.add.reduceat), so
results are bitwise reproducible and independent of threading.

Two invariants worth spelling out:

* the value part of any jet computation equals the plain float64
  evaluation of the same expression bitwise.  Division keeps this by a
  fixed-point recurrence whose value slot is computed as a0/b0 directly;
  integer powers use the same left-fold multiplication order as the
  scalar evaluator; elementary functions compute their value slot with
  the same numpy call.
* jets combined by arithmetic must live in the same (nvars, order)
  space; mixing orders is a programming error and raises.  Use
  ``Jet.truncate`` to lower the order explicitly.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

import numpy as np

from . import exprdsl
from .exprdsl import (BinOp, Call, COORD_RE, EvalError, ExprAst, Neg, Num,
                      Pow, Var, is_coordinate_free)

__all__ = [
    "JetSpace", "Jet", "seed_point", "seed_constant", "partial",
    "jet_sqrt", "jet_exp", "jet_log", "jet_sin", "jet_cos", "jet_atan",
    "jet_powc", "evaluate_jet",
]

MAX_ORDER = 3


def _multi_indices(nvars: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for grade in range(order + 1):
        grade_block = [a for a in itertools.product(range(grade + 1), repeat=nvars)
                       if sum(a) == grade]
        out.extend(sorted(grade_block))
    return out


class JetSpace:
    """Index bookkeeping for (nvars, order); cached and shared."""

    _cache: dict[tuple[int, int], "JetSpace"] = {}

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError(f"nvars must be >= 1, got {nvars}")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
        self.nvars = nvars
        self.order = order
        self.alphas = _multi_indices(nvars, order)
        self.m = len(self.alphas)
        self.index = {a: i for i, a in enumerate(self.alphas)}
        grades = np.array([sum(a) for a in self.alphas])
        #: number of coefficients of grade <= k (graded layout => prefix)
        self.grade_count = [int(np.sum(grades <= k)) for k in range(order + 1)]
        self.factorials = np.array(
            [float(math.prod(math.factorial(ai) for ai in a)) for a in self.alphas])

        # multiplication table: all (i, j) with alpha_i + alpha_j in the space,
        # grouped contiguously by target index for np.add.reduceat
        pairs = []
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.alphas):
                tgt = tuple(x + y for x, y in zip(a, b))
                t = self.index.get(tgt)
                if t is not None:
                    pairs.append((t, i, j))
        pairs.sort()
        self._mul_t = np.array([p[0] for p in pairs])
        self._mul_i = np.array([p[1] for p in pairs])
        self._mul_j = np.array([p[2] for p in pairs])
        starts = np.searchsorted(self._mul_t, np.arange(self.m))
        self._mul_starts = starts

        # derivative tables: d/dx_v maps coefficient of beta+e_v to beta
        # with factor (beta_v + 1); every index of the order-1 space is hit
        self._derive: list[tuple[np.ndarray, np.ndarray]] = []
        if order >= 1:
            lower = _multi_indices(nvars, order - 1)
            for v in range(nvars):
                src = np.array([self.index[tuple(b[k] + (1 if k == v else 0) for k in range(nvars))]
                                for b in lower])
                fac = np.array([float(b[v] + 1) for b in lower])
                self._derive.append((src, fac))

    @classmethod
    def get(cls, nvars: int, order: int) -> "JetSpace":
        key = (nvars, order)
        sp = cls._cache.get(key)
        if sp is None:
            sp = cls._cache[key] = cls(nvars, order)
        return sp

    def lower(self, order: int) -> "JetSpace":
        return JetSpace.get(self.nvars, order)

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order}, m={self.m})"


class Jet:
    """Taylor coefficients of one scalar quantity at one point or batch."""

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = coeffs

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, space: JetSpace, value) -> "Jet":
        value = np.asarray(value, dtype=np.float64)
        c = np.zeros((space.m,) + value.shape)
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space: JetSpace, v: int, value) -> "Jet":
        j = cls.constant(space, value)
        if space.order >= 1:
            e_v = tuple(1 if k == v else 0 for k in range(space.nvars))
            j.c[space.index[e_v]] = 1.0
        return j

    # -- basic accessors ----------------------------------------------
    @property
    def value(self):
        return self.c[0]

    def partial(self, alpha: Sequence[int]):
        """d^alpha f at the point: alpha! times the stored coefficient."""
        alpha = tuple(int(a) for a in alpha)
        idx = self.space.index.get(alpha)
        if idx is None:
            raise KeyError(f"multi-index {alpha} outside order-{self.space.order} space")
        return self.space.factorials[idx] * self.c[idx]

    def truncate(self, order: int) -> "Jet":
        if order == self.space.order:
            return self
        if order > self.space.order:
            raise ValueError(f"cannot raise order {self.space.order} -> {order}")
        sp = self.space.lower(order)
        return Jet(sp, self.c[:sp.m])

    def derive(self, v: int) -> "Jet":
        """Jet of d f / d x_v, one order lower."""
        if self.space.order < 1:
            raise ValueError("cannot derive an order-0 jet")
        src, fac = self.space._derive[v]
        sp = self.space.lower(self.space.order - 1)
        c = self.c[src] * (fac if self.c.ndim == 1 else fac[:, None])
        return Jet(sp, c)

    def copy(self) -> "Jet":
        return Jet(self.space, self.c.copy())

    # -- ring operations ----------------------------------------------
    def _check(self, other: "Jet"):
        if self.space is not other.space:
            raise ValueError(
                f"jet space mismatch: {self.space} vs {other.space}; truncate explicitly")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.c + other.c)
        c = self.c.copy()
        c[0] = c[0] + other
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.c - other.c)
        c = self.c.copy()
        c[0] = c[0] - other
        return Jet(self.space, c)

    def __rsub__(self, other):
        c = -self.c
        c[0] = other + c[0]
        return Jet(self.space, c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            sp = self.space
            conv = self.c[sp._mul_i] * other.c[sp._mul_j]
            return Jet(sp, np.add.reduceat(conv, sp._mul_starts, axis=0))
        return Jet(self.space, self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.space, self.c / other)
        self._check(other)
        b0 = other.c[0]
        if not np.all(b0):
            raise ZeroDivisionError("jet division by a jet whose value slot is zero")
        nil = other.c.copy()
        nil[0] = np.zeros_like(b0)
        bnil = Jet(other.space, nil)
        # fixed point q <- (a - bnil*q)/b0; the value slot is a0/b0 exactly
        # at every step, and each step extends correctness by one grade
        q = Jet(self.space, self.c / b0)
        for _ in range(self.space.order):
            q = Jet(self.space, (self.c - (bnil * q).c) / b0)
        return q

    def __rtruediv__(self, other):
        return Jet.constant(self.space, np.broadcast_to(
            np.asarray(other, dtype=np.float64), np.shape(self.c[0]))).__truediv__(self)

    def ipow(self, e: int) -> "Jet":
        """Integer power by left-fold multiplication (matches the scalar path)."""
        if e == 0:
            return Jet.constant(self.space, np.ones_like(self.c[0]))
        acc = self
        for _ in range(abs(e) - 1):
            acc = acc * self
        if e < 0:
            acc = Jet.constant(self.space, np.ones_like(self.c[0])) / acc
        return acc

    def __repr__(self):
        return f"Jet(order={self.space.order}, nvars={self.space.nvars}, value={self.value!r})"


# ---------------------------------------------------------------------------
# elementary functions by Horner composition

def _compose(u: Jet, dcoef: list[np.ndarray]) -> Jet:
    """sum_j dcoef[j] * (u - u0)^j with dcoef[j] = f^(j)(u0)/j!."""
    order = u.space.order
    nil = u.c.copy()
    nil[0] = np.zeros_like(nil[0])
    p = Jet(u.space, nil)
    acc = Jet.constant(u.space, dcoef[order])
    for j in range(order - 1, -1, -1):
        acc = acc * p + dcoef[j]
    return acc


def jet_sqrt(u: Jet) -> Jet:
    u0 = u.c[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.sqrt(u0)
        d = [s, 0.5 / s, -1.0 / (8.0 * s * u0), 1.0 / (16.0 * s * u0 * u0)]
    return _compose(u, d[:u.space.order + 1])


def jet_exp(u: Jet) -> Jet:
    e = np.exp(u.c[0])
    return _compose(u, [e, e, e / 2.0, e / 6.0][:u.space.order + 1])


def jet_log(u: Jet) -> Jet:
    u0 = u.c[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        d = [np.log(u0), 1.0 / u0, -1.0 / (2.0 * u0 * u0), 1.0 / (3.0 * u0 * u0 * u0)]
    return _compose(u, d[:u.space.order + 1])


def jet_sin(u: Jet) -> Jet:
    u0 = u.c[0]
    s, c = np.sin(u0), np.cos(u0)
    return _compose(u, [s, c, -s / 2.0, -c / 6.0][:u.space.order + 1])


def jet_cos(u: Jet) -> Jet:
    u0 = u.c[0]
    s, c = np.sin(u0), np.cos(u0)
    return _compose(u, [c, -s, -c / 2.0, s / 6.0][:u.space.order + 1])


def jet_atan(u: Jet) -> Jet:
    u0 = u.c[0]
    t = 1.0 + u0 * u0
    d = [np.arctan(u0), 1.0 / t, -u0 / (t * t),
         (3.0 * u0 * u0 - 1.0) / (3.0 * t * t * t)]
    return _compose(u, d[:u.space.order + 1])


def jet_powc(u: Jet, s) -> Jet:
    """u^s for an exponent constant along the chart."""
    u0 = u.c[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        d = [np.power(u0, s),
             s * np.power(u0, s - 1.0),
             s * (s - 1.0) / 2.0 * np.power(u0, s - 2.0),
             s * (s - 1.0) * (s - 2.0) / 6.0 * np.power(u0, s - 3.0)]
    return _compose(u, d[:u.space.order + 1])


_JET_FN = {"sqrt": jet_sqrt, "exp": jet_exp, "log": jet_log,
           "sin": jet_sin, "cos": jet_cos, "atan": jet_atan}


# ---------------------------------------------------------------------------
# seeding and expression evaluation

def seed_point(point, order: int) -> tuple[JetSpace, list[Jet]]:
    """Coordinate jets at ``point`` (shape (n,) or (n, B)), order 1..3."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim not in (1, 2):
        raise ValueError(f"point must have shape (n,) or (n, B), got {point.shape}")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be 1..{MAX_ORDER}, got {order}")
    n = point.shape[0]
    space = JetSpace.get(n, order)
    return space, [Jet.variable(space, i, point[i]) for i in range(n)]


def seed_constant(space: JetSpace, value) -> Jet:
    return Jet.constant(space, value)


def partial(j: Jet, alpha: Sequence[int]):
    """Partial derivative d^alpha of the jetted quantity at the point."""
    return j.partial(alpha)


def _radius_jet(coords: list[Jet]) -> Jet:
    s = coords[0] * coords[0]
    for x in coords[1:]:
        s = s + x * x
    return jet_sqrt(s)


def evaluate_jet(ast: ExprAst, coords: list[Jet],
                 params: Mapping[str, float] | None = None) -> Jet:
    """Evaluate an expression tree in jet arithmetic.

    ``coords`` are the coordinate jets from :func:`seed_point`.  The value
    slot of the result is bitwise equal to ``exprdsl.evaluate`` at the
    same point.
    """
    params = params or {}
    space = coords[0].space
    n = len(coords)
    r_cache: list[Jet | None] = [None]

    def go(node: ExprAst) -> Jet:
        if isinstance(node, Num):
            return Jet.constant(space, np.full_like(coords[0].c[0], node.value))
        if isinstance(node, Var):
            name = node.name
            if name == "r":
                if r_cache[0] is None:
                    r_cache[0] = _radius_jet(coords)
                return r_cache[0]
            if COORD_RE.match(name):
                idx = int(name[1:]) - 1
                if not 0 <= idx < n:
                    raise EvalError(f"coordinate {name} out of range for n={n}")
                return coords[idx]
            if name in params:
                return Jet.constant(space, np.full_like(coords[0].c[0], params[name]))
            raise EvalError(f"unbound identifier {name!r}")
        if isinstance(node, Neg):
            return -go(node.arg)
        if isinstance(node, BinOp):
            a, b = go(node.left), go(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return a / b
        if isinstance(node, Pow):
            return go(node.base).ipow(node.exponent)
        if isinstance(node, Call):
            if node.fn == "pow":
                base = go(node.args[0])
                if is_coordinate_free(node.args[1]):
                    s = exprdsl.evaluate(node.args[1], np.zeros(n), params)
                    return jet_powc(base, s)
                ex = go(node.args[1])
                return jet_exp(ex * jet_log(base))
            return _JET_FN[node.fn](go(node.args[0]))
        raise EvalError(f"unknown node {node!r}")

    return go(ast)
