"""Dense linear algebra over the jet ring for small (n <= 8) matrices.

Matrices are plain nested lists of Jet sharing one JetSpace.  Everything
here assumes symmetric positive definite value parts (metric tensors), so
Gaussian elimination runs without pivoting and the Denman--Beavers square
root iteration converges.  No BLAS is involved: results are bitwise
reproducible and independent of batch composition, which the report
determinism guarantees rely on.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet, JetSpace

__all__ = ["mat_identity", "mat_mul", "mat_vec", "mat_add", "mat_scale",
           "mat_inv", "mat_det", "spd_sqrt", "values"]


def mat_identity(space: JetSpace, n: int, like: Jet) -> list[list[Jet]]:
    one = np.ones_like(like.c[0])
    zero = np.zeros_like(like.c[0])
    return [[Jet.constant(space, one if i == j else zero) for j in range(n)]
            for i in range(n)]


def mat_mul(A, B) -> list[list[Jet]]:
    n, p, q = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(q):
            s = A[i][0] * B[0][j]
            for l in range(1, p):
                s = s + A[i][l] * B[l][j]
            row.append(s)
        out.append(row)
    return out


def mat_vec(A, v) -> list[Jet]:
    out = []
    for i in range(len(A)):
        s = A[i][0] * v[0]
        for l in range(1, len(v)):
            s = s + A[i][l] * v[l]
        out.append(s)
    return out


def mat_add(A, B, sa=1.0, sb=1.0) -> list[list[Jet]]:
    return [[A[i][j] * sa + B[i][j] * sb for j in range(len(A[0]))] for i in range(len(A))]


def mat_scale(A, s) -> list[list[Jet]]:
    return [[A[i][j] * s for j in range(len(A[0]))] for i in range(len(A))]


def values(A) -> np.ndarray:
    """Value parts as an ndarray of shape (n, n) or (n, n, B)."""
    return np.array([[A[i][j].value for j in range(len(A[0]))] for i in range(len(A))])


def mat_inv(A) -> list[list[Jet]]:
    """Gauss-Jordan inverse without pivoting (SPD value part assumed)."""
    n = len(A)
    space = A[0][0].space
    M = [[A[i][j] for j in range(n)] for i in range(n)]
    I = mat_identity(space, n, A[0][0])
    for col in range(n):
        piv = M[col][col]
        for j in range(n):
            M[col][j] = M[col][j] / piv
            I[col][j] = I[col][j] / piv
        for row in range(n):
            if row == col:
                continue
            f = M[row][col]
            for j in range(n):
                M[row][j] = M[row][j] - f * M[col][j]
                I[row][j] = I[row][j] - f * I[col][j]
    return I


def mat_det(A) -> Jet:
    """Determinant by elimination (product of pivots; no pivoting)."""
    n = len(A)
    M = [[A[i][j] for j in range(n)] for i in range(n)]
    det = None
    for col in range(n):
        piv = M[col][col]
        det = piv if det is None else det * piv
        for row in range(col + 1, n):
            f = M[row][col] / piv
            for j in range(col + 1, n):
                M[row][j] = M[row][j] - f * M[col][j]
    return det


def spd_sqrt(A, tol: float = 1e-14, maxiter: int = 60) -> list[list[Jet]]:
    """Jet-level principal square root S of an SPD jet matrix, S*S = A.

    Denman--Beavers iteration Y <- (Y + Z^-1)/2, Z <- (Z + Y^-1)/2 with
    Y0 = A, Z0 = I, run in full jet arithmetic.  Convergence is measured
    on the value parts (Frobenius norm of Y*Y - A against tol*||A||_F)
    per batch element, and converged elements are frozen with np.where so
    each point's trajectory is independent of its batch neighbours.
    """
    n = len(A)
    space = A[0][0].space
    batched = A[0][0].c.ndim == 2

    Av = values(A)  # (n, n) or (n, n, B)
    anorm = np.sqrt(np.sum(Av * Av, axis=(0, 1)))
    thresh = tol * np.maximum(anorm, 1.0)

    Y = [[A[i][j] for j in range(n)] for i in range(n)]
    Z = mat_identity(space, n, A[0][0])
    done = np.zeros_like(anorm, dtype=bool)

    def resid(Ymat) -> np.ndarray:
        Yv = values(Ymat)
        if batched:
            YY = np.einsum("ijb,jkb->ikb", Yv, Yv)
        else:
            YY = Yv @ Yv
        d = YY - Av
        return np.sqrt(np.sum(d * d, axis=(0, 1)))

    def freeze(new, old):
        # keep old coefficients where already converged
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                c = np.where(done, old[i][j].c, new[i][j].c)
                out[i][j] = Jet(space, c)
        return out

    for _ in range(maxiter):
        done = done | (resid(Y) <= thresh)
        if np.all(done):
            break
        Zi = mat_inv(Z)
        Yi = mat_inv(Y)
        Yn = mat_add(Y, Zi, 0.5, 0.5)
        Zn = mat_add(Z, Yi, 0.5, 0.5)
        Y = freeze(Yn, Y)
        Z = freeze(Zn, Z)

    if not np.all(done | (resid(Y) <= thresh)):
        bad = np.where(~(done | (resid(Y) <= thresh)))
        raise ArithmeticError(f"matrix square root did not converge (batch indices {bad})")
    return Y
