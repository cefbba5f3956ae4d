"""Symbolic oracles for the orthonormal-frame spin connection and the
weighted spinor calculus. Frozen constants go to tests/test_spinor.py.

Conventions under test (independent sympy derivation):
  * frame E_a = columns of A^{-1/2}, A = matrix of g; for g = u^4 delta
    (n=3) this is E_a = u^-2 d_a.
  * omega_i^{ab} = g(D_i E_a, E_b)  (D = Levi-Civita), antisymmetric in ab.
    Derived closed form for g = u^4 delta:
        omega_i^{ab} = 2 (u_a delta_i^b - u_b delta_i^a) / u .
  * gamma_a = i sigma_a (n=3) satisfy gamma_a gamma_b + gamma_b gamma_a
    = -2 delta_ab, anti-hermitian.
  * spin lift: D_i psi = d_i psi + 1/4 sum_ab omega_i^{ab} gamma_a gamma_b psi.
  * weighted derivative at weight k:
        Dk_X psi = D_X psi - 1/2 X . theta . psi + (k - 1/2) theta(X) psi.
  * Parallel-spinor example (flat metric, n=3): theta = -2 dr / r,
    psi = r^-2 * (sum_m x_m gamma_m) eta0 is Dk-parallel at k = -1/2,
    and |psi|^2 = r^-2 |eta0|^2.

Run: python tools/oracles/oracle_frame_spinor.py
"""
import sympy as sp

x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
xs = [x1, x2, x3]

I2 = sp.eye(2)
sig = [sp.Matrix([[0, 1], [1, 0]]),
       sp.Matrix([[0, -sp.I], [sp.I, 0]]),
       sp.Matrix([[1, 0], [0, -1]])]
gam = [sp.I * s for s in sig]


def christoffel(g):
    ginv = g.inv()
    G = [[[sp.S(0)] * 3 for _ in range(3)] for _ in range(3)]
    for k in range(3):
        for i in range(3):
            for j in range(3):
                s = sum(ginv[k, l] * (sp.diff(g[j, l], xs[i]) + sp.diff(g[i, l], xs[j]) - sp.diff(g[i, j], xs[l]))
                        for l in range(3))
                G[k][i][j] = sp.together(s / 2)
    return G


def main():
    # --- Clifford sanity -------------------------------------------------
    for a in range(3):
        for b in range(3):
            acom = gam[a] * gam[b] + gam[b] * gam[a]
            assert acom == -2 * (1 if a == b else 0) * I2
        assert (gam[a].conjugate().T + gam[a]).is_zero_matrix
    print("gamma_a = i sigma_a: Clifford relation and anti-hermiticity OK")

    # --- frame spin connection for g = u^4 delta -------------------------
    u = sp.Function("u", positive=True)(x1, x2, x3)
    g = sp.diag(u ** 4, u ** 4, u ** 4)
    G = christoffel(g)
    E = [[(sp.S(1) / u ** 2 if i == a else sp.S(0)) for a in range(3)] for i in range(3)]  # E[i][a]
    omega = [[[sp.S(0)] * 3 for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for a in range(3):
            # (nabla_i E_a)^j = d_i E_a^j + Gamma^j_{i l} E_a^l
            nab = [sp.diff(E[j][a], xs[i]) + sum(G[j][i][l] * E[l][a] for l in range(3)) for j in range(3)]
            for b in range(3):
                omega[i][a][b] = sp.simplify(sum(g[j, k] * nab[j] * E[k][b] for j in range(3) for k in range(3)))
    ok = True
    for i in range(3):
        for a in range(3):
            for b in range(3):
                expect = 2 * (sp.diff(u, xs[a]) * (1 if i == b else 0)
                              - sp.diff(u, xs[b]) * (1 if i == a else 0)) / u
                if sp.simplify(omega[i][a][b] - expect) != 0:
                    ok = False
                    print("MISMATCH", i, a, b, sp.simplify(omega[i][a][b]), expect)
    print("omega_i^{ab} == 2(u_a delta_i^b - u_b delta_i^a)/u for g=u^4 delta:", ok)

    # frozen spot value: isotropic u = 1 + 1/(2r) at (1.5, -0.5, 2.0)
    r = sp.sqrt(x1 ** 2 + x2 ** 2 + x3 ** 2)
    uiso = 1 + 1 / (2 * r)
    vals = {x1: sp.Rational(3, 2), x2: -sp.Rational(1, 2), x3: 2}
    subs_u = lambda e: e.subs(u, uiso).doit()
    om_121 = 2 * (sp.diff(uiso, x1) * 0 - sp.diff(uiso, x2) * 1) / uiso  # i=1 a=1 b=2 -> 2(u_1 d_1^2 - u_2 d_1^1)/u
    print("isotropic omega_1^{12} at (1.5,-0.5,2.0) =", float(om_121.subs(vals)))

    # --- weighted-parallel spinor (flat, n=3) ----------------------------
    rr = sp.sqrt(x1 ** 2 + x2 ** 2 + x3 ** 2)
    theta = [-2 * xi / rr ** 2 for xi in xs]      # -2 dr/r
    eta0 = sp.Matrix([1, 0])
    xdot = sum((xs[m] * gam[m] for m in range(3)), sp.zeros(2, 2))
    psi = (rr ** (-2)) * (xdot * eta0)
    k = -sp.S(1) / 2
    thetadot = sum((theta[j] * gam[j] for j in range(3)), sp.zeros(2, 2))
    allzero = True
    for i in range(3):
        Dk = sp.diff(psi, xs[i]) - sp.S(1) / 2 * gam[i] * (thetadot * psi) + (k - sp.S(1) / 2) * theta[i] * psi
        Dk = sp.simplify(Dk)
        if not Dk.is_zero_matrix:
            allzero = False
            print("D_%d psi =" % (i + 1), Dk)
    print("weighted-parallel spinor check (flat, theta=-2dr/r, k=-1/2):", allzero)
    n2 = sp.simplify((psi.conjugate().T * psi)[0, 0])
    print("|psi|^2 =", n2, " (expect r^-2)")
    # component strings (real/imag) used by the bundled test spec:
    for c in range(2):
        comp = sp.simplify(psi[c] * rr ** 2)
        print(f"  r^2 * psi_{c} = {comp}  -> re, im = {sp.re(comp)}, {sp.im(comp)}")


if __name__ == "__main__":
    main()
