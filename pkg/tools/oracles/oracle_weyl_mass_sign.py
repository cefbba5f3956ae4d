"""Symbolic oracle pinning the sign convention of the Weyl-structure mass.

Setup (n=3): isotropic chart g0 = u^4 delta with u = 1 + m/(2r) (mass
m(g0) = 16 pi m raw), Lee form theta0 = d(1/r), conformal factor
f = 1 + c/sqrt(r^2+1). Under g = f g0 the Lee form transforms as
theta_g = theta0 - (1/2) df/f.

All boundary integrals are radial here, so sympy limits settle everything:

  Phi      = lim_r oint df(nu) dA            (flux of df)
  L0       = lim_r oint theta0(nu) dA        (Lee flux, g0 gauge)
  Lg       = lim_r oint theta_g(nu) dA       (Lee flux, f g0 gauge)
  m(f g0)  = lim_r oint sum_ij (d_i g_ij - d_j g_ii) nu_j dA

Candidate A ("surface" sign): mA = m + 2(n-1) * Lee flux.
Candidate B ("volume" sign):  mB = m - 2(n-1) * Lee flux
                                 ( = m + 2(n-1) Int delta(theta) v ).

Only one candidate is conformally invariant; the Witten flux limit (computed
by the package and compared in the acceptance suite) converges to 1/4 of the
invariant one. This script prints both so the numbers are on record.

Run: python tools/oracles/oracle_weyl_mass_sign.py
"""
import sympy as sp


def main():
    r = sp.symbols("r", positive=True)
    m, c = sp.Rational(1), sp.Rational(3, 10)
    n = 3

    u = 1 + m / (2 * r)
    f = 1 + c / sp.sqrt(r ** 2 + 1)
    area = 4 * sp.pi * r ** 2

    # radial 1-form a(r) dr has oint a nu dA = a(r) * 4 pi r^2
    flux = lambda a: sp.limit(sp.simplify(a * area), r, sp.oo)

    Phi = flux(sp.diff(f, r))
    L0 = flux(sp.diff(1 / r, r))
    Lg = flux(sp.diff(1 / r, r) - sp.Rational(1, 2) * sp.diff(f, r) / f)
    print("Phi  = lim oint df(nu)      =", Phi)
    print("L0   = lim oint theta0(nu)  =", L0)
    print("Lg   = lim oint theta_g(nu) =", Lg, " (= L0 - Phi/2:", sp.simplify(Lg - (L0 - Phi / 2)) == 0, ")")

    # raw mass of h(r) * delta: integrand_j = (d_i h d_ij - d_j (3h)) nu_j = -2 h'
    mass_of = lambda h: sp.limit(-2 * sp.diff(h, r) * area, r, sp.oo)
    m_g0 = mass_of(u ** 4)
    m_fg0 = mass_of(f * u ** 4)
    print("m(g0)   =", m_g0)
    print("m(f g0) =", m_fg0, " (mass-change delta:", sp.simplify(m_fg0 - m_g0), "= (1-n)*Phi:",
          sp.simplify(m_fg0 - m_g0 - (1 - n) * Phi) == 0, ")")

    for name, sign in (("A (surface, +)", +1), ("B (volume, -)", -1)):
        mg = m_g0 + sign * 2 * (n - 1) * L0
        mfg = m_fg0 + sign * 2 * (n - 1) * Lg
        print(f"candidate {name}: m(D)[g0] = {mg},  m(D)[f g0] = {mfg},  invariant: {sp.simplify(mfg - mg) == 0}")


if __name__ == "__main__":
    main()
