"""Closed-form partial derivatives used as frozen constants in tests/test_jets.py.

Run: python tools/oracles/oracle_jets_closed_forms.py
"""
import sympy as sp

x, y, z = sp.symbols("x y z", positive=True)


def main():
    # second derivative of sqrt at 4
    d2 = sp.diff(sp.sqrt(x), x, 2).subs(x, 4)
    print("d2/dx2 sqrt(x) at x=4 :", sp.nsimplify(d2), "=", float(d2))

    # partials of 1/r at (3,4,0), r = sqrt(x^2+y^2+z^2) = 5
    r = sp.sqrt(x * x + y * y + z * z)
    f = 1 / r
    p = {x: 3, y: 4, z: 0}
    d1 = sp.diff(f, x).subs(p)
    print("d/dx (1/r) at (3,4,0)  :", sp.nsimplify(d1), "=", float(d1))
    # Taylor coefficient for alpha=(2,0,0) is d^2/dx^2 / 2!
    d2r = sp.diff(f, x, 2).subs(p) / 2
    print("c_(2,0,0) of 1/r there :", sp.nsimplify(d2r), "=", float(d2r))
    dxy = sp.diff(f, x, y).subs(p)
    print("c_(1,1,0) of 1/r there :", sp.nsimplify(dxy), "=", float(dxy))

    # a mixed elementary-function jet value for the composition test:
    # g = exp(sin(x*y)) at (0.7, -0.4)
    g = sp.exp(sp.sin(x * y))
    q = {x: sp.Rational(7, 10), y: sp.Rational(-4, 10)}
    for ax, ay in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]:
        c = sp.diff(g, x, ax, y, ay).subs(q) / (sp.factorial(ax) * sp.factorial(ay))
        print(f"c_({ax},{ay}) exp(sin(x*y)) @(0.7,-0.4) = {float(c):.17g}")


if __name__ == "__main__":
    main()
