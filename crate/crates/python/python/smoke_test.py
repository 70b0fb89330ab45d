"""Smoke test for the pyrepdiff extension module.

Build and install first, e.g. ``maturin develop`` in crates/python.
"""

import math
from fractions import Fraction

import pyrepdiff as rd


def close(a, b, rel=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-300)


def main():
    # D³ f(x²) = 8x³ f‴(x²) + 12x f″(x²)
    e = rd.Expansion("square", 3)
    assert e.terms() == [(Fraction(12), 1, 2, {}), (Fraction(8), 3, 3, {})], e.terms()
    assert e.differentiate() == rd.Expansion("square", 4)

    # D⁴ exp(x²) = (16x⁴ + 48x² + 12) exp(x²)
    x = 0.7
    expected = (16 * x**4 + 48 * x**2 + 12) * math.exp(x * x)
    assert close(e.differentiate().evaluate("exp", x), expected)
    assert close(rd.jet_derivative("exp", "square", 4, x), expected)

    # quadpoly with symbolic parameters, specialised afterwards
    q = rd.Expansion("quadpoly", 5).specialize(a=2, b="3")
    assert close(q.evaluate("exp", 0.3, a=2, b=3), rd.jet_derivative("exp", "quadpoly", 5, 0.3, a=2, b=3))

    # d⁵/dx⁵ √x-composed Tricomi function against the jet oracle
    tricomi = rd.UmbralFunction("tricomi0")
    v = rd.Expansion("sqrt", 5).evaluate(tricomi, 2.0)
    assert close(v, rd.jet_derivative(tricomi, "sqrt", 5, 2.0), rel=1e-10)

    # C₀(x²/4) = J₀(x); J₀(1) from scipy.special.j0
    j0 = rd.TaylorJet.variable(1.0, 6) * rd.TaylorJet.variable(1.0, 6)
    j0 = (j0 * rd.TaylorJet.constant(1.0, 0.25, 6)).compose(tricomi)
    assert close(j0.coefficients[0], 0.7651976865579666, rel=1e-13)
    assert close(j0.derivative(1), -0.44005058574493355, rel=1e-12)  # −J₁(1)

    # exp(x²)·exp(−x²) = 1, so every derivative vanishes
    assert abs(rd.jet_product_derivative("exp", "gauss(-1)", "square", 6, 0.9)) < 1e-9

    h = rd.HkdfPoly(2, 4)
    assert str(h) == "x^4 + 12*x^2*y + 12*y^2", str(h)
    assert h.evaluate([1, Fraction(1, 2)]) == Fraction(10)

    assert rd.stirling("1", 5, 2) == 15
    assert rd.stirling("1/2", 4, 2) == Fraction(3, 4)
    assert rd.bessel_poly(2) == [1, 3, 3]

    # order 2 with a=1, b=0, c=1 and f = exp evaluates to √π/2
    r = rd.gaussian_integral(2, 1.0, 0.0, 1.0, check=True)
    assert close(r["value"], math.sqrt(math.pi) / 2) and r["passed"], r

    passed, worst, count = rd.verify("all", 6)
    assert passed and worst < 1e-9, (worst, count)

    try:
        rd.Expansion("sqrt", 3).evaluate("exp", -1.0)
    except rd.DomainError:
        pass
    else:
        raise AssertionError("expected DomainError")

    print(f"pyrepdiff smoke test passed ({count} oracle comparisons, worst rel {worst:.1e})")


if __name__ == "__main__":
    main()
