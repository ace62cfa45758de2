import os
import random
from fractions import Fraction
from pathlib import Path

import pytest
import sympy as sp
from hypothesis import HealthCheck, settings

from gnf.homological import LinearPart
from gnf.polyvec import GradedVectorField, HomogeneousVF, multi_indices

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).resolve().parents[1] / "src" / "gnf" / "data"


def symbols(n):
    return sp.symbols(f"x1:{n + 1}")


def to_sympy(f: HomogeneousVF):
    """Components of ``f`` as sympy expressions (rational coefficients kept exact)."""
    xs = symbols(f.n)
    comps = [sp.Integer(0)] * f.n
    for (i, q), c in f.items():
        coeff = sp.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sp.Float(c)
        comps[i] += coeff * sp.prod([x ** e for x, e in zip(xs, q)])
    return comps


def from_sympy(comps, n, degree):
    xs = symbols(n)
    coeffs = {}
    for i, expr in enumerate(comps):
        poly = sp.Poly(sp.expand(expr), *xs)
        for mon, c in poly.terms():
            if sum(mon) == degree and c != 0:
                coeffs[(i, tuple(mon))] = Fraction(int(c.p), int(c.q))
    return HomogeneousVF(n, degree, coeffs)


def random_homogeneous(rng: random.Random, n, d, density=1.0, span=5):
    coeffs = {}
    for i in range(n):
        for q in multi_indices(n, d):
            if rng.random() < density:
                coeffs[(i, q)] = Fraction(rng.randint(-span, span), rng.randint(1, 4))
    return HomogeneousVF(n, d, coeffs)


def random_field(seed, eigenvalues=(1, -3), max_degree=4, nmax=6):
    rng = random.Random(seed)
    n = len(eigenvalues)
    L = LinearPart.diagonal_of([Fraction(e) for e in eigenvalues])
    parts = {d: random_homogeneous(rng, n, d) for d in range(2, max_degree + 1)}
    return GradedVectorField(L, parts, nmax)


@pytest.fixture
def data_dir():
    return DATA
