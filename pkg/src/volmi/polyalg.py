"""Exact multivariate polynomial arithmetic and simplex integration.

Polynomials are sparse maps from exponent tuples to ``Fraction`` coefficients.
For a C x C joint distribution the variable ordering is fixed row-major:
u00, u01, ..., u_{C-1,C-1} occupy indices 0..C^2-1, and when a symbolic
column-stochastic matrix T is in play its entries follow as t-variables
(T[i][j] at index C^2 + i*C + j).  That ordering is what makes
:func:`integrate_out_T` able to integrate each T column over its simplex
independently.
"""

import math
import re
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .rational import to_exact


class MultiPoly:
    """Sparse polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples (length ``nvars``, nonnegative ints) to
    nonzero Fractions.  Example: with nvars=4, the binary determinant
    u00*u11 - u01*u10 is ``{(1,0,0,1): 1, (0,1,1,0): -1}``.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        clean = {}
        for exps, coef in (terms or {}).items():
            coef = to_exact(coef)
            if coef == 0:
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ConfigurationError(f"bad exponent vector {exps} for nvars={nvars}")
            clean[exps] = coef
        self.terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, value) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: to_exact(value)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MultiPoly":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, nvars: int, exps, coef=1) -> "MultiPoly":
        return cls(nvars, {tuple(exps): to_exact(coef)})

    # -- ring operations ----------------------------------------------------

    def _check(self, other: "MultiPoly"):
        if self.nvars != other.nvars:
            raise PreconditionError(
                f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for exps, coef in other.terms.items():
            s = out.get(exps, 0) + coef
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        if len(self.terms) * len(other.terms) >= 20_000:
            return self._mul_cleared(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(key, 0) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return MultiPoly(self.nvars, out)

    def _denominator_cleared(self) -> tuple[int, dict]:
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        return den, {e: int(c * den) for e, c in self.terms.items()}

    def _mul_cleared(self, other: "MultiPoly") -> "MultiPoly":
        """Large products: clear denominators, multiply over the integers,
        normalize once per output term (Fraction gcds dominate otherwise)."""
        d1, t1 = self._denominator_cleared()
        d2, t2 = other._denominator_cleared()
        acc: dict = {}
        for e1, c1 in t1.items():
            for e2, c2 in t2.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                acc[key] = acc.get(key, 0) + c1 * c2
        den = d1 * d2
        return MultiPoly(self.nvars,
                         {e: Fraction(c, den) for e, c in acc.items() if c})

    __rmul__ = __mul__

    def scale(self, factor) -> "MultiPoly":
        factor = to_exact(factor)
        if factor == 0:
            return MultiPoly(self.nvars)
        return MultiPoly(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __pow__(self, k: int) -> "MultiPoly":
        if not isinstance(k, int) or k < 0:
            raise PreconditionError("polynomial powers must be nonnegative integers")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.nvars == other.nvars \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- queries ------------------------------------------------------------

    def degree(self) -> int:
        """Total degree; by convention the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def eval(self, point):
        """Evaluate at a flat point (length nvars).  Exact when the point is
        made of Fractions/ints, float otherwise."""
        point = list(point)
        if len(point) != self.nvars:
            raise PreconditionError("evaluation point has wrong length")
        total = 0
        for exps, coef in self.terms.items():
            v = coef
            for x, e in zip(point, exps):
                if e:
                    v = v * x ** e
            total = total + v
        return total

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation at many points, shape (N, nvars) -> (N,)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise PreconditionError("points must have shape (N, nvars)")
        n = pts.shape[0]
        max_exp = [0] * self.nvars
        for exps in self.terms:
            for v, e in enumerate(exps):
                if e > max_exp[v]:
                    max_exp[v] = e
        powers = []
        for v in range(self.nvars):
            tab = np.ones((max_exp[v] + 1, n))
            for e in range(1, max_exp[v] + 1):
                tab[e] = tab[e - 1] * pts[:, v]
            powers.append(tab)
        out = np.zeros(n)
        for exps, coef in self.terms.items():
            term = np.full(n, float(coef))
            for v, e in enumerate(exps):
                if e:
                    term = term * powers[v][e]
            out += term
        return out

    def homogeneous_components(self) -> dict[int, "MultiPoly"]:
        buckets: dict[int, dict] = {}
        for exps, coef in self.terms.items():
            buckets.setdefault(sum(exps), {})[exps] = coef
        return {d: MultiPoly(self.nvars, t) for d, t in buckets.items()}

    # -- composition --------------------------------------------------------

    def compose(self, substitutions: list["MultiPoly"]) -> "MultiPoly":
        """Substitute substitutions[v] for variable v.  All substitution
        polynomials must share a variable count, which becomes the output's."""
        if len(substitutions) != self.nvars:
            raise PreconditionError("need one substitution per variable")
        if not substitutions:
            raise PreconditionError("cannot compose a 0-variable polynomial")
        nout = substitutions[0].nvars
        if any(s.nvars != nout for s in substitutions):
            raise PreconditionError("substitutions disagree on variable count")
        cache: dict[tuple[int, int], MultiPoly] = {}

        def power(v: int, e: int) -> MultiPoly:
            key = (v, e)
            if key not in cache:
                if e == 0:
                    cache[key] = MultiPoly.constant(nout, 1)
                else:
                    cache[key] = power(v, e - 1) * substitutions[v]
            return cache[key]

        total = MultiPoly(nout)
        for exps, coef in self.terms.items():
            term = MultiPoly.constant(nout, coef)
            for v, e in enumerate(exps):
                if e:
                    term = term * power(v, e)
            total = total + term
        return total

    # -- serialization ------------------------------------------------------

    def _var_name(self, v: int) -> str:
        c = math.isqrt(self.nvars)
        if c * c == self.nvars and c <= 9:
            return f"u{v // c}{v % c}"
        # u-block plus t-block layouts used during T-substitution
        for cu in range(2, 10):
            if self.nvars in (cu * cu + cu * cu, cu * cu + cu * (cu - 1)):
                if v < cu * cu:
                    return f"u{v // cu}{v % cu}"
                w = v - cu * cu
                return f"t{w // cu}{w % cu}"
        return f"x{v}"

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, key=lambda e: (-sum(e), e)):
            coef = self.terms[exps]
            factors = [f"{self._var_name(v)}^{e}" if e > 1 else self._var_name(v)
                       for v, e in enumerate(exps) if e]
            coef_txt = str(coef.numerator) if coef.denominator == 1 \
                else f"{coef.numerator}/{coef.denominator}"
            parts.append(coef_txt if not factors else f"{coef_txt} * " + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    @classmethod
    def from_text(cls, text: str, nvars: int) -> "MultiPoly":
        """Parse the to_text form (sums of 'coef * u00^a*u01^b')."""
        cleaned = text.replace(" ", "").replace("-", "+-")
        names = {cls(nvars)._var_name(v): v for v in range(nvars)}
        poly = cls(nvars)
        for chunk in cleaned.split("+"):
            if not chunk:
                continue
            coef = Fraction(1)
            if chunk.startswith("-"):
                coef = -coef
                chunk = chunk[1:]
            exps = [0] * nvars
            for factor in chunk.split("*"):
                if not factor:
                    continue
                m = re.fullmatch(r"([a-z]+\d+)(?:\^(\d+))?", factor)
                if m:
                    name, e = m.group(1), int(m.group(2) or 1)
                    if name not in names:
                        raise ConfigurationError(f"unknown variable {name!r}")
                    exps[names[name]] += e
                else:
                    try:
                        coef *= Fraction(factor)
                    except ValueError as exc:
                        raise ConfigurationError(f"bad factor {factor!r}") from exc
            poly = poly + cls.monomial(nvars, exps, coef)
        return poly

    def to_json(self) -> dict:
        return {"nvars": self.nvars,
                "terms": [{"exps": list(e),
                           "coef": f"{c.numerator}/{c.denominator}" if c.denominator != 1
                           else str(c.numerator)}
                          for e, c in sorted(self.terms.items(),
                                             key=lambda kv: (-sum(kv[0]), kv[0]))]}

    @classmethod
    def from_json(cls, obj: dict) -> "MultiPoly":
        try:
            terms = {tuple(t["exps"]): Fraction(str(t["coef"])) for t in obj["terms"]}
            return cls(int(obj["nvars"]), terms)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad polynomial JSON: {exc}") from exc

    def __repr__(self):
        return f"MultiPoly({self.to_text()})"


def simplex_monomial_integral(exponents) -> Fraction:
    """Exact integral of prod t_i^{a_i} over the standard m-simplex
    {t >= 0, sum t_i <= 1}: prod a_i! / (m + sum a_i)!."""
    exps = [int(a) for a in exponents]
    if any(a < 0 for a in exps):
        raise PreconditionError("exponents must be nonnegative")
    m = len(exps)
    num = 1
    for a in exps:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(m + sum(exps)))


def integrate_out_T(poly: MultiPoly, C: int) -> MultiPoly:
    """Integrate the t-variables over the product of per-column simplices.

    Accepts t-blocks of width C(C-1) (free rows only, the last row already
    eliminated by the column-sum substitution) or C^2 (all of T, where the
    last-row entry plays the remainder 1 - sum of its column).  Either way
    each column integrates independently:

        int  prod_i t_i^{a_i} * r^b  over the (C-1)-simplex
            = prod_i a_i! * b! / (C-1 + sum a_i + b)!

    The result is a polynomial in the u-variables of unchanged u-degree.
    """
    nu = C * C
    t_width = poly.nvars - nu
    if t_width not in (C * (C - 1), C * C):
        raise PreconditionError(
            f"expected {nu}+{C * (C - 1)} or {nu}+{nu} variables, got {poly.nvars}")
    t_rows = t_width // C
    out: dict = {}
    for exps, coef in poly.terms.items():
        factor = Fraction(1)
        for j in range(C):
            col = [exps[nu + i * C + j] for i in range(t_rows)]
            num = 1
            for a in col:
                num *= math.factorial(a)
            factor *= Fraction(num, math.factorial(C - 1 + sum(col)))
        key = exps[:nu]
        s = out.get(key, 0) + coef * factor
        if s == 0:
            out.pop(key, None)
        else:
            out[key] = s
    return MultiPoly(nu, out)


def det_poly(C: int, nvars: int | None = None) -> MultiPoly:
    """det(U) as a polynomial in the row-major u-variables (Leibniz sum)."""
    from itertools import permutations

    nvars = nvars if nvars is not None else C * C
    terms: dict = {}
    for perm in permutations(range(C)):
        sign = 1
        seen = list(perm)
        for i in range(C):  # parity by counting inversions
            for j in range(i + 1, C):
                if seen[i] > seen[j]:
                    sign = -sign
        exps = [0] * nvars
        for i in range(C):
            exps[i * C + perm[i]] += 1
        terms[tuple(exps)] = Fraction(sign)
    return MultiPoly(nvars, terms)


def total_mass_poly(C: int) -> MultiPoly:
    """sum of all u-variables (equals 1 on the distribution domain)."""
    nu = C * C
    return MultiPoly(nu, {tuple(1 if k == v else 0 for k in range(nu)): Fraction(1)
                          for v in range(nu)})
