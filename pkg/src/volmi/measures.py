"""Classical information-monotone mutual information measures.

All of these take the joint distribution U of (X, Y) with X indexing rows and
return a nonnegative scalar that cannot increase under left multiplication by
a column-stochastic matrix (post-processing X).  The distance-based families
compare the posterior U_{Y|x} against the marginal U_Y:

    FMI^f :  E_{x <- U_X}  D_f(U_{Y|x}, U_Y)      (f convex, f(1) = 0)
    BMI^PS:  E_{x <- U_X}  D_PS(U_{Y|x}, U_Y)     (PS a proper scoring rule)

with Shannon MI (KL / log score, in nats) and quadratic MI (squared distance)
as the named special cases.  DMI is |det U|.
"""

import math
from fractions import Fraction

import numpy as np

from .core import JointDistribution
from .errors import ConfigurationError, PreconditionError
from .polyalg import MultiPoly, det_poly


def dmi(U: JointDistribution):
    """Determinant mutual information |det(U)|; exact in rational mode."""
    d = U.det()
    return abs(d)


def _rows_conditionals(U: JointDistribution):
    """Yield (row mass, conditional row, marginal) as float arrays."""
    e = U.float_entries()
    marginal = e.sum(axis=0)
    for i in range(U.C):
        mass = e[i].sum()
        if mass <= 0:
            continue
        yield mass, e[i] / mass, marginal


def smi(U: JointDistribution) -> float:
    """Shannon MI in nats; 0 log 0 := 0."""
    e = U.float_entries()
    r = e.sum(axis=1, keepdims=True)
    c = e.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(e) - np.log(r) - np.log(c)
    mask = e > 0
    return float(np.sum(e[mask] * logs[mask]))


def qmi(U: JointDistribution):
    """Quadratic MI: E_x ||U_{Y|x} - U_Y||^2.  Exact for exact inputs."""
    if U.exact:
        e = U.exact_entries()
        marg = [sum(e[:, j]) for j in range(U.C)]
        total = Fraction(0)
        for i in range(U.C):
            mass = sum(e[i, :])
            if mass == 0:
                continue
            total += mass * sum((e[i, j] / mass - marg[j]) ** 2 for j in range(U.C))
        return total
    total = 0.0
    for mass, cond, marg in _rows_conditionals(U):
        total += mass * float(np.sum((cond - marg) ** 2))
    return total


def _f_kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _f_tvd(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(np.abs(p - q)))


_F_DIVERGENCES = {"kl": _f_kl, "tvd": _f_tvd}


def fmi(U: JointDistribution, f) -> float:
    """f-mutual information for f in {'kl', 'tvd'} or a convex f with
    f(1) = 0 supplied as a callable of the ratio q/p."""
    if callable(f):
        def div(p, q):
            mask = p > 0
            return float(np.sum(p[mask] * np.vectorize(f)(q[mask] / p[mask])))
    else:
        try:
            div = _F_DIVERGENCES[str(f).lower()]
        except KeyError:
            raise ConfigurationError(f"unknown f-divergence {f!r}") from None
    return sum(mass * div(cond, marg) for mass, cond, marg in _rows_conditionals(U))


def _bregman_log(p: np.ndarray, q: np.ndarray) -> float:
    return _f_kl(p, q)


def _bregman_quadratic(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum((p - q) ** 2))


_BREGMAN = {"log": _bregman_log, "quadratic": _bregman_quadratic}


def bmi(U: JointDistribution, ps) -> float:
    """Bregman MI for the log or quadratic proper scoring rule.  The log rule
    recovers Shannon MI; the quadratic rule recovers quadratic MI."""
    try:
        div = _BREGMAN[str(ps).lower()]
    except KeyError:
        raise ConfigurationError(f"unknown scoring rule {ps!r}") from None
    return sum(mass * div(cond, marg) for mass, cond, marg in _rows_conditionals(U))


def dmi_squared_poly(C: int) -> MultiPoly:
    """det(U)^2 as a polynomial, the classic degree-2C polynomial MI."""
    d = det_poly(C)
    return d * d


class MeasureSpec:
    """A named mutual-information measure with a uniform evaluate() surface.

    kinds: dmi | smi | qmi | fmi(f) | bmi(ps) | dmi2 | poly(MultiPoly)
           | vmi(closed form or density)
    Polynomial-backed kinds (dmi2, poly, vmi with a materialized closed form)
    expose .polynomial() for unbiased-estimator compilation.
    """

    def __init__(self, kind: str, *, f=None, ps=None, poly: MultiPoly | None = None,
                 closed_form=None, density=None, mode: str | None = None,
                 C: int | None = None, label: str | None = None):
        self.kind = kind
        self.f = f
        self.ps = ps
        self.poly = poly
        self.closed_form = closed_form
        self.density = density
        self.mode = mode
        self.C = C
        self.label = label or kind

    # -- constructors -------------------------------------------------------

    @classmethod
    def dmi(cls):
        return cls("dmi")

    @classmethod
    def smi(cls):
        return cls("smi")

    @classmethod
    def qmi(cls):
        return cls("qmi")

    @classmethod
    def fmi(cls, f):
        return cls("fmi", f=f, label=f"fmi[{f}]")

    @classmethod
    def bmi(cls, ps):
        return cls("bmi", ps=ps, label=f"bmi[{ps}]")

    @classmethod
    def dmi_squared(cls, C: int):
        return cls("dmi2", poly=dmi_squared_poly(C), C=C, label="dmi^2")

    @classmethod
    def from_poly(cls, poly: MultiPoly, label: str = "poly"):
        c = math.isqrt(poly.nvars)
        if c * c != poly.nvars:
            raise ConfigurationError("measure polynomials need C^2 variables")
        return cls("poly", poly=poly, C=c, label=label)

    @classmethod
    def vmi(cls, closed_form, label: str | None = None):
        """Wrap a materialized VMI closed form (see volmi.vmi)."""
        return cls("vmi", closed_form=closed_form, C=closed_form.C,
                   mode=closed_form.mode,
                   label=label or f"vmi[{closed_form.mode}]")

    @classmethod
    def vmi_numeric(cls, density, C: int, label: str | None = None):
        """A VMI evaluated by quadrature / Monte Carlo (not mechanism-usable)."""
        return cls("vmi", density=density, C=C, mode="raw",
                   label=label or "vmi[numeric]")

    # -- behavior ------------------------------------------------------------

    def evaluate(self, U: JointDistribution):
        if self.kind == "dmi":
            return dmi(U)
        if self.kind == "smi":
            return smi(U)
        if self.kind == "qmi":
            return qmi(U)
        if self.kind == "fmi":
            return fmi(U, self.f)
        if self.kind == "bmi":
            return bmi(U, self.ps)
        if self.kind in ("dmi2", "poly"):
            return self.poly.eval([v for row in U.entries for v in row])
        if self.kind == "vmi":
            if self.closed_form is not None:
                return self.closed_form.value(U)
            from .vmi import vmi_numeric
            return vmi_numeric(self.density, U)[0]
        raise ConfigurationError(f"unknown measure kind {self.kind!r}")

    def evaluate_batch(self, flat_points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at row-major flattened joints."""
        if self.is_polynomial_backed():
            return self.polynomial().eval_batch(flat_points)
        raise PreconditionError("batch evaluation needs a polynomial-backed measure")

    def is_polynomial_backed(self) -> bool:
        if self.kind in ("dmi2", "poly"):
            return True
        return (self.kind == "vmi" and self.closed_form is not None
                and self.closed_form.estimable)

    def polynomial(self) -> MultiPoly:
        """The exact polynomial whose value this measure computes (up to the
        closed form's tagged radical, which scales payments only)."""
        if self.kind in ("dmi2", "poly"):
            return self.poly
        if self.kind == "vmi" and self.closed_form is not None:
            if not self.closed_form.estimable:
                raise PreconditionError(
                    "this VMI closed form is |poly|-valued and has no unbiased estimator")
            return self.closed_form.poly
        raise PreconditionError(f"measure {self.label!r} is not polynomial-backed")

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        obj: dict = {"kind": self.kind}
        if self.kind == "fmi":
            obj["f"] = self.f
        elif self.kind == "bmi":
            obj["ps"] = self.ps
        elif self.kind == "dmi2":
            obj["C"] = self.C
        elif self.kind == "poly":
            obj["poly"] = self.poly.to_json()
        elif self.kind == "vmi":
            if self.closed_form is not None:
                obj["closed_form"] = self.closed_form.to_json()
            else:
                obj["density"] = self.density.to_json()
                obj["C"] = self.C
                obj["mode"] = self.mode
        return obj

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "MeasureSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigurationError("measure JSON needs a 'kind'")
        kind = str(obj["kind"]).lower()
        if kind == "dmi":
            return cls.dmi()
        if kind == "smi":
            return cls.smi()
        if kind == "qmi":
            return cls.qmi()
        if kind == "fmi":
            return cls.fmi(obj.get("f", "kl"))
        if kind == "bmi":
            return cls.bmi(obj.get("ps", "log"))
        if kind == "dmi2":
            return cls.dmi_squared(int(obj.get("C", 2)))
        if kind == "poly":
            return cls.from_poly(MultiPoly.from_json(obj["poly"]))
        if kind == "vmi":
            from .vmi import DensitySpec, VmiClosedForm, vmi_symbolic
            if "closed_form" in obj:
                return cls.vmi(VmiClosedForm.from_json(obj["closed_form"]))
            density = DensitySpec.from_json(obj["density"], exact=exact)
            C = int(obj.get("C", 2))
            mode = obj.get("mode", "raw")
            if mode == "raw":
                return cls.vmi_numeric(density, C)
            return cls.vmi(vmi_symbolic(density, C, mode))
        raise ConfigurationError(f"unknown measure kind {obj['kind']!r}")

    def __repr__(self):
        return f"MeasureSpec({self.label})"
