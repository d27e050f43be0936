"""Joint distributions, report/noise matrices, and the informativeness order.

The central objects are C x C joint distribution matrices U (U[i, j] is the
probability of the signal pair (i, j)) and column-stochastic matrices T that
model report strategies and effort noise.  U' is less informative than U when
U' = T U for some column-stochastic T; this partial order is the backbone of
every monotonicity statement in the package.

Matrices carry either exact ``Fraction`` entries (object dtype) or float64
entries.  Order checks always run in exact rational arithmetic: float inputs
convert exactly (floats are dyadic rationals), and an optional tolerance
absorbs noise from float pipelines.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lp
from .errors import ConfigurationError, PreconditionError
from .rational import (array_to_exact, array_to_float, format_number,
                       grid_to_array, is_exact_array, parse_number, to_exact)

_FLOAT_SUM_TOL = 1e-9
_FLOAT_NEG_TOL = 1e-12


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # exact output only when every input is exact; float otherwise
    if is_exact_array(a) and is_exact_array(b):
        return np.dot(a, b)
    return np.dot(array_to_float(a), array_to_float(b))


def _exact_det(m) -> Fraction:
    """Determinant by Gaussian elimination over the rationals (tiny matrices)."""
    a = [[to_exact(v) for v in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _exact_inverse(m) -> list[list[Fraction]] | None:
    """Gauss-Jordan inverse over the rationals; None when singular."""
    n = len(m)
    a = [[to_exact(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


class _Grid:
    """Shared plumbing for the two matrix types."""

    entries: np.ndarray

    @property
    def C(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact_array(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def float_entries(self) -> np.ndarray:
        return array_to_float(self.entries)

    def exact_entries(self) -> np.ndarray:
        return array_to_exact(self.entries)

    def allclose(self, other, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.float_entries() - other.float_entries()) <= tol))

    def __eq__(self, other):
        if not isinstance(other, _Grid):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            np.all(self.exact_entries() == other.exact_entries()))

    def __hash__(self):
        return hash(tuple(map(tuple, self.exact_entries())))

    def __repr__(self):
        return f"{type(self).__name__}({self.entries.tolist()!r})"


class JointDistribution(_Grid):
    """A C x C nonnegative matrix summing to one."""

    def __init__(self, rows, exact: bool | None = None):
        arr = rows if isinstance(rows, np.ndarray) else None
        if arr is None:
            want_exact = exact if exact is not None else _wants_exact(rows)
            arr = grid_to_array(rows, want_exact)
        elif exact is True and not is_exact_array(arr):
            arr = array_to_exact(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise ConfigurationError("joint distribution must be square with C >= 2")
        self.entries = arr
        self._validate()

    def _validate(self):
        if self.exact:
            total = sum(self.entries.reshape(-1))
            if any(v < 0 for v in self.entries.reshape(-1)):
                raise ConfigurationError("joint distribution has a negative entry")
            if total != 1:
                raise ConfigurationError(f"joint distribution sums to {total}, not 1")
        else:
            if np.any(self.entries < -_FLOAT_NEG_TOL):
                raise ConfigurationError("joint distribution has a negative entry")
            if abs(float(self.entries.sum()) - 1.0) > _FLOAT_SUM_TOL:
                raise ConfigurationError(
                    f"joint distribution sums to {self.entries.sum()}, not 1")

    def det(self):
        return _exact_det(self.entries) if self.exact else float(np.linalg.det(self.entries))

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.entries.T.copy())

    def column_sums(self):
        return tuple(sum(self.entries[:, j]) for j in range(self.C))

    def row_sums(self):
        return tuple(sum(self.entries[i, :]) for i in range(self.C))

    def marginal_product(self) -> "JointDistribution":
        """The joint of independent variables with the same marginals."""
        rows = self.row_sums()
        cols = self.column_sums()
        return JointDistribution([[rows[i] * cols[j] for j in range(self.C)]
                                  for i in range(self.C)])

    def as_exact(self) -> "JointDistribution":
        return self if self.exact else JointDistribution(array_to_exact(self.entries))

    def as_float(self) -> "JointDistribution":
        return self if not self.exact else JointDistribution(self.float_entries())

    def to_json(self) -> dict:
        return {"C": self.C,
                "rows": [[format_number(v) for v in row] for row in self.entries.tolist()]}

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "JointDistribution":
        if not isinstance(obj, dict) or "rows" not in obj:
            raise ConfigurationError("joint JSON needs a 'rows' field")
        rows = [[parse_number(v, exact=exact) for v in row] for row in obj["rows"]]
        if "C" in obj and obj["C"] != len(rows):
            raise ConfigurationError("joint JSON C does not match rows")
        return cls(rows)


class ColumnStochasticMatrix(_Grid):
    """Nonnegative C x C matrix with unit column sums (strategy / noise)."""

    def __init__(self, rows, exact: bool | None = None):
        arr = rows if isinstance(rows, np.ndarray) else None
        if arr is None:
            want_exact = exact if exact is not None else _wants_exact(rows)
            arr = grid_to_array(rows, want_exact)
        elif exact is True and not is_exact_array(arr):
            arr = array_to_exact(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ConfigurationError("stochastic matrix must be square")
        self.entries = arr
        self._validate()

    def _validate(self):
        if self.exact:
            if any(v < 0 for v in self.entries.reshape(-1)):
                raise ConfigurationError("stochastic matrix has a negative entry")
            for j in range(self.C):
                s = sum(self.entries[:, j])
                if s != 1:
                    raise ConfigurationError(f"column {j} sums to {s}, not 1")
        else:
            if np.any(self.entries < -_FLOAT_NEG_TOL):
                raise ConfigurationError("stochastic matrix has a negative entry")
            sums = self.entries.sum(axis=0)
            if np.any(np.abs(sums - 1.0) > _FLOAT_SUM_TOL):
                raise ConfigurationError(f"column sums {sums} are not 1")

    def det(self):
        return _exact_det(self.entries) if self.exact else float(np.linalg.det(self.entries))

    def transpose_entries(self) -> np.ndarray:
        return self.entries.T.copy()

    def is_uninformative(self, tol: float = 0.0) -> bool:
        """True when every column is identical (report ignores the signal)."""
        first = self.entries[:, 0]
        if self.exact and tol == 0:
            return all(bool(np.all(self.entries[:, j] == first)) for j in range(self.C))
        f = self.float_entries()
        return bool(np.all(np.abs(f - f[:, :1]) <= max(tol, 1e-12)))

    @classmethod
    def identity(cls, C: int, exact: bool = False) -> "ColumnStochasticMatrix":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return cls([[one if i == j else zero for j in range(C)] for i in range(C)])

    @classmethod
    def uniform(cls, C: int, exact: bool = False) -> "ColumnStochasticMatrix":
        v = Fraction(1, C) if exact else 1.0 / C
        return cls([[v] * C for _ in range(C)])

    def to_json(self) -> dict:
        return {"C": self.C,
                "rows": [[format_number(v) for v in row] for row in self.entries.tolist()]}

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "ColumnStochasticMatrix":
        rows = [[parse_number(v, exact=exact) for v in row] for row in obj["rows"]]
        return cls(rows)


def _wants_exact(rows) -> bool:
    return any(isinstance(v, (Fraction, str)) for row in rows for v in row) and not any(
        isinstance(v, float) for row in rows for v in row)


@dataclass(frozen=True)
class SliceId:
    """Column-sum signature; two joints share a slice iff these agree."""

    sums: tuple

    def __post_init__(self):
        if any(to_exact(v) < 0 for v in self.sums):
            raise ConfigurationError("slice sums must be nonnegative")
        total = sum(to_exact(v) for v in self.sums)
        if not (total == 1 or abs(float(total) - 1.0) <= _FLOAT_SUM_TOL):
            raise ConfigurationError(f"slice sums add to {total}, not 1")


def slice_id(U: JointDistribution) -> SliceId:
    return SliceId(U.column_sums())


def same_slice(U: JointDistribution, V: JointDistribution, tol: float = 0.0) -> bool:
    a, b = U.column_sums(), V.column_sums()
    return all(abs(float(x) - float(y)) <= tol or to_exact(x) == to_exact(y)
               for x, y in zip(a, b))


@dataclass(frozen=True)
class StpCoords:
    """Binary parametrization: U = [[s, t], [1-s, 1-t]] . diag(p, 1-p).

    ``degenerate`` flags an empty column (p in {0, 1}), where the convention
    s := 0 or t := 0 is returned and the map is no longer one-to-one.
    """

    s: float | Fraction
    t: float | Fraction
    p: float | Fraction
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("s", "t", "p"):
            v = getattr(self, name)
            if not (0 <= float(v) <= 1):
                raise PreconditionError(f"coordinate {name}={v} outside [0, 1]")


def from_stp(coords: StpCoords) -> JointDistribution:
    """Joint distribution for (s, t, p); exact when the coordinates are."""
    s, t, p = coords.s, coords.t, coords.p
    one = Fraction(1) if all(isinstance(v, (int, Fraction)) for v in (s, t, p)) else 1.0
    return JointDistribution([[s * p, t * (one - p)],
                              [(one - s) * p, (one - t) * (one - p)]])


def to_stp(U: JointDistribution) -> StpCoords:
    """Invert the binary parametrization: p = u00 + u10, s = u00/p,
    t = u01/(1-p).  Empty columns yield the 0 convention plus a flag."""
    if U.C != 2:
        raise PreconditionError("to_stp requires C = 2")
    e = U.exact_entries() if U.exact else U.entries
    one = Fraction(1) if U.exact else 1.0
    zero = Fraction(0) if U.exact else 0.0
    p = e[0, 0] + e[1, 0]
    degenerate = False
    if p == 0:
        s, degenerate = zero, True
    else:
        s = e[0, 0] / p
    if one - p == 0:
        t, degenerate = zero, True
    else:
        t = e[0, 1] / (one - p)
    return StpCoords(s, t, p, degenerate)


def apply_strategies(U: JointDistribution,
                     S_A: ColumnStochasticMatrix,
                     S_B: ColumnStochasticMatrix) -> JointDistribution:
    """Joint of the reported signals: S_A . U . S_B^T."""
    if not (U.C == S_A.C == S_B.C):
        raise PreconditionError("dimension mismatch between joint and strategies")
    return JointDistribution(_matmul(_matmul(S_A.entries, U.entries), S_B.entries.T))


def left_multiply(T: ColumnStochasticMatrix, U: JointDistribution) -> JointDistribution:
    """T . U: degrade only the row player's variable."""
    if T.C != U.C:
        raise PreconditionError("dimension mismatch")
    return JointDistribution(_matmul(T.entries, U.entries))


def _entries_of(x) -> list[list[Fraction]]:
    rows = x.entries if hasattr(x, "entries") else x
    return [[to_exact(v) for v in row] for row in rows]


def is_less_informative(Uprime, U, tol: float | Fraction = 0) -> bool:
    """Whether some column-stochastic T satisfies T U = Uprime.

    Fast path: invertible U gives T = Uprime U^{-1} uniquely; check its
    stochasticity (within ``tol``).  Otherwise: exact-rational LP feasibility
    over T's C^2 nonnegative variables.  Always computed over the rationals.
    Accepts joints, stochastic matrices (the order extends verbatim), or raw
    grids.
    """
    up = _entries_of(Uprime)
    u = _entries_of(U)
    if len(up) != len(u):
        raise PreconditionError("dimension mismatch")
    C = len(u)
    tol = to_exact(tol)

    inv = _exact_inverse(u)
    if inv is not None:
        t = [[sum(up[i][k] * inv[k][j] for k in range(C)) for j in range(C)]
             for i in range(C)]
        if any(t[i][j] < -tol for i in range(C) for j in range(C)):
            return False
        return all(abs(sum(t[i][j] for i in range(C)) - 1) <= tol for j in range(C))

    witness = find_degrading_matrix(Uprime, U, tol)
    return witness is not None


def find_degrading_matrix(Uprime, U,
                          tol: float | Fraction = 0) -> ColumnStochasticMatrix | None:
    """A column-stochastic witness T with T U = Uprime, or None.

    LP over the C^2 entries of T: equalities (T U)_{ij} = U'_{ij} (relaxed to
    a +-tol band when tol > 0) plus unit column sums.
    """
    up = _entries_of(Uprime)
    u = _entries_of(U)
    if len(up) != len(u):
        raise PreconditionError("dimension mismatch")
    C = len(u)
    tol = to_exact(tol)
    nvars = C * C  # T[i][k] at index i*C + k

    a_eq, b_eq, a_ub, b_ub = [], [], [], []
    for i in range(C):
        for j in range(C):
            row = [Fraction(0)] * nvars
            for k in range(C):
                row[i * C + k] = u[k][j]
            if tol == 0:
                a_eq.append(row)
                b_eq.append(up[i][j])
            else:
                a_ub.append(row)
                b_ub.append(up[i][j] + tol)
                a_ub.append([-v for v in row])
                b_ub.append(tol - up[i][j])
    for k in range(C):
        row = [Fraction(0)] * nvars
        for i in range(C):
            row[i * C + k] = Fraction(1)
        a_eq.append(row)
        b_eq.append(Fraction(1))

    ok, x = lp.feasible(a_eq, b_eq, a_ub or None, b_ub or None)
    if not ok:
        return None
    return ColumnStochasticMatrix([[x[i * C + k] for k in range(C)] for i in range(C)])


_FLIP = ((0, 1), (1, 0))
_TOP = ((1, 1), (0, 0))
_BOTTOM = ((0, 0), (1, 1))


def lower_set_vertices_binary(U: JointDistribution) -> list[JointDistribution]:
    """The four endpoints of the binary lower-set parallelogram:
    U itself, the flipped copy, and the two constant-report collapses."""
    if U.C != 2:
        raise PreconditionError("lower-set vertices are binary only")
    exact = U.exact
    mats = [ColumnStochasticMatrix.identity(2, exact),
            ColumnStochasticMatrix(_FLIP, exact=exact),
            ColumnStochasticMatrix(_TOP, exact=exact),
            ColumnStochasticMatrix(_BOTTOM, exact=exact)]
    return [left_multiply(T, U) for T in mats]


def random_joint(C: int, seed: int) -> JointDistribution:
    """Normalize C^2 i.i.d. exponentials; deterministic in the seed."""
    if C < 2:
        raise PreconditionError("C must be >= 2")
    rng = np.random.default_rng(seed)
    e = rng.exponential(size=(C, C))
    return JointDistribution(e / e.sum())


def random_stochastic(C: int, seed: int) -> ColumnStochasticMatrix:
    """Exponentials normalized per column; deterministic in the seed."""
    if C < 2:
        raise PreconditionError("C must be >= 2")
    rng = np.random.default_rng(seed)
    e = rng.exponential(size=(C, C))
    return ColumnStochasticMatrix(e / e.sum(axis=0, keepdims=True))


def random_rational_joint(C: int, seed: int, denominator: int = 997) -> JointDistribution:
    """Exact-mode analogue of random_joint for rational property tests."""
    rng = np.random.default_rng(seed)
    w = rng.integers(1, denominator, size=(C, C))
    total = int(w.sum())
    return JointDistribution([[Fraction(int(w[i, j]), total) for j in range(C)]
                              for i in range(C)])


def random_rational_stochastic(C: int, seed: int,
                               denominator: int = 997) -> ColumnStochasticMatrix:
    rng = np.random.default_rng(seed)
    w = rng.integers(1, denominator, size=(C, C))
    cols = w.sum(axis=0)
    return ColumnStochasticMatrix([[Fraction(int(w[i, j]), int(cols[j]))
                                    for j in range(C)] for i in range(C)])
