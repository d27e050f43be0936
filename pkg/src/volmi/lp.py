"""Small dense LP feasibility with exact rational pivots.

Phase-1 simplex for systems  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0  with
``Fraction`` arithmetic throughout.  Bland's rule guarantees termination, and
exactness means a feasibility verdict is a certificate, not an approximation.
The systems solved here are tiny (C^2 variables, C^2 + C rows), so no effort
is spent on sparsity or revised-simplex machinery.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _to_rows(mat):
    return [[Fraction(v) for v in row] for row in mat]


def feasible(a_eq, b_eq, a_ub=None, b_ub=None):
    """Return (ok, x) where ok says whether the system admits x >= 0.

    ``x`` is a satisfying assignment for the structural variables when
    ok is True, else None.
    """
    rows = _to_rows(a_eq) if a_eq else []
    rhs = [Fraction(v) for v in b_eq] if b_eq else []
    n_struct = len(rows[0]) if rows else (len(a_ub[0]) if a_ub else 0)

    # slack columns turn inequality rows into equalities
    n_slack = len(a_ub) if a_ub else 0
    for i, row in enumerate(rows):
        rows[i] = row + [ZERO] * n_slack
    if a_ub:
        for k, (row, b) in enumerate(zip(_to_rows(a_ub), b_ub)):
            slack = [ZERO] * n_slack
            slack[k] = ONE
            rows.append(row + slack)
            rhs.append(Fraction(b))

    m = len(rows)
    n = n_struct + n_slack
    if m == 0:
        return True, [ZERO] * n_struct

    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    # phase-1 objective: minimize the sum of one artificial per row.
    # z expressed over nonbasic columns: z = sum(rhs) - sum_i a_ij x_j.
    basis = [n + i for i in range(m)]  # artificial ids
    zrow = [-sum(rows[i][j] for i in range(m)) for j in range(n)]
    zval = sum(rhs)

    while True:
        enter = next((j for j in range(n) if zrow[j] < 0), None)
        if enter is None:
            break
        # ratio test, Bland tie-break on the leaving basis id
        leave, best = None, None
        for i in range(m):
            if rows[i][enter] > 0:
                ratio = rhs[i] / rows[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            # unbounded phase-1 objective cannot happen (z >= 0), but guard
            return False, None
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        rhs[leave] = rhs[leave] / piv
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[leave])]
                rhs[i] = rhs[i] - f * rhs[leave]
        # substitute x_enter = rhs[leave] - sum_j rows[leave][j] x_j into z
        f = zrow[enter]
        zrow = [a - f * b for a, b in zip(zrow, rows[leave])]
        zval = zval + f * rhs[leave]
        basis[leave] = enter

    if zval != 0:
        return False, None
    x = [ZERO] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = rhs[i]
    return True, x[:n_struct]
