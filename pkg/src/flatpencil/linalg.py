"""Exact linear algebra over Q, plus generic helpers for symbolic matrices.

The rational solvers clear denominators row-wise and run fraction-free
(Bareiss) elimination on integer matrices, so every intermediate entry is an
exact integer minor; back substitution returns `Fraction` results.  Rank
deficiency is reported, never papered over.

The symbolic helpers (determinant, adjugate, matrix product) are written
against the ring operators `+ - *` and therefore work uniformly for
`Fraction`, `QPoly` and `RatFunc` entries.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import NoSolutionError, UnderdeterminedError

Q = Fraction

Matrix = list[list[Q]]
Vector = list[Q]


def _integer_rows(rows: list[list[Q]]) -> list[list[int]]:
    out = []
    for row in rows:
        scale = 1
        for x in row:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        out.append([int(x * scale) for x in row])
    return out


def _bareiss_echelon(mat: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form; returns (echelon matrix, pivot columns)."""
    m = [row[:] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            m[r], m[pivot_row] = m[pivot_row], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def exact_linsolve(a: Matrix, b: Vector) -> Vector:
    """Solve A x = b exactly.

    Raises `NoSolutionError` on an inconsistent system and
    `UnderdeterminedError` when rank(A) < number of unknowns.
    """
    rows = len(a)
    if rows != len(b):
        raise ValueError("matrix/vector size mismatch")
    ncols = len(a[0]) if rows else 0
    if any(len(row) != ncols for row in a):
        raise ValueError("ragged matrix")
    aug = _integer_rows([[Q(x) for x in row] + [Q(rhs)] for row, rhs in zip(a, b)])
    if not aug:
        return []
    ech, pivots = _bareiss_echelon(aug)
    if pivots and pivots[-1] == ncols:
        raise NoSolutionError("inconsistent linear system")
    for i in range(len(pivots), rows):
        if ech[i][ncols] != 0:
            raise NoSolutionError("inconsistent linear system")
    if len(pivots) < ncols:
        raise UnderdeterminedError(
            f"rank {len(pivots)} < {ncols} unknowns"
        )
    x: Vector = [Q(0)] * ncols
    for i in reversed(range(ncols)):
        acc = Q(ech[i][ncols])
        for j in range(i + 1, ncols):
            acc -= ech[i][j] * x[j]
        x[i] = acc / ech[i][i]
    return x


def solve_affine(a: Matrix, b: Vector) -> tuple[Vector, list[Vector]]:
    """A particular solution of A x = b together with a nullspace basis."""
    rows = len(a)
    ncols = len(a[0]) if rows else 0
    aug = _rref([[Q(x) for x in row] + [Q(rhs)] for row, rhs in zip(a, b)])
    m, pivots = aug
    if ncols in pivots:
        raise NoSolutionError("inconsistent linear system")
    particular = [Q(0)] * ncols
    for r, c in enumerate(pivots):
        particular[c] = m[r][ncols]
    return particular, _nullspace_from_rref(m, pivots, ncols)


def nullspace(a: Matrix) -> list[Vector]:
    ncols = len(a[0]) if a else 0
    m, pivots = _rref([[Q(x) for x in row] for row in a])
    return _nullspace_from_rref(m, pivots, ncols)


def rank(a: Matrix) -> int:
    _m, pivots = _rref([[Q(x) for x in row] for row in a])
    return len(pivots)


def _rref(m: list[list[Q]]) -> tuple[list[list[Q]], list[int]]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def _nullspace_from_rref(m: list[list[Q]], pivots: list[int], ncols: int) -> list[Vector]:
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Q(0)] * ncols
        v[fc] = Q(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(v)
    return basis


def mat_inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [[Q(x) for x in row] + [Q(1) if i == j else Q(0) for j in range(n)] for i, row in enumerate(a)]
    m, pivots = _rref(aug)
    if len(pivots) < n or any(p >= n for p in pivots):
        raise NoSolutionError("singular matrix")
    return [row[n:] for row in m]


def mat_mul(a, b):
    return [
        [sum((a[i][k] * b[k][j] for k in range(1, len(b))), a[i][0] * b[0][j]) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def mat_vec(a, v):
    return [sum((row[k] * v[k] for k in range(1, len(v))), row[0] * v[0]) for row in a]


def identity_matrix(n: int) -> Matrix:
    return [[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)]


def charpoly(a: Matrix) -> list[Q]:
    """Coefficients [1, c1, ..., cn] of det(x I - A) via Faddeev-LeVerrier."""
    n = len(a)
    coeffs = [Q(1)]
    m = identity_matrix(n)
    for k in range(1, n + 1):
        m = mat_mul(a, m)
        ck = -sum(m[i][i] for i in range(n)) / k
        coeffs.append(ck)
        for i in range(n):
            m[i][i] += ck
    return coeffs


def rational_roots(coeffs: list[Q]) -> tuple[list[tuple[Q, int]], int]:
    """Rational roots (with multiplicity) of a polynomial given by coefficients
    [c0, c1, ..., cn] for c0 x^n + ... + cn.

    Returns (roots, residual_degree); residual_degree == 0 means the
    polynomial splits completely over Q.
    """
    scale = 1
    for c in coeffs:
        scale = scale * c.denominator // gcd(scale, c.denominator)
    ints = [int(c * scale) for c in coeffs]
    while ints and ints[0] == 0:
        ints.pop(0)
    if not ints:
        raise ValueError("zero polynomial")
    roots: list[tuple[Q, int]] = []
    # Trailing zeros are roots at 0.
    zero_mult = 0
    while ints[-1] == 0 and len(ints) > 1:
        ints.pop()
        zero_mult += 1
    if zero_mult:
        roots.append((Q(0), zero_mult))

    def divisors(n: int) -> list[int]:
        n = abs(n)
        out = []
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.append(d)
                out.append(n // d)
            d += 1
        return sorted(set(out))

    def rescaled(cs: list) -> list[int]:
        s = 1
        for c in cs:
            c = Q(c)
            s = s * c.denominator // gcd(s, c.denominator)
        return [int(Q(c) * s) for c in cs]

    changed = True
    while len(ints) > 1 and changed:
        changed = False
        ints = rescaled(ints)
        lead, tail = ints[0], ints[-1]
        for p in divisors(tail):
            for q in divisors(lead):
                for sign in (1, -1):
                    cand = Q(sign * p, q)
                    mult = 0
                    while len(ints) > 1:
                        quo, rem = _synth_div(ints, cand)
                        if rem != 0:
                            break
                        ints = quo
                        mult += 1
                    if mult:
                        roots.append((cand, mult))
                        changed = True
        # loop again in case leading/trailing coefficients changed
    residual_degree = len(ints) - 1
    return roots, residual_degree


def _synth_div(ints: list, root: Q) -> tuple[list, Q]:
    out = [Q(ints[0])]
    for c in ints[1:]:
        out.append(c + out[-1] * root)
    rem = out.pop()
    return out, rem


# ---------------------------------------------------------------------------
# Generic symbolic matrices (entries: anything with + - * and unary -)
# ---------------------------------------------------------------------------


def sym_det(m: list[list], zero):
    """Laplace-expansion determinant; fine for the small ranks used here."""
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return m[0][0]
    total = zero
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = m[0][j] * sym_det(minor, zero)
        total = total + term if j % 2 == 0 else total - term
    return total


def sym_adjugate(m: list[list], zero) -> list[list]:
    """Adjugate matrix: adj(M) @ M = det(M) * I."""
    n = len(m)
    if n == 1:
        one = sym_det([[m[0][0]]], zero) * 0 + 1  # promote 1 into the ring
        return [[one]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [m[r][c] for c in range(n) if c != j] for r in range(n) if r != i
            ]
            cof = sym_det(minor, zero)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def sym_mat_mul(a: list[list], b: list[list]) -> list[list]:
    return [
        [sum((a[i][k] * b[k][j] for k in range(1, len(b))), a[i][0] * b[0][j]) for j in range(len(b[0]))]
        for i in range(len(a))
    ]
