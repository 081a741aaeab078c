"""Exact rational scalars, vectors and matrices.

Every computation in this package runs over arbitrary-precision rationals;
floating point never appears.  Scalars are `fractions.Fraction` (stored in
lowest terms with a positive denominator, which the stdlib guarantees),
vectors are lists of Fractions, and matrices are row-major lists of rows.

Rationals serialize as the string "p/q" with the sign on the numerator and
"/q" omitted when the denominator is 1.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

Rat = Fraction
Vec = list[Fraction]
Mat = list[list[Fraction]]


# --- scalar construction and serialization ---

def rat(num, den=None) -> Fraction:
    """Build a Fraction from ints, strings or another Fraction."""
    if den is None:
        return Fraction(num)
    return Fraction(num, den)


def rat_from_str(s) -> Fraction:
    """Parse the "p/q" wire form (also accepts a bare integer)."""
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError(f"expected rational string, got {type(s).__name__}")
    parts = s.split("/")
    if len(parts) == 1:
        return Fraction(int(parts[0]))
    if len(parts) == 2:
        num, den = int(parts[0]), int(parts[1])
        if den <= 0:
            raise ValueError(f"denominator must be positive in {s!r}")
        return Fraction(num, den)
    raise ValueError(f"malformed rational {s!r}")


def rat_to_str(x: Fraction) -> str:
    return str(Fraction(x))


def vec_from_strs(items) -> Vec:
    return [rat_from_str(s) for s in items]


def vec_to_strs(v: Vec) -> list[str]:
    return [rat_to_str(x) for x in v]


def mat_from_strs(rows) -> Mat:
    return [vec_from_strs(r) for r in rows]


def mat_to_strs(m: Mat) -> list[list[str]]:
    return [vec_to_strs(r) for r in m]


# --- shapes and constructors ---

def mat_shape(m: Mat) -> tuple[int, int]:
    """Return (rows, cols); raises on empty or ragged input."""
    if not m or not m[0]:
        raise ValueError("matrix must be nonempty")
    cols = len(m[0])
    for row in m:
        if len(row) != cols:
            raise ValueError("ragged matrix")
    return len(m), cols


def zeros_vec(n: int) -> Vec:
    return [Fraction(0)] * n


def zeros_mat(r: int, c: int) -> Mat:
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n: int) -> Mat:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def transpose(m: Mat) -> Mat:
    r, c = mat_shape(m)
    return [[m[i][j] for i in range(r)] for j in range(c)]


# --- arithmetic ---

def vec_add(u: Vec, v: Vec) -> Vec:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return [a + b for a, b in zip(u, v)]


def vec_sub(u: Vec, v: Vec) -> Vec:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return [a - b for a, b in zip(u, v)]


def vec_scale(s: Fraction, v: Vec) -> Vec:
    return [s * x for x in v]


def vec_dot(u: Vec, v: Vec) -> Fraction:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def inf_norm(v: Vec) -> Fraction:
    return max((abs(x) for x in v), default=Fraction(0))


def mat_vec(m: Mat, v: Vec) -> Vec:
    r, c = mat_shape(m)
    if len(v) != c:
        raise ValueError("dimension mismatch")
    return [vec_dot(row, v) for row in m]


def vec_mat(v: Vec, m: Mat) -> Vec:
    """Row vector times matrix."""
    r, c = mat_shape(m)
    if len(v) != r:
        raise ValueError("dimension mismatch")
    return [sum((v[i] * m[i][j] for i in range(r)), Fraction(0)) for j in range(c)]


def mat_mul(a: Mat, b: Mat) -> Mat:
    ra, ca = mat_shape(a)
    rb, cb = mat_shape(b)
    if ca != rb:
        raise ValueError("dimension mismatch")
    bt = transpose(b)
    return [[vec_dot(row, col) for col in bt] for row in a]


def mat_add(a: Mat, b: Mat) -> Mat:
    if mat_shape(a) != mat_shape(b):
        raise ValueError("dimension mismatch")
    return [vec_add(ra, rb) for ra, rb in zip(a, b)]


def mat_sub(a: Mat, b: Mat) -> Mat:
    if mat_shape(a) != mat_shape(b):
        raise ValueError("dimension mismatch")
    return [vec_sub(ra, rb) for ra, rb in zip(a, b)]


def outer(u: Vec, v: Vec) -> Mat:
    return [[a * b for b in v] for a in u]


# --- structure predicates ---

def is_upper_triangular(m: Mat) -> bool:
    """True iff every entry strictly below the diagonal is zero.

    Raises ValueError on non-square input.
    """
    r, c = mat_shape(m)
    if r != c:
        raise ValueError("matrix must be square")
    return all(m[i][j] == 0 for i in range(r) for j in range(i))


def is_unit_lower_triangular(m: Mat) -> bool:
    r, c = mat_shape(m)
    if r != c:
        return False
    for i in range(r):
        if m[i][i] != 1:
            return False
        for j in range(i + 1, c):
            if m[i][j] != 0:
                return False
    return True


# --- elimination ---

def rank(m: Mat) -> int:
    """Exact rank over the rationals.

    Uses fraction-free (Bareiss) elimination after clearing denominators
    row-wise, with partial pivoting by first nonzero entry.  Intermediate
    values stay integral, so pivots never blow up into huge fractions.
    """
    r, c = mat_shape(m)
    rows: list[list[int]] = []
    for row in m:
        mult = 1
        for x in row:
            mult = lcm(mult, x.denominator)
        rows.append([int(x * mult) for x in row])

    rk = 0
    prev = 1
    pr = 0
    for col in range(c):
        piv = next((i for i in range(pr, r) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[pr], rows[piv] = rows[piv], rows[pr]
        p = rows[pr][col]
        for i in range(pr + 1, r):
            fi = rows[i][col]
            for j in range(col, c):
                num = rows[i][j] * p - fi * rows[pr][j]
                q, rem = divmod(num, prev)
                assert rem == 0, "Bareiss exact-division invariant broken"
                rows[i][j] = q
        prev = p
        pr += 1
        rk += 1
        if pr == r:
            break
    return rk


def solve_unit_lower_triangular(a: Mat, rhs: Vec) -> Vec:
    """Forward substitution for A·x = rhs with A unit lower-triangular."""
    r, c = mat_shape(a)
    if r != c:
        raise ValueError("matrix must be square")
    if len(rhs) != r:
        raise ValueError("dimension mismatch")
    if not is_unit_lower_triangular(a):
        raise ValueError("matrix must be lower-triangular with unit diagonal")
    x = zeros_vec(r)
    for i in range(r):
        acc = rhs[i]
        for j in range(i):
            acc -= a[i][j] * x[j]
        x[i] = acc
    return x


def solve_linear_system(a: Mat, b: Vec) -> tuple[str, Vec | None]:
    """Solve A·x = b exactly.

    Returns ("unique", x), ("none", None) for an inconsistent system, or
    ("many", None) when the solution set is a positive-dimensional affine
    space.  A is allowed to be rectangular.
    """
    r, c = mat_shape(a)
    if len(b) != r:
        raise ValueError("dimension mismatch")
    aug = [row[:] + [b[i]] for i, row in enumerate(a)]
    piv_cols: list[int] = []
    pr = 0
    for col in range(c):
        piv = next((i for i in range(pr, r) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[pr], aug[piv] = aug[piv], aug[pr]
        pv = aug[pr][col]
        aug[pr] = [x / pv for x in aug[pr]]
        for i in range(r):
            if i != pr and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[pr])]
        piv_cols.append(col)
        pr += 1
        if pr == r:
            break
    for i in range(pr, r):
        if aug[i][-1] != 0:
            return "none", None
    if pr < c:
        return "many", None
    x = zeros_vec(c)
    for row_i, col in enumerate(piv_cols):
        x[col] = aug[row_i][-1]
    return "unique", x
