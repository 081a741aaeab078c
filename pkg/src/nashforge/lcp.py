"""LCP formulations of the parameterized LP and the games built from them.

Scaling column j of the constraint matrix by 1/c_j turns the cost into the
all-ones vector; substituting the output variables for the parameters then
eliminates the parameters entirely and leaves a linear complementarity
problem whose solutions carry exactly the circuit's fixed points.  Two
routes are implemented and cross-checked:

* via the LP and its dual: the two-sided system with matrix
  [[0, H^T], [-H', 0]], paired with the (m+1)-strategy game
  (A~, B~) = ([[H^T, 0], [0^T, 1]], [[-H'^T, 0], [b^T + 1^T, 1]]),
  whose payoff sum has rank at most k+1 and whose first matrix is
  upper-triangular;
* directly from the constraints: x >= 0, A'x >= b with complementarity,
  paired with the symmetric game S = [[-A', b+1], [0^T, 1]].

Equilibrium profiles append one slack strategy; dividing the strategy
weights by that slack recovers the LCP coordinates, and the designated
output rows of those coordinates are the fixed point.  Zero slack weight
would falsify the construction's supporting lemmas, so the converters
treat it as a hard alarm rather than filtering it away.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactmath import (
    Mat, Vec, identity, is_upper_triangular, mat_add, mat_from_strs,
    mat_shape, mat_sub, mat_to_strs, mat_vec, outer, rank, transpose,
    vec_from_strs, vec_mat, vec_to_strs, zeros_mat,
)
from .lp import ParamLP


class LemmaFalsified(Exception):
    """A condition the construction proves in general failed on a concrete
    instance; always an implementation bug, never a data condition."""


@dataclass(frozen=True)
class NormalizedSystem:
    """Cost-scaled constraints: H = A diag(1/c), Hp = H - sum_l u^l v^l^T."""

    H: Mat
    Hp: Mat
    V: list[Vec]
    b: Vec
    lp: ParamLP


def normalize(lp: ParamLP) -> NormalizedSystem:
    if lp.c is None:
        raise ValueError("cost vector missing; call with_cost first")
    m, k = lp.m, lp.k
    for r in lp.output_rows:
        if lp.c[r] != 1:
            raise LemmaFalsified(
                f"cost at output row {r} is {lp.c[r]}, not 1; upstream construction bug")
    H = [[lp.A[i][j] / lp.c[j] for j in range(m)] for i in range(m)]
    V = []
    for l in range(k):
        col = [Fraction(0)] * m
        col[lp.output_rows[l]] = Fraction(1)
        V.append(col)
    Hp = H
    for l in range(k):
        Hp = mat_sub(Hp, outer(lp.U[l], V[l]))
    ns = NormalizedSystem(H, Hp, V, list(lp.b), lp)
    _assert_scaled_structure(ns)
    return ns


def _assert_scaled_structure(ns: NormalizedSystem):
    # Column of H at each output row stays the unit vector, so the dual
    # constraint there reads y_row <= 1; the primal row reads
    # x_inner/c_inner + x_row >= 1.
    lp = ns.lp
    for l, r in enumerate(lp.output_rows):
        col = [ns.H[i][r] for i in range(lp.m)]
        unit = [Fraction(1 if i == r else 0) for i in range(lp.m)]
        if col != unit:
            raise LemmaFalsified(f"H column {r} is not the unit vector")
        inner = r - 1
        expect = [Fraction(0)] * lp.m
        expect[inner] = 1 / lp.c[inner]
        expect[r] = Fraction(1)
        if ns.Hp[r] != expect:
            raise LemmaFalsified(f"scaled clamp row {r} has unexpected shape")


def scale_solution(lp: ParamLP, x: Vec) -> Vec:
    """x'_j = x_j * c_j, the change of variables matching the scaling."""
    if lp.c is None:
        raise ValueError("cost vector missing")
    if len(x) != lp.m:
        raise ValueError("dimension mismatch")
    return [xi * ci for xi, ci in zip(x, lp.c)]


def unscale_solution(lp: ParamLP, xp: Vec) -> Vec:
    if lp.c is None:
        raise ValueError("cost vector missing")
    if len(xp) != lp.m:
        raise ValueError("dimension mismatch")
    return [xi / ci for xi, ci in zip(xp, lp.c)]


@dataclass(frozen=True)
class LcpInstance:
    """Conditions z >= 0, M z <= q, z_i (M z - q)_i = 0, componentwise."""

    kind: str                     # "lcp_c" | "direct" | "generic"
    M: Mat
    q: Vec
    m: int
    k: int
    output_rows: tuple[int, ...]


def build_lcp_C(ns: NormalizedSystem) -> LcpInstance:
    """Two-sided system on z = (x, y): H'x >= b, H^T y <= 1, complementary."""
    lp = ns.lp
    m = lp.m
    M = zeros_mat(2 * m, 2 * m)
    ht = transpose(ns.H)
    for i in range(m):
        for j in range(m):
            M[i][m + j] = ht[i][j]
            M[m + i][j] = -ns.Hp[i][j]
    q = [Fraction(1)] * m + [-bi for bi in ns.b]
    return LcpInstance("lcp_c", M, q, m, lp.k, lp.output_rows)


def direct_matrix(lp: ParamLP) -> Mat:
    """A' = A - sum_l u^l v^l^T with plain unit vectors v^l."""
    m, k = lp.m, lp.k
    Ap = [row[:] for row in lp.A]
    for l in range(k):
        r = lp.output_rows[l]
        for i in range(m):
            Ap[i][r] -= lp.U[l][i]
    return Ap


def build_direct_lcp(lp: ParamLP) -> LcpInstance:
    """One-sided system on x alone: x >= 0, A'x >= b, complementary."""
    Ap = direct_matrix(lp)
    M = [[-v for v in row] for row in Ap]
    q = [-bi for bi in lp.b]
    return LcpInstance("direct", M, q, lp.m, lp.k, lp.output_rows)


def lcp_violations(lcp: LcpInstance, z: Vec) -> list[str]:
    n = len(lcp.M)
    if len(z) != n:
        raise ValueError(f"expected solution of length {n}")
    out = []
    mz = mat_vec(lcp.M, z)
    for i in range(n):
        if z[i] < 0:
            out.append(f"z_{i} negative")
        if mz[i] > lcp.q[i]:
            out.append(f"row {i} infeasible: (Mz)_{i} > q_{i}")
        if z[i] * (mz[i] - lcp.q[i]) != 0:
            out.append(f"complementarity fails at row {i}")
    return out


def check_lcp(lcp: LcpInstance, z: Vec) -> bool:
    return not lcp_violations(lcp, z)


def semimonotone_witness(ns: NormalizedSystem, z: Vec, q: Vec) -> str:
    """Name a violated LCP condition for nonzero z >= 0 against q > 0.

    The block matrix of the two-sided system admits only the zero solution
    when q is strictly positive, so some condition must fail; finding none
    is a construction-bug alarm.
    """
    lcp = build_lcp_C(ns)
    n = len(lcp.M)
    if len(z) != n or len(q) != n:
        raise ValueError(f"expected vectors of length {n}")
    if any(zi < 0 for zi in z) or all(zi == 0 for zi in z):
        raise ValueError("z must be nonnegative and nonzero")
    if any(qi <= 0 for qi in q):
        raise ValueError("q must be strictly positive")
    mz = mat_vec(lcp.M, z)
    for i in range(n):
        if mz[i] > q[i]:
            return f"row {i} infeasible: (Mz)_{i} = {mz[i]} > q_{i} = {q[i]}"
    for i in range(n):
        if z[i] * (mz[i] - q[i]) != 0:
            return f"complementarity fails at row {i}: z_{i} = {z[i]}, slack {mz[i] - q[i]}"
    raise LemmaFalsified("nonzero z solves the LCP against positive q")


# --- games ---------------------------------------------------------------

@dataclass(frozen=True)
class GameMeta:
    m: int
    k: int
    c: Vec | None
    output_rows: tuple[int, ...]
    kind: str


@dataclass(frozen=True)
class BimatrixGame:
    A: Mat
    B: Mat
    meta: GameMeta


@dataclass(frozen=True)
class SymmetricGame:
    S: Mat
    meta: GameMeta


def build_game(ns: NormalizedSystem) -> BimatrixGame:
    """The (m+1)-strategy game whose equilibria carry the LCP solutions."""
    lp = ns.lp
    m, k = lp.m, lp.k
    A = zeros_mat(m + 1, m + 1)
    B = zeros_mat(m + 1, m + 1)
    ht = transpose(ns.H)
    hpt = transpose(ns.Hp)
    for i in range(m):
        for j in range(m):
            A[i][j] = ht[i][j]
            B[i][j] = -hpt[i][j]
    A[m][m] = Fraction(1)
    B[m][m] = Fraction(1)
    for j in range(m):
        B[m][j] = ns.b[j] + 1
    game = BimatrixGame(A, B, GameMeta(m, k, list(lp.c), lp.output_rows, "rank_k_plus_1"))
    if not is_upper_triangular(A):
        raise LemmaFalsified("first payoff matrix is not upper-triangular")
    if rank(mat_add(A, B)) > k + 1:
        raise LemmaFalsified(f"payoff sum rank exceeds {k + 1}")
    return game


def build_symmetric_game(lp: ParamLP) -> SymmetricGame:
    """S = [[-A', b+1], [0^T, 1]]; symmetric equilibria carry the direct LCP."""
    m, k = lp.m, lp.k
    Ap = direct_matrix(lp)
    S = zeros_mat(m + 1, m + 1)
    for i in range(m):
        for j in range(m):
            S[i][j] = -Ap[i][j]
        S[i][m] = lp.b[i] + 1
    S[m][m] = Fraction(1)
    return SymmetricGame(S, GameMeta(m, k, list(lp.c) if lp.c else None,
                                     lp.output_rows, "symmetric"))


def symmetrize(A: Mat, B: Mat) -> SymmetricGame:
    """Block symmetrization [[0, A], [B^T, 0]].

    The payoff sum of the result has twice the rank of A + B.  The
    classical equilibrium correspondence additionally needs positive
    payoffs; splits with an all-zero half do not map back.
    """
    ra, ca = mat_shape(A)
    if mat_shape(B) != (ra, ca):
        raise ValueError("payoff matrices must share a shape")
    size = ra + ca
    S = zeros_mat(size, size)
    bt = transpose(B)
    for i in range(ra):
        for j in range(ca):
            S[i][ra + j] = A[i][j]
    for i in range(ca):
        for j in range(ra):
            S[ra + i][j] = bt[i][j]
    return SymmetricGame(S, GameMeta(ra, 0, None, (), "symmetric"))


def symmetrized_to_ne(z: Vec, rows: int) -> tuple[Vec, Vec]:
    """Split a symmetric equilibrium of a symmetrized game back into a
    profile of the original game; rejects degenerate all-zero halves."""
    zx, zy = z[:rows], z[rows:]
    sx, sy = sum(zx), sum(zy)
    if sx == 0 or sy == 0:
        raise ValueError("degenerate split: one half of the strategy is zero")
    return [v / sx for v in zx], [v / sy for v in zy]


def ne_to_symmetrized(x: Vec, y: Vec, pi1: Fraction, pi2: Fraction) -> Vec:
    """Embed an equilibrium of (A, B) into the symmetrized game.

    Halves are weighted by the opposite player's payoff, which requires
    both payoffs positive (shift the game first otherwise).
    """
    if pi1 <= 0 or pi2 <= 0:
        raise ValueError("embedding needs strictly positive payoffs")
    alpha = pi1 / (pi1 + pi2)
    beta = pi2 / (pi1 + pi2)
    return [alpha * v for v in x] + [beta * v for v in y]


def imitation_game(S: SymmetricGame | Mat) -> BimatrixGame:
    """The game (S, I): its second-player equilibrium strategies are the
    symmetric equilibria of (S, S^T)."""
    if isinstance(S, SymmetricGame):
        mat, meta = S.S, S.meta
    else:
        mat, meta = S, None
    r, c = mat_shape(mat)
    if r != c:
        raise ValueError("matrix must be square")
    base = meta or GameMeta(r - 1, 0, None, (), "symmetric")
    return BimatrixGame([row[:] for row in mat], identity(r),
                        GameMeta(base.m, base.k, base.c, base.output_rows, "imitation"))


# --- equilibrium <-> LCP <-> fixed point mappings ------------------------

def ne_to_lcp(ns: NormalizedSystem, x_full: Vec, y_full: Vec) -> tuple[Vec, Vec]:
    """Divide out the slack strategy weights; verifies the result solves
    the two-sided system.  Zero slack weight is a falsification alarm."""
    s, t = x_full[-1], y_full[-1]
    if s == 0 or t == 0:
        raise LemmaFalsified(f"equilibrium has slack weights s={s}, t={t}; both must be positive")
    x = [v / s for v in x_full[:-1]]
    y = [v / t for v in y_full[:-1]]
    bad = lcp_violations(build_lcp_C(ns), x + y)
    if bad:
        raise LemmaFalsified("mapped equilibrium violates the LCP: " + bad[0])
    return x, y


def lcp_to_ne(x: Vec, y: Vec) -> tuple[Vec, Vec]:
    """Append the slack strategy and renormalize both sides."""
    sx = 1 + sum(x)
    sy = 1 + sum(y)
    return ([v / sx for v in x] + [Fraction(1) / sx],
            [v / sy for v in y] + [Fraction(1) / sy])


def symne_to_lcp(lp: ParamLP, z_full: Vec) -> Vec:
    t = z_full[-1]
    if t == 0:
        raise LemmaFalsified("symmetric equilibrium has zero slack weight")
    x = [v / t for v in z_full[:-1]]
    bad = lcp_violations(build_direct_lcp(lp), x)
    if bad:
        raise LemmaFalsified("mapped symmetric equilibrium violates the LCP: " + bad[0])
    return x


def lcp_to_symne(x: Vec) -> Vec:
    s = 1 + sum(x)
    return [v / s for v in x] + [Fraction(1) / s]


def game_to_fixed_point(x_full: Vec, meta: GameMeta) -> Vec:
    """Fixed point carried by a first-player (or symmetric) strategy."""
    s = x_full[-1]
    if s == 0:
        raise LemmaFalsified("strategy puts no weight on the slack row")
    return [x_full[r] / s for r in meta.output_rows]


# --- JSON wire format ---

def game_to_json(game: BimatrixGame | SymmetricGame) -> dict:
    if isinstance(game, SymmetricGame):
        A, B, meta = game.S, transpose(game.S), game.meta
    else:
        A, B, meta = game.A, game.B, game.meta
    r, c = mat_shape(A)
    return {
        "rows": r, "cols": c,
        "A": mat_to_strs(A), "B": mat_to_strs(B),
        "meta": {
            "m": meta.m, "k": meta.k,
            "c": vec_to_strs(meta.c) if meta.c is not None else None,
            "output_rows": list(meta.output_rows),
            "kind": meta.kind,
        },
    }


def game_from_json(doc: dict) -> BimatrixGame:
    meta = doc["meta"]
    return BimatrixGame(
        mat_from_strs(doc["A"]), mat_from_strs(doc["B"]),
        GameMeta(int(meta["m"]), int(meta["k"]),
                 vec_from_strs(meta["c"]) if meta.get("c") else None,
                 tuple(int(r) for r in meta["output_rows"]),
                 meta["kind"]),
    )


def lcp_to_json(lcp: LcpInstance) -> dict:
    return {
        "block": lcp.kind,
        "M": mat_to_strs(lcp.M),
        "q": vec_to_strs(lcp.q),
        "m": lcp.m, "k": lcp.k,
        "output_rows": list(lcp.output_rows),
    }


def lcp_from_json(doc: dict) -> LcpInstance:
    return LcpInstance(doc["block"], mat_from_strs(doc["M"]), vec_from_strs(doc["q"]),
                       int(doc["m"]), int(doc["k"]),
                       tuple(int(r) for r in doc["output_rows"]))
