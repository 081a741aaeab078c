import random
from fractions import Fraction as F

import pytest

from nashforge import exactmath as em


def frac_mat(rows):
    return [[F(v) for v in row] for row in rows]


class TestRank:
    def test_identity_full_rank(self):
        assert em.rank(em.identity(3)) == 3

    def test_outer_product_rank_one(self):
        u = [F(2), F(-3), F(5)]
        v = [F(1, 2), F(7), F(-1)]
        assert em.rank(em.outer(u, v)) == 1

    def test_payoff_sum_of_worked_instance(self):
        # hand elimination: rows 2 and 3 are independent, row 1 is zero
        m = frac_mat([[0, 0, 0], [1, 0, 0], [1, 2, 2]])
        assert em.rank(m) == 2

    def test_rank_equals_rank_of_transpose(self):
        rng = random.Random(7)
        for _ in range(25):
            r = rng.randint(1, 5)
            c = rng.randint(1, 5)
            m = [[F(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(c)]
                 for _ in range(r)]
            assert em.rank(m) == em.rank(em.transpose(m))

    def test_rational_entries(self):
        m = frac_mat([[F(1, 2), F(1, 3)], [F(1, 4), F(1, 6)]])
        assert em.rank(m) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            em.rank([])

    def test_against_plain_gaussian_elimination(self):
        # independent oracle: textbook fraction elimination, no Bareiss
        def gauss_rank(m):
            m = [row[:] for row in m]
            rows_n, cols_n = len(m), len(m[0])
            rk = 0
            for col in range(cols_n):
                piv = next((i for i in range(rk, rows_n) if m[i][col] != 0), None)
                if piv is None:
                    continue
                m[rk], m[piv] = m[piv], m[rk]
                pv = m[rk][col]
                m[rk] = [v / pv for v in m[rk]]
                for i in range(rows_n):
                    if i != rk and m[i][col] != 0:
                        f = m[i][col]
                        m[i] = [v - f * w for v, w in zip(m[i], m[rk])]
                rk += 1
            return rk

        rng = random.Random(99)
        for _ in range(40):
            r = rng.randint(1, 6)
            c = rng.randint(1, 6)
            target = rng.randint(0, min(r, c))
            # build a matrix of known-ish structure as a sum of outer products
            m = em.zeros_mat(r, c)
            for _ in range(target):
                u = [F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(r)]
                v = [F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(c)]
                m = em.mat_add(m, em.outer(u, v))
            expected = gauss_rank(m)
            assert em.rank(m) == expected
            assert em.rank(m) <= target


class TestTriangularSolve:
    def test_identity(self):
        assert em.solve_unit_lower_triangular(em.identity(2), [F(3), F(7)]) == [F(3), F(7)]

    def test_by_hand(self):
        a = frac_mat([[1, 0], [1, 1]])
        assert em.solve_unit_lower_triangular(a, [F(0), F(1)]) == [F(0), F(1)]

    def test_negative_coefficient(self):
        a = frac_mat([[1, 0], [-2, 1]])
        x = em.solve_unit_lower_triangular(a, [F(1), F(0)])
        assert x == [F(1), F(2)]
        assert em.mat_vec(a, x) == [F(1), F(0)]

    def test_solution_satisfies_system_exactly(self):
        rng = random.Random(11)
        for _ in range(20):
            n = rng.randint(1, 6)
            a = [[F(1) if i == j else (F(rng.randint(-5, 5), rng.randint(1, 4)) if j < i else F(0))
                  for j in range(n)] for i in range(n)]
            rhs = [F(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
            x = em.solve_unit_lower_triangular(a, rhs)
            assert em.mat_vec(a, x) == rhs

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            em.solve_unit_lower_triangular(frac_mat([[1, 0], [1, 1]]), [F(1)])
        with pytest.raises(ValueError):
            em.solve_unit_lower_triangular(frac_mat([[2, 0], [1, 1]]), [F(1), F(1)])
        with pytest.raises(ValueError):
            em.solve_unit_lower_triangular(frac_mat([[1, 5], [1, 1]]), [F(1), F(1)])


class TestTriangularPredicate:
    def test_identity(self):
        assert em.is_upper_triangular(em.identity(4))

    def test_dense(self):
        assert not em.is_upper_triangular(frac_mat([[1, 2], [3, 4]]))

    def test_worked_first_matrix(self):
        a = frac_mat([[F(1, 2), F(1, 2), 0], [0, 1, 0], [0, 0, 1]])
        assert em.is_upper_triangular(a)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            em.is_upper_triangular([[F(1), F(2)]])


class TestExactness:
    def test_add_sub_roundtrip(self):
        rng = random.Random(3)
        for _ in range(200):
            a = F(rng.randint(-999, 999), rng.randint(1, 999))
            b = F(rng.randint(-999, 999), rng.randint(1, 999))
            assert (a + b) - b == a
            if b != 0:
                assert (a * b) / b == a


class TestSerialization:
    @pytest.mark.parametrize("text,value", [
        ("3", F(3)), ("-1/2", F(-1, 2)), ("0", F(0)), ("7/3", F(7, 3)),
    ])
    def test_parse_format_roundtrip(self, text, value):
        assert em.rat_from_str(text) == value
        assert em.rat_from_str(em.rat_to_str(value)) == value

    def test_sign_on_numerator_and_unit_denominator_omitted(self):
        assert em.rat_to_str(F(-1, 2)) == "-1/2"
        assert em.rat_to_str(F(4, 2)) == "2"

    def test_rejects_garbage(self):
        for bad in ["1/0", "1/-2", "a", "1/2/3"]:
            with pytest.raises(ValueError):
                em.rat_from_str(bad)


class TestLinearSystem:
    def test_unique(self):
        status, x = em.solve_linear_system(frac_mat([[2, 1], [1, -1]]), [F(3), F(0)])
        assert status == "unique"
        assert x == [F(1), F(1)]

    def test_inconsistent(self):
        status, x = em.solve_linear_system(frac_mat([[1, 1], [1, 1]]), [F(1), F(2)])
        assert status == "none"

    def test_underdetermined(self):
        status, x = em.solve_linear_system(frac_mat([[1, 1]]), [F(1)])
        assert status == "many"

    def test_rectangular_overdetermined_consistent(self):
        status, x = em.solve_linear_system(frac_mat([[1, 0], [0, 1], [1, 1]]),
                                           [F(2), F(3), F(5)])
        assert status == "unique"
        assert x == [F(2), F(3)]
