from fractions import Fraction as F

import pytest

from nashforge import exactmath as em
from nashforge import lcp, lp, nash
from nashforge.lcp import (
    LemmaFalsified, build_direct_lcp, build_game, build_lcp_C,
    build_symmetric_game, check_lcp, direct_matrix, game_from_json,
    game_to_fixed_point, game_to_json, imitation_game, lcp_to_ne,
    lcp_to_symne, lcp_violations, ne_to_lcp, ne_to_symmetrized, normalize,
    scale_solution, semimonotone_witness, symmetrize, symmetrized_to_ne,
    symne_to_lcp, unscale_solution,
)

from conftest import one_minus_circuit, random_raw_circuit


def frac_mat(rows):
    return [[F(v) for v in row] for row in rows]


@pytest.fixture(scope="module")
def worked():
    P, prepared = lp.build_param_lp(one_minus_circuit())
    ns = normalize(P)
    return P, prepared, ns


class TestNormalize:
    def test_scaled_matrix(self, worked):
        P, _, ns = worked
        assert ns.H == frac_mat([[F(1, 2), 0], [F(1, 2), 1]])

    def test_substituted_matrix(self, worked):
        P, _, ns = worked
        assert ns.Hp == frac_mat([[F(1, 2), -1], [F(1, 2), 1]])

    def test_unit_substitution_columns(self, worked):
        P, _, ns = worked
        assert ns.V == [[F(0), F(1)]]

    def test_unit_cost_at_outputs_enforced(self, worked):
        P, _, _ = worked
        from dataclasses import replace
        broken = replace(P, c=[F(2), F(2)])
        with pytest.raises(LemmaFalsified):
            normalize(broken)


class TestScaleSolution:
    def test_worked_scaling(self, worked):
        P, _, _ = worked
        assert scale_solution(P, [F(1, 2), F(1, 2)]) == [F(1), F(1, 2)]

    def test_identity_when_cost_is_ones(self, worked):
        P, _, _ = worked
        from dataclasses import replace
        unit = replace(P, c=[F(1), F(1)])
        assert scale_solution(unit, [F(1, 3), F(2, 3)]) == [F(1, 3), F(2, 3)]

    def test_roundtrip(self, worked):
        P, _, _ = worked
        x = [F(5, 7), F(2, 9)]
        assert unscale_solution(P, scale_solution(P, x)) == x


class TestLcpC:
    def test_worked_solution_accepted(self, worked):
        _, _, ns = worked
        inst = build_lcp_C(ns)
        assert check_lcp(inst, [F(1), F(1, 2), F(1), F(1)])

    def test_zero_x_violates_threshold_row(self, worked):
        _, _, ns = worked
        inst = build_lcp_C(ns)
        bad = lcp_violations(inst, [F(0), F(0), F(1), F(1)])
        assert any("row 3" in v for v in bad)   # -H'x <= -b fails at the clamp row

    def test_inflated_dual_rejected(self, worked):
        _, _, ns = worked
        inst = build_lcp_C(ns)
        # (H^T y)_1 = 2*1/2 + 1/2 = 3/2 > 1
        bad = lcp_violations(inst, [F(1), F(1, 2), F(2), F(1)])
        assert any("row 0" in v for v in bad)


class TestDirectLcp:
    def test_worked_matrix(self, worked):
        P, _, _ = worked
        assert direct_matrix(P) == frac_mat([[1, -1], [1, 1]])

    def test_worked_solution(self, worked):
        P, _, _ = worked
        inst = build_direct_lcp(P)
        assert check_lcp(inst, [F(1, 2), F(1, 2)])

    def test_feasible_but_not_complementary(self, worked):
        P, _, _ = worked
        inst = build_direct_lcp(P)
        bad = lcp_violations(inst, [F(1), F(0)])
        assert any("complementarity" in v for v in bad)

    def test_solution_carries_fixed_point(self, worked):
        P, prepared, _ = worked
        x = [F(1, 2), F(1, 2)]
        lam = [x[r] for r in P.output_rows]
        assert lam == [F(1, 2)]
        assert nash.check_fixed_point(prepared, lam)


class TestSemimonotone:
    def test_zero_rejected_by_precondition(self, worked):
        _, _, ns = worked
        with pytest.raises(ValueError):
            semimonotone_witness(ns, [F(0)] * 4, [F(1)] * 4)

    def test_worked_witness(self, worked):
        _, _, ns = worked
        msg = semimonotone_witness(ns, [F(1), F(0), F(0), F(0)], [F(1)] * 4)
        assert "complementarity" in msg

    def test_random_battery_never_alarms(self, worked, rng):
        _, _, ns = worked
        for _ in range(300):
            z = [F(rng.randint(0, 5), rng.randint(1, 3)) for _ in range(4)]
            if all(v == 0 for v in z):
                z[rng.randrange(4)] = F(1)
            q = [F(rng.randint(1, 9), rng.randint(1, 3)) for _ in range(4)]
            semimonotone_witness(ns, z, q)   # raising LemmaFalsified would fail


class TestGames:
    def test_worked_first_matrix(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        assert game.A == frac_mat([[F(1, 2), F(1, 2), 0], [0, 1, 0], [0, 0, 1]])

    def test_worked_second_matrix(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        assert game.B == frac_mat([[F(-1, 2), F(-1, 2), 0], [1, -1, 0], [1, 2, 1]])

    def test_rank_bound_tight_on_worked_instance(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        assert em.rank(em.mat_add(game.A, game.B)) == 2   # = k + 1

    def test_symmetric_matrix(self, worked):
        P, _, _ = worked
        sym = build_symmetric_game(P)
        assert sym.S == frac_mat([[-1, 1, 1], [-1, -1, 2], [0, 0, 1]])

    def test_symmetric_shape_facts(self, rng):
        for _ in range(10):
            P, _ = lp.build_param_lp(random_raw_circuit(rng, rng.randint(1, 2), 3))
            sym = build_symmetric_game(P)
            assert len(sym.S) == P.m + 1
            assert sym.S[-1] == [F(0)] * P.m + [F(1)]

    def test_rank_and_triangularity_on_random_instances(self, rng):
        for _ in range(10):
            k = rng.randint(1, 2)
            P, _ = lp.build_param_lp(random_raw_circuit(rng, k, 3))
            game = build_game(normalize(P))
            assert em.is_upper_triangular(game.A)
            assert em.rank(em.mat_add(game.A, game.B)) <= k + 1


class TestNeLcpMappings:
    def test_worked_ne_to_lcp(self, worked):
        _, _, ns = worked
        x, y = ne_to_lcp(ns, [F(2, 5), F(1, 5), F(2, 5)], [F(1, 3), F(1, 3), F(1, 3)])
        assert (x, y) == ([F(1), F(1, 2)], [F(1), F(1)])

    def test_zero_slack_is_alarm(self, worked):
        _, _, ns = worked
        with pytest.raises(LemmaFalsified):
            ne_to_lcp(ns, [F(1, 2), F(1, 2), F(0)], [F(1, 3), F(1, 3), F(1, 3)])

    def test_lcp_to_ne(self):
        xt, yt = lcp_to_ne([F(1), F(1, 2)], [F(1), F(1)])
        assert xt == [F(2, 5), F(1, 5), F(2, 5)]
        assert yt == [F(1, 3), F(1, 3), F(1, 3)]

    def test_mutually_inverse(self, worked):
        _, _, ns = worked
        x, y = [F(1), F(1, 2)], [F(1), F(1)]
        xt, yt = lcp_to_ne(x, y)
        assert ne_to_lcp(ns, xt, yt) == (x, y)

    def test_symmetric_pair(self, worked):
        P, _, _ = worked
        z = [F(1, 4), F(1, 4), F(1, 2)]
        x = symne_to_lcp(P, z)
        assert x == [F(1, 2), F(1, 2)]
        assert lcp_to_symne(x) == z

    def test_symmetric_zero_slack_is_alarm(self, worked):
        P, _, _ = worked
        with pytest.raises(LemmaFalsified):
            symne_to_lcp(P, [F(1, 2), F(1, 2), F(0)])


class TestFixedPointExtraction:
    def test_worked_lambda(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        lam = game_to_fixed_point([F(2, 5), F(1, 5), F(2, 5)], game.meta)
        assert lam == [F(1, 2)]

    def test_symmetric_path_same_lambda(self, worked):
        P, _, _ = worked
        sym = build_symmetric_game(P)
        assert game_to_fixed_point([F(1, 4), F(1, 4), F(1, 2)], sym.meta) == [F(1, 2)]

    def test_distinct_first_strategies_distinct_lambdas(self, rng):
        # injectivity on the instance with two fixed points: 2*lam clamped
        from nashforge import fixp
        b = fixp.Builder(1)
        raw = b.build([b.mulc(2, b.input(0))])
        P, prepared = lp.build_param_lp(raw)
        game = build_game(normalize(P))
        res = nash.enumerate_ne(game.A, game.B)
        by_x = {}
        for cert in res.equilibria:
            by_x.setdefault(tuple(cert.x), set()).add(
                tuple(game_to_fixed_point(cert.x, game.meta)))
        lams = [next(iter(v)) for v in by_x.values()]
        assert all(len(v) == 1 for v in by_x.values())
        assert len(set(lams)) == len(set(by_x))   # distinct x -> distinct lambda


class TestSymmetrize:
    def test_zero_games(self):
        sym = symmetrize(em.zeros_mat(2, 2), em.zeros_mat(2, 2))
        assert sym.S == em.zeros_mat(4, 4)

    def test_worked_rank_doubles(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        sym = symmetrize(game.A, game.B)
        assert len(sym.S) == 6
        st = em.mat_add(sym.S, em.transpose(sym.S))
        assert em.rank(st) == 2 * em.rank(em.mat_add(game.A, game.B))

    def test_equilibrium_embeds_and_splits(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        cert = nash.enumerate_ne(game.A, game.B).equilibria[0]
        sym = symmetrize(game.A, game.B)
        z = ne_to_symmetrized(cert.x, cert.y, cert.pi1, cert.pi2)
        assert nash.check_symmetric_ne(sym.S, z)
        x, y = symmetrized_to_ne(z, 3)
        assert nash.check_ne(game.A, game.B, x, y)

    def test_solver_found_symmetric_ne_maps_back(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        sym = symmetrize(game.A, game.B)
        res = nash.enumerate_symmetric_ne(sym.S)
        mapped = 0
        for cert in res.equilibria:
            try:
                x, y = symmetrized_to_ne(cert.z, 3)
            except ValueError:
                continue   # an all-zero half cannot correspond to a profile
            assert nash.check_ne(game.A, game.B, x, y)
            mapped += 1
        assert mapped >= 1


class TestImitation:
    def test_identity_side(self, worked):
        P, _, _ = worked
        imi = imitation_game(build_symmetric_game(P))
        assert imi.B == em.identity(P.m + 1)

    def test_second_strategies_equal_symmetric_set(self, worked):
        P, _, _ = worked
        sym = build_symmetric_game(P)
        imi = imitation_game(sym)
        second = {tuple(c.y) for c in nash.enumerate_ne(imi.A, imi.B).equilibria}
        direct = {tuple(c.z) for c in nash.enumerate_symmetric_ne(sym.S).equilibria}
        assert second == direct

    def test_every_second_strategy_is_symmetric_ne(self, worked):
        P, _, _ = worked
        sym = build_symmetric_game(P)
        imi = imitation_game(sym)
        for cert in nash.enumerate_ne(imi.A, imi.B).equilibria:
            assert nash.check_symmetric_ne(sym.S, cert.y)


class TestJson:
    def test_game_roundtrip(self, worked):
        _, _, ns = worked
        game = build_game(ns)
        back = game_from_json(game_to_json(game))
        assert back.A == game.A and back.B == game.B and back.meta == game.meta

    def test_symmetric_serializes_transpose(self, worked):
        P, _, _ = worked
        sym = build_symmetric_game(P)
        doc = game_to_json(sym)
        assert doc["B"] == em.mat_to_strs(em.transpose(sym.S))
