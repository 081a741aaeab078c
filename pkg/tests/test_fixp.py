from fractions import Fraction as F

import pytest

from nashforge import fixp
from nashforge.fixp import (
    Add, Builder, Const, FixpCircuit, Input, Max, MulC, circuit_from_json,
    circuit_size, circuit_to_json, clamp_outputs, evaluate, evaluate_with_trace,
    normalize_max_zero, order_max_gates,
)

from conftest import one_minus_circuit, random_lambda, random_raw_circuit


class TestEvaluate:
    def test_identity(self):
        c = FixpCircuit(1, (Input(0),), (0,))
        assert evaluate(c, [F(1, 2)]) == [F(1, 2)]

    def test_max_of_constants(self):
        c = FixpCircuit(1, (Input(0), Const(F(0)), Const(F(-1)), Max(1, 2)), (3,))
        assert evaluate(c, [F(5)]) == [F(0)]

    def test_clamp_of_large_value_is_one(self):
        b = Builder(1)
        raw = b.build([b.const(F(3, 2))])
        clamped = clamp_outputs(raw)
        assert evaluate(clamped, [F(0)]) == [F(1)]

    def test_arity_mismatch(self):
        c = FixpCircuit(2, (Input(0), Input(1)), (0, 1))
        with pytest.raises(ValueError):
            evaluate(c, [F(1)])

    def test_trace_exposes_every_gate(self):
        c = one_minus_circuit()
        outs, trace = evaluate_with_trace(c, [F(1, 4)])
        assert outs == [F(3, 4)]
        assert len(trace) == len(c.gates)

    def test_forward_reference_rejected(self):
        with pytest.raises(ValueError):
            FixpCircuit(1, (Add(0, 1), Input(0)), (0,))


class TestClampOutputs:
    @pytest.mark.parametrize("value,expected", [
        (F(-2), F(0)),       # lower clamp
        (F(3, 2), F(1)),     # upper clamp
        (F(1, 3), F(1, 3)),  # interior pass-through
    ])
    def test_clamp_values(self, value, expected):
        b = Builder(1)
        raw = b.build([b.const(value)])
        assert evaluate(clamp_outputs(raw), [F(0)]) == [expected]

    def test_double_clamp_rejected(self):
        c = clamp_outputs(one_minus_circuit())
        with pytest.raises(ValueError):
            clamp_outputs(c)

    def test_adds_four_gates_per_output_plus_shared_constants(self):
        raw = one_minus_circuit()
        c = clamp_outputs(raw)
        assert len(c.gates) - len(raw.gates) == 4 * raw.k + 2

    def test_range_lands_in_unit_box(self, rng):
        for _ in range(30):
            k = rng.randint(1, 2)
            raw = random_raw_circuit(rng, k, 3)
            c = clamp_outputs(raw)
            for _ in range(5):
                out = evaluate(c, random_lambda(rng, k, spread=5))
                assert all(F(0) <= v <= F(1) for v in out)


class TestNormalizeMaxZero:
    def test_semantic_equivalence_simple(self):
        b = Builder(1)
        raw = b.build([b.maxg(b.const(F(2)), b.const(F(5)))])
        norm = normalize_max_zero(raw)
        assert evaluate(norm, [F(0)]) == [F(5)]

    def test_already_normalized_unchanged(self):
        b = Builder(1)
        raw = b.build([b.maxg(b.const(0), b.input(0))])
        norm = normalize_max_zero(raw)
        assert norm.gates == raw.gates
        assert norm.outputs == raw.outputs

    def test_max_of_lambda_and_one_minus_lambda(self):
        b = Builder(1)
        x = b.input(0)
        raw = b.build([b.maxg(x, b.one_minus(x))])
        norm = normalize_max_zero(raw)
        assert evaluate(raw, [F(1, 4)]) == evaluate(norm, [F(1, 4)]) == [F(3, 4)]

    def test_every_max_gate_has_zero_operand(self, rng):
        for _ in range(30):
            k = rng.randint(1, 2)
            c = normalize_max_zero(clamp_outputs(random_raw_circuit(rng, k, 4)))
            for g in c.gates:
                if isinstance(g, Max):
                    assert any(isinstance(c.gates[r], Const) and c.gates[r].value == 0
                               for r in (g.a, g.b))

    def test_equivalence_randomized(self, rng):
        for _ in range(40):
            k = rng.randint(1, 2)
            raw = random_raw_circuit(rng, k, 4)
            norm = normalize_max_zero(raw)
            for _ in range(4):
                lam = random_lambda(rng, k)
                assert evaluate(raw, lam) == evaluate(norm, lam)

    def test_gate_growth_at_most_three_per_max_plus_shared_zero(self, rng):
        for _ in range(20):
            raw = clamp_outputs(random_raw_circuit(rng, 1, 4))
            n_max = sum(isinstance(g, Max) for g in raw.gates)
            norm = normalize_max_zero(raw)
            assert len(norm.gates) <= len(raw.gates) + 3 * n_max + 1


class TestOrderMaxGates:
    def test_clamp_only_circuit(self):
        c = normalize_max_zero(clamp_outputs(one_minus_circuit()))
        order = order_max_gates(c)
        assert len(order) == 2
        assert order == [c.clamp_pairs[0][0], c.clamp_pairs[0][1]]

    def test_chain_preserved(self):
        b = Builder(1)
        inner = b.maxg(b.const(0), b.input(0))
        outer = b.maxg(b.const(0), b.add(inner, b.const(F(-1, 2))))
        raw = b.build([outer])
        c = normalize_max_zero(clamp_outputs(raw))
        order = order_max_gates(c)
        assert len(order) == 4
        assert order == sorted(order)

    def test_each_max_exactly_once_and_edges_forward(self, rng):
        for _ in range(20):
            c = normalize_max_zero(clamp_outputs(random_raw_circuit(rng, 2, 4)))
            order = order_max_gates(c)
            assert sorted(order) == order
            assert len(set(order)) == len(order)
            assert len(order) == sum(isinstance(g, Max) for g in c.gates)
            pos = {g: i for i, g in enumerate(order)}
            for g_idx in order:
                g = c.gates[g_idx]
                for ref in (g.a, g.b):
                    if ref in pos:
                        assert pos[ref] < pos[g_idx]

    def test_requires_normalized_and_clamped(self):
        with pytest.raises(ValueError):
            order_max_gates(one_minus_circuit())


class TestSize:
    def test_identity(self):
        c = FixpCircuit(1, (Input(0),), (0,))
        assert circuit_size(c) == 2

    def test_constant_bits_counted(self):
        c = FixpCircuit(1, (Input(0), Const(F(1, 2))), (1,))
        # 1 input + 2 gates + (1 bit numerator + 2 bit denominator)
        assert circuit_size(c) == 1 + 2 + 3

    def test_clamp_growth(self):
        raw = one_minus_circuit()
        c = clamp_outputs(raw)
        # 6 gates (consts -1, 0 plus four per-output ops) and 8 constant
        # bits (2 each for the const values and the two -1 coefficients)
        grown = circuit_size(c) - circuit_size(raw)
        assert grown == 6 + 8


class TestJson:
    def test_roundtrip(self, rng):
        for _ in range(10):
            c = normalize_max_zero(clamp_outputs(random_raw_circuit(rng, 2, 3)))
            doc = circuit_to_json(c)
            back = circuit_from_json(doc)
            assert back == c

    def test_wire_format_fields(self):
        c = FixpCircuit(1, (Input(0), Const(F(-1, 2)), MulC(F(2), 0), Add(1, 2), Max(1, 3)),
                        (4,))
        doc = circuit_to_json(c)
        assert doc["gates"][0] == {"op": "input", "i": 0}
        assert doc["gates"][1] == {"op": "const", "v": "-1/2"}
        assert doc["gates"][2] == {"op": "mulc", "c": "2", "a": 0}
        assert doc["gates"][3] == {"op": "add", "a": 1, "b": 2}
        assert doc["gates"][4] == {"op": "max", "a": 1, "b": 3}
