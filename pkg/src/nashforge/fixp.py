"""Piecewise-linear circuits over {max, +, multiply-by-rational-constant}.

A circuit is an ordered gate list forming a DAG: every gate may reference
only strictly earlier gates, so a plain index is a safe reference and the
list order is already topological.  Circuits have k real inputs and k
designated outputs; functions built from this basis are continuous and
piecewise linear, and evaluation over Fractions is exact.

Two rewrites prepare a circuit for the LP reduction:

* ``clamp_outputs`` composes every output t with max{0, -1*max{-1, -1*t}},
  i.e. max{0, min{1, t}}, so the function maps all of R^k into [0,1]^k and
  its fixed points agree with the unit-box restriction.
* ``normalize_max_zero`` rewrites max{a, b} as max{0, b-a} + a until every
  max gate has a literal zero operand.

Both preserve evaluation semantics exactly; the clamp bookkeeping
(``clamp_pairs``) survives normalization so later stages can locate the
inner/outer clamp gates of each output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactmath import Vec, rat_from_str, rat_to_str


@dataclass(frozen=True, slots=True)
class Input:
    index: int


@dataclass(frozen=True, slots=True)
class Const:
    value: Fraction


@dataclass(frozen=True, slots=True)
class Add:
    a: int
    b: int


@dataclass(frozen=True, slots=True)
class MulC:
    coeff: Fraction
    a: int


@dataclass(frozen=True, slots=True)
class Max:
    a: int
    b: int


Gate = Input | Const | Add | MulC | Max


def _gate_refs(g: Gate):
    if isinstance(g, (Add, Max)):
        return (g.a, g.b)
    if isinstance(g, MulC):
        return (g.a,)
    return ()


@dataclass(frozen=True)
class FixpCircuit:
    """Circuit with k real inputs; immutable after construction.

    Fixed-point circuits designate k outputs, but gadget fragments (bit
    extraction, Boolean simulation) may expose a different number; the
    output-arity requirement is enforced where fixed-point semantics
    start, in clamp_outputs.
    """

    k: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]
    normalized: bool = False
    clamped: bool = False
    clamp_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("circuit needs at least one input")
        for i, g in enumerate(self.gates):
            for ref in _gate_refs(g):
                if not 0 <= ref < i:
                    raise ValueError(f"gate {i} references {ref}; only earlier gates allowed")
            if isinstance(g, Input) and not 0 <= g.index < self.k:
                raise ValueError(f"input gate {i} has index {g.index} outside 0..{self.k - 1}")
        if not self.outputs:
            raise ValueError("circuit needs at least one output")
        for ref in self.outputs:
            if not 0 <= ref < len(self.gates):
                raise ValueError(f"output ref {ref} out of range")
        if self.clamped:
            if len(self.outputs) != self.k:
                raise ValueError("clamped circuit must have k outputs")
            if len(self.clamp_pairs) != self.k:
                raise ValueError("clamped circuit must record one clamp pair per output")
            for l, (inner, outer) in enumerate(self.clamp_pairs):
                if self.outputs[l] != outer:
                    raise ValueError("clamped outputs must be the outer clamp gates")
                if not (isinstance(self.gates[inner], Max) and isinstance(self.gates[outer], Max)):
                    raise ValueError("clamp pair refs must be max gates")


def evaluate_with_trace(c: FixpCircuit, point: Vec) -> tuple[Vec, Vec]:
    """Evaluate gate by gate; returns (outputs, value of every gate)."""
    if len(point) != c.k:
        raise ValueError(f"expected {c.k} inputs, got {len(point)}")
    values: list[Fraction] = []
    for g in c.gates:
        if isinstance(g, Input):
            v = Fraction(point[g.index])
        elif isinstance(g, Const):
            v = g.value
        elif isinstance(g, Add):
            v = values[g.a] + values[g.b]
        elif isinstance(g, MulC):
            v = g.coeff * values[g.a]
        else:
            va, vb = values[g.a], values[g.b]
            v = va if va >= vb else vb
        values.append(v)
    return [values[o] for o in c.outputs], values


def evaluate(c: FixpCircuit, point: Vec) -> Vec:
    return evaluate_with_trace(c, point)[0]


def clamp_outputs(c: FixpCircuit) -> FixpCircuit:
    """Append the two-max clamp max{0, -1*max{-1, -1*t}} to every output.

    The inner gate realizes min{1, t} (negated), the outer gate the final
    max with zero; afterwards evaluation lands in [0,1]^k for every real
    input.  Raises if the circuit is already clamped.
    """
    if c.clamped:
        raise ValueError("circuit outputs are already clamped")
    if len(c.outputs) != c.k:
        raise ValueError(f"fixed-point circuit needs {c.k} outputs, found {len(c.outputs)}")
    gates = list(c.gates)
    neg_one = len(gates)
    gates.append(Const(Fraction(-1)))
    zero = len(gates)
    gates.append(Const(Fraction(0)))
    outputs = []
    pairs = []
    for ref in c.outputs:
        neg_t = len(gates)
        gates.append(MulC(Fraction(-1), ref))
        inner = len(gates)
        gates.append(Max(neg_one, neg_t))
        neg_inner = len(gates)
        gates.append(MulC(Fraction(-1), inner))
        outer = len(gates)
        gates.append(Max(zero, neg_inner))
        outputs.append(outer)
        pairs.append((inner, outer))
    return FixpCircuit(c.k, tuple(gates), tuple(outputs),
                       normalized=False, clamped=True, clamp_pairs=tuple(pairs))


def normalize_max_zero(c: FixpCircuit) -> FixpCircuit:
    """Rewrite every max gate so one operand is a literal zero constant.

    max{a, b} becomes max{0, b-a} + a, costing at most three extra gates
    per rewritten max (one MulC(-1), two Add) plus a single shared zero
    constant.  Evaluation is unchanged for every input.
    """
    gates: list[Gate] = []
    value_of: dict[int, int] = {}   # old index -> gate holding its value
    max_of: dict[int, int] = {}     # old max index -> max gate in new list
    zero_ref: int | None = None

    def emit(g: Gate) -> int:
        gates.append(g)
        return len(gates) - 1

    def ensure_zero() -> int:
        nonlocal zero_ref
        if zero_ref is None:
            zero_ref = emit(Const(Fraction(0)))
        return zero_ref

    for i, g in enumerate(c.gates):
        if isinstance(g, Input):
            value_of[i] = emit(g)
        elif isinstance(g, Const):
            new = emit(g)
            value_of[i] = new
            if g.value == 0 and zero_ref is None:
                zero_ref = new
        elif isinstance(g, Add):
            value_of[i] = emit(Add(value_of[g.a], value_of[g.b]))
        elif isinstance(g, MulC):
            value_of[i] = emit(MulC(g.coeff, value_of[g.a]))
        else:
            na, nb = value_of[g.a], value_of[g.b]
            if _is_zero_const(gates, na) or _is_zero_const(gates, nb):
                new = emit(Max(na, nb))
                value_of[i] = new
                max_of[i] = new
            else:
                neg_a = emit(MulC(Fraction(-1), na))
                diff = emit(Add(nb, neg_a))
                mx = emit(Max(ensure_zero(), diff))
                value_of[i] = emit(Add(mx, na))
                max_of[i] = mx

    outputs = tuple(value_of[o] for o in c.outputs)
    pairs = tuple((max_of[i], max_of[o]) for i, o in c.clamp_pairs)
    return FixpCircuit(c.k, tuple(gates), outputs,
                       normalized=True, clamped=c.clamped, clamp_pairs=pairs)


def _is_zero_const(gates: list[Gate], ref: int) -> bool:
    g = gates[ref]
    return isinstance(g, Const) and g.value == 0


def order_max_gates(c: FixpCircuit) -> list[int]:
    """Topological order of the max gates, clamp gates in the last 2k slots.

    Gate indices are already topological (references point backward), so
    the order is ascending index; this also breaks ties between
    independent gates deterministically.  Per output l the inner clamp
    gate must directly precede the outer one; a circuit violating that
    layout is rejected.
    """
    if not (c.normalized and c.clamped):
        raise ValueError("circuit must be max-zero normalized and clamped")
    order = [i for i, g in enumerate(c.gates) if isinstance(g, Max)]
    tail = [ref for pair in c.clamp_pairs for ref in pair]
    if order[len(order) - 2 * c.k:] != tail:
        raise ValueError("clamp gates are not the final max gates in pair order")
    return order


def circuit_size(c: FixpCircuit) -> int:
    """Inputs + gates + total bit length of all rational constants."""
    bits = 0
    for g in c.gates:
        if isinstance(g, Const):
            bits += _rat_bits(g.value)
        elif isinstance(g, MulC):
            bits += _rat_bits(g.coeff)
    return c.k + len(c.gates) + bits


def _rat_bits(x: Fraction) -> int:
    n = abs(x.numerator).bit_length()
    d = x.denominator.bit_length()
    return max(n, 1) + max(d, 1)


# --- builder -----------------------------------------------------------

class Builder:
    """Incremental circuit constructor with constant deduplication."""

    def __init__(self, k: int):
        self.k = k
        self.gates: list[Gate] = []
        self._consts: dict[Fraction, int] = {}
        self._inputs: dict[int, int] = {}

    def _emit(self, g: Gate) -> int:
        self.gates.append(g)
        return len(self.gates) - 1

    def input(self, index: int) -> int:
        if index not in self._inputs:
            self._inputs[index] = self._emit(Input(index))
        return self._inputs[index]

    def const(self, value) -> int:
        v = Fraction(value)
        if v not in self._consts:
            self._consts[v] = self._emit(Const(v))
        return self._consts[v]

    def add(self, a: int, b: int) -> int:
        return self._emit(Add(a, b))

    def mulc(self, coeff, a: int) -> int:
        return self._emit(MulC(Fraction(coeff), a))

    def maxg(self, a: int, b: int) -> int:
        return self._emit(Max(a, b))

    def neg(self, a: int) -> int:
        return self.mulc(-1, a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def ming(self, a: int, b: int) -> int:
        # min{a,b} = -max{-a,-b}; the basis has no min primitive
        return self.neg(self.maxg(self.neg(a), self.neg(b)))

    def one_minus(self, a: int) -> int:
        return self.add(self.const(1), self.neg(a))

    def sum_chain(self, refs: list[int]) -> int:
        if not refs:
            return self.const(0)
        acc = refs[0]
        for r in refs[1:]:
            acc = self.add(acc, r)
        return acc

    def build(self, outputs: list[int]) -> FixpCircuit:
        return FixpCircuit(self.k, tuple(self.gates), tuple(outputs))


# --- JSON wire format ---------------------------------------------------

def circuit_to_json(c: FixpCircuit) -> dict:
    gates = []
    for g in c.gates:
        if isinstance(g, Input):
            gates.append({"op": "input", "i": g.index})
        elif isinstance(g, Const):
            gates.append({"op": "const", "v": rat_to_str(g.value)})
        elif isinstance(g, Add):
            gates.append({"op": "add", "a": g.a, "b": g.b})
        elif isinstance(g, MulC):
            gates.append({"op": "mulc", "c": rat_to_str(g.coeff), "a": g.a})
        else:
            gates.append({"op": "max", "a": g.a, "b": g.b})
    doc = {"k": c.k, "gates": gates, "outputs": list(c.outputs)}
    if c.normalized or c.clamped:
        doc["meta"] = {
            "max_zero_normalized": c.normalized,
            "outputs_clamped": c.clamped,
            "clamp_pairs": [list(p) for p in c.clamp_pairs],
        }
    return doc


def circuit_from_json(doc: dict) -> FixpCircuit:
    gates: list[Gate] = []
    for g in doc["gates"]:
        op = g["op"]
        if op == "input":
            gates.append(Input(int(g["i"])))
        elif op == "const":
            gates.append(Const(rat_from_str(g["v"])))
        elif op == "add":
            gates.append(Add(int(g["a"]), int(g["b"])))
        elif op == "mulc":
            gates.append(MulC(rat_from_str(g["c"]), int(g["a"])))
        elif op == "max":
            gates.append(Max(int(g["a"]), int(g["b"])))
        else:
            raise ValueError(f"unknown gate op {op!r}")
    meta = doc.get("meta", {})
    return FixpCircuit(
        int(doc["k"]), tuple(gates), tuple(int(o) for o in doc["outputs"]),
        normalized=bool(meta.get("max_zero_normalized", False)),
        clamped=bool(meta.get("outputs_clamped", False)),
        clamp_pairs=tuple((int(a), int(b)) for a, b in meta.get("clamp_pairs", [])),
    )
