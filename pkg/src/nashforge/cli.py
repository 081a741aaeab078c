"""Command-line driver for the reduction pipeline.

One JSON artifact per file, tagged "schema": "nashforge/v1" plus a "kind";
every command is deterministic given its inputs and flags (reruns are
byte-identical).  Exit codes: 0 success, 1 internal error, 2 input
validation failure, 3 lemma-falsification alarm.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import brouwer, compiler, lcp, lp, nash
from .exactmath import mat_add, rank, rat_from_str, rat_to_str, vec_to_strs
from .fixp import (
    FixpCircuit, circuit_from_json, circuit_to_json, clamp_outputs,
    evaluate, normalize_max_zero,
)

SCHEMA = "nashforge/v1"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID_INPUT = 2
EXIT_LEMMA_ALARM = 3


class InputError(Exception):
    """Bad file, schema mismatch or malformed values: exit code 2."""


def _load(path: str, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})")
    if doc.get("schema") != SCHEMA:
        raise InputError(f"{path}: expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    if doc.get("kind") != kind:
        raise InputError(f"{path}: expected kind {kind!r}, got {doc.get('kind')!r}")
    return doc


def _save(path: str, kind: str, body: dict):
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(body)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _parse_point(text: str) -> list[Fraction]:
    try:
        return [rat_from_str(part.strip()) for part in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad point {text!r}: {exc}")


def _load_circuit(path: str) -> FixpCircuit:
    doc = _load(path, "circuit")
    try:
        return circuit_from_json(doc)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed circuit ({exc})")


def _load_brouwer(path: str) -> brouwer.BoolCircuit:
    doc = _load(path, "brouwer")
    try:
        return brouwer.bool_from_json(doc)
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: malformed mapping circuit ({exc})")


# --- commands -------------------------------------------------------------

def cmd_compile(args) -> int:
    cb = _load_brouwer(args.input)
    report = brouwer.validate_circuit(cb)
    if not report.ok:
        print("validation: FAIL")
        for p, reason in report.violations[:10]:
            print(f"  at {p}: {reason}")
        return EXIT_INVALID_INPUT
    params = None
    if args.L is not None:
        params = compiler.SamplingParams(args.L, max(16, cb.k ** 4))
    cf = compiler.compile_brouwer(cb, params=params, validate=False)
    print(f"validation: PASS ({cb.k}D, n={cb.n}, L={cf.params.L}, "
          f"samples={cf.params.sample_count})")
    if args.grid_check:
        bad = compiler.grid_restriction_violations(cf)
        if bad:
            print(f"grid-restriction check: FAIL at {bad[0][0]}")
            return EXIT_LEMMA_ALARM
        print("grid-restriction check: PASS")
    if args.shrink:
        cf = compiler.shrink_range(cf)
    _save(args.output, "circuit", circuit_to_json(cf.circuit))
    meta_path = args.meta or args.output + ".meta.json"
    _save(meta_path, "compiled_meta", compiler.compiled_meta_json(cf))
    print(f"wrote {args.output} and {meta_path}")
    return EXIT_OK


def _reduce_pipeline(circ: FixpCircuit):
    if not circ.clamped:
        circ = clamp_outputs(circ)
    if not circ.normalized:
        circ = normalize_max_zero(circ)
    P = lp.with_cost(lp.build_constraints(circ))
    return circ, P


def cmd_reduce(args) -> int:
    circ = _load_circuit(args.input)
    prepared, P = _reduce_pipeline(circ)
    lines = [f"m={P.m} k={P.k} n={P.npre}"]
    problems = lp.property_violations(P)
    lines.append("structure checks P1-P3: " + ("PASS" if not problems else "FAIL " + problems[0]))
    artifact_kind = None
    body = None
    if args.target == "lp":
        artifact_kind, body = "param_lp", lp.lp_to_json(P)
    elif args.target == "lcp":
        if args.variant == "direct":
            artifact_kind, body = "lcp", lcp.lcp_to_json(lcp.build_direct_lcp(P))
        else:
            artifact_kind, body = "lcp", lcp.lcp_to_json(lcp.build_lcp_C(lcp.normalize(P)))
    elif args.target == "game":
        game = lcp.build_game(lcp.normalize(P))
        s = mat_add(game.A, game.B)
        lines.append("first matrix upper-triangular: PASS")
        lines.append(f"rank(A+B) = {rank(s)} <= k+1 = {P.k + 1}: PASS")
        artifact_kind, body = "game", lcp.game_to_json(game)
    elif args.target == "symmetric":
        artifact_kind, body = "game", lcp.game_to_json(lcp.build_symmetric_game(P))
    elif args.target == "imitation":
        artifact_kind, body = "game", lcp.game_to_json(
            lcp.imitation_game(lcp.build_symmetric_game(P)))
    _save(args.output, artifact_kind, body)
    for line in lines:
        print(line)
    if args.report:
        _save(args.report, "reduce_report", {"target": args.target, "lines": lines})
    print(f"wrote {args.output}")
    return EXIT_OK


def _check(checks: list, name: str, ok: bool, detail: str = ""):
    checks.append({"name": name, "status": "PASS" if ok else "FAIL", "detail": detail})
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))


def _verify_circuit_lemmas(circ: FixpCircuit, seed: int, trials: int, checks: list):
    prepared, P = _reduce_pipeline(circ)
    rng = random.Random(seed)
    ns = lcp.normalize(P)
    game = lcp.build_game(ns)
    sym = lcp.build_symmetric_game(P)

    _check(checks, "structure_P1_P3", not lp.property_violations(P))

    ok = True
    from .fixp import evaluate_with_trace, order_max_gates
    order = order_max_gates(prepared)
    for _ in range(max(5, trials // 40)):
        lam = [Fraction(rng.randint(-12, 12), rng.randint(1, 8)) for _ in range(P.k)]
        x = lp.solve_lp(P, lam)
        _, trace = evaluate_with_trace(prepared, lam)
        if [trace[g] for g in order] != x:
            ok = False
            break
        y = lp.construct_dual(P, lam, x)
        if not lp.check_kkt(P, lam, x, y) or any(a > b for a, b in zip(y, P.beta)):
            ok = False
            break
    _check(checks, "lp_matches_circuit_and_kkt", ok)

    tri = True
    try:
        tri = rank(mat_add(game.A, game.B)) <= P.k + 1
    except lcp.LemmaFalsified:
        tri = False
    _check(checks, "rank_and_triangularity", tri)
    smm = lcp.symmetrize(game.A, game.B)
    _check(checks, "symmetrized_rank",
           rank(mat_add(smm.S, [list(r) for r in zip(*smm.S)])) <= 2 * (P.k + 1))

    alarm = False
    violated = 0
    for _ in range(trials):
        z = [Fraction(rng.randint(0, 6), rng.randint(1, 4)) for _ in range(2 * P.m)]
        if all(v == 0 for v in z):
            z[rng.randrange(2 * P.m)] = Fraction(1)
        q = [Fraction(rng.randint(1, 8), rng.randint(1, 4)) for _ in range(2 * P.m)]
        try:
            lcp.semimonotone_witness(ns, z, q)
            violated += 1
        except lcp.LemmaFalsified:
            alarm = True
            break
    _check(checks, "semimonotone_battery", not alarm, f"{violated}/{trials} witnessed")
    if alarm:
        raise lcp.LemmaFalsified("semimonotone battery found a nonzero solution")

    res = nash.enumerate_ne(game.A, game.B)
    ok_map = bool(res.equilibria)
    lam_set = set()
    for cert in res.equilibria:
        try:
            x, y = lcp.ne_to_lcp(ns, cert.x, cert.y)
            back = lcp.lcp_to_ne(x, y)
            if back != (cert.x, cert.y):
                ok_map = False
            lam = lcp.game_to_fixed_point(cert.x, game.meta)
            lam_set.add(tuple(lam))
            if not nash.check_fixed_point(prepared, lam):
                ok_map = False
        except lcp.LemmaFalsified:
            raise
    _check(checks, "ne_to_lcp_roundtrip_and_fixed_points", ok_map,
           f"{len(res.equilibria)} equilibria" + (" [degenerate]" if res.degenerate else ""))

    sres = nash.enumerate_symmetric_ne(sym.S)
    sym_lams = set()
    ok_sym = bool(sres.equilibria)
    for cert in sres.equilibria:
        try:
            x = lcp.symne_to_lcp(P, cert.z)
            if lcp.lcp_to_symne(x) != cert.z:
                ok_sym = False
            lam = lcp.game_to_fixed_point(cert.z, sym.meta)
            sym_lams.add(tuple(lam))
            if not nash.check_fixed_point(prepared, lam):
                ok_sym = False
        except lcp.LemmaFalsified:
            raise
    _check(checks, "symmetric_path_fixed_points", ok_sym,
           f"{len(sres.equilibria)} symmetric equilibria")
    if not (res.degenerate or sres.degenerate):
        _check(checks, "paths_agree_on_lambda", lam_set == sym_lams)

    imi = lcp.imitation_game(sym)
    ires = nash.enumerate_ne(imi.A, imi.B)
    second = {tuple(c.y) for c in ires.equilibria}
    sym_set = {tuple(c.z) for c in sres.equilibria}
    _check(checks, "imitation_second_strategies", second == sym_set)


def _verify_roundtrip(circ: FixpCircuit, checks: list):
    prepared, P = _reduce_pipeline(circ)
    ns = lcp.normalize(P)
    game = lcp.build_game(ns)
    res = nash.enumerate_ne(game.A, game.B)
    _check(checks, "equilibria_found", bool(res.equilibria), f"{len(res.equilibria)} found")
    for idx, cert in enumerate(res.equilibria):
        s, t = cert.x[-1], cert.y[-1]
        _check(checks, f"ne_{idx}_slack_positive", s > 0 and t > 0)
        x, y = lcp.ne_to_lcp(ns, cert.x, cert.y)
        _check(checks, f"ne_{idx}_lcp_conditions", lcp.check_lcp(lcp.build_lcp_C(ns), x + y))
        lam = lcp.game_to_fixed_point(cert.x, game.meta)
        _check(checks, f"ne_{idx}_fixed_point", nash.check_fixed_point(prepared, lam),
               "lambda = " + ", ".join(rat_to_str(v) for v in lam))


def _verify_game(doc_path: str, checks: list):
    game = lcp.game_from_json(_load(doc_path, "game"))
    if game.meta.kind == "rank_k_plus_1":
        s = mat_add(game.A, game.B)
        _check(checks, "rank_bound", rank(s) <= game.meta.k + 1)
        from .exactmath import is_upper_triangular
        _check(checks, "upper_triangular", is_upper_triangular(game.A))
    res = nash.enumerate_ne(game.A, game.B)
    _check(checks, "equilibria_found", bool(res.equilibria), f"{len(res.equilibria)} found")
    for idx, cert in enumerate(res.equilibria):
        ok = not nash.ne_violations(game.A, game.B, cert.x, cert.y)
        _check(checks, f"ne_{idx}_checker", ok)
        if game.meta.kind in ("rank_k_plus_1",) and game.meta.output_rows:
            _check(checks, f"ne_{idx}_slack_positive", cert.x[-1] > 0 and cert.y[-1] > 0)


def _verify_approx(args, checks: list):
    if not args.source or not args.compiled_meta:
        raise InputError("--mode approx needs --source (brouwer.json) and --compiled-meta")
    circ = _load_circuit(args.input)
    cb = _load_brouwer(args.source)
    meta = _load(args.compiled_meta, "compiled_meta")
    params = compiler.SamplingParams(int(meta["L"]), int(meta["sample_count"]))
    grid = brouwer.Grid(int(meta["source_grid"]["k"]), int(meta["source_grid"]["n"]))
    cf = compiler.CompiledFunction(circ, cb, grid, params, bool(meta["shrunk"]))
    if not args.points:
        raise InputError("--mode approx needs --points \"p1,p2;q1,q2;...\"")
    eps = rat_from_str(args.eps) if args.eps else Fraction(1, params.L)
    fixtures = None
    for text in args.points.split(";"):
        p = _parse_point(text)
        if len(p) != grid.k:
            raise InputError(f"point {text!r} has wrong dimension")
        is_fp = compiler.check_approx_fixed_point(cf, p, eps)
        _check(checks, f"approx_fixed_point[{text}]", is_fp, f"eps={rat_to_str(eps)}")
        if not is_fp:
            continue
        try:
            simplex = compiler.extract_panchromatic_simplex(p, cf, eps)
        except compiler.NotPanchromatic as exc:
            _check(checks, f"simplex[{text}]", False, str(exc))
            continue
        if fixtures is None:
            fixtures = brouwer.brute_force_fixtures(cb)
        base = tuple(min(q[i] for q in simplex) for i in range(grid.k))
        known = {f.base for f in fixtures}
        _check(checks, f"simplex[{text}]", base in known,
               "cells " + " ".join(str(q) for q in simplex))


def cmd_verify(args) -> int:
    checks: list[dict] = []
    alarm = False
    try:
        if args.mode == "approx":
            _verify_approx(args, checks)
        else:
            doc = json.loads(Path(args.input).read_text())
            kind = doc.get("kind")
            if kind == "game":
                _verify_game(args.input, checks)
            elif kind == "circuit":
                circ = _load_circuit(args.input)
                if args.mode == "roundtrip":
                    _verify_roundtrip(circ, checks)
                else:
                    _verify_circuit_lemmas(circ, args.seed, args.trials, checks)
            else:
                raise InputError(f"{args.input}: cannot verify kind {kind!r}")
    except lcp.LemmaFalsified as exc:
        _check(checks, "lemma_falsification_alarm", False, str(exc))
        alarm = True
    ok = all(c["status"] == "PASS" for c in checks)
    if args.output:
        _save(args.output, "verify_report",
              {"mode": args.mode, "checks": checks, "ok": ok and not alarm})
    if alarm:
        return EXIT_LEMMA_ALARM
    return EXIT_OK if ok else EXIT_INVALID_INPUT


def cmd_solve(args) -> int:
    game = lcp.game_from_json(_load(args.input, "game"))
    entries = []
    degenerate = False
    if args.method == "lh":
        certs = [nash.lemke_howson(game.A, game.B, args.label)]
    else:
        res = nash.enumerate_ne(game.A, game.B)
        certs = list(res.equilibria)
        degenerate = res.degenerate
    for cert in certs:
        entry = {
            "x": vec_to_strs(cert.x[:-1]), "s": rat_to_str(cert.x[-1]),
            "y": vec_to_strs(cert.y[:-1]), "t": rat_to_str(cert.y[-1]),
            "pi1": rat_to_str(cert.pi1), "pi2": rat_to_str(cert.pi2),
        }
        # the fixed-point carrier depends on the construction: first player
        # for the rank-(k+1) game, second player for imitation games, and
        # the shared strategy of symmetric profiles for (S, S^T)
        carrier = None
        if game.meta.output_rows:
            if game.meta.kind == "rank_k_plus_1":
                carrier = cert.x
            elif game.meta.kind == "imitation":
                carrier = cert.y
            elif cert.x == cert.y:
                carrier = cert.x
        if carrier is not None and carrier[-1] > 0:
            entry["lambda"] = vec_to_strs(lcp.game_to_fixed_point(carrier, game.meta))
        entries.append(entry)
    body = {"entries": entries, "degenerate": degenerate}
    if args.output:
        _save(args.output, "ne_report", body)
    print(json.dumps(body["entries"], indent=2, sort_keys=True))
    return EXIT_OK


def cmd_oracle(args) -> int:
    cb = _load_brouwer(args.input)
    report = brouwer.validate_circuit(cb)
    if not report.ok:
        print("validation: FAIL")
        for p, reason in report.violations[:10]:
            print(f"  at {p}: {reason}")
        return EXIT_INVALID_INPUT
    cubes = brouwer.brute_force_fixtures(cb)
    body = {
        "validation": "PASS",
        "panchromatic_cubes": [
            {"base": list(c.base),
             "simplices": [[list(v) for v in s] for s in c.simplices]}
            for c in cubes
        ],
    }
    if args.output:
        _save(args.output, "oracle_report", body)
    print(f"validation: PASS; {len(cubes)} panchromatic cube(s)")
    for c in cubes:
        print(f"  base {tuple(c.base)}: {len(c.simplices)} simplex/simplices")
    return EXIT_OK


def cmd_eval(args) -> int:
    circ = _load_circuit(args.input)
    point = _parse_point(args.at)
    if len(point) != circ.k:
        raise InputError(f"circuit expects {circ.k} inputs")
    out = evaluate(circ, point)
    print(json.dumps(vec_to_strs(out)))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    doc = _load(args.input, "manifest")
    stages = doc.get("stages", [])
    if not isinstance(stages, list) or not stages:
        raise InputError("manifest needs a nonempty stages list")
    expected_kind = {"compile": "brouwer", "reduce": "circuit", "verify": None,
                     "solve": "game", "oracle": "brouwer", "eval": "circuit"}
    prev_output = None
    for i, stage in enumerate(stages):
        cmd = stage.get("command")
        if cmd not in expected_kind:
            raise InputError(f"stage {i}: unknown command {cmd!r}")
        inp = stage.get("input")
        if inp is None:
            raise InputError(f"stage {i}: missing input")
        if i > 0 and inp != prev_output:
            raise InputError(f"stage {i}: input {inp!r} does not chain from previous"
                             f" output {prev_output!r}")
        want = expected_kind[cmd]
        if want is not None and Path(inp).exists():
            got = json.loads(Path(inp).read_text()).get("kind")
            if got != want:
                raise InputError(f"stage {i}: {cmd} expects kind {want!r}, file has {got!r}")
        prev_output = stage.get("output", inp)
    for i, stage in enumerate(stages):
        argv = [stage["command"], stage["input"]]
        for flag, value in sorted(stage.get("args", {}).items()):
            if value is True:
                argv.append(f"--{flag}")
            elif value is not False:
                argv.extend([f"--{flag}", str(value)])
        if "output" in stage and stage["command"] not in ("eval",):
            argv.extend(["-o", stage["output"]])
        print(f"[stage {i}] nashforge " + " ".join(argv))
        code = main(argv)
        if code != EXIT_OK:
            return code
    return EXIT_OK


# --- wiring ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nashforge",
                                description="discrete Brouwer -> circuits -> LPs -> LCPs -> games")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a mapping circuit to a piecewise-linear circuit")
    c.add_argument("input")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--meta", help="sidecar metadata path (default: OUTPUT.meta.json)")
    c.add_argument("--L", type=int, help="sampling density (power of two)")
    c.add_argument("--shrink", action="store_true", help="rescale to the unit box")
    c.add_argument("--grid-check", action=argparse.BooleanOptionalAction, default=True)
    c.set_defaults(func=cmd_compile)

    r = sub.add_parser("reduce", help="reduce a circuit to an LP/LCP/game artifact")
    r.add_argument("input")
    r.add_argument("--target", required=True,
                   choices=["lp", "lcp", "game", "symmetric", "imitation"])
    r.add_argument("--variant", choices=["two_sided", "direct"], default="two_sided")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--report")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="run the lemma batteries against an artifact")
    v.add_argument("input")
    v.add_argument("--mode", choices=["roundtrip", "lemmas", "approx"], default="lemmas")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--source", help="brouwer.json for --mode approx")
    v.add_argument("--compiled-meta", help="compiled sidecar for --mode approx")
    v.add_argument("--points", help="semicolon-separated candidate points")
    v.add_argument("--eps", help="approximation tolerance (default 1/L)")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="enumerate equilibria or run Lemke-Howson")
    s.add_argument("input")
    s.add_argument("--method", choices=["enumerate", "lh"], default="enumerate")
    s.add_argument("--label", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force panchromatic cubes of a mapping circuit")
    o.add_argument("input")
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("eval", help="evaluate a circuit at a point")
    e.add_argument("input")
    e.add_argument("--at", required=True, help="comma-separated rationals")
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("pipeline", help="run a manifest of chained stages")
    m.add_argument("input")
    m.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (brouwer.GridTooLarge, brouwer.InvalidBrouwerCircuit,
            nash.DimensionTooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except lcp.LemmaFalsified as exc:
        print(f"lemma falsification alarm: {exc}", file=sys.stderr)
        return EXIT_LEMMA_ALARM
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry():
    sys.exit(main())
