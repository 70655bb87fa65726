"""Command line front end: ``permext <subcommand> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage or
input errors.  ``--json`` prints one summary object with the fields
``command``, ``inputs``, ``outputs``, ``metrics`` and ``status``.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import _accel
from .perm import PermutationArray, group_min_distance, verify_pa

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _summary(command, inputs=None, outputs=None, metrics=None, status="ok"):
    return {"command": command, "inputs": inputs or {}, "outputs": outputs or {},
            "metrics": metrics or {}, "status": status}


def _load_symbols(spec, n, k):
    from .search import default_symbol_partition

    if spec in (None, "default"):
        return default_symbol_partition(n, k)
    if os.path.exists(spec):
        with open(spec) as fh:
            return json.load(fh)
    return json.loads(spec)


def _load_group(path):
    """A group PA file; AGL1/PGL2/PGammaL2 headers are regenerated and compared."""
    from .groups import GroupPA, make_group
    from .ledger import read_pa

    pa = read_pa(path)
    fam, q = pa.meta.get("family"), pa.meta.get("q")
    if fam in ("AGL1", "PGL2", "PGammaL2") and q is not None:
        G = make_group(fam, int(q), pa.meta.get("labeling", "natural"))
        if np.array_equal(G.rows, pa.rows):
            return G
    return GroupPA(pa, "explicit")


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_group(args):
    from .groups import make_group
    from .ledger import write_pa

    t0 = time.perf_counter()
    G = make_group(args.family, args.q, args.labeling)
    d = group_min_distance(G.rows)
    write_pa(G.base, args.output, d=d, **G.header())
    return EXIT_OK, _summary("gen-group", {"family": args.family, "q": args.q, "labeling": args.labeling},
                             {"pa": args.output},
                             {"rows": len(G), "n": G.n, "d": d, "seconds": time.perf_counter() - t0})


def cmd_decompose(args):
    from .groups import GroupError, block_decomposition, cyclic_coset_decomposition
    from .ledger import write_pa

    G = _load_group(args.group)
    try:
        if args.mode == "cyclic":
            blocks = cyclic_coset_decomposition(G)
        else:
            blocks = block_decomposition(G)
    except GroupError as exc:
        return EXIT_FAIL, _summary("decompose", {"group": args.group, "mode": args.mode},
                                   metrics={"error": str(exc)}, status="failed")
    os.makedirs(args.output, exist_ok=True)
    paths = []
    for i, b in enumerate(blocks):
        p = os.path.join(args.output, f"block_{i:04d}.pa")
        write_pa(b, p, d=G.n)
        paths.append(p)
    return EXIT_OK, _summary("decompose", {"group": args.group, "mode": args.mode},
                             {"blocks": paths}, {"count": len(blocks), "block_rows": G.n})


def cmd_gen_mols(args):
    from .mols import format_mols, mols_prime_power

    S = mols_prime_power(args.q)
    text = format_mols(S)
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text) if not args.json else None
    return EXIT_OK, _summary("gen-mols", {"q": args.q}, {"file": args.output},
                             {"squares": len(S), "mutually_orthogonal": S.is_mutually_orthogonal()})


def cmd_extend(args):
    from .extension import load_descriptor, run_descriptor
    from .ledger import write_pa

    desc = load_descriptor(args.system)
    if args.mode:
        desc["mode"] = args.mode
    t0 = time.perf_counter()
    out = run_descriptor(desc, os.path.dirname(os.path.abspath(args.system)))
    d = out.meta.get("d", desc.get("d"))
    metrics = {"rows": len(out), "n": out.n, "d_claimed": d, "seconds": time.perf_counter() - t0}
    status, code = "ok", EXIT_OK
    if args.verify:
        rep = verify_pa(out, int(d), "full" if len(out) <= args.full_limit else "sampled",
                        seed=args.seed or 0)
        metrics["verification"] = rep.to_dict()
        if not rep.passed:
            status, code = "verification-failed", EXIT_FAIL
    write_pa(out, args.output, d=d)
    return code, _summary("extend", {"system": args.system, "mode": desc.get("mode")},
                          {"pa": args.output}, metrics, status)


def cmd_kron(args):
    from .ledger import read_pa, write_pa
    from .groups import block_decomposition
    from .mols import kron_blockwise, kron_extend_bound, kronecker
    from .perm import verify_pa

    def side(paths):
        # a single group file stands for its block decomposition
        if len(paths) == 1 and (args.extend or args.blockwise):
            pa = read_pa(paths[0])
            if len(pa) > pa.n and pa.meta.get("family") in ("AGL1", "PGL2", "PGammaL2"):
                return block_decomposition(_load_group(paths[0]))
            return [pa]
        return [read_pa(p) for p in paths]

    left, right = side(args.left), side(args.right)
    metrics = {}
    if args.extend:
        out, bound = kron_extend_bound(left, right, verify=args.verify)
        d = left[0].n * right[0].n
        metrics["bound"] = bound
    elif args.blockwise:
        k = min(len(left), len(right))  # pair the first k blocks of each side
        out, info = kron_blockwise(left[:k], right[:k], measure=args.verify)
        metrics.update(info)
        d = info.get("measured")
    else:
        if len(left) != 1 or len(right) != 1:
            raise UsageError("plain kron takes one --left and one --right file")
        out = kronecker(left[0], right[0])
        d = None
    metrics.update(rows=len(out), n=out.n)
    code = EXIT_OK
    if args.verify and d is not None:
        rep = verify_pa(out, d)
        metrics["verify"] = rep.to_dict()
        code = EXIT_OK if rep.passed else EXIT_FAIL
    write_pa(out, args.output, d=d)
    return code, _summary("kron", {"left": args.left, "right": args.right,
                                      "blockwise": args.blockwise, "extend": args.extend},
                             {"pa": args.output}, metrics)


def cmd_search_partition(args):
    from .ledger import read_pa
    from .search import (SearchConfig, decode_partition, export_lp, greedy_partition,
                         ilp_partition_model, partition_coverage, solve_ilp)

    blocks = [read_pa(p) for p in args.blocks]
    n, k = blocks[0].n, len(blocks)
    Q = _load_symbols(args.symbols, n, k)
    cfg = SearchConfig(seed=args.seed or 0, time_budget=args.budget,
                       solver="export-only" if args.export_only else args.solver)
    metrics = {}
    outputs = {}
    if args.mode == "greedy":
        P = greedy_partition(blocks, Q, cfg)
    else:
        model = ilp_partition_model(blocks, Q)
        if args.export_lp:
            with open(args.export_lp, "w", newline="\n") as fh:
                fh.write(export_lp(model))
            outputs["lp"] = args.export_lp
        res = solve_ilp(model, cfg)
        metrics.update(solver_status=res.status, nodes=res.nodes, objective=res.objective)
        if res.assignment is None:
            return (EXIT_OK if res.status == "exported" else EXIT_FAIL), \
                _summary("search-partition", {"blocks": args.blocks, "mode": args.mode}, outputs,
                         metrics, res.status)
        P = decode_partition(model, res.assignment)
    cov = partition_coverage(blocks, P, Q)
    metrics.update(coverage=cov, total=sum(cov))
    result = {"P": P, "Q": Q}
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(result, fh)
        outputs["partition"] = args.output
    outputs.update(result)
    return EXIT_OK, _summary("search-partition", {"blocks": args.blocks, "mode": args.mode},
                             outputs, metrics)


def cmd_search_coset(args):
    from .ledger import read_pa, write_pa
    from .search import (SearchConfig, decode_permutation, filter_representatives,
                         ilp_coset_model, random_coset_search, solve_ilp)

    G = _load_group(args.group)
    existing = list(read_pa(args.existing).rows) if args.existing else []
    cfg = SearchConfig(seed=args.seed, trial_budget=args.trials, time_budget=args.budget)
    metrics = {}
    if args.mode == "random":
        found = random_coset_search(G, args.distance, existing, cfg, max_found=args.max_found)
    else:
        res = solve_ilp(ilp_coset_model(G, args.distance), cfg)
        metrics.update(solver_status=res.status, nodes=res.nodes)
        found = []
        if res.assignment is not None:
            model = ilp_coset_model(G, args.distance)
            rho = decode_permutation(model, res.assignment)
            if filter_representatives(G, existing + [rho], args.distance)["passed"]:
                found = [rho]
    metrics["found"] = len(found)
    if found:
        check = filter_representatives(G, existing + found, args.distance)
        metrics["revalidated"] = check["passed"]
    if args.output:
        group_tag = f"{G.family}({G.q})" if G.q else G.family
        pa = PermutationArray(np.array(found, dtype=np.int64).reshape(len(found), G.n), G.n)
        write_pa(pa, args.output, d=args.distance, group=group_tag, seed=args.seed)
    return EXIT_OK, _summary("search-coset", {"group": args.group, "mode": args.mode,
                                              "distance": args.distance, "seed": args.seed},
                             {"reps": args.output, "found": [f.tolist() for f in found]}, metrics)


def cmd_verify(args):
    from .ledger import read_pa

    # duplicates are a distance-0 violation to report, not a parse error
    A = read_pa(args.pa, validate=False)
    bad = [i for i, r in enumerate(A.rows) if not np.array_equal(np.sort(r), np.arange(A.n))]
    if bad:
        if not args.json:
            print(f"FAIL row {bad[0]} is not a permutation of Z_{A.n}")
        return EXIT_FAIL, _summary("verify", {"pa": args.pa, "distance": args.distance, "mode": args.mode},
                                   {}, {"non_permutation_rows": bad[:20]}, "verification-failed")
    kw = {}
    if args.mode == "sampled":
        kw.update(pairs=args.pairs, seed=args.seed)
    if args.mode == "coset":
        if not args.group or not args.reps:
            raise UsageError("coset mode needs --group and --reps")
        kw.update(group=_load_group(args.group), reps=list(read_pa(args.reps).rows))
    t0 = time.perf_counter()
    rep = verify_pa(A, args.distance, args.mode, **kw)
    metrics = rep.to_dict()
    metrics["seconds"] = time.perf_counter() - t0
    metrics["backend"] = _accel.backend_name()
    if not args.json:
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"{verdict} mode={rep.mode} min_distance={rep.min_distance_found} "
              f"claimed={args.distance} pairs={rep.pairs_checked} witness={rep.witness_pair}")
    return (EXIT_OK if rep.passed else EXIT_FAIL), \
        _summary("verify", {"pa": args.pa, "distance": args.distance, "mode": args.mode},
                 {}, metrics, "ok" if rep.passed else "verification-failed")


def cmd_ledger(args):
    from .ledger import (BoundRecord, Ledger, compare_to_paper, conjecture_check,
                         conjecture_scan, read_pa)

    if args.action == "record":
        n, bound, mode = args.n, args.bound, args.verified_mode
        if args.pa:
            A = read_pa(args.pa)
            rep = verify_pa(A, args.d, "full")
            if not rep.passed:
                return EXIT_FAIL, _summary("ledger record", {"pa": args.pa}, {},
                                           rep.to_dict(), "verification-failed")
            n, bound, mode = A.n, len(A), "full"
        if n is None or bound is None:
            raise UsageError("record needs --pa or both --n and --bound")
        led = Ledger(args.ledger)
        led.record_bound(BoundRecord(n, args.d, bound, args.method, args.source,
                                     args.pa or args.artifact, mode))
        rec = led.get(n, args.d)
        return EXIT_OK, _summary("ledger record", {"ledger": args.ledger}, {"ledger": args.ledger},
                                 {"n": n, "d": args.d, "bound": bound, "best": rec.bound})
    if args.action == "compare":
        rep = compare_to_paper(Ledger(args.ledger))
        if not args.json:
            for r in rep:
                print(f"M({r['n']},{r['d']}) >= {r['bound']}: {r['verdict']} (published {r['published']})")
        return EXIT_OK, _summary("ledger compare", {"ledger": args.ledger}, {"rows": rep})
    # conjecture
    if args.n is not None:
        if args.bound is None:
            raise UsageError("conjecture check needs --bound with --n")
        rows = [conjecture_check(args.n, args.bound)]
    else:
        rows = conjecture_scan()
    exc = [r for r in rows if r["status"] == "exception"]
    if not args.json:
        for r in rows:
            print(f"n={r['n']} computed={r['computed']} conjectured={r['conjectured']} {r['status']}")
    return EXIT_OK, _summary("ledger conjecture", {}, {"rows": rows}, {"exceptions": len(exc)})


RANDOMIZED = {"search-coset"}


def cmd_pipeline(args):
    """Run ``{"seed": s, "steps": [{"cmd": [...argv...]}, ...]}`` in order."""
    with open(args.spec) as fh:
        spec = json.load(fh)
    base = os.path.dirname(os.path.abspath(args.spec))
    seed = spec.get("seed", args.seed)
    results = []
    code = EXIT_OK
    cwd = os.getcwd()
    os.chdir(base)
    try:
        for step in spec["steps"]:
            argv = [str(a) for a in step["cmd"]]
            if argv[0] in RANDOMIZED and "--seed" not in argv:
                if seed is None:
                    raise UsageError(f"step {argv[0]} needs a seed")
                argv += ["--seed", str(seed)]
            c, summ = run(argv)
            results.append(summ)
            if c != EXIT_OK:
                code = c
                break
    finally:
        os.chdir(cwd)
    return code, _summary("pipeline", {"spec": args.spec, "seed": seed}, {"steps": results},
                          {"steps_run": len(results)}, "ok" if code == EXIT_OK else "failed")


# ---------------------------------------------------------------------------
# parser

def build_parser():
    ap = argparse.ArgumentParser(prog="permext", description="Permutation array constructions.")
    ap.add_argument("--json", action="store_true", help="print a JSON summary on stdout")
    ap.add_argument("--threads", type=int, default=None,
                    help=f"thread cap for numba kernels (default: ${_accel.THREADS_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return p

    p = add("gen-group", cmd_gen_group, help="write AGL1/PGL2/PGammaL2 as a PA file")
    p.add_argument("--family", required=True, choices=["agl1", "pgl2", "pgammal2"])
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--labeling", default="natural", choices=["natural", "log"])
    p.add_argument("-o", "--output", required=True)

    p = add("decompose", cmd_decompose, help="split a group file into full-distance blocks")
    p.add_argument("--group", required=True)
    p.add_argument("--mode", choices=["cyclic", "blocks"], default="blocks")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = add("gen-mols", cmd_gen_mols, help="q-1 MOLS of a prime power order")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("-o", "--output")

    p = add("extend", cmd_extend, help="run a partition-and-extension descriptor")
    p.add_argument("--mode", choices=["simple", "sequential", "parallel-r", "parallel-2"])
    p.add_argument("--system", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--full-limit", type=int, default=50_000)
    p.add_argument("--seed", type=int)

    p = add("kron", cmd_kron, help="modified Kronecker product; with --extend or --blockwise a single group file is split into blocks")
    p.add_argument("--left", nargs="+", required=True)
    p.add_argument("--right", nargs="+", required=True)
    p.add_argument("--blockwise", action="store_true")
    p.add_argument("--extend", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("-o", "--output", required=True)

    p = add("search-partition", cmd_search_partition, help="choose position sets")
    p.add_argument("--mode", choices=["greedy", "ilp"], default="greedy")
    p.add_argument("--blocks", nargs="+", required=True)
    p.add_argument("--symbols", default="default", help="'default', JSON list, or JSON file")
    p.add_argument("--export-lp")
    p.add_argument("--export-only", action="store_true")
    p.add_argument("--solver", choices=["builtin", "highs"], default="builtin")
    p.add_argument("--budget", type=float, default=60.0)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")

    p = add("search-coset", cmd_search_coset, help="search coset representatives")
    p.add_argument("--mode", choices=["random", "ilp"], default="random")
    p.add_argument("--group", required=True)
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--budget", type=float, default=60.0, help="seconds")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--max-found", type=int)
    p.add_argument("--existing")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output")

    p = add("verify", cmd_verify, help="check a PA's minimum distance")
    p.add_argument("--pa", required=True)
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--mode", choices=["full", "sampled", "coset"], default="full")
    p.add_argument("--pairs", type=int, default=10**6)
    p.add_argument("--seed", type=int)
    p.add_argument("--group")
    p.add_argument("--reps")

    p = add("ledger", cmd_ledger, help="bounds ledger and conjecture check")
    p.add_argument("action", choices=["record", "compare", "conjecture"])
    p.add_argument("--ledger", default="ledger.csv")
    p.add_argument("--pa")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--bound", type=int)
    p.add_argument("--method", default="")
    p.add_argument("--source", default="constructed", choices=["paper-table", "constructed", "imported"])
    p.add_argument("--artifact")
    p.add_argument("--verified-mode")

    p = add("pipeline", cmd_pipeline, help="run a JSON list of steps")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int)
    return ap


def run(argv):
    """Parse and execute; returns ``(exit code, summary dict)``."""
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify" and args.mode == "sampled" and args.seed is None:
        ap.error("verify --mode sampled requires --seed")
    if args.command == "ledger" and args.action == "record" and args.d is None:
        ap.error("ledger record requires --d")
    if args.threads is not None:
        _accel.set_threads(args.threads)
    try:
        code, summ = args.func(args)
    except UsageError as exc:
        return EXIT_USAGE, _summary(args.command, status="usage-error", metrics={"error": str(exc)})
    except (OSError, ValueError, KeyError) as exc:
        return EXIT_USAGE, _summary(args.command, status="input-error",
                                    metrics={"error": f"{type(exc).__name__}: {exc}"})
    return code, summ


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        code, summ = run(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    wants_json = "--json" in argv
    if wants_json:
        print(json.dumps(_jsonable(summ), sort_keys=True))
    elif summ["status"] not in ("ok",):
        print(f"{summ['command']}: {summ['status']} {summ['metrics'].get('error', '')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
