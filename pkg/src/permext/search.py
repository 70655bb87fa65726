"""Choosing partitions and coset representatives.

* :func:`greedy_partition` grows a position partition one position at a time.
* :func:`ilp_partition_model` / :func:`ilp_coset_model` build 0/1 programs.
* :func:`solve_ilp` solves them with a small exact branch-and-bound (or
  HiGHS through scipy when asked), :func:`export_lp` / :func:`parse_lp`
  move them through the CPLEX LP text format.
* :func:`random_coset_search` draws random representatives and keeps those
  far enough from the group and from each other.
"""

import heapq
import re
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .perm import as_pa, coset_min_distance

SENSES = ("<=", "=", ">=")
LP_LINE_MAX = 255


@dataclass
class SearchConfig:
    seed: int = 0
    trial_budget: int = 1_000_000
    time_budget: float = 60.0
    solver: str = "builtin"  # builtin | export-only | highs

    def __post_init__(self):
        if self.trial_budget <= 0 or self.time_budget <= 0:
            raise ValueError("budgets must be positive")
        if self.solver not in ("builtin", "export-only", "highs"):
            raise ValueError(f"unknown solver {self.solver!r}")


# ---------------------------------------------------------------------------
# partitions

def default_symbol_partition(n: int, k: int):
    """``Q_i = {ik, ..., ik + k - 1}``; symbols from ``k^2`` on join the last set.

    When ``k^2 > n`` the fixed-width scheme does not fit, so ``Z_n`` is cut
    into ``k`` contiguous runs of near-equal size instead.
    """
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k * k <= n:
        Q = [list(range(i * k, (i + 1) * k)) for i in range(k)]
        Q[-1] += list(range(k * k, n))
        return Q
    return [list(map(int, r)) for r in np.array_split(np.arange(n), k)]


def trivial_partition(n: int, k: int):
    """Baseline position partition: the fixed symbol scheme reused for positions."""
    return default_symbol_partition(n, k)


def contiguous_partition(n: int, k: int):
    """``k`` contiguous runs of near-equal length."""
    return [list(map(int, r)) for r in np.array_split(np.arange(n), k)]


def partition_coverage(blocks, P, Q) -> List[int]:
    """Covered-row count per block for position sets ``P`` and symbol sets ``Q``."""
    out = []
    for b, p, q in zip(blocks, P, Q):
        rows = as_pa(b).rows
        if not p or not q or len(rows) == 0:
            out.append(0)
            continue
        qm = np.zeros(rows.shape[1], bool)
        qm[list(q)] = True
        out.append(int(qm[rows[:, sorted(p)]].any(axis=1).sum()))
    return out


def is_partition(sets, n) -> bool:
    flat = [x for s in sets for x in s]
    return len(flat) == len(set(flat)) == n and set(flat) == set(range(n))


def greedy_partition(blocks, Q=None, cfg: Optional[SearchConfig] = None):
    """Assign positions ``0..n-1`` in order to the block gaining the most new covers.

    A position ``r`` goes to the ``i`` maximising the number of still
    uncovered rows ``sigma`` of block ``i`` with ``sigma(r)`` in ``Q_i``;
    ties go to the smallest ``i``.
    """
    blocks = [as_pa(b) for b in blocks]
    k = len(blocks)
    n = blocks[0].n
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    Q = default_symbol_partition(n, k) if Q is None else [list(q) for q in Q]
    if len(Q) != k:
        raise ValueError("need one symbol set per block")
    qmasks = []
    for q in Q:
        m = np.zeros(n, bool)
        m[list(q)] = True
        qmasks.append(m)
    hit = [qm[b.rows] for qm, b in zip(qmasks, blocks)]  # (rows, n) per block
    alive = [np.ones(len(b), bool) for b in blocks]
    P = [[] for _ in range(k)]
    for r in range(n):
        gains = [int((h[:, r] & a).sum()) for h, a in zip(hit, alive)]
        best = int(np.argmax(gains))
        P[best].append(r)
        alive[best] &= ~hit[best][:, r]
    assert is_partition(P, n)
    return P


def rotate_partition(base, k: Optional[int] = None):
    """``k`` cyclic rotations of a list of sets (rotation ``t`` starts at set ``t``)."""
    base = [list(s) for s in base]
    k = len(base) if k is None else k
    return [base[t % len(base):] + base[:t % len(base)] for t in range(k)]


# ---------------------------------------------------------------------------
# 0/1 programs

class IlpModel:
    """Binary program: named variables, integer linear constraints, max objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.var_names: List[str] = []
        self.var_index: Dict[str, int] = {}
        self.constraints = []  # (name, {var index: coef}, sense, rhs)
        self.objective: Dict[int, int] = {}
        self.meta = {}

    @property
    def num_vars(self):
        return len(self.var_names)

    def add_var(self, name: str) -> int:
        if name in self.var_index:
            raise ValueError(f"duplicate variable {name}")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name):
            raise ValueError(f"bad variable name {name!r}")
        self.var_index[name] = len(self.var_names)
        self.var_names.append(name)
        return self.var_index[name]

    def _terms(self, terms):
        out = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for key, coef in items:
            idx = self.var_index[key] if isinstance(key, str) else int(key)
            if not 0 <= idx < self.num_vars:
                raise KeyError(f"undeclared variable {key!r}")
            if int(coef) != coef:
                raise ValueError("coefficients must be integers")
            if coef:
                out[idx] = out.get(idx, 0) + int(coef)
        return {k: v for k, v in out.items() if v}

    def add_constraint(self, terms, sense: str, rhs, name: Optional[str] = None):
        if sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        if int(rhs) != rhs:
            raise ValueError("rhs must be an integer")
        name = name or f"r{len(self.constraints)}"
        self.constraints.append((name, self._terms(terms), sense, int(rhs)))

    def set_objective(self, terms):
        self.objective = self._terms(terms)

    def dense(self):
        """``(c, A, lb, ub)`` with ``lb <= A x <= ub``."""
        v = self.num_vars
        c = np.zeros(v, np.int64)
        for k, a in self.objective.items():
            c[k] = a
        A = np.zeros((len(self.constraints), v), np.int64)
        lb = np.full(len(self.constraints), -np.inf)
        ub = np.full(len(self.constraints), np.inf)
        for r, (_, terms, sense, rhs) in enumerate(self.constraints):
            for k, a in terms.items():
                A[r, k] = a
            if sense in ("<=", "="):
                ub[r] = rhs
            if sense in (">=", "="):
                lb[r] = rhs
        return c, A, lb, ub

    def evaluate(self, x):
        c, A, lb, ub = self.dense()
        x = np.asarray(x, dtype=np.int64)
        act = A @ x
        return int(c @ x), bool(np.all(act >= lb) and np.all(act <= ub))


@dataclass
class IlpResult:
    status: str  # optimal | infeasible | feasible-not-proven | no-solution-in-budget | exported
    objective: Optional[int] = None
    assignment: Optional[np.ndarray] = None
    solutions: List[np.ndarray] = field(default_factory=list)
    nodes: int = 0
    elapsed: float = 0.0
    solver: str = "builtin"

    def value(self, model: IlpModel, name: str) -> int:
        return int(self.assignment[model.var_index[name]])


def ilp_partition_model(blocks, Q) -> IlpModel:
    """Coverage-maximising position partition as a 0/1 program.

    Variables ``b_i_p`` (position ``p`` goes to block ``i``) and ``c_i_j``
    (row ``j`` of block ``i`` is covered).  Constraints: each position in
    exactly one block; ``c_i_j`` may be 1 only if some assigned position of
    block ``i`` holds a ``Q_i`` symbol in that row; all ``n`` positions used.
    """
    blocks = [as_pa(b) for b in blocks]
    k = len(blocks)
    n = blocks[0].n
    if len(Q) != k:
        raise ValueError("need one symbol set per block")
    m = IlpModel("partition")
    for i in range(k):
        for p in range(n):
            m.add_var(f"b_{i}_{p}")
    for i, b in enumerate(blocks):
        for j in range(len(b)):
            m.add_var(f"c_{i}_{j}")
    m.set_objective({f"c_{i}_{j}": 1 for i, b in enumerate(blocks) for j in range(len(b))})
    for p in range(n):
        m.add_constraint({f"b_{i}_{p}": 1 for i in range(k)}, "=", 1, name=f"assign_{p}")
    for i, b in enumerate(blocks):
        qm = np.zeros(n, bool)
        qm[list(Q[i])] = True
        ind = qm[b.rows]  # ind[j, p] = 1 if sigma_j[p] in Q_i
        for j in range(len(b)):
            terms = {f"b_{i}_{p}": 1 for p in np.flatnonzero(ind[j])}
            terms[f"c_{i}_{j}"] = -1
            m.add_constraint(terms, ">=", 0, name=f"cover_{i}_{j}")
    m.add_constraint({f"b_{i}_{p}": 1 for i in range(k) for p in range(n)}, "=", n, name="all_used")
    m.meta = {"kind": "partition", "k": k, "n": n}
    return m


def decode_partition(model: IlpModel, x):
    k, n = model.meta["k"], model.meta["n"]
    return [[p for p in range(n) if x[model.var_index[f"b_{i}_{p}"]]] for i in range(k)]


def ilp_coset_model(G, d_target: int) -> IlpModel:
    """Representative ``pi`` with at most ``n - d`` agreements with every ``sigma`` in ``G``."""
    rows = G.rows if hasattr(G, "rows") else np.asarray(G)
    n = rows.shape[1]
    m = IlpModel("coset")
    for i in range(n):
        for j in range(n):
            m.add_var(f"x_{i}_{j}")
    m.set_objective({f"x_{i}_{j}": 1 for i in range(n) for j in range(n)})
    for i in range(n):
        m.add_constraint({f"x_{i}_{j}": 1 for j in range(n)}, "=", 1, name=f"pos_{i}")
    for j in range(n):
        m.add_constraint({f"x_{i}_{j}": 1 for i in range(n)}, "=", 1, name=f"sym_{j}")
    for s, sigma in enumerate(rows):
        m.add_constraint({f"x_{i}_{int(sigma[i])}": 1 for i in range(n)}, "<=", n - int(d_target),
                         name=f"agree_{s}")
    m.meta = {"kind": "coset", "n": n, "d": int(d_target)}
    return m


def decode_permutation(model: IlpModel, x) -> np.ndarray:
    n = model.meta["n"]
    X = np.asarray(x).reshape(n, n)
    return X.argmax(axis=1)


# ---------------------------------------------------------------------------
# builtin branch and bound

class _Propagator:
    def __init__(self, A, lb, ub):
        self.A = A
        self.lb = lb
        self.ub = ub
        self.pos = A > 0
        self.neg = A < 0
        self.nz = A != 0

    def run(self, state):
        """Fix forced variables in place; return False on infeasibility."""
        A, lb, ub = self.A, self.lb, self.ub
        if A.shape[0] == 0:
            return True
        while True:
            free = state < 0
            val = np.where(free, 0, state)
            fixed_act = A @ val
            Af = A * free
            minact = fixed_act + np.minimum(Af, 0).sum(axis=1)
            maxact = fixed_act + np.maximum(Af, 0).sum(axis=1)
            if np.any(minact > ub) or np.any(maxact < lb):
                return False
            live = self.nz & free[None, :]
            mn, mx = minact[:, None], maxact[:, None]
            l_, u_ = lb[:, None], ub[:, None]
            f0 = live & ((self.pos & (mn + A > u_)) | (self.neg & (mx + A < l_)))
            f1 = live & ((self.pos & (mx - A < l_)) | (self.neg & (mn - A > u_)))
            z = f0.any(axis=0)
            o = f1.any(axis=0)
            if np.any(z & o):
                return False
            if not (z.any() or o.any()):
                return True
            state[z] = 0
            state[o] = 1


def _builtin_solve(model: IlpModel, cfg: SearchConfig, all_optimal=False, max_solutions=100_000):
    t0 = time.perf_counter()
    c, A, lb, ub = model.dense()
    v = model.num_vars
    prop = _Propagator(A, lb, ub)
    # branch on structural (zero-objective) variables first, then declaration order
    order = np.lexsort((np.arange(v), c != 0))

    def bound(state):
        free = state < 0
        return int(c[~free] @ state[~free] + np.maximum(c[free], 0).sum())

    root = np.full(v, -1, np.int8)
    if not prop.run(root):
        return IlpResult("infeasible", nodes=1, elapsed=time.perf_counter() - t0)
    heap = [(-bound(root), 0, root)]
    counter = 1
    best_val, best_x, sols = None, None, []
    nodes = 0
    proven = True
    while heap:
        negb, _, state = heapq.heappop(heap)
        b = -negb
        if best_val is not None and (b < best_val or (b == best_val and not all_optimal)):
            if not all_optimal or b < best_val:
                continue
        nodes += 1
        if nodes > cfg.trial_budget or time.perf_counter() - t0 > cfg.time_budget:
            proven = False
            break
        free = np.flatnonzero(state[order] < 0)
        if free.size == 0:
            x = state.astype(np.int64)
            val = int(c @ x)
            if best_val is None or val > best_val:
                best_val, best_x, sols = val, x, [x]
                if not all_optimal:
                    break
            elif val == best_val and all_optimal and len(sols) < max_solutions:
                sols.append(x)
            continue
        var = order[free[0]]
        for value in (1, 0):
            child = state.copy()
            child[var] = value
            if prop.run(child):
                cb = bound(child)
                if best_val is None or cb > best_val or (all_optimal and cb >= best_val):
                    heapq.heappush(heap, (-cb, counter, child))
                    counter += 1
    elapsed = time.perf_counter() - t0
    if best_x is None:
        return IlpResult("infeasible" if proven else "no-solution-in-budget", nodes=nodes, elapsed=elapsed)
    return IlpResult("optimal" if proven else "feasible-not-proven", best_val, best_x,
                     sols if all_optimal else [best_x], nodes, elapsed)


def _highs_solve(model: IlpModel, cfg: SearchConfig):
    from scipy.optimize import Bounds, LinearConstraint, milp

    t0 = time.perf_counter()
    c, A, lb, ub = model.dense()
    cons = [LinearConstraint(A, lb, ub)] if A.shape[0] else []
    res = milp(-c.astype(float), constraints=cons, integrality=np.ones(model.num_vars),
               bounds=Bounds(0, 1), options={"time_limit": cfg.time_budget, "disp": False})
    elapsed = time.perf_counter() - t0
    if res.status == 2:
        return IlpResult("infeasible", elapsed=elapsed, solver="highs")
    if res.x is None:
        return IlpResult("no-solution-in-budget", elapsed=elapsed, solver="highs")
    x = np.round(res.x).astype(np.int64)
    status = "optimal" if res.status == 0 else "feasible-not-proven"
    return IlpResult(status, int(c @ x), x, [x], elapsed=elapsed, solver="highs")


def solve_ilp(model: IlpModel, cfg: Optional[SearchConfig] = None, all_optimal: bool = False) -> IlpResult:
    """Solve a binary program; ``all_optimal`` lists every optimal assignment (builtin only)."""
    cfg = cfg or SearchConfig()
    if cfg.solver == "export-only":
        return IlpResult("exported", solver="export-only")
    if cfg.solver == "highs" and not all_optimal:
        return _highs_solve(model, cfg)
    return _builtin_solve(model, cfg, all_optimal)


def brute_force_ilp(model: IlpModel):
    """Exhaustive enumeration for small models: ``(best value or None, list of optimal x)``."""
    v = model.num_vars
    if v > 22:
        raise ValueError("too many variables for enumeration")
    c, A, lb, ub = model.dense()
    X = ((np.arange(2**v)[:, None] >> np.arange(v)) & 1).astype(np.int64)
    ok = np.ones(X.shape[0], bool)
    if A.shape[0]:
        act = X @ A.T
        ok = np.all((act >= lb) & (act <= ub), axis=1)
    if not ok.any():
        return None, []
    vals = X @ c
    best = vals[ok].max()
    return int(best), [X[i] for i in np.flatnonzero(ok & (vals == best))]


# ---------------------------------------------------------------------------
# LP text format

def _lp_terms(terms: dict, names):
    toks = []
    for k in sorted(terms):
        a = terms[k]
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = names[k] if mag == 1 else f"{mag} {names[k]}"
        if not toks:
            toks.append(body if sign == "+" else f"- {body}")
        else:
            toks.append(f"{sign} {body}")
    return toks


def _wrap(head, toks, tail=""):
    lines, cur = [], head
    for t in toks + ([tail] if tail else []):
        if len(cur) + 1 + len(t) > LP_LINE_MAX:
            lines.append(cur)
            cur = "   " + t
        else:
            cur = f"{cur} {t}" if cur else t
    lines.append(cur)
    return lines


def export_lp(model: IlpModel) -> str:
    names = model.var_names
    out = [f"\\ {model.name}", "Maximize"]
    obj = _lp_terms(model.objective, names) or ["0"]
    out += _wrap(" obj:", obj)
    out.append("Subject To")
    for name, terms, sense, rhs in model.constraints:
        toks = _lp_terms(terms, names) or ["0"]
        out += _wrap(f" {name}:", toks, f"{sense} {rhs}")
    if names:
        out.append("Binary")
        out += _wrap("", names)
    out.append("End")
    return "\n".join(out) + "\n"


_SECTION = {
    "maximize": "obj", "maximise": "obj", "max": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "binary": "bin", "binaries": "bin", "bin": "bin",
    "general": "gen", "generals": "gen", "end": "end",
}


def parse_lp(text: str) -> IlpModel:
    """Read the subset of LP format :func:`export_lp` writes (maximise, binaries)."""
    model = IlpModel("parsed")
    section = None
    buckets = {"obj": [], "st": [], "bin": []}
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTION:
            section = _SECTION[key]
            if section == "end":
                break
            continue
        if key.startswith("minimize") or key.startswith("minimise"):
            raise ValueError("only maximisation models are supported")
        if section in buckets:
            buckets[section].append(line)
    for name in " ".join(buckets["bin"]).split():
        model.add_var(name)

    def ensure(name):
        if name not in model.var_index:
            model.add_var(name)
        return model.var_index[name]

    def parse_expr(tokens):
        terms, sign, coef = {}, 1, None
        for t in tokens:
            if t in "+-":
                sign = -1 if t == "-" else 1
            elif re.fullmatch(r"\d+", t):
                coef = int(t)
            else:
                idx = ensure(t)
                terms[idx] = terms.get(idx, 0) + sign * (1 if coef is None else coef)
                sign, coef = 1, None
        return terms

    obj_toks = " ".join(buckets["obj"]).replace(":", ": ").split()
    if obj_toks and obj_toks[0].endswith(":"):
        obj_toks = obj_toks[1:]
    obj_toks = [t for t in obj_toks if t != "0"]
    model.objective = parse_expr(obj_toks)

    toks = " ".join(buckets["st"]).replace(":", ": ").split()
    i, name, cur = 0, None, []
    while i < len(toks):
        t = toks[i]
        if t.endswith(":"):
            name = t[:-1]
        elif t in ("<=", "=<", ">=", "=>", "=", "<", ">"):
            sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(t, t)
            rhs = int(toks[i + 1])
            i += 1
            terms = parse_expr([x for x in cur if x != "0"])
            model.constraints.append((name or f"r{len(model.constraints)}", terms, sense, rhs))
            name, cur = None, []
        else:
            cur.append(t)
        i += 1
    return model


# ---------------------------------------------------------------------------
# coset search

def random_coset_search(G, d_target: int, existing=(), cfg: Optional[SearchConfig] = None,
                        max_found: Optional[int] = None):
    """Random representatives ``rho`` whose coset ``G rho`` keeps distance ``d_target``
    from ``G`` itself, from every coset in ``existing`` and from earlier finds.

    Trial ``t`` draws its permutation from ``default_rng(seed + t)`` so a
    run is reproducible and trials could be farmed out independently.
    """
    cfg = cfg or SearchConfig()
    rows = G.rows if hasattr(G, "rows") else np.asarray(G)
    n = rows.shape[1]
    ident = np.arange(n)
    accepted = [np.asarray(r, dtype=np.int64) for r in existing]
    found = []
    t0 = time.perf_counter()
    for t in range(cfg.trial_budget):
        if time.perf_counter() - t0 > cfg.time_budget:
            break
        rho = np.random.default_rng(cfg.seed + t).permutation(n)
        if coset_min_distance(rows, ident, rho) < d_target:
            continue
        if any(coset_min_distance(rows, r, rho) < d_target for r in accepted):
            continue
        accepted.append(rho)
        found.append(rho)
        if max_found is not None and len(found) >= max_found:
            break
    return found


def filter_representatives(G, reps, d_target: int):
    """Check candidate representatives against ``G`` and each other.

    Returns a dict with each representative's distance to ``G``, the pairwise
    coset distance matrix and an overall ``passed`` flag.
    """
    rows = G.rows if hasattr(G, "rows") else np.asarray(G)
    reps = [np.asarray(r, dtype=np.int64) for r in reps]
    n = rows.shape[1]
    to_group = [coset_min_distance(rows, np.arange(n), r) for r in reps]
    k = len(reps)
    pair = np.full((k, k), n, dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            pair[i, j] = pair[j, i] = coset_min_distance(rows, reps[i], reps[j])
    min_pair = int(pair[np.triu_indices(k, 1)].min()) if k > 1 else n
    return {"to_group": to_group, "pairwise": pair, "min_to_group": min(to_group, default=n),
            "min_pairwise": min_pair,
            "passed": min(to_group, default=n) >= d_target and min_pair >= d_target}


def coset_distance_to_group(G, rho) -> int:
    rows = G.rows if hasattr(G, "rows") else np.asarray(G)
    return coset_min_distance(rows, np.arange(rows.shape[1]), rho)

