"""PA text files, the bounds ledger, embedded published bounds, conjecture check.

PA text format::

    # n=5 d=4 count=12
    # family=AGL1
    4 1 2 3 0
    ...

Header lines start with ``#`` and hold ``key=value`` tokens; the first one
written is always ``n``/``d``/``count``.  Rows are space-separated decimal
symbols, LF line endings, no trailing spaces.  Writing what was read yields
the same bytes.
"""

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Dict, Optional

import numpy as np

from .field import is_prime_power
from .perm import PermutationArray, PermutationError

LEDGER_COLUMNS = ["n", "d", "bound", "method", "source", "artifact", "verified_mode"]
SOURCES = ("paper-table", "constructed", "imported")


class PAFormatError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# ---------------------------------------------------------------------------
# PA text format

def _fmt_value(v):
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, separators=(",", ":"))
    s = str(v)
    if not s or any(c.isspace() for c in s) or "=" in s:
        return json.dumps(s)
    return s


def _parse_value(s):
    if s[:1] in '[{"':
        try:
            return json.loads(s)
        except json.JSONDecodeError:
            return s
    try:
        return int(s)
    except ValueError:
        return s


def _split_tokens(body):
    """Split ``k=v k2=v2`` where values may be JSON strings containing spaces."""
    out, i = [], 0
    while i < len(body):
        while i < len(body) and body[i] == " ":
            i += 1
        if i >= len(body):
            break
        eq = body.find("=", i)
        if eq < 0:
            raise ValueError(f"header token without '=': {body[i:]!r}")
        key = body[i:eq]
        j = eq + 1
        if j < len(body) and body[j] == '"':
            dec = json.JSONDecoder()
            val, end = dec.raw_decode(body, j)
            out.append((key, json.dumps(val)))
            i = end
        else:
            end = body.find(" ", j)
            end = len(body) if end < 0 else end
            out.append((key, body[j:end]))
            i = end
    return out


def format_pa(A: PermutationArray, d: Optional[int] = None, **meta) -> str:
    A = A if isinstance(A, PermutationArray) else PermutationArray(A)
    info = {**A.meta, **meta}
    if d is None:
        d = info.get("d")
    info.pop("d", None)
    info.pop("n", None)
    info.pop("count", None)
    first = f"# n={A.n}" + (f" d={int(d)}" if d is not None else "") + f" count={len(A)}"
    lines = [first]
    for k in sorted(info):
        if info[k] is None:
            continue
        lines.append(f"# {k}={_fmt_value(info[k])}")
    buf = io.StringIO()
    buf.write("\n".join(lines) + "\n")
    if len(A):
        np.savetxt(buf, A.rows, fmt="%d", delimiter=" ")
    return buf.getvalue()


def write_pa(A: PermutationArray, path, d: Optional[int] = None, **meta):
    text = format_pa(A, d, **meta)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def parse_pa(text: str, validate: bool = True) -> PermutationArray:
    meta = {}
    rows = []
    width = None
    for ln, line in enumerate(text.split("\n"), start=1):
        if line.endswith("\r"):
            raise PAFormatError("CR line ending", ln)
        if not line.strip():
            continue
        if line.startswith("#"):
            try:
                for k, v in _split_tokens(line[1:].strip()):
                    meta[k] = _parse_value(v)
            except ValueError as exc:
                raise PAFormatError(str(exc), ln) from None
            continue
        try:
            row = [int(t) for t in line.split(" ")]
        except ValueError:
            raise PAFormatError(f"non-integer symbol in {line!r}", ln) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise PAFormatError(f"row has {len(row)} symbols, expected {width}", ln)
        if validate and sorted(row) != list(range(width)):
            raise PAFormatError("row is not a permutation (bijectivity)", ln)
        rows.append(row)
    n = meta.get("n", width)
    if width is not None and n != width:
        raise PAFormatError(f"header says n={n} but rows have {width} symbols")
    if "count" in meta and meta["count"] != len(rows):
        raise PAFormatError(f"header says count={meta['count']} but found {len(rows)} rows")
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), n if n is not None else 0)
    try:
        pa = PermutationArray(arr, n, meta={k: v for k, v in meta.items() if k not in ("n", "count")},
                              validate=validate)
    except PermutationError as exc:
        raise PAFormatError(str(exc)) from None
    return pa


def read_pa(path, validate: bool = True) -> PermutationArray:
    with open(path, newline="") as fh:
        return parse_pa(fh.read(), validate)


# ---------------------------------------------------------------------------
# ledger

@dataclass
class BoundRecord:
    n: int
    d: int
    bound: int
    method: str = ""
    source: str = "constructed"
    artifact: Optional[str] = None
    verified_mode: Optional[str] = None

    def __post_init__(self):
        self.n, self.d, self.bound = int(self.n), int(self.d), int(self.bound)
        if self.bound < 1:
            raise ValueError("bound must be >= 1")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if self.source == "constructed" and not (self.artifact and self.verified_mode):
            raise ValueError("a constructed bound needs an artifact path and a verification mode")


class Ledger:
    """Best known bound per ``(n, d)`` plus an append-only history."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.current: Dict[tuple, BoundRecord] = {}
        self.history = []
        if path and os.path.exists(path):
            self._load(path)

    @property
    def history_path(self):
        return None if self.path is None else os.path.splitext(self.path)[0] + ".history.jsonl"

    def get(self, n, d) -> Optional[BoundRecord]:
        return self.current.get((int(n), int(d)))

    def record_bound(self, rec: BoundRecord) -> "Ledger":
        self.history.append(asdict(rec))
        old = self.current.get((rec.n, rec.d))
        if old is None or rec.bound > old.bound:
            self.current[(rec.n, rec.d)] = rec
        if self.path:
            self.save()
        return self

    def records(self):
        return [self.current[k] for k in sorted(self.current)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LEDGER_COLUMNS)
        for r in self.records():
            w.writerow([r.n, r.d, r.bound, r.method, r.source, r.artifact or "", r.verified_mode or ""])
        return buf.getvalue()

    def save(self, path: Optional[str] = None):
        path = path or self.path
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
        hist = os.path.splitext(path)[0] + ".history.jsonl"
        with open(hist, "w") as fh:
            for h in self.history:
                fh.write(json.dumps(h, sort_keys=True) + "\n")

    def _load(self, path):
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rec = BoundRecord(row["n"], row["d"], row["bound"], row["method"], row["source"],
                                  row["artifact"] or None, row["verified_mode"] or None)
                self.current[(rec.n, rec.d)] = rec
        hist = self.history_path
        if hist and os.path.exists(hist):
            with open(hist) as fh:
                self.history = [json.loads(line) for line in fh if line.strip()]

    @classmethod
    def from_csv(cls, text: str) -> "Ledger":
        led = cls()
        for row in csv.DictReader(io.StringIO(text)):
            rec = BoundRecord(row["n"], row["d"], row["bound"], row["method"], row["source"],
                              row["artifact"] or None, row["verified_mode"] or None)
            led.current[(rec.n, rec.d)] = rec
        return led


# ---------------------------------------------------------------------------
# embedded published data

def _data_text(name):
    return resources.files("permext").joinpath("data").joinpath(name).read_text()


def published_bounds():
    """Rows of the shipped bound tables as dicts with int fields."""
    out = []
    for row in csv.DictReader(io.StringIO(_data_text("published_bounds.csv"))):
        for k in ("n", "d", "prev", "new"):
            row[k] = int(row[k])
        out.append(row)
    return out


def published_new_bound(n, d) -> Optional[int]:
    best = None
    for row in published_bounds():
        if row["n"] == n and row["d"] == d:
            best = max(best or 0, row["new"])
    return best


def compare_to_paper(ledger: Ledger):
    """Per constructed bound: ``match``, ``exceed``, ``fall-short`` or ``absent``."""
    report = []
    for rec in ledger.records():
        if rec.source != "constructed":
            continue
        pub = published_new_bound(rec.n, rec.d)
        if pub is None:
            verdict = "absent"
        elif rec.bound == pub:
            verdict = "match"
        elif rec.bound > pub:
            verdict = "exceed"
        else:
            verdict = "fall-short"
        report.append({"n": rec.n, "d": rec.d, "bound": rec.bound, "published": pub, "verdict": verdict})
    return report


# ---------------------------------------------------------------------------
# MOLS counts and the conjecture

@dataclass
class MolsCountEntry:
    n: int
    N_lower: int
    provenance: str


def macneish_bound(n: int) -> int:
    """``min(q - 1)`` over the prime-power factors ``q`` of ``n``."""
    if n < 2:
        return 0
    best, x, p = None, n, 2
    while x > 1:
        if p * p > x:
            q = x
            x = 1
        elif x % p == 0:
            q = 1
            while x % p == 0:
                x //= p
                q *= p
        else:
            p += 1
            continue
        best = q - 1 if best is None else min(best, q - 1)
        p += 1
    return best


def embedded_mols_counts() -> Dict[int, MolsCountEntry]:
    out = {}
    for row in csv.DictReader(io.StringIO(_data_text("mols_counts.csv"))):
        e = MolsCountEntry(int(row["n"]), int(row["N_lower"]), row["provenance"])
        out[e.n] = e
    return out


def mols_count(n: int, table=None) -> MolsCountEntry:
    """Best available lower bound on ``N(n)``: computed for prime powers,
    otherwise the larger of MacNeish and any embedded entry."""
    if is_prime_power(n):
        return MolsCountEntry(n, n - 1, "prime power (computed)")
    table = embedded_mols_counts() if table is None else table
    mac = MolsCountEntry(n, macneish_bound(n), "MacNeish (computed)")
    emb = table.get(n)
    if emb is not None and emb.N_lower >= mac.N_lower:
        return emb
    return mac


def conjecture_rhs(n: int, N_prev: int) -> int:
    m = n - 1
    return m * min(math.isqrt(m), N_prev)


def conjecture_check(n: int, bound: int, mols_counts=None, require_embedded: bool = False):
    """Compare a bound for ``M(n, n-1)`` with ``(n-1) * min(floor(sqrt(n-1)), N(n-1))``."""
    table = embedded_mols_counts() if mols_counts is None else mols_counts
    m = n - 1
    if require_embedded and not is_prime_power(m) and m not in table:
        raise KeyError(f"no N({m}) entry")
    entry = mols_count(m, table)
    rhs = conjecture_rhs(n, entry.N_lower)
    return {"n": n, "d": m, "computed": int(bound), "conjectured": rhs,
            "N": entry.N_lower, "N_source": entry.provenance,
            "status": "holds" if bound >= rhs else "exception"}


def conjecture_exception_rows():
    rows = []
    for row in csv.DictReader(io.StringIO(_data_text("conjecture_exceptions.csv"))):
        rows.append({k: (int(v) if k != "source" else v) for k, v in row.items()})
    return rows


def conjecture_scan(rows=None):
    """Run the check on ``(n, computed)`` rows; defaults to the shipped exception table."""
    rows = conjecture_exception_rows() if rows is None else rows
    return [conjecture_check(r["n"], r["computed"]) for r in rows]
