"""Regenerate the shipped partition-system descriptors and golden PA files.

Partition sets are transcribed into the literals below.  The optional
arguments are a markdown source holding the PGL(2,37) representatives and a
JSON file with twelve 9-row arrays (six inputs, six expected outputs).
"""
import json
import os
import re
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "src", "permext", "data")

EX1_P = [
    [[4, 11, 18, 25, 31, 34], [5, 8, 10, 13, 16, 19, 21], [14, 20, 22, 24, 28, 30], [9, 12, 15, 26, 29, 32], [6, 7, 17, 23, 27, 33], [0, 1, 2, 3, 35, 36]],
    [[1, 12, 23, 25, 36], [0, 11, 13, 22, 24, 35], [8, 9, 10, 17, 18, 26, 27], [4, 5, 6, 7, 19, 20, 28], [14, 15, 16, 32, 33, 34], [2, 3, 21, 29, 30, 31]],
    [[2, 3, 4, 6, 15, 27], [12, 13, 14, 16, 17, 18, 22], [0, 21, 25, 28, 29, 33], [7, 8, 19, 20, 31, 32], [10, 11, 23, 24, 35, 36], [1, 5, 9, 26, 30, 34]],
    [[2, 3, 5, 9, 21, 33], [4, 8, 11, 22, 23, 34], [7, 16, 17, 25, 26, 35], [12, 13, 14, 30, 31, 32], [1, 6, 10, 15, 24, 29], [0, 18, 19, 20, 27, 28, 36]],
    [[2, 5, 13, 18, 26, 29], [12, 19, 21, 27, 34, 36], [6, 7, 8, 9, 10, 11], [4, 14, 15, 25, 31, 35], [0, 3, 16, 17, 20, 23, 33], [1, 22, 24, 28, 30, 32]],
]
EX1_Q = [list(range(0, 7)), list(range(7, 13)), list(range(13, 19)), list(range(19, 25)),
         list(range(25, 31)), list(range(31, 37))]

X = [[0, 4, 8, 13, 19, 22, 26, 30, 35], [1, 5, 9, 15, 18, 23, 27, 31, 34],
     [2, 6, 10, 12, 16, 21, 24, 28, 33, 37], [3, 7, 11, 14, 17, 20, 25, 29, 32, 36]]
Y = [list(range(0, 10)), list(range(10, 20)), list(range(20, 29)), list(range(29, 38))]


def rot(s, k=1):
    return s[k:] + s[:k]


def write(name, obj):
    path = os.path.join(DATA, "systems", name)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def main(reps_md=None, arrays_json=None):
    os.makedirs(os.path.join(DATA, "systems"), exist_ok=True)
    agl4 = {"family": "AGL1", "q": 4}
    write("agl4_simple.json", {
        "mode": "simple", "d": 4,
        "blocks": [{"group": agl4, "cyclic_coset": a} for a in (1, 2, 3)],
        "P": [[0, 2], [1, 3]], "Q": [[0, 1], [2, 3]]})

    agl37 = {"family": "AGL1", "q": 37}
    stage1 = []
    for k in range(5):
        blocks = [{"group": agl37, "cyclic_coset": k * 7 + 1 + j} for j in range(6)]
        blocks.append({"group": agl37, "cyclic_coset": k * 7 + 7})
        stage1.append({"blocks": blocks, "P": EX1_P[k], "Q": EX1_Q})
    stage1.append({"blocks": [{"group": agl37, "cyclic_coset": 36}], "P": [], "Q": []})
    outer_P = EX1_P[0][:4] + [[38], [0, 1, 2, 3, 6, 7, 17, 23, 27, 33, 35, 36, 37]]
    outer_Q = EX1_Q[:4] + [[38], list(range(25, 38))]
    write("agl37_sequential.json", {"mode": "sequential", "d": 37, "stage1": stage1,
                                    "stage2": {"P": outer_P, "Q": outer_Q}})

    if arrays_json:
        with open(arrays_json) as fh:
            arrays = json.load(fh)
        write("z9_parallel3.json", {"mode": "parallel-r", "r": 3, "d": 9,
                                    "blocks": [{"rows": a} for a in arrays[:6]]})
        sys.path.insert(0, os.path.join(HERE, "..", "src"))
        from permext.ledger import write_pa
        from permext.perm import PermutationArray

        os.makedirs(os.path.join(DATA, "golden"), exist_ok=True)
        expected = PermutationArray([row for a in arrays[6:] for row in a])
        write_pa(expected, os.path.join(DATA, "golden", "z9_parallel3_ext.pa"), d=9, source="transcribed")

    if reps_md:
        txt = open(reps_md).read()
        reps = {}
        for name in ("alpha", "beta", "gamma", "delta", "theta"):
            m = re.search(r"\\" + name + r"=([0-9 &]+)", txt)
            reps[name] = [int(t) for t in m.group(1).split("&")]
        pgl = {"family": "PGL2", "q": 37, "labeling": "log"}
        blocks = [{"group": pgl, "rep": reps[k], "name": k} for k in ("alpha", "beta", "gamma", "delta")]
        blocks += [{"group": pgl, "rep": "identity", "name": "id"},
                   {"group": pgl, "rep": reps["theta"], "name": "theta"}]
        write("pgl37_parallel2.json", {"mode": "parallel-2", "d": 34, "blocks": blocks,
                                       "P": X, "Q": Y, "R": rot(X), "S": rot(Y)})


if __name__ == "__main__":
    main(*(sys.argv[1:3] + [None] * (2 - len(sys.argv[1:3]))))
