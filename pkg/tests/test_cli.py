import json
import subprocess
import sys

import numpy as np
import pytest

from permext.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, run
from permext.ledger import read_pa, write_pa
from permext.perm import PermutationArray

SUMMARY_KEYS = {"command", "inputs", "outputs", "metrics", "status"}


def _json(capsys, argv):
    code = main(argv + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_gen_group_and_verify(tmp_path, capsys):
    g = str(tmp_path / "g.pa")
    code, s = _json(capsys, ["gen-group", "--family", "agl1", "--q", "7", "-o", g])
    assert code == EXIT_OK and set(s) == SUMMARY_KEYS and s["status"] == "ok"
    assert len(read_pa(g)) == 42
    code, s = _json(capsys, ["verify", "--pa", g, "--distance", "6"])
    assert code == EXIT_OK and s["metrics"]["passed"]
    code, s = _json(capsys, ["verify", "--pa", g, "--distance", "7"])
    assert code == EXIT_FAIL


def test_verify_sampled_needs_seed(tmp_path):
    g = str(tmp_path / "g.pa")
    assert main(["gen-group", "--family", "agl1", "--q", "5", "-o", g]) == EXIT_OK
    assert main(["verify", "--pa", g, "--distance", "4", "--mode", "sampled"]) == EXIT_USAGE
    assert main(["verify", "--pa", g, "--distance", "4", "--mode", "sampled", "--seed", "1",
                 "--pairs", "50"]) == EXIT_OK


def test_verify_duplicate_row_reports_witness(tmp_path, capsys):
    p = tmp_path / "dup.pa"
    p.write_text("# n=3\n0 1 2\n1 2 0\n0 1 2\n")
    code, s = _json(capsys, ["verify", "--pa", str(p), "--distance", "2"])
    assert code == EXIT_FAIL and s["status"] != "ok"
    p.write_text("# n=3\n0 0 1\n")
    assert main(["verify", "--pa", str(p), "--distance", "2"]) == EXIT_FAIL


def test_missing_file_is_usage_error(tmp_path):
    assert main(["verify", "--pa", str(tmp_path / "nope.pa"), "--distance", "2"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_decompose_and_search_partition(tmp_path, capsys):
    g = str(tmp_path / "g.pa")
    main(["gen-group", "--family", "agl1", "--q", "4", "-o", g])
    d = tmp_path / "blocks"
    code, s = _json(capsys, ["decompose", "--group", g, "--mode", "cyclic", "-o", str(d)])
    assert code == EXIT_OK
    blocks = sorted(str(p) for p in d.iterdir())
    assert len(blocks) == 3
    lp = str(tmp_path / "m.lp")
    code, s = _json(capsys, ["search-partition", "--mode", "ilp", "--blocks", *blocks[:2],
                             "--symbols", "[[0,1],[2,3]]", "--export-lp", lp])
    assert code == EXIT_OK and s["metrics"]["objective"] == 8
    assert open(lp).read().rstrip().endswith("End")
    code, s = _json(capsys, ["search-partition", "--mode", "ilp", "--blocks", *blocks[:2],
                             "--export-only", "--export-lp", lp])
    assert code == EXIT_OK


def test_extend_descriptor(tmp_path, capsys, data_dir):
    out = str(tmp_path / "e.pa")
    code, s = _json(capsys, ["extend", "--system", f"{data_dir}/systems/agl4_simple.json", "-o", out,
                             "--verify"])
    assert code == EXIT_OK
    assert read_pa(out).rows.tolist() == read_pa(f"{data_dir}/golden/agl4_simple_ext.pa").rows.tolist()


def test_kron_and_mols(tmp_path, capsys):
    a, b = str(tmp_path / "a.pa"), str(tmp_path / "b.pa")
    main(["gen-group", "--family", "agl1", "--q", "3", "-o", a])
    main(["gen-group", "--family", "agl1", "--q", "4", "-o", b])
    out = str(tmp_path / "k.pa")
    code, s = _json(capsys, ["kron", "--left", a, "--right", b, "--verify", "-o", out])
    assert code == EXIT_OK and len(read_pa(out)) == 72
    code, s = _json(capsys, ["gen-mols", "--q", "5", "-o", str(tmp_path / "m.txt")])
    assert code == EXIT_OK


def test_search_coset_writes_group_header(tmp_path, capsys):
    g = str(tmp_path / "g.pa")
    main(["gen-group", "--family", "pgl2", "--q", "5", "-o", g])
    out = str(tmp_path / "reps.pa")
    code, s = _json(capsys, ["search-coset", "--group", g, "--distance", "2", "--trials", "300",
                             "--seed", "3", "-o", out])
    assert code == EXIT_OK
    reps = read_pa(out)
    assert len(reps) == 5 and reps.meta["seed"] == 3
    assert main(["search-coset", "--group", g, "--distance", "2"]) == EXIT_USAGE


def test_ledger_commands(tmp_path, capsys):
    pa = tmp_path / "x.pa"
    write_pa(PermutationArray(np.array([[0, 1, 2], [1, 2, 0], [2, 0, 1]])), pa)
    led = str(tmp_path / "l.csv")
    code, s = _json(capsys, ["ledger", "record", "--ledger", led, "--pa", str(pa), "--d", "3",
                             "--method", "cyclic"])
    assert code == EXIT_OK
    code, s = _json(capsys, ["ledger", "compare", "--ledger", led])
    assert code == EXIT_OK
    code, s = _json(capsys, ["ledger", "conjecture"])
    assert s["metrics"]["exceptions"] == 4
    assert main(["ledger", "record", "--ledger", led, "--pa", str(pa)]) == EXIT_USAGE


def test_pipeline_is_deterministic(tmp_path):
    spec = {"seed": 5, "steps": [
        {"cmd": ["gen-group", "--family", "pgl2", "--q", "5", "-o", "g.pa"]},
        {"cmd": ["search-coset", "--group", "g.pa", "--distance", "2", "--trials", "200", "-o", "r.pa"]},
        {"cmd": ["verify", "--pa", "g.pa", "--distance", "4"]},
    ]}
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        (d / "spec.json").write_text(json.dumps(spec))
        code, s = run(["pipeline", "--spec", str(d / "spec.json")])
        assert code == EXIT_OK and s["metrics"]["steps_run"] == 3
        outs.append((d / "r.pa").read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point(tmp_path):
    g = str(tmp_path / "g.pa")
    r = subprocess.run([sys.executable, "-m", "permext.cli", "--json", "gen-group", "--family", "agl1",
                        "--q", "5", "-o", g], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["outputs"]


@pytest.mark.parametrize("argv", [[], ["verify"], ["gen-group", "--family", "xx", "--q", "3", "-o", "x"]])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_kron_extend_from_group_files(tmp_path, capsys):
    a, b = str(tmp_path / "a.pa"), str(tmp_path / "b.pa")
    main(["gen-group", "--family", "agl1", "--q", "4", "-o", a])
    main(["gen-group", "--family", "agl1", "--q", "5", "-o", b])
    code, s = _json(capsys, ["kron", "--left", a, "--right", b, "--extend", "--verify",
                             "-o", str(tmp_path / "k.pa")])
    assert code == EXIT_OK and s["metrics"]["bound"] == 60 and s["metrics"]["verify"]["passed"]
    code, s = _json(capsys, ["kron", "--left", a, "--right", b, "--blockwise", "--verify",
                             "-o", str(tmp_path / "kb.pa")])
    assert code == EXIT_OK and s["metrics"]["k"] == 3 and s["metrics"]["measured"] == 19
