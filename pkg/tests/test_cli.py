import json

import pytest

from nlbox.cli import main, parse_bits, parse_model
from nlbox.correlations import LocalDeterministic, NoisyPR, PerfectPR, Quantum


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_model():
    assert parse_model("pr") == PerfectPR()
    assert parse_model("noisy-pr:0.9") == NoisyPR(0.9)
    assert parse_model("local:1011") == LocalDeterministic(1, 0, 1, 1)
    assert parse_model("quantum:canonical") == Quantum.canonical()
    assert parse_model("quantum:0,1.5,0.5,-0.5") == Quantum(0, 1.5, 0.5, -0.5)


def test_parse_bits_msb_first():
    assert parse_bits("110", 3, "x") == [0, 1, 1]


def test_chsh_pr(capsys):
    code, out, _ = run(capsys, "chsh", "--model", "pr", "--trials", "100000", "--seed", "7")
    assert code == 0
    assert "score 4.0 " in out


def test_chsh_quantum_exact(capsys):
    code, out, _ = run(capsys, "chsh", "--model", "quantum:canonical", "--exact")
    assert code == 0
    assert out.startswith("exact score 3.414213562")


def test_chsh_local_exact(capsys):
    code, out, _ = run(capsys, "chsh", "--model", "local:0000", "--exact")
    assert out.startswith("exact score 3.0 (3)")


def test_chsh_report_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["chsh", "--model", "noisy-pr:0.75", "--trials", "5000", "--seed", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["exact_score_text"] == "3"
    assert doc["trials_per_setting"] == 5000


@pytest.mark.parametrize("argv", [
    ["chsh", "--model", "bogus"],
    ["chsh", "--model", "noisy-pr:1.5"],
    ["chsh", "--model", "local:01"],
    ["protocol", "--function", "ip:3", "--x", "10", "--y", "101"],
    ["protocol", "--function", "nope:3", "--x", "101", "--y", "101"],
    ["verify", "--function", "file:/does/not/exist.json"],
    ["sweep", "--p", "0.2"],
    ["chsh", "--model", "pr", "--seed", "-1"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["chsh"])
    assert exc.value.code == 2


def test_protocol_ip4(capsys):
    code, out, _ = run(capsys, "protocol", "--function", "ip:4", "--x", "1011", "--y", "1101",
                       "--model", "pr", "--seed", "1")
    assert code == 0
    # 1*1 + 0*1 + 1*0 + 1*1 = 0 mod 2
    assert out.splitlines()[:4] == ["output 0", "bits 1", "boxes 4", "expected 0"]


def test_protocol_eq2(capsys):
    code, out, _ = run(capsys, "protocol", "--function", "eq:2", "--x", "10", "--y", "10", "--model", "pr")
    assert out.splitlines()[:3] == ["output 1", "bits 1", "boxes 4"]


def test_protocol_file_noisy_disclaimer(tmp_path, capsys):
    f = tmp_path / "f.json"
    assert main(["gen-function", "--function", "maj:2", "--out", str(f)]) == 0
    code, out, _ = run(capsys, "protocol", "--function", f"file:{f}", "--x", "01", "--y", "11",
                       "--model", "noisy-pr:0.9")
    assert code == 0
    assert "bits 1" in out
    assert "correct only with some probability" in out


def test_protocol_baseline(capsys):
    code, out, _ = run(capsys, "protocol", "--function", "ip:3", "--x", "101", "--y", "111", "--baseline")
    assert out.splitlines()[:3] == ["output 0", "bits 3", "boxes 0"]


def test_protocol_both_learn_and_report(tmp_path, capsys):
    out = tmp_path / "p.json"
    main(["protocol", "--function", "eq:2", "--x", "11", "--y", "11", "--both-learn", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert doc["bits"] == 2
    assert [m["direction"] for m in doc["transcript"]] == ["bob->alice", "alice->bob"]


def test_verify_eq2_pr(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, stdout, _ = run(capsys, "verify", "--function", "eq:2", "--model", "pr", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc == {"function": "eq:2", "model": "pr", "n": 2, "pairs": 16, "trials_per_pair": 1,
                   "errors": 0, "bits_per_run": 1, "boxes_per_run": 4, "seed": 0}


def test_verify_noisy_fails(capsys):
    code, out, _ = run(capsys, "verify", "--function", "eq:2", "--model", "noisy-pr:0.9", "--trials", "20")
    assert code == 1
    assert " 0 errors" not in out


def test_verify_all_n1(tmp_path, capsys):
    out = tmp_path / "a.json"
    code, _, _ = run(capsys, "verify", "--function", "all:1", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["functions"] == 16 and doc["errors"] == 0


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--p", "0.9,1.0", "--n-list", "1,2", "--trials", "1000",
                     "--seed", "3", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,N,trials,empirical_success,analytic_success,std_error,seed"
    assert len(lines) == 5


def test_gen_function_round_trip(tmp_path, capsys):
    f = tmp_path / "eq.json"
    main(["gen-function", "--function", "eq:2", "--anf", "--out", str(f)])
    code, out, _ = run(capsys, "verify", "--function", f"file:{f}")
    assert code == 0


def test_env_seed_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("NLBOX_SEED", "77")
    out = tmp_path / "v.json"
    main(["verify", "--function", "ip:1", "--out", str(out)])
    assert json.loads(out.read_text())["seed"] == 77
    monkeypatch.setenv("NLBOX_SEED", "abc")
    assert main(["verify", "--function", "ip:1"]) == 2


def test_local_bound(capsys):
    code, out, _ = run(capsys, "local-bound")
    assert code == 0
    assert json.loads(out)["max"] == "3"
