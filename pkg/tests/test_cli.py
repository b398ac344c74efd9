import json
import os
import socket
import subprocess
import sys
import threading
import time

import pytest
import uvicorn
from fastapi.testclient import TestClient

from semml import ltl
from semml.aiger import parse_aag
from semml.api import create_app
from semml.bench import score
from semml.check import check_aiger
from semml.cli import main
from semml.corpus import CORPUS, load_dir, parse_instance, write_dir
from semml.synthesis import Options, synthesize

DELAY = ["-f", "G (r <-> X g)", "--ins", "r", "--outs", "g"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_realizable_exit_zero(capsys):
    code, out, _ = run(capsys, *DELAY)
    assert code == 0 and out == "REALIZABLE\n"


def test_unrealizable_exit_one(capsys):
    code, out, _ = run(capsys, "-f", "G F a", "--ins", "a", "--outs", "b")
    assert code == 1 and out == "UNREALIZABLE\n"


def test_parse_error_exit_two(capsys):
    code, _, err = run(capsys, "-f", "G (", "--ins", "a")
    assert code == 2 and "error" in err.lower()


def test_unassigned_atom_exit_two(capsys):
    code, _, err = run(capsys, "-f", "G (r <-> X g)", "--ins", "r")
    assert code == 2 and "g" in err


def test_missing_formula(capsys):
    code, _, err = run(capsys, "--ins", "r")
    assert code == 2 and "no formula" in err


def test_aiger_artifact_is_checked(capsys, tmp_path):
    out_file = tmp_path / "c.aag"
    code, out, _ = run(capsys, *DELAY, "--mode", "aiger", "--output-file", str(out_file))
    assert code == 0 and out == "REALIZABLE\n"
    c = parse_aag(out_file.read_text())
    assert (len(c.latches), len(c.ands)) == (1, 0)
    assert check_aiger(c, "G (r <-> X g)", ltl.Partition.of(["r"], ["g"])).passed


def test_counterexample_machine(capsys):
    code, out, _ = run(capsys, "-f", "G F a", "--ins", "a", "--outs", "b", "--mode", "mealy", "--counterexample")
    assert code == 1
    assert out.splitlines()[1].startswith("moore ")


def test_json_report(capsys):
    code, out, _ = run(capsys, *DELAY, "--mode", "mealy", "--json")
    data = json.loads(out)
    assert code == 0 and data["status"] == "realizable" and data["verified"] is True
    assert data["artifact"].startswith("mealy 2 ")


def test_dot_output(capsys):
    code, out, _ = run(capsys, *DELAY, "--mode", "mealy", "--output", "dot")
    assert code == 0 and "digraph mealy" in out


def test_instance_file(capsys, tmp_path):
    p = tmp_path / "delay.ltl"
    p.write_text("formula: G (r <-> X g)\nins: r\nouts: g\nexpected: realizable\n")
    assert run(capsys, "--instance", str(p))[0] == 0


def test_config_file(capsys, tmp_path):
    p = tmp_path / "semml.ini"
    p.write_text("[semml]\nmode = mealy\nepisode = 2\nno_such_key = 1\n")
    assert run(capsys, *DELAY, "--config", str(p))[0] == 2
    p.write_text("[semml]\nmode = mealy\nepisode = 2\n[weights]\nattention = 0.9\n")
    code, out, _ = run(capsys, *DELAY, "--config", str(p))
    assert code == 0 and "mealy 2" in out
    p.write_text("[weights]\nbogus = 1\n")
    assert run(capsys, *DELAY, "--config", str(p))[0] == 2


def test_options_validation():
    with pytest.raises(ValueError):
        Options(mode="fast")
    with pytest.raises(ValueError):
        Options(portfolio="7")
    with pytest.raises(ValueError):
        Options(episode=0)


def test_check_subcommand(capsys, tmp_path):
    good = tmp_path / "good.aag"
    good.write_text("aag 1 1 0 1 0\n2\n2\ni0 r\no0 g\n")
    bad = tmp_path / "bad.aag"
    bad.write_text("aag 1 1 0 1 0\n2\n0\ni0 r\no0 g\n")
    args = ["-f", "G (g <-> r)", "--ins", "r", "--outs", "g"]
    code, out, _ = run(capsys, "check", "--aag", str(good), *args)
    assert code == 0 and out.startswith("PASS")
    code, out, _ = run(capsys, "check", "--aag", str(bad), *args)
    assert code == 1 and "stem:" in out and "loop:" in out
    code, out, _ = run(capsys, "check", "--aag", str(bad), *args, "--json")
    assert json.loads(out)["verdict"] == "fail"


def test_check_mealy_file(capsys, tmp_path):
    p = tmp_path / "m.txt"
    p.write_text('mealy 2 0\n0 "!r" "g" 1\n0 "r" "g" 0\n1 "!r" "!g" 1\n1 "r" "!g" 0\n')
    args = ["-f", "G (r <-> X g)", "--ins", "r", "--outs", "g"]
    # state 0 means "r was true", except that the initial g is free
    assert run(capsys, "check", "--mealy", str(p), *args)[0] == 0
    p.write_text('mealy 1 0\n0 "true" "g" 0\n')
    assert run(capsys, "check", "--mealy", str(p), *args)[0] == 1
    p.write_text('garbage\n')
    assert run(capsys, "check", "--mealy", str(p), *args)[0] == 2


def test_bench_builtin(capsys):
    code, out, _ = run(capsys, "bench", "builtin", "--json")
    data = json.loads(out)
    assert code == 0 and data["solved"] == len(CORPUS)


def test_bench_with_baseline(capsys, tmp_path):
    write_dir(tmp_path / "c", CORPUS[:2])
    base = tmp_path / "base.json"
    base.write_text(json.dumps({i.name: {"size": 1, "seconds": 1.0} for i in CORPUS[:2]}))
    code, out, _ = run(capsys, "bench", str(tmp_path / "c"), "--baseline", str(base), "--json")
    data = json.loads(out)
    assert code == 0 and data["solved"] == 2
    for r in data["rows"]:
        assert r["score"] == pytest.approx(score(r["size"], 1))
    assert data["runtime_ratio"] > 0


def test_bench_empty_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", str(tmp_path))
    assert code == 0 and "solved 0/0" in out


def test_bench_missing_dir(capsys, tmp_path):
    assert run(capsys, "bench", str(tmp_path / "nope"))[0] == 2


def test_instance_round_trip(tmp_path):
    write_dir(tmp_path, CORPUS)
    back = load_dir(tmp_path)
    assert sorted(i.name for i in back) == sorted(i.name for i in CORPUS)
    i = CORPUS[0]
    assert parse_instance(i.to_text(), i.name) == i


# -- service ----------------------------------------------------------------


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_api_health(client):
    r = client.get("/health")
    assert r.status_code == 200 and r.json()["status"] == "ok"


def test_api_synthesize(client):
    r = client.post("/synthesize", json={"formula": "G (r <-> X g)", "ins": ["r"], "outs": ["g"], "mode": "aiger"})
    body = r.json()
    assert r.status_code == 200 and body["status"] == "realizable" and body["verified"]
    assert body["artifact"].startswith("aag ")


def test_api_rejects_external_commands(client):
    r = client.post("/synthesize", json={"formula": "G F g", "outs": ["g"], "sat_command": "rm -rf /"})
    assert r.status_code == 422
    r = client.post("/synthesize", json={"formula": "G F g", "outs": ["g"], "mode": "nope"})
    assert r.status_code == 422


def test_api_check(client):
    r = client.post("/check", json={"formula": "G (g <-> r)", "ins": ["r"], "outs": ["g"],
                                    "aag": "aag 1 1 0 1 0\n2\n0\ni0 r\no0 g\n"})
    assert r.json()["verdict"] == "fail" and r.json()["exit_code"] == 1
    # without symbols the circuit talks about i0 and o0, which the partition does not know
    r = client.post("/check", json={"formula": "G (g <-> r)", "ins": ["r"], "outs": ["g"],
                                    "aag": "aag 1 1 0 1 0\n2\n0\n"})
    assert r.json()["verdict"] == "unknown"
    r = client.post("/check", json={"formula": "G g", "outs": ["g"]})
    assert r.json()["exit_code"] == 2


def test_thin_client_against_live_server(capsys):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error"))
    th = threading.Thread(target=server.run, daemon=True)
    th.start()
    try:
        deadline = time.monotonic() + 10
        while not server.started and time.monotonic() < deadline:
            time.sleep(0.05)
        url = f"http://127.0.0.1:{port}"
        local = run(capsys, *DELAY, "--mode", "aiger")
        remote = run(capsys, *DELAY, "--mode", "aiger", "--server", url)
        assert remote == local
        assert run(capsys, "-f", "G F a", "--ins", "a", "--outs", "b", "--server", url)[0] == 1
    finally:
        server.should_exit = True
        th.join(10)
    assert run(capsys, *DELAY, "--server", url)[0] == 2


def test_artifacts_are_deterministic():
    """Byte-identical output under different hash seeds."""
    outs = []
    for seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        arts = []
        for inst in CORPUS[:6]:
            p = subprocess.run([sys.executable, "-m", "semml.cli", "-f", inst.formula, "--ins", ",".join(inst.ins),
                                "--outs", ",".join(inst.outs), "--mode", "aiger"],
                               capture_output=True, text=True, env=env)
            arts.append(p.stdout)
        outs.append(arts)
    assert outs[0] == outs[1]
    assert synthesize("G (r <-> X g)", ["r"], ["g"], Options(mode="aiger")).artifact == \
        synthesize("G (r <-> X g)", ["r"], ["g"], Options(mode="aiger")).artifact
