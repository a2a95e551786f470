import json
import subprocess
import sys

import pytest

from edhocsec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_handshake_default(capsys):
    code, out, _ = run(capsys, "handshake")
    assert code == 0
    assert "SK match" in out
    assert out.count("\nflow ") + out.startswith("flow ") == 3


def test_handshake_improved_p256(capsys):
    code, out, _ = run(capsys, "handshake", "--variant", "improved", "--curve", "p256")
    assert code == 0
    assert "flow 4 (m4)" in out


def test_handshake_mismatch_nonzero(capsys):
    code, out, _ = run(capsys, "handshake", "--peer-variant", "improved")
    assert code != 0
    assert "rejected" in out


def test_no_raw_keys_printed(capsys, monkeypatch):
    import edhocsec.cli as cli
    from edhocsec import protocol

    captured = {}
    real = protocol.run_handshake

    def spy(*a, **k):
        hs = real(*a, **k)
        captured["hs"] = hs
        return hs

    monkeypatch.setattr(cli, "run_handshake", spy)
    _, out, _ = run(capsys, "handshake", "--seed", "3")
    hs = captured["hs"]
    for s in (hs.initiator, hs.responder):
        for secret in (s.sk, s.static.secret, s.ephemeral.secret, s.chain.prk2e, s.chain.prk4e3m):
            assert secret.hex()[:16] not in out


def test_attack_guard(capsys):
    code, _, err = run(capsys, "attack", "--lmac", "64")
    assert code == 2
    assert "limited to 20-bit" in err


def test_attack_improved_initiator_guard_uses_lsec(capsys):
    code, _, err = run(capsys, "attack", "--variant", "improved", "--lmac", "8", "--lsec", "64", "--target", "initiator-auth")
    assert code == 2


def test_attack_runs_and_writes_record(capsys, tmp_path):
    out_path = tmp_path / "report.txt"
    argv = ["attack", "--lmac", "4", "--trials", "800", "--seed", "5", "--out", str(out_path)]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    record = out_path.read_text()
    assert record.startswith("target=responder-auth variant=baseline l_tag=4 trials=800 ")
    code2, out2, _ = run(capsys, *argv)
    assert (code2, out2, record) == (code, out, out_path.read_text())


def test_attack_exit_reflects_z(capsys, monkeypatch):
    import edhocsec.cli as cli
    from edhocsec.attacks import AttackReport, Target
    from edhocsec.primitives import Variant

    monkeypatch.setattr(
        cli, "attack_responder_auth",
        lambda suite, trials, seed: AttackReport(Target.RESPONDER_AUTH, Variant.BASELINE, 8, trials, trials),
    )
    code, _, _ = run(capsys, "attack", "--lmac", "8", "--trials", "100")
    assert code == 1


def test_game_scenarios(capsys):
    code, out, _ = run(capsys, "game", "--scenario", "honest-N", "--trials", "6")
    assert code == 0 and "sound=True" in out and "explicit_auth=True" in out
    code, out, _ = run(capsys, "game", "--scenario", "forge-initiator", "--lmac", "8", "--seed", "1")
    assert "explicit_auth=False" in out
    code, out, _ = run(capsys, "game", "--scenario", "corrupt-after-accept")
    assert "fresh=True" in out
    assert out.splitlines()[0] == "NewUser u=1 time=0"


def test_game_unknown_scenario(capsys):
    code, _, err = run(capsys, "game", "--scenario", "bogus")
    assert code == 2 and "unknown scenario" in err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"variant": "improved", "seed": 4}))
    code, out, _ = run(capsys, "handshake", "--config", str(cfg))
    assert code == 0 and "flow 4" in out
    cfg.write_text(json.dumps({"colour": "blue"}))
    code, _, err = run(capsys, "handshake", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_invalid_suite_reported(capsys):
    code, _, err = run(capsys, "handshake", "--nl", "12")
    assert code == 2 and "nl" in err


def test_module_entry_point_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "edhocsec", "game", "--scenario", "honest-N", "--trials", "4", "--seed", "8"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True)
    b = subprocess.run(cmd, capture_output=True, text=True, check=True)
    assert a.stdout == b.stdout and a.stdout
