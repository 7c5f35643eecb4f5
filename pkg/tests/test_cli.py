import json
import math
import subprocess
import sys

import pytest

from oflp.cli import main
from oflp.serialize import (
    InstanceError,
    instance_digest,
    parse_instance,
    serialize_instance,
)


def run_cli(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSerialize:
    @pytest.mark.parametrize(
        "name",
        [
            "fig_coalition_square.json",
            "witness_segment_lambda0.json",
            "tree7.json",
            "dual_segment.json",
        ],
    )
    def test_round_trip(self, fixtures_dir, name):
        doc = json.loads((fixtures_dir / name).read_text())
        space, profile, pred, lam = parse_instance(doc)
        doc2 = serialize_instance(space, profile, pred, lam)
        space2, profile2, pred2, lam2 = parse_instance(doc2)
        assert profile2 == profile and lam2 == lam
        assert instance_digest(space, profile, pred, lam) == instance_digest(
            space2, profile2, pred2, lam2
        )

    def test_field_path_diagnostics(self):
        base = {"space": "segment", "agents": [0.5], "prediction": 1.0, "lambda": 0.0}
        with pytest.raises(InstanceError, match=r"agents\[0\]"):
            parse_instance({**base, "agents": ["x"]})
        with pytest.raises(InstanceError, match="lambda"):
            parse_instance({**base, "lambda": 2.0})
        with pytest.raises(InstanceError, match="missing field"):
            parse_instance({"space": "segment"})
        with pytest.raises(InstanceError, match=r"types\[1\]"):
            parse_instance({**base, "agents": [0.1, 0.2], "types": [0, 2]})
        with pytest.raises(InstanceError, match="space"):
            parse_instance({**base, "space": "pentagon"})

    def test_digest_stability(self, fixtures_dir):
        doc = json.loads((fixtures_dir / "tree7.json").read_text())
        a = instance_digest(*parse_instance(doc))
        b = instance_digest(*parse_instance(doc))
        assert a == b and len(a) == 12


class TestCli:
    def test_run_witness(self, capsys, fixtures_dir):
        code, out, _ = run_cli(capsys, "run", str(fixtures_dir / "witness_segment_lambda0_5.json"))
        assert code == 0
        doc = json.loads(out)
        assert doc["ratio"] == pytest.approx(7.0)
        assert doc["chosen"] == 1.0

    def test_opt_square_fixture(self, capsys, fixtures_dir):
        code, out, _ = run_cli(capsys, "opt", str(fixtures_dir / "fig_coalition_square.json"))
        assert code == 0
        doc = json.loads(out)
        assert doc["y_star"] == [0.0, 0.0]

    def test_check_sp_passes(self, capsys, fixtures_dir):
        code, out, _ = run_cli(
            capsys, "check-sp", str(fixtures_dir / "fig_coalition_square.json"), "--grid", "51"
        )
        assert code == 0
        assert json.loads(out)["violated"] is False

    def test_check_gsp_finds_violation(self, capsys, fixtures_dir):
        code, out, _ = run_cli(
            capsys, "check-gsp", str(fixtures_dir / "fig_coalition_square.json"),
            "--coalition-size", "2", "--grid", "11",
        )
        assert code == 2
        doc = json.loads(out)
        assert doc["violated"] is True
        assert min(doc["utilities_before"]) == pytest.approx(0.5, abs=1e-12)
        assert min(doc["utilities_after"]) == pytest.approx(math.sqrt(1.25), abs=1e-12)

    def test_check_gsp_gamma_excuses(self, capsys, fixtures_dir):
        code, out, _ = run_cli(
            capsys, "check-gsp", str(fixtures_dir / "fig_coalition_square.json"),
            "--coalition-size", "2", "--grid", "11", "--gamma", "10",
        )
        assert code == 0

    def test_lb_verify(self, capsys):
        code, out, _ = run_cli(
            capsys, "lb-verify", "--n", "1000", "--c", "2", "--epsilon", "1e-4"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["k0"] == 500 and abs(doc["ratio"] - 3.0) < 1e-2

    def test_sweep_csv_deterministic(self, capsys):
        argv = ["sweep", "--space", "segment", "--lambda-grid", "0,0.5",
                "--budget", "50", "--seed", "1"]
        code, out1, _ = run_cli(capsys, *argv)
        assert code == 0
        code, out2, _ = run_cli(capsys, *argv)
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert lines[0] == "lambda,eta_mode,empirical_ratio,bound,instance_digest"
        assert len(lines) == 1 + 2 * 2
        for line in lines[1:]:
            lam, eta_mode, ratio, bound, digest = line.split(",")
            assert eta_mode in ("zero", "free")
            assert float(ratio) <= float(bound) + 1e-9
            assert digest

    def test_fuzz_within_bounds(self, capsys):
        code, out, _ = run_cli(
            capsys, "fuzz", "--space", "circle", "--count", "100", "--lam", "0,0.5"
        )
        assert code == 0
        doc = json.loads(out)
        assert all(row["within_bounds"] for row in doc["rows"])

    def test_dual_fixture_run(self, capsys, fixtures_dir):
        code, out, _ = run_cli(capsys, "run", str(fixtures_dir / "dual_segment.json"))
        assert code == 0
        json.loads(out)

    def test_tree_fixture_check_sp(self, capsys, fixtures_dir):
        code, out, _ = run_cli(
            capsys, "check-sp", str(fixtures_dir / "tree7.json"), "--grid", "7"
        )
        assert code == 0

    def test_usage_error(self, capsys):
        assert run_cli(capsys, "frobnicate")[0] == 64
        assert run_cli(capsys, "sweep", "--space", "hexagon")[0] == 64

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "run", "/nonexistent/instance.json")
        assert code == 1 and "error" in err

    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run_cli(capsys, "run", str(bad))
        assert code == 1 and "invalid JSON" in err

    def test_schema_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"space": "segment", "agents": [2.5],
                                   "prediction": 1.0, "lambda": 0.0}))
        code, _, err = run_cli(capsys, "run", str(bad))
        assert code == 1 and "agents[0]" in err

    def test_seed_env(self, capsys, monkeypatch):
        argv = ["sweep", "--space", "segment", "--lambda-grid", "0.5", "--budget", "30"]
        monkeypatch.setenv("OFLP_SEED", "7")
        _, out_env, _ = run_cli(capsys, *argv)
        monkeypatch.delenv("OFLP_SEED")
        _, out_flag, _ = run_cli(capsys, *argv, "--seed", "7")
        assert out_env == out_flag

    def test_console_script(self, fixtures_dir):
        proc = subprocess.run(
            [sys.executable, "-m", "oflp.cli", "run",
             str(fixtures_dir / "witness_segment_lambda0.json")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["ratio"] == pytest.approx(3.0)
