"""Integration tests for the command line entry point."""

import json

import pytest

from src.blockpki.cli.main import main

pytestmark = pytest.mark.integration

DOMAIN = "www.example.com"


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("BLOCKPKI_SEED", raising=False)


@pytest.fixture
def write_config(tmp_path, scenario_for):
    def _write(name="scenario.json", **changes):
        path = tmp_path / name
        path.write_text(json.dumps(scenario_for(2, **changes).model_dump(mode="json")), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def issued(tmp_path, write_config):
    out = tmp_path / "out"
    assert main(["issue", "--config", str(write_config()), "--out", str(out)]) == 0
    return out


class TestIssue:
    def test_writes_artifacts(self, capsys, issued):
        for name in ("certificate.json", "truststore.json", "chain.jsonl", "metrics.csv", "summary.json"):
            assert (issued / name).exists(), name
        summary = json.loads((issued / "summary.json").read_text())
        assert summary["domain"] == DOMAIN
        assert summary["issuers"] == ["CA1", "CA2"]
        assert summary["metrics"]["tx_count"] == 6
        assert "logged in block" in capsys.readouterr().out

    def test_same_seed_same_tip(self, tmp_path, write_config):
        config = write_config()
        tips = []
        for n in range(2):
            out = tmp_path / f"run{n}"
            assert main(["issue", "--config", str(config), "--seed", "5", "--out", str(out)]) == 0
            tips.append(json.loads((out / "summary.json").read_text())["tipHash"])
        assert tips[0] == tips[1]

    def test_unfunded_requester_is_input_error(self, tmp_path, write_config, capsys):
        config = write_config(requester_funds=10)
        assert main(["issue", "--config", str(config), "--out", str(tmp_path / "out")]) == 2
        assert "issuance failed: InsufficientBalance" in capsys.readouterr().err

    def test_unresponsive_ca_is_protocol_failure(self, tmp_path, write_config, capsys):
        config = write_config(cas=[{"ca_id": "CA1"}, {"ca_id": "CA2", "behavior": "unresponsive"}])
        assert main(["issue", "--config", str(config), "--out", str(tmp_path / "out")]) == 1
        assert "IssuanceTimeout (CA2)" in capsys.readouterr().err

    def test_bad_config_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["issue", "--config", str(bad), "--out", str(tmp_path / "out")]) == 2


class TestVerify:
    def _verify(self, issued, *extra):
        return main(
            [
                "verify",
                str(issued / "certificate.json"),
                "--truststore",
                str(issued / "truststore.json"),
                "--chain",
                str(issued / "chain.jsonl"),
                *extra,
            ]
        )

    @pytest.mark.parametrize("mode", ["unaware", "light", "full"])
    def test_accepts_issued_certificate(self, issued, capsys, mode):
        assert self._verify(issued, "--domain", DOMAIN, "--mode", mode) == 0
        assert "accept certificate" in capsys.readouterr().out

    def test_wrong_domain(self, issued, capsys):
        assert self._verify(issued, "--domain", "other.example.org") == 1
        assert "reject certificate: WrongDomain" in capsys.readouterr().out

    def test_expired(self, issued, capsys):
        assert self._verify(issued, "--domain", DOMAIN, "--now", str(2**40)) == 1
        assert "Expired" in capsys.readouterr().out

    def test_missing_certificate(self, issued, tmp_path):
        code = main(
            ["verify", str(tmp_path / "none.json"), "--truststore", str(issued / "truststore.json"), "--domain", DOMAIN]
        )
        assert code == 2


class TestChain:
    def test_load_reports_tip(self, issued, capsys):
        assert main(["chain", "load", str(issued / "chain.jsonl")]) == 0
        assert "chain ok: height 4" in capsys.readouterr().out

    def test_redump_is_byte_identical(self, issued, tmp_path):
        target = tmp_path / "copy.jsonl"
        assert main(["chain", "dump", str(target), "--source", str(issued / "chain.jsonl")]) == 0
        assert target.read_bytes() == (issued / "chain.jsonl").read_bytes()

    def test_corrupted_chain(self, issued, tmp_path, capsys):
        lines = (issued / "chain.jsonl").read_text().splitlines()
        block = json.loads(lines[2])
        block["header"]["parent_hash"] = "00" * 32
        lines[2] = json.dumps(block)
        broken = tmp_path / "broken.jsonl"
        broken.write_text("\n".join(lines) + "\n")
        assert main(["chain", "load", str(broken)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_dump_simulates_when_no_source(self, tmp_path, write_config):
        target = tmp_path / "sim.jsonl"
        assert main(["chain", "dump", str(target), "--config", str(write_config())]) == 0
        assert len(target.read_text().splitlines()) == 5


class TestAttack:
    def test_logged_attack(self, tmp_path, write_config, capsys):
        adversary = {
            "target_domain": DOMAIN,
            "compromised_cas": ["X1"],
            "impersonated_edges": [["Y1", DOMAIN]],
            "log_certificate": True,
        }
        config = write_config(adversary=adversary)
        out = tmp_path / "attack.json"
        assert main(["attack", "--config", str(config), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["constructible"]
        assert report["detected"]
        assert "anomalies=1" in capsys.readouterr().out

    def test_attack_needs_adversary(self, write_config):
        assert main(["attack", "--config", str(write_config())]) == 2
