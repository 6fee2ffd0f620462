"""Command-line surface: subcommands, exit codes, byte-stable CSV output."""

import pytest

from colme.cli import main

CONFIG = """
m = 10
r = 3
class_means = 0.2, 0.8
sigma = 0.5
epsilon = 2
rule = oracle
alpha = simple
t_max = 20
replicas = 4
master_seed = 31415
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "exp.conf"
    path.write_text(CONFIG)
    return path


class TestSimulate:
    def test_writes_csv(self, config_path, tmp_path, capsys):
        out = tmp_path / "results.csv"
        assert main(["simulate", "--config", str(config_path), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "curve,rule,epsilon,r,M,t,mse_mean,mse_stderr,replicas,seed"
        assert len(lines) == 21
        assert "wrote" in capsys.readouterr().out

    def test_byte_identical_reruns(self, config_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--config", str(config_path), "--out", str(a)])
        main(["simulate", "--config", str(config_path), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_override_changes_output(self, config_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--config", str(config_path), "--out", str(a)])
        main(["simulate", "--config", str(config_path), "--out", str(b),
              "--override", "master_seed=777"])
        assert a.read_bytes() != b.read_bytes()

    def test_missing_config_is_exit_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.conf"),
                     "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_value_is_exit_2(self, config_path, tmp_path):
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(tmp_path / "x.csv"),
                     "--override", "rule=telepathy"]) == 2

    def test_infeasible_graph_is_exit_2(self, config_path, tmp_path):
        # parity violation is an invalid-argument error, not a restart failure
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(tmp_path / "x.csv"),
                     "--override", "m=5"]) == 2

    def test_unwritable_out_is_exit_4(self, config_path, tmp_path):
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(tmp_path / "no-such-dir" / "x.csv")]) == 4

    def test_generation_failure_is_exit_3(self, config_path, tmp_path, monkeypatch):
        from colme import experiments
        from colme.topology import GenerationError

        def explode(*args, **kwargs):
            raise GenerationError("restart budget exhausted")

        monkeypatch.setattr(experiments, "gen_random_regular", explode)
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(tmp_path / "x.csv"),
                     "--override", "replicas=1"]) == 3


class TestTheory:
    def test_three_curves(self, config_path, tmp_path):
        out = tmp_path / "theory.csv"
        assert main(["theory", "--config", str(config_path), "--out", str(out)]) == 0
        text = out.read_text()
        for name in ("theory-local", "theory-ideal", "theory-thm1"):
            assert name in text
        assert len(text.splitlines()) == 1 + 3 * 20


class TestGraphStats:
    def test_prints_summary(self, config_path, capsys):
        assert main(["graph-stats", "--config", str(config_path),
                     "--samples", "20"]) == 0
        out = capsys.readouterr().out
        assert "n_a" in out
        assert "mean corollary_rhs" in out


class TestCorollaryCheck:
    def test_prints_verdict(self, config_path, capsys):
        assert main(["corollary-check", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "rhs" in out
        assert "sigma_dp_sq" in out
        assert ("holds" in out) or ("violated" in out)
