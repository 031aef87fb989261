import pytest

from volbound.cli import main
from volbound.experiments import CheckResult, VerifyReport

FAST = ["--paths", "2000", "--steps", "16", "--seed", "3"]


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestOneShots:
    def test_volswap(self, capsys):
        code, out = run(capsys, "volswap", "--sigma0", "0.3", "--alpha", "0.5", "--T", "0.5", *FAST)
        assert code == 0
        label, value, se = out.split()
        assert label == "volswap"
        assert 0.25 < float(value) < 0.35
        assert float(se) > 0.0

    def test_price(self, capsys):
        code, out = run(capsys, "price", "--rho", "-0.5", "--k", "0.0", *FAST)
        assert code == 0
        assert out.startswith("price\t")

    def test_zviv(self, capsys):
        code, out = run(capsys, "zviv", "--rho", "-0.5", *FAST)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("k_hat\t")
        assert lines[1].startswith("zviv\t")
        assert lines[2].startswith("atmi\t")
        assert "residual" in lines[3]


class TestSweepAndFigure:
    def test_sweep_requires_out(self, capsys):
        code = main(["sweep", *FAST, "--rho-start", "0", "--rho-end", "0", "--rho-step", "1"])
        assert code == 2

    def test_figure_writes_files(self, tmp_path, capsys):
        out = tmp_path / "fig1.txt"
        code, _ = run(
            capsys, "figure", "--id", "1", *FAST,
            "--rho-start", "-1", "--rho-end", "1", "--rho-step", "0.5",
            "--out", str(out),
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "fig1.se.txt").exists()
        assert (tmp_path / "fig1.png").exists()
        assert len(out.read_text().splitlines()) == 6

    def test_no_plot_skips_png(self, tmp_path, capsys):
        out = tmp_path / "s.txt"
        code, _ = run(
            capsys, "sweep", *FAST, "--sigma0", "0.3", "--alpha", "0.5", "--T", "0.5",
            "--rho-start", "0", "--rho-end", "0.5", "--rho-step", "0.5",
            "--out", str(out), "--no-plot",
        )
        assert code == 0
        assert out.exists()
        assert not (tmp_path / "s.png").exists()

    def test_figure_id_choices(self):
        with pytest.raises(SystemExit) as exc:
            main(["figure", "--id", "9"])
        assert exc.value.code == 2


class TestConfigFile:
    def test_file_values_used_and_flags_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep setup\n"
            "sigma0 = 0.3\n"
            "alpha = 0.5\n"
            "T = 0.5\n"
            "paths = 2000\n"
            "steps = 16\n"
            "seed = 3\n"
        )
        code, from_file = run(capsys, "volswap", "--config", str(cfg))
        assert code == 0
        code, from_flags = run(
            capsys, "volswap", "--sigma0", "0.3", "--alpha", "0.5", "--T", "0.5", *FAST
        )
        assert from_file == from_flags
        # an explicit flag beats the file value
        code, overridden = run(capsys, "volswap", "--config", str(cfg), "--seed", "4")
        assert overridden != from_file

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sigma_zero = 0.3\n")
        code = main(["volswap", "--config", str(cfg)])
        assert code == 2

    def test_malformed_line_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sigma0 0.3\n")
        assert main(["volswap", "--config", str(cfg)]) == 2

    def test_missing_file_is_config_error(self, tmp_path):
        assert main(["volswap", "--config", str(tmp_path / "none.cfg")]) == 2


class TestVerifyCli:
    def test_exit_codes_follow_report(self, capsys, monkeypatch):
        import volbound.cli as cli

        passing = VerifyReport(checks=[CheckResult("s", "ok", True, "d")])
        failing = VerifyReport(checks=[CheckResult("s", "bad", False, "d")])
        monkeypatch.setattr(cli, "verify_report", lambda **kw: passing)
        assert main(["verify"]) == 0
        assert "PASS s/ok" in capsys.readouterr().out
        monkeypatch.setattr(cli, "verify_report", lambda **kw: failing)
        assert main(["verify"]) == 1
        assert "FAIL s/bad" in capsys.readouterr().out

    def test_json_output(self, tmp_path, capsys, monkeypatch):
        import volbound.cli as cli

        rep = VerifyReport(checks=[CheckResult("s", "ok", True, "d")])
        monkeypatch.setattr(cli, "verify_report", lambda **kw: rep)
        out = tmp_path / "report.json"
        assert main(["verify", "--json", str(out)]) == 0
        assert '"passed": true' in out.read_text()

    def test_eq9_section_runs_end_to_end(self, capsys):
        code, out = run(capsys, "verify", "--sections", "eq9", "--eq9-paths", "200")
        assert code == 0
        assert "PASS eq9/pathwise-positivity" in out

    def test_unknown_section_is_config_error(self, capsys):
        assert main(["verify", "--sections", "bogus"]) == 2
