"""Configuration layering and the command-line surface."""

import pytest
import simplejson

from tractor_holo.core.errors import ConfigError
from tractor_holo.core.gaussian import BIVARIATE, INDEPENDENCE
from tractor_holo.main import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main
from tractor_holo.utils.config import RunConfig, load_run_config, read_config_file


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("TRACTOR_HOLO_SEED", raising=False)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.seed == 7
        assert config.base_point(BIVARIATE).coords == (0.0, 0.0, 1.0, 1.0, 0.0)
        assert config.base_point(INDEPENDENCE).coords == (0.0, 0.0, 1.0, 1.0)
        assert config.manifold_specs() == [BIVARIATE, INDEPENDENCE]

    def test_hash_ignores_output_options(self):
        assert RunConfig().config_hash() == RunConfig(format="text", out="report.txt").config_hash()
        assert RunConfig().config_hash() != RunConfig(seed=8).config_hash()

    def test_point_for_chosen_manifold(self):
        config = load_run_config(overrides={"manifold": "independence", "point": "0.5,0.1,2.0,1.5"})
        assert config.base_point(INDEPENDENCE).coords == (0.5, 0.1, 2.0, 1.5)

    def test_threshold_must_be_positive(self):
        with pytest.raises(ConfigError):
            load_run_config(overrides={"gap_min": 0.0})

    def test_monte_carlo_sample_floor(self):
        with pytest.raises(ConfigError):
            load_run_config(overrides={"mc_samples": 5000})
        assert load_run_config(overrides={"mc_samples": 10_000}).mc_samples == 10_000

    def test_record_tolerance_may_be_zero(self):
        assert load_run_config(overrides={"check_tol": 0.0}).check_tol == 0.0

    def test_point_outside_domain(self):
        with pytest.raises(ConfigError):
            load_run_config(overrides={"manifold": "bivariate", "point": "0,0,1,1,1"})


class TestConfigFile:
    def test_reads_known_keys(self, config_file):
        values = read_config_file(config_file)
        assert values["loops"] == "2"
        config = load_run_config(config_file)
        assert config.loops == 2
        assert config.stability_check is False

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.env"
        path.write_text("LOOPS=2\nWARP_DRIVE=on\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.env")

    def test_precedence(self, config_file, monkeypatch):
        assert load_run_config(config_file).seed == 7
        monkeypatch.setenv("TRACTOR_HOLO_SEED", "11")
        assert load_run_config(config_file).seed == 11
        assert load_run_config(config_file, {"seed": 3}).seed == 3

    def test_invalid_environment(self, monkeypatch):
        monkeypatch.setenv("TRACTOR_HOLO_SEED", "many")
        with pytest.raises(ConfigError):
            load_run_config()


class TestCommandLine:
    def test_usage_errors(self):
        assert main([]) == EXIT_USAGE
        assert main(["tensors"]) == EXIT_USAGE
        assert main(["tensors", "--manifold", "hyperbolic"]) == EXIT_USAGE

    def test_help(self):
        assert main(["--help"]) == EXIT_PASS

    def test_configuration_error(self, tmp_path):
        path = tmp_path / "strict.env"
        path.write_text("DELTA_MIN=5\n", encoding="utf-8")
        assert main(["tensors", "--manifold", "independence", "--config", str(path)]) == EXIT_USAGE

    def test_tensors_report(self, config_file, tmp_path):
        out = tmp_path / "tensors.json"
        code = main(["tensors", "--manifold", "independence", "--config", str(config_file), "--out", str(out)])
        report = simplejson.loads(out.read_text(encoding="utf-8"))
        failures = [r["name"] for r in report["records"] if not r["passed"]]
        assert code == EXIT_PASS, failures
        assert report["command"] == "tensors"
        assert report["manifolds"] == ["independence"]
        assert report["status"] == "pass"
        assert all(r["name"].startswith("independence.") for r in report["records"])

    def test_reports_are_byte_identical(self, config_file, tmp_path):
        paths = [tmp_path / "first.json", tmp_path / "second.json"]
        for path in paths:
            main(["tensors", "--manifold", "independence", "--config", str(config_file), "--out", str(path)])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_text_format(self, config_file, tmp_path):
        out = tmp_path / "tensors.txt"
        code = main(["tensors", "--manifold", "independence", "--config", str(config_file),
                     "--format", "text", "--out", str(out)])
        text = out.read_text(encoding="utf-8")
        assert code in (EXIT_PASS, EXIT_FAIL)
        assert "Statut" in text
        assert "independence.scal" in text
