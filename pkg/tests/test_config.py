"""Flat YAML run configs and the shipped example files."""

from pathlib import Path

import pytest

from reel.config import RunConfig, dump_config, load_config, parse_run_config
from reel.errors import DataFormatError
from reel.models import HeatModel, NanovoidModel, SinteringModel

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestParseRunConfig:
    def test_minimal_heat_config(self):
        rc = parse_run_config({"model": "heat", "nx": 16, "ny": 16, "dx": 1.0, "dt": 0.2})
        assert rc.n_steps == 100  # default
        assert rc.ic_seed == 0
        assert isinstance(rc.build(), HeatModel)

    def test_run_keys_split_from_model_config(self):
        raw = {"model": "heat", "nx": 8, "ny": 8, "dx": 1.0, "dt": 0.1, "n_steps": 5, "ic_seed": 3}
        rc = parse_run_config(raw)
        assert rc.n_steps == 5
        assert rc.ic_seed == 3
        assert "n_steps" not in rc.model_config
        assert "ic_seed" not in rc.model_config

    def test_non_mapping_rejected(self):
        with pytest.raises(DataFormatError, match="mapping"):
            parse_run_config(["model", "heat"])

    def test_nested_value_rejected(self):
        with pytest.raises(DataFormatError, match="scalars"):
            parse_run_config({"model": "heat", "grid": {"nx": 8}})

    def test_non_string_key_rejected(self):
        with pytest.raises(DataFormatError, match="keys"):
            parse_run_config({"model": "heat", 3: "x"})

    def test_missing_model_key(self):
        with pytest.raises(DataFormatError, match="'model'"):
            parse_run_config({"nx": 8, "ny": 8, "dx": 1.0, "dt": 0.1})

    def test_nonpositive_steps_rejected(self):
        with pytest.raises(DataFormatError, match="n_steps"):
            parse_run_config({"model": "heat", "nx": 8, "ny": 8, "dx": 1, "dt": 0.1, "n_steps": 0})


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        rc = parse_run_config(
            {"model": "heat", "nx": 16, "ny": 16, "dx": 1.0, "dt": 0.2, "n_steps": 12, "ic_seed": 7}
        )
        path = str(tmp_path / "run.yaml")
        dump_config(rc, path)
        back = load_config(path)
        assert back == rc

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(str(tmp_path / "nope.yaml"))

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("model: [unclosed\n")
        with pytest.raises(DataFormatError, match="YAML"):
            load_config(str(path))

    def test_yaml_list_document_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(DataFormatError, match="mapping"):
            load_config(str(path))


class TestShippedConfigs:
    """The files under configs/ must build and respect the stability budget."""

    @pytest.mark.parametrize(
        "name,cls",
        [
            ("heat_32.yaml", HeatModel),
            ("sintering_lite_64.yaml", SinteringModel),
            ("sintering_lite_128.yaml", SinteringModel),
            ("nanovoid_64.yaml", NanovoidModel),
        ],
    )
    def test_builds_within_stability_budget(self, name, cls):
        rc = load_config(str(CONFIG_DIR / name))
        model = rc.build()
        assert isinstance(model, cls)
        assert model.grid.dt <= model.stable_dt()
        assert rc.n_steps >= 1
