import json

import numpy as np
import pytest

from src.utils.config import (RunConfig, ensure_results_dir, get_default_config, load_config, merge_config,
                              resolve_threads, save_config)
from src.utils.errors import PointsFormatError, ValidationError
from src.utils.io import read_table, write_json, write_table


class TestConfig:
    """Defaults, merging and thread resolution."""

    def test_missing_default_file_gives_defaults(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert load_config() == get_default_config()

    def test_user_file_is_merged(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"widths": {"T": 42}, "extra": {"note": "kept"}}))
        config = load_config(str(path))
        assert config["widths"]["T"] == 42
        assert config["widths"]["pivot_tol"] is None
        assert config["fit"]["iterations"] == 1000
        assert config["extra"] == {"note": "kept"}

    def test_explicit_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(str(tmp_path / "missing.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            load_config(str(path))

    def test_save_and_reload(self, tmp_path):
        path = tmp_path / "saved.json"
        config = merge_config(get_default_config(), {"krr": {"trials": 3}})
        save_config(config, str(path))
        assert load_config(str(path)) == config

    def test_merge_does_not_mutate(self):
        base = get_default_config()
        merge_config(base, {"fit": {"seed": 9}})
        assert base["fit"]["seed"] == 0

    def test_ensure_results_dir(self, tmp_path):
        config = merge_config(get_default_config(), {"output": {"results_dir": str(tmp_path / "out")}})
        assert (tmp_path / "out").is_dir() is False
        ensure_results_dir(config)
        assert (tmp_path / "out").is_dir()

    def test_thread_priority(self, monkeypatch):
        config = merge_config(get_default_config(), {"runtime": {"threads": 3}})
        monkeypatch.delenv("NWIDTH_THREADS", raising=False)
        assert resolve_threads(None, config) == 3
        monkeypatch.setenv("NWIDTH_THREADS", "5")
        assert resolve_threads(None, config) == 5
        assert resolve_threads(2, config) == 2
        assert resolve_threads(0, config) >= 1
        monkeypatch.setenv("NWIDTH_THREADS", "many")
        with pytest.raises(ValidationError):
            resolve_threads(None, config)


class TestTables:
    """CSV tables and JSON reports with provenance."""

    def test_table_with_provenance(self, tmp_path):
        path = tmp_path / "t.csv"
        run_config = RunConfig("widths", {"kernel": "family=exp gamma=1.0 a=1.0", "T": 3}, seed=1, out=str(path))
        write_table(str(path), ("t", "w_t"), [[0, 1.0], [1, 0.5]], run_config, ["truncated_at=2"])
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# nwidth 0.1.0 config={")
        assert json.loads(lines[0].split("config=", 1)[1])["options"]["T"] == 3
        assert lines[1] == "# truncated_at=2"
        assert lines[2] == "t,w_t"
        columns, data = read_table(str(path))
        assert columns == ["t", "w_t"]
        assert np.array_equal(data, [[0, 1.0], [1, 0.5]])

    def test_read_table_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# comment\nn,eps_n\n1,0.5\n2\n")
        with pytest.raises(PointsFormatError) as err:
            read_table(str(path))
        assert err.value.line == 4

    def test_json_provenance_first(self, tmp_path):
        path = tmp_path / "r.json"
        write_json(str(path), {"slope": np.float64(0.25)}, RunConfig("dim", {}, out=str(path)))
        report = json.loads(path.read_text())
        assert list(report)[0] == "provenance"
        assert report["provenance"]["version"] == "0.1.0"
        assert report["slope"] == 0.25
