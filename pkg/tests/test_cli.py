"""Command-line interface: configs, outputs, exit codes."""

import csv
import json

import numpy as np
import pytest

from warpbank import reference as ref
from warpbank.cli import main, load_config, ConfigError


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _coeff_csv(path, values):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["coefficient"])
        for v in values:
            w.writerow(["%.17g" % v])
    return str(path)


SMALL_BANK = {"bank": {"M": 8, "mu": 0.5, "D": [2] * 8}}


class TestConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None)
        assert cfg["bank"]["M"] == 16
        assert cfg["design"]["method"] == "proposed"

    def test_rejects_unknown_section(self, tmp_path):
        p = _write(tmp_path / "c.json", {"banana": {}})
        with pytest.raises(ConfigError):
            load_config(p)

    def test_rejects_unknown_key(self, tmp_path):
        p = _write(tmp_path / "c.json", {"bank": {"M": 8, "decimation": [2] * 8}})
        with pytest.raises(ConfigError):
            load_config(p)

    def test_rejects_malformed_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(p))

    def test_partial_sections_are_filled(self, tmp_path):
        p = _write(tmp_path / "c.json", SMALL_BANK)
        cfg = load_config(p)
        assert cfg["bank"]["M"] == 8
        assert cfg["sim"]["seed"] == 3


class TestBandsCommand:
    def test_writes_reference_edges(self, tmp_path, capsys):
        rc = main(["bands", "--out", str(tmp_path)])
        assert rc == 0
        table = ref.reference_edges("spec1")
        with open(tmp_path / "bands.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 16
        for i, row in enumerate(rows):
            assert abs(float(row["omega_l"]) - table[i, 0]) < 5e-4
            assert abs(float(row["omega_h"]) - table[i, 1]) < 5e-4
        assert (tmp_path / "effective_config.json").exists()

    def test_console_output(self, tmp_path, capsys):
        main(["bands", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert "band" in out and len(out.strip().splitlines()) == 17

    def test_bad_config_exit_code(self, tmp_path):
        p = _write(tmp_path / "c.json", {"bank": {"M": "x"}})
        assert main(["bands", "--config", p, "--out", str(tmp_path)]) == 2


class TestDesignCommand:
    def test_small_bank_design(self, tmp_path):
        p = _write(tmp_path / "c.json", SMALL_BANK)
        rc = main(["design", "--config", p, "--out", str(tmp_path)])
        assert rc == 0
        h = np.loadtxt(tmp_path / "analysis.csv", skiprows=1)
        g = np.loadtxt(tmp_path / "synthesis.csv", skiprows=1)
        assert h.size == 8 and g.size == 8
        assert abs(h.sum() - 1.0) < 1e-12
        report = json.loads((tmp_path / "design_report.json").read_text())
        assert report["sar"]["overall_sar_db"] > 15.0
        assert report["qp_kkt_residual"] < 1e-9
        echoed = json.loads((tmp_path / "effective_config.json").read_text())
        assert echoed["bank"]["M"] == 8

    def test_method_flag_overrides_config(self, tmp_path):
        p = _write(tmp_path / "c.json", SMALL_BANK)
        rc = main(["design", "--config", p, "--out", str(tmp_path),
                   "--method", "method_b"])
        assert rc == 0
        echoed = json.loads((tmp_path / "effective_config.json").read_text())
        assert echoed["design"]["method"] == "method_b"

    def test_invalid_method_in_config(self, tmp_path):
        cfg = dict(SMALL_BANK)
        cfg["design"] = {"method": "magic"}
        p = _write(tmp_path / "c.json", cfg)
        assert main(["design", "--config", p, "--out", str(tmp_path)]) == 2


class TestEvaluateCommand:
    def test_reference_prototype_report(self, tmp_path):
        ha, gs = ref.reference_prototypes("spec1")
        a = _coeff_csv(tmp_path / "h.csv", ha.coeffs)
        s = _coeff_csv(tmp_path / "g.csv", gs.coeffs)
        rc = main(["evaluate", "--out", str(tmp_path), "--analysis", a,
                   "--synthesis", s])
        assert rc == 0
        rep = json.loads((tmp_path / "sar_report.json").read_text())
        assert 35.0 < rep["overall_sar_db"] < 45.0
        with open(tmp_path / "sar_report.csv") as f:
            assert len(list(csv.DictReader(f))) == 16
        assert (tmp_path / "overall_response.csv").exists()


class TestSimulateCommand:
    def test_short_run(self, tmp_path):
        cfg = {"sim": {"duration": 2.0}}
        p = _write(tmp_path / "c.json", cfg)
        ha, gs = ref.reference_prototypes("spec1")
        a = _coeff_csv(tmp_path / "h.csv", ha.coeffs)
        s = _coeff_csv(tmp_path / "g.csv", gs.coeffs)
        rc = main(["simulate", "--config", p, "--out", str(tmp_path),
                   "--analysis", a, "--synthesis", s, "--seed", "3"])
        assert rc == 0
        summary = json.loads((tmp_path / "sim_summary.json").read_text())
        assert not summary["diverged"]
        with open(tmp_path / "erle_trace.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) > 10

    def test_requires_synthesis(self, tmp_path):
        ha, _ = ref.reference_prototypes("spec1")
        a = _coeff_csv(tmp_path / "h.csv", ha.coeffs)
        assert main(["simulate", "--out", str(tmp_path), "--analysis", a]) == 2
