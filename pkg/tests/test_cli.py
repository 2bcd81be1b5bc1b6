"""
Tests for the command-line entry point, output writers and self-test suite.

Tests src/run_resonators.py and the src/cli package including:
- Argument parsing and exit codes
- Files written by each command
- CSV/JSON/SVG writers
- Individual invariant checks
"""

import csv
import json
import xml.etree.ElementTree as ET
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pytest

from src.cli.commands import (
    EXIT_OK,
    EXIT_SHORTFALL,
    TABLE1,
    TABLE1_GRID_POINTS,
    TABLE1_RADII,
    cmd_freqs,
    cmd_splitting,
    cmd_table1,
    total_relative_error,
)
from src.cli.selftest import (
    EXIT_SELFTEST_FAILED,
    CheckResult,
    check_conjugation_symmetry,
    check_determinant_oracle,
    check_hybridization,
    check_limits,
    check_series_switch,
    check_wronskian,
    leibniz_det,
    run_selftest,
)
from src.cli.writers import fmt, write_csv, write_json
from src.resonance.dispersion import DispersionMatrix, assemble
from src.resonance.rootfind import find_subwavelength_roots
from src.run_resonators import main, parse_args

RUNS_DIR = Path(__file__).parent.parent / "config" / "runs"
SHIPPED_RUNS = sorted(RUNS_DIR.glob("*.json"))


def read_rows(path: Path) -> list[dict]:
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


# =============================================================================
# ARGUMENT PARSING
# =============================================================================


class TestParseArgs:
    """Tests for parse_args."""

    def test_common_flags_on_subcommand(self):
        """Test shared flags are accepted after the subcommand."""
        args = parse_args(["freqs", "--layers", "8", "--delta", "0.001", "--omega-max", "0.5"])
        assert args.command == "freqs"
        assert args.layers == 8
        assert args.delta == 0.001
        assert args.omega_max == 0.5
        assert args.config is None

    def test_command_required(self):
        """Test a missing subcommand exits with a usage error."""
        with pytest.raises(SystemExit):
            parse_args([])

    def test_format_choices(self):
        """Test an unknown output format is rejected."""
        with pytest.raises(SystemExit):
            parse_args(["freqs", "--format", "png"])


# =============================================================================
# COMMANDS THROUGH main()
# =============================================================================


class TestMain:
    """Tests for main() exit codes and written files."""

    def test_freqs_single_ball(self, tmp_path: Path, clean_env):
        """Test freqs on the unit ball writes one root to spectrum.csv."""
        code = main(
            ["freqs", "--layers", "1", "--delta", "1e-4", "--out", str(tmp_path), "--format", "csv"]
        )
        assert code == 0
        rows = read_rows(tmp_path / "spectrum.csv")
        assert len(rows) == 1
        assert float(rows[0]["re_omega"]) == pytest.approx(0.0173205, abs=1e-5)
        assert float(rows[0]["im_omega"]) < 0

    def test_freqs_all_formats(self, tmp_path: Path, clean_env):
        """Test the JSON document carries metadata and the SVG parses."""
        assert main(["freqs", "--layers", "2", "--delta", "1e-3", "--out", str(tmp_path)]) == 0
        document = json.loads((tmp_path / "spectrum.json").read_text())
        assert document["metadata"]["command"] == "freqs"
        assert document["metadata"]["config"]["radii"] == [2.0, 1.0]
        assert document["expected"] == 1
        assert len(document["roots"]) == 1
        assert ET.parse(tmp_path / "spectrum.svg").getroot().tag.endswith("svg")

    def test_csv_is_byte_stable(self, tmp_path: Path, clean_env):
        """Test two identical runs write identical CSV bytes."""
        for name in ("a", "b"):
            out = tmp_path / name
            argv = ["freqs", "--layers", "3", "--delta", "1e-3", "--out", str(out)]
            assert main(argv + ["--format", "csv"]) == 0
        first = (tmp_path / "a" / "spectrum.csv").read_bytes()
        assert first == (tmp_path / "b" / "spectrum.csv").read_bytes()
        assert b"\r\n" not in first

    def test_shortfall_exit_code(self, tmp_path: Path, clean_env):
        """Test a window below every root exits with 2 and still writes the partial list."""
        argv = ["freqs", "--layers", "4", "--delta", "0.01", "--omega-max", "0.01"]
        code = main(argv + ["--out", str(tmp_path), "--format", "csv"])
        assert code == 2
        assert read_rows(tmp_path / "spectrum.csv") == []

    def test_increasing_radii_config(self, tmp_path: Path, write_run_config, clean_env):
        """Test a configuration with increasing radii exits with 1."""
        path = write_run_config({"radii": [1.0, 2.0], "delta": 0.01})
        assert main(["freqs", "--config", str(path), "--out", str(tmp_path / "out")]) == 1
        assert not (tmp_path / "out").exists()

    def test_missing_config(self, tmp_path: Path, clean_env):
        """Test a missing configuration file exits with 1."""
        assert main(["freqs", "--config", str(tmp_path / "absent.json")]) == 1

    def test_dry_run(self, tmp_path: Path, clean_env):
        """Test a dry run validates without writing anything."""
        out = tmp_path / "out"
        assert main(["modes", "--layers", "50", "--out", str(out), "--dry-run"]) == 0
        assert not out.exists()

    def test_selftest_dry_run(self, clean_env):
        """Test selftest --dry-run returns 0 without running checks."""
        assert main(["selftest", "--dry-run"]) == 0

    def test_selftest_report_on_stdout(self, tmp_path: Path, monkeypatch, capsys, clean_env):
        """Test selftest prints and saves a JSON report built from numpy comparisons."""
        monkeypatch.setattr("src.cli.selftest.CHECKS", (check_wronskian, check_limits))
        assert main(["selftest", "--out", str(tmp_path)]) == 0
        printed = json.loads(capsys.readouterr().out)
        saved = json.loads((tmp_path / "selftest.json").read_text())
        assert printed == saved
        assert saved["passed"] is True
        assert [c["passed"] for c in saved["checks"]] == [True, True]

    @pytest.mark.parametrize("path", SHIPPED_RUNS, ids=lambda p: p.stem)
    def test_shipped_config_dry_run(self, path: Path, tmp_path: Path, clean_env):
        """Test every shipped run configuration validates through the command line."""
        assert main(["freqs", "--config", str(path), "--out", str(tmp_path), "--dry-run"]) == 0

    @pytest.mark.slow
    def test_fifty_layer_config(self, tmp_path: Path, clean_env):
        """Test the shipped 50-layer configuration yields all 25 roots."""
        path = RUNS_DIR / "equidistant_50.json"
        argv = ["freqs", "--config", str(path), "--out", str(tmp_path), "--format", "csv"]
        assert main(argv) == 0
        assert len(read_rows(tmp_path / "spectrum.csv")) == 25

    def test_asymptotic_five_layers(self, tmp_path: Path, clean_env):
        """Test asymptotic on five layers exits with 1."""
        assert main(["asymptotic", "--layers", "5", "--out", str(tmp_path)]) == 1

    def test_asymptotic_two_layers(self, tmp_path: Path, clean_env):
        """Test the shell writes its frequency and the CVR sweep."""
        assert main(["asymptotic", "--layers", "2", "--delta", "1e-4", "--out", str(tmp_path)]) == 0
        (row,) = read_rows(tmp_path / "asymptotic.csv")
        assert float(row["leading"]) == pytest.approx(np.sqrt(6 / 7))
        sweep = read_rows(tmp_path / "cvr_sweep.csv")
        assert len(sweep) == 19
        ET.parse(tmp_path / "cvr_sweep.svg")

    def test_asymptotic_four_layers_hybridization(self, tmp_path: Path, clean_env):
        """Test the four-layer JSON reports the hybridization check."""
        argv = ["asymptotic", "--layers", "4", "--delta", "1e-4", "--out", str(tmp_path)]
        assert main(argv + ["--format", "json"]) == 0
        document = json.loads((tmp_path / "asymptotic.json").read_text())
        assert len(document["frequencies"]) == 2
        assert document["hybridization"]["ordering_holds"] is True

    def test_asymptotic_capacity_form(self, tmp_path: Path, write_run_config, clean_env):
        """Test a capacity/volume pair uses the general single-resonator formula."""
        path = write_run_config(
            {
                "equidistant": 1,
                "delta": 1e-4,
                "capacity": {"cap": 1.0, "vol": 1.0},
                "output": {"directory": str(tmp_path), "formats": "csv"},
            }
        )
        assert main(["asymptotic", "--config", str(path)]) == 0
        (row,) = read_rows(tmp_path / "asymptotic.csv")
        assert float(row["re_omega"]) == pytest.approx(1e-2)

    def test_modes_single_ball(self, tmp_path: Path, clean_env):
        """Test modes writes radial and plane samples, plot and summary."""
        assert main(["modes", "--layers", "1", "--delta", "1e-4", "--out", str(tmp_path)]) == 0
        modes = tmp_path / "modes"
        for name in ("mode_1_radial.csv", "mode_1_plane.csv", "mode_1.svg", "modes.json"):
            assert (modes / name).exists()
        radial = read_rows(modes / "mode_1_radial.csv")
        assert len(radial) == 801
        assert {row["region"] for row in radial} == {"0", "1"}
        summary = json.loads((modes / "modes.json").read_text())["modes"]
        assert summary[0]["kernel_residual"] <= 1e-6
        ET.parse(modes / "mode_1.svg")

    def test_splitting(self, tmp_path: Path, clean_env):
        """Test splitting over N = 1..3 writes 1 + 1 + 2 rows."""
        argv = ["splitting", "--layers", "3", "--delta", "1e-3", "--out", str(tmp_path)]
        assert main(argv + ["--format", "csv"]) == 0
        rows = read_rows(tmp_path / "splitting.csv")
        assert [row["N"] for row in rows] == ["1", "2", "3", "3"]

    @pytest.mark.slow
    def test_table1(self, tmp_path: Path, clean_env):
        """Test the four-layer regression reproduces every reference entry."""
        assert main(["table1", "--out", str(tmp_path), "--format", "csv"]) == 0
        assert len(read_rows(tmp_path / "table1.csv")) == 2 * len(TABLE1)


# =============================================================================
# COMMANDS CALLED DIRECTLY
# =============================================================================


class TestCommands:
    """Tests for the cmd_* functions on resolved configurations."""

    def test_freqs_json_only(self, run_config, tmp_path: Path):
        """Test a JSON-only run writes no CSV or SVG and records the most damped root."""
        config = run_config({"equidistant": 3, "delta": 1e-3}, format="json")
        assert cmd_freqs(config) == EXIT_OK
        out = tmp_path / "out"
        assert sorted(p.name for p in out.iterdir()) == ["spectrum.json"]
        document = json.loads((out / "spectrum.json").read_text())
        assert document["expected"] == 2
        assert document["most_damped"] in (1, 2)

    def test_splitting_shortfall(self, run_config):
        """Test a window below the roots makes splitting exit with 2."""
        config = run_config({"equidistant": 2, "delta": 0.01, "search": {"omega_max": 1e-4}})
        assert cmd_splitting(config) == EXIT_SHORTFALL

    def test_table1_caps_scan_grid(self, run_config, monkeypatch):
        """Test table1 searches on the coarse grid and still reproduces the reference roots."""
        grids = []

        def recording_search(geom, medium, n, cfg):
            grids.append(cfg.grid_points)
            return find_subwavelength_roots(geom, medium, n, cfg)

        monkeypatch.setattr("src.cli.commands.find_subwavelength_roots", recording_search)
        config = run_config({"radii": list(TABLE1_RADII), "delta": 0.01}, format="csv")
        assert cmd_table1(config) == EXIT_OK
        assert grids == [TABLE1_GRID_POINTS] * len(TABLE1)


# =============================================================================
# WRITERS
# =============================================================================


class TestWriters:
    """Tests for fmt, write_csv and write_json."""

    def test_float_cells_round_trip(self):
        """Test floats keep 17 significant digits."""
        value = 0.1 + 0.2
        assert float(fmt(value)) == value
        assert fmt(np.float64(1 / 3)) == "0.33333333333333331"

    def test_non_float_cells(self):
        """Test ints and strings pass through str()."""
        assert fmt(3) == "3"
        assert fmt("1/100") == "1/100"

    def test_csv_creates_parents(self, tmp_path: Path):
        """Test parent directories are created and lines end with LF."""
        path = write_csv(tmp_path / "a" / "b.csv", ["x", "y"], [(1, 0.5)])
        assert path.read_bytes() == b"x,y\n1,0.5\n"

    def test_json_metadata_and_complex(self, tmp_path: Path):
        """Test the metadata object and complex encoding."""
        path = write_json(tmp_path / "d.json", "freqs", {"omega": 1 - 2j}, {"radii": (2.0, 1.0)})
        document = json.loads(path.read_text())
        assert document["metadata"]["command"] == "freqs"
        assert document["metadata"]["config"] == {"radii": [2.0, 1.0]}
        assert document["omega"] == {"re": 1.0, "im": -2.0}


# =============================================================================
# SELF-TEST CHECKS
# =============================================================================


def _mutated_assembler(geom, medium, omega, n=0):
    """Assembler with one entry multiplied by i."""
    matrix = assemble(geom, medium, omega, n)
    entries = matrix.entries.copy()
    entries[1, 1] *= 1j
    return DispersionMatrix(order_n=matrix.order_n, omega=matrix.omega, entries=entries)


class TestSelftest:
    """Tests for the individual invariant checks."""

    def test_leibniz_matches_numpy(self):
        """Test the permutation-sum determinant on a random 4x4 matrix."""
        rng = np.random.default_rng(0)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert leibniz_det(m) == pytest.approx(np.linalg.det(m), rel=1e-12)

    def test_check_result_plain_bool(self):
        """Test a numpy comparison is stored as a plain bool and encodes as JSON."""
        result = CheckResult("x", np.float64(1e-12) <= 1e-11, "detail")
        assert type(result.passed) is bool
        assert json.loads(json.dumps(asdict(result)))["passed"] is True

    @pytest.mark.parametrize(
        "check",
        [
            check_wronskian,
            check_series_switch,
            check_conjugation_symmetry,
            check_determinant_oracle,
            check_limits,
            check_hybridization,
        ],
    )
    def test_fast_checks_pass(self, check):
        """Test each fast check passes on the shipped implementation."""
        result = check()
        assert result.passed, result.detail

    def test_symmetry_check_catches_mutation(self):
        """Test an entry multiplied by i breaks the conjugation symmetry check."""
        assert not check_conjugation_symmetry(assembler=_mutated_assembler).passed

    def test_table1_relative_errors(self):
        """Test the embedded reference values reproduce their total relative error."""
        for row in TABLE1:
            error = total_relative_error(list(row.formula), list(row.computed))
            assert error == pytest.approx(row.total_error_percent, abs=5e-3)

    @pytest.mark.slow
    def test_run_selftest(self, tmp_path: Path):
        """Test the full suite passes and writes its report."""
        report, code = run_selftest(tmp_path)
        assert code == 0, report["failed"]
        assert code != EXIT_SELFTEST_FAILED
        saved = json.loads((tmp_path / "selftest.json").read_text())
        assert saved["passed"] is True
        assert len(saved["checks"]) == 9
