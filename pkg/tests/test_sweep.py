"""
Tests for the sweep pipeline: protocol labels, heat maps, configuration,
end-to-end runs and the command-line front end.
"""

import json
import math

import pytest
from pydantic import ValidationError

from app.cli import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_PARTIAL_FAILURE, main
from core.exceptions import SchemaError, UnsupportedParameterizationError
from core.memory.params import MemoryParams
from core.optimizer.cache import OptimumCache
from core.optimizer.models import OptimumRecord
from data_pipeline import analyses
from data_pipeline.config import SweepConfig, load_config_document, log_axis
from data_pipeline.heatmap import emit_heatmap, read_heatmap
from data_pipeline.protocols import ProtocolLabel, classify_protocol
from data_pipeline.sweep import ERRORS_HEADER, run

D_VALUES = (5.0, 20.0)
G_VALUES = (0.1, 1.0)

COARSE_SOLVER = {"n_z": 30, "dt": 0.01}


def _gaussian_record(d, g, theta=math.pi, delay=1.0, fwhm=0.5, efficiency=0.5):
    return OptimumRecord(
        d=d,
        g=g,
        kind="gaussian",
        params=(theta, delay, fwhm),
        efficiency=efficiency,
        evaluations=100,
        converged=True,
    )


def _seed_cache(out_dir):
    """Pre-compute optima so the sweep only runs the analysis."""
    cache = OptimumCache(out_dir / "optima.jsonl")
    for d in D_VALUES:
        for g in G_VALUES:
            cache.put(_gaussian_record(d, g, fwhm=0.4 + 0.1 * g))
    cache.save()


def _config(out_dir, **overrides):
    fields = dict(
        kind="fluctuations",
        d_values=D_VALUES,
        g_values=G_VALUES,
        samples=10,
        seed=7,
        solver=COARSE_SOLVER,
        output_dir=str(out_dir),
    )
    fields.update(overrides)
    return SweepConfig(**fields)


# ============================================
# PROTOCOL LABELS
# ============================================

class TestProtocols:
    """Heuristic protocol classification."""

    @pytest.mark.parametrize(
        "d,g,params,label",
        [
            (50.0, 0.1, (math.pi, 1.0, 0.5), ProtocolLabel.ATT),
            (50.0, 1.0, (2.0 * math.pi, 0.0, 1.0), ProtocolLabel.ATS),
            (10.0, 2.0, (6.0 * math.pi, 0.5, 3.0), ProtocolLabel.EIT),
            (1.0, 1.0, (4.0 * math.pi, 0.5, 1.0), ProtocolLabel.MIXED),
            (50.0, 0.1, (math.pi, 0.0, 0.5), ProtocolLabel.MIXED),
        ],
    )
    def test_labels(self, d, g, params, label):
        theta, delay, fwhm = params
        record = _gaussian_record(d, g, theta=theta, delay=delay, fwhm=fwhm)
        assert classify_protocol(MemoryParams(d=d, g=g), record) is label

    def test_spline_not_supported(self):
        record = OptimumRecord(
            d=10.0,
            g=0.1,
            kind="spline",
            params=(0.0, 1.0, 1.0, 0.0),
            knots=(0.0, 1.0, 2.0, 3.0),
            efficiency=0.4,
            evaluations=10,
            converged=False,
        )
        with pytest.raises(UnsupportedParameterizationError):
            classify_protocol(MemoryParams(d=10.0, g=0.1), record)


# ============================================
# HEAT MAPS
# ============================================

class TestHeatmap:
    """CSV emission and parsing."""

    def test_round_trip_sorted(self, tmp_path):
        rows = [
            {"d": 20.0, "g": 0.1, "protocol": "ATT", "eta": 0.1 + 0.2, "converged": True},
            {"d": 5.0, "g": 1.0, "protocol": "mixed", "eta": 1.0 / 3.0, "converged": False},
            {"d": 5.0, "g": 0.1, "protocol": ProtocolLabel.EIT, "eta": 2.0 ** -0.5, "converged": True},
        ]
        path = emit_heatmap(rows, tmp_path / "map.csv")
        frame = read_heatmap(path)

        assert list(frame.columns) == ["d", "g", "protocol", "eta", "converged"]
        assert list(zip(frame["d"], frame["g"])) == [(5.0, 0.1), (5.0, 1.0), (20.0, 0.1)]
        assert list(frame["eta"]) == [2.0 ** -0.5, 1.0 / 3.0, 0.1 + 0.2]
        assert list(frame["protocol"]) == ["EIT", "mixed", "ATT"]
        assert list(frame["converged"]) == [1, 0, 1]

    def test_line_endings(self, tmp_path):
        path = emit_heatmap([{"d": 1.0, "g": 1.0, "protocol": "ATS", "x": 1.5}], tmp_path / "map.csv")
        assert path.read_bytes() == b"d,g,protocol,x\n1.0,1.0,ATS,1.5\n"

    def test_empty_rows(self, tmp_path):
        with pytest.raises(SchemaError):
            emit_heatmap([], tmp_path / "map.csv")

    def test_mismatched_columns(self, tmp_path):
        rows = [
            {"d": 1.0, "g": 1.0, "protocol": "ATS", "eta": 0.5},
            {"d": 2.0, "g": 1.0, "protocol": "ATS", "sigma": 0.5},
        ]
        with pytest.raises(SchemaError):
            emit_heatmap(rows, tmp_path / "map.csv")

    def test_leading_columns_required(self, tmp_path):
        with pytest.raises(SchemaError):
            emit_heatmap([{"g": 1.0, "d": 1.0, "protocol": "ATS"}], tmp_path / "map.csv")


# ============================================
# CONFIGURATION
# ============================================

class TestSweepConfig:
    """Validation and seeds."""

    def test_default_axes(self):
        cfg = SweepConfig()
        assert len(cfg.d_values) == 20 and len(cfg.g_values) == 18
        assert cfg.d_values[0] == 1.0 and cfg.d_values[-1] == 100.0
        assert cfg.g_values[0] == 0.01 and cfg.g_values[-1] == 3.0

    def test_log_axis_rounding(self):
        assert log_axis(1.0, 100.0, 3) == [1.0, 10.0, 100.0]

    def test_points_are_d_major(self, tmp_path):
        cfg = _config(tmp_path)
        assert cfg.points == [(0, 5.0, 0.1), (1, 5.0, 1.0), (2, 20.0, 0.1), (3, 20.0, 1.0)]

    def test_point_seeds(self, tmp_path):
        cfg = _config(tmp_path)
        seeds = [cfg.point_seed(i) for i, _, _ in cfg.points]
        assert len(set(seeds)) == len(seeds)
        assert seeds == [_config(tmp_path).point_seed(i) for i in range(4)]
        assert seeds != [_config(tmp_path, seed=8).point_seed(i) for i in range(4)]

    @pytest.mark.parametrize(
        "overrides",
        [
            {"d_values": (20.0, 5.0)},
            {"g_values": (0.0, 1.0)},
            {"d_values": ()},
            {"grid_m": 32},
            {"samples": 0},
            {"kind": "oat", "eps_g": 0.0},
            {"kind": "slopes", "slope_epsilons": (0.05,)},
            {"kind": "unknown"},
        ],
    )
    def test_invalid(self, tmp_path, overrides):
        with pytest.raises(ValidationError):
            _config(tmp_path, **overrides)

    def test_manifest_is_a_config(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"config": {"kind": "oat"}, "seed": 0}), encoding="utf-8")
        assert load_config_document(path) == {"kind": "oat"}

    def test_plain_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"kind": "sobol", "grid_m": 9}), encoding="utf-8")
        assert load_config_document(path) == {"kind": "sobol", "grid_m": 9}


# ============================================
# END-TO-END
# ============================================

class TestRun:
    """Full sweeps on a 2 x 2 grid with cached optima and a coarse solver."""

    def test_fluctuation_sweep(self, tmp_path):
        out = tmp_path / "run"
        _seed_cache(out)
        result = run(_config(out))

        assert not result.partial
        lines = result.data_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        assert lines[0] == "d,g,protocol,eta_opt,eta_mean,sigma_eta"

        frame = read_heatmap(result.data_path)
        assert (frame["sigma_eta"] >= 0).all()
        assert ((frame["eta_mean"] >= 0) & (frame["eta_mean"] <= 1)).all()

        assert (out / "errors.csv").read_text(encoding="utf-8") == ",".join(ERRORS_HEADER) + "\n"
        manifest = json.loads(result.manifest_path.read_text(encoding="utf-8"))
        assert manifest["seed"] == 7
        assert manifest["summary"] == {"points": 4, "rows": 4, "errors": 0}
        assert "protocol_thresholds" in manifest

    def test_reproducible(self, tmp_path):
        first_dir, second_dir, parallel_dir, replay_dir = (tmp_path / n for n in ("a", "b", "c", "d"))
        for out in (first_dir, second_dir, parallel_dir, replay_dir):
            _seed_cache(out)

        first = run(_config(first_dir))
        second = run(_config(second_dir))
        parallel = run(_config(parallel_dir, workers=2))

        document = load_config_document(first.manifest_path)
        document["output_dir"] = str(replay_dir)
        replay = run(SweepConfig.model_validate(document))

        reference = first.data_path.read_bytes()
        assert second.data_path.read_bytes() == reference
        assert parallel.data_path.read_bytes() == reference
        assert replay.data_path.read_bytes() == reference

    def test_oat_sweep(self, tmp_path):
        out = tmp_path / "oat"
        _seed_cache(out)
        result = run(_config(out, kind="oat", oat_m=3))
        frame = read_heatmap(result.data_path)
        assert list(frame.columns) == ["d", "g", "protocol", "eta_opt", "sigma_area", "sigma_delay", "sigma_duration"]
        assert len(frame) == 4

    def test_fidelity_uses_cached_grid(self, tmp_path):
        out = tmp_path / "fidelity"
        _seed_cache(out)
        result = run(_config(out, kind="fidelity", fidelity_samples=4, fidelity_radius=0.2))
        frame = read_heatmap(result.data_path)
        assert len(frame) == 4
        assert ((frame["fidelity_mean"] > 0) & (frame["fidelity_mean"] <= 1)).all()

    def test_partial_failure(self, tmp_path, monkeypatch):
        def flaky(ctx):
            if ctx.task.index == 1:
                raise RuntimeError("solver exploded")
            return {"eta": ctx.gaussian.efficiency}, {}

        monkeypatch.setitem(analyses.ANALYSES, "optimize", flaky)
        out = tmp_path / "partial"
        _seed_cache(out)
        result = run(_config(out, kind="optimize"))

        assert result.partial
        assert len(result.rows) == 3
        errors = (out / "errors.csv").read_text(encoding="utf-8").splitlines()
        assert errors[0] == ",".join(ERRORS_HEADER)
        assert errors[1] == "1,5.0,1.0,RuntimeError,solver exploded"
        assert len(result.data_path.read_text(encoding="utf-8").splitlines()) == 4


# ============================================
# COMMAND LINE
# ============================================

class TestCli:
    """Exit codes of the command-line entry point."""

    @pytest.fixture
    def cli_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps({"d_values": list(D_VALUES), "g_values": list(G_VALUES), "solver": COARSE_SOLVER}),
            encoding="utf-8",
        )
        return path

    def test_success(self, tmp_path, cli_config):
        out = tmp_path / "cli"
        _seed_cache(out)
        code = main(["optimize", "--config", str(cli_config), "--out", str(out), "--log-level", "WARNING"])
        assert code == EXIT_OK
        assert (out / "optimize.csv").exists()
        assert (out / "manifest.json").exists()

    def test_sweep_subcommand(self, tmp_path, cli_config):
        out = tmp_path / "cli"
        _seed_cache(out)
        code = main(["sweep", "--kind", "optimize", "--config", str(cli_config), "--out", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["kind"] == "optimize"

    def test_missing_config_file(self, tmp_path):
        code = main(["optimize", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "x")])
        assert code == EXIT_CONFIG_ERROR

    def test_invalid_flag_value(self, tmp_path, cli_config):
        code = main(["fluctuations", "--config", str(cli_config), "--eps-m", "-0.5", "--out", str(tmp_path / "x")])
        assert code == EXIT_CONFIG_ERROR

    def test_partial_failure(self, tmp_path, cli_config, monkeypatch):
        def broken(ctx):
            raise ValueError("bad point")

        monkeypatch.setitem(analyses.ANALYSES, "optimize", broken)
        out = tmp_path / "cli"
        _seed_cache(out)
        code = main(["optimize", "--config", str(cli_config), "--out", str(out)])
        assert code == EXIT_PARTIAL_FAILURE
