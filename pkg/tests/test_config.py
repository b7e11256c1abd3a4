import pytest

from rfi_scrub.config import PipelineConfig, nest
from rfi_scrub.core import ConfigError


def test_defaults():
    cfg = PipelineConfig.from_dict({})
    assert cfg.blocks is None and cfg.pca_rank == 1
    assert cfg.notch.rule == "peak-relative" and cfg.estimator.mode == "mmv"


def test_dotted_and_nested_agree():
    a = PipelineConfig.from_dict({"notch.kappa": 7, "solver.max_iters": 50, "estimator.l_max": 2})
    b = PipelineConfig.from_dict({"notch": {"kappa": 7}, "solver": {"max_iters": 50}, "estimator": {"l_max": 2}})
    assert a == b
    assert a.estimator.solver.max_iters == 50


def test_blocks_and_baselines():
    cfg = PipelineConfig.from_dict({"blocks": {"rows": 64, "cols": 32, "overlap": 8},
                                    "baselines.pca_rank": 2, "baselines.rpca_max_iters": 10})
    assert cfg.blocks.block_rows == 64 and cfg.blocks.overlap == 8
    assert cfg.pca_rank == 2 and cfg.rpca.max_iters == 10


def test_grids_and_roi():
    cfg = PipelineConfig.from_dict({"estimator": {
        "roi": [0, 0, 32, 32],
        "azimuth_grid": {"freq_min": 0, "freq_max": 1, "freq_count": 3,
                         "rate_min": -0.01, "rate_max": 0.01, "rate_count": 5}}})
    assert cfg.estimator.roi == (0, 0, 32, 32)
    assert cfg.estimator.azimuth_grid.sign == "azimuth" and cfg.estimator.azimuth_grid.size == 15


@pytest.mark.parametrize("bad", [
    {"notch.kapa": 3},
    {"widgets": {}},
    {"notch": 5},
    {"notch.rule": "magic"},
    {"blocks": {"rows": 32}},
    {"blocks": {"rows": 4, "cols": 4}},
    {"solver.lambda_rel": 2.0},
    {"estimator.l_max": "many"},
])
def test_rejects(bad):
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(bad)


def test_nest_keeps_top_level_keys():
    assert nest({"schema": "x", "seed": 3}) == {"schema": "x", "seed": 3}
