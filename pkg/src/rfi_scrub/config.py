"""Pipeline configuration from JSON-like mappings.

Sections are ``solver``, ``estimator``, ``notch``, ``blocks`` and
``baselines``. Keys can be nested (``{"notch": {"kappa": 8}}``) or dotted
(``{"notch.kappa": 8}``). Unknown keys are rejected so typos fail loudly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import RpcaConfig
from .core import ConfigError, RfiScrubError
from .dictionary import AZIMUTH, RANGE, ParameterGrid
from .estimator import EstimatorConfig
from .solver import SolverConfig
from .suppressor import BlockSpec, NotchConfig

_KEYS = {
    "solver": {"lambda_rel", "max_iters", "tol", "acceleration"},
    "estimator": {"mode", "l_max", "rel_weight_floor", "roi", "detect_pfa", "mmv_rank",
                  "azimuth_grid", "range_grid"},
    "notch": {"rule", "kappa", "quantile_q", "peak_fraction", "dilation", "oversample"},
    "blocks": {"rows", "cols", "overlap", "taper"},
    "baselines": {"pca_rank", "rpca_lambda", "rpca_tol", "rpca_max_iters", "rpca_image_part"},
}
_TOP = {"schema", "seed"}


def nest(flat: dict) -> dict:
    """Fold dotted keys into nested sections and validate key names."""
    out = {}
    for key, value in flat.items():
        if key in _TOP:
            out[key] = value
            continue
        if "." in key:
            section, name = key.split(".", 1)
            items = {name: value}
        else:
            section, items = key, value
            if not isinstance(items, dict):
                raise ConfigError(f"config section {section!r} must be an object")
        if section not in _KEYS:
            raise ConfigError(f"unknown config section {section!r}")
        unknown = set(items) - _KEYS[section]
        if unknown:
            raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
        out.setdefault(section, {}).update(items)
    return out


@dataclass
class PipelineConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    notch: NotchConfig = field(default_factory=NotchConfig)
    blocks: BlockSpec | None = None
    pca_rank: int = 1
    rpca: RpcaConfig = field(default_factory=RpcaConfig)

    @classmethod
    def from_dict(cls, d: dict | None):
        d = nest(d or {})
        try:
            solver = SolverConfig.from_dict(d.get("solver", {}))
            est = dict(d.get("estimator", {}))
            for key, sign in (("azimuth_grid", AZIMUTH), ("range_grid", RANGE)):
                if est.get(key) is not None:
                    est[key] = ParameterGrid.from_dict(est[key], sign)
            if est.get("roi") is not None:
                est["roi"] = tuple(int(v) for v in est["roi"])
            estimator = EstimatorConfig(solver=solver, **est)
            notch = NotchConfig(**d.get("notch", {}))
            blocks = None
            if "blocks" in d:
                b = d["blocks"]
                if "rows" not in b or "cols" not in b:
                    raise ConfigError("blocks needs 'rows' and 'cols'")
                blocks = BlockSpec(int(b["rows"]), int(b["cols"]), int(b.get("overlap", 32)),
                                   b.get("taper", "raised-cosine"))
            base = d.get("baselines", {})
            rpca = RpcaConfig(lambda_weight=base.get("rpca_lambda"), tol=base.get("rpca_tol", 1e-7),
                              max_iters=base.get("rpca_max_iters", 500),
                              image_part=base.get("rpca_image_part", "sparse"))
            pca_rank = int(base.get("pca_rank", 1))
        except RfiScrubError as exc:
            raise ConfigError(str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from None
        return cls(solver, estimator, notch, blocks, pca_rank, rpca)
