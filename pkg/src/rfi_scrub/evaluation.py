"""Monte-Carlo comparison of removal methods across SIR levels.

Every trial simulates a corrupted image, runs each method and scores the
result against the clean scene. Trial ``t`` uses seed ``base_seed + t`` at
every SIR point, so methods and SIR levels are compared on the same scenes
and running trials in parallel cannot change the numbers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .baselines import RpcaNotConvergedWarning, pca_removal, rpca_scene
from .config import PipelineConfig
from .core import ConfigError
from .estimator import estimate_fm_rates
from .metrics import average_gradient, relative_recovery_error
from .simulator import SimulationSpec, simulate
from .suppressor import process_blocks, remove_components

METHODS = ("proposed", "specan1", "pca", "rpca")


def sir_points(start, stop, step):
    if not step > 0:
        raise ConfigError("sir step must be positive")
    if stop < start:
        raise ConfigError("sir range is empty")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def run_methods(X, methods, cfg: PipelineConfig):
    """Scene estimate of every requested method for one corrupted image."""
    out = {}
    specan = [m for m in methods if m in ("proposed", "specan1")]
    if specan and cfg.blocks is not None:
        for m in specan:
            est_cfg = cfg.estimator if m == "proposed" else replace(cfg.estimator, l_max=1)
            out[m] = process_blocks(X, cfg.blocks, est_cfg, cfg.notch)[0]
    elif specan:
        # specan1 keeps only the heaviest cluster of the same estimate
        est = estimate_fm_rates(X, cfg.estimator)
        for m in specan:
            out[m] = remove_components(X, est, cfg.notch, None if m == "proposed" else 1)[0]
    if "pca" in methods:
        out["pca"] = pca_removal(X, cfg.pca_rank)[0]
    if "rpca" in methods:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RpcaNotConvergedWarning)
            out["rpca"] = rpca_scene(X, cfg.rpca)[0]
    return out


def run_trial(spec: SimulationSpec, methods, cfg: PipelineConfig):
    sim = simulate(spec)
    scenes = run_methods(sim.corrupted, methods, cfg)
    return {
        "seed": spec.seed,
        "ag_clean": average_gradient(sim.clean),
        "ag_corrupted": average_gradient(sim.corrupted),
        "rel_err_db_corrupted": relative_recovery_error(sim.corrupted, sim.clean),
        "methods": {m: {"rel_err_db": relative_recovery_error(scenes[m], sim.clean),
                        "ag": average_gradient(scenes[m])} for m in methods},
    }


def run_sweep(template: SimulationSpec, sirs, trials, methods=METHODS, cfg: PipelineConfig | None = None,
              workers=1, progress=None):
    """Sweep report: one entry per (SIR, method) with the mean error and every trial value."""
    cfg = cfg or PipelineConfig()
    methods = list(methods)
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"methods must be drawn from {METHODS}, got {methods}")
    if int(trials) < 1:
        raise ConfigError("trials must be >= 1")
    jobs = [(sir, t) for sir in sirs for t in range(int(trials))]

    def work(job):
        sir, t = job
        spec = replace(template, sir_db=float(sir), seed=int(template.seed) + t)
        res = run_trial(spec, methods, cfg)
        if progress:
            progress(sir, t)
        return job, res

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = dict(pool.map(work, jobs))
    else:
        done = dict(map(work, jobs))

    results, references = [], []
    for sir in sirs:
        rows = [done[(sir, t)] for t in range(int(trials))]
        references.append({
            "sir_db": sir,
            "seeds": [r["seed"] for r in rows],
            "ag_clean": [r["ag_clean"] for r in rows],
            "ag_corrupted": [r["ag_corrupted"] for r in rows],
            "rel_err_db_corrupted": [r["rel_err_db_corrupted"] for r in rows],
        })
        for m in methods:
            errs = np.array([r["methods"][m]["rel_err_db"] for r in rows])
            std = float(errs.std(ddof=1)) if errs.size > 1 else 0.0
            results.append({
                "sir_db": sir, "method": m,
                "mean_rel_err_db": float(errs.mean()),
                "std_rel_err_db": std,
                "sem_rel_err_db": std / math.sqrt(errs.size),
                "trials": errs.tolist(),
                "ag": [r["methods"][m]["ag"] for r in rows],
            })
    return {
        "schema": "rfi-scrub/sweep/1",
        "sir_points": list(sirs),
        "methods": methods,
        "trials": int(trials),
        "base_seed": int(template.seed),
        "results": results,
        "references": references,
    }
