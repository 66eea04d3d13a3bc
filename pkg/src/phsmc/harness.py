"""Experiment configuration, validation and the run pipeline behind the CLI.

A config is one JSON object. ``preset`` names a shipped experiment whose
parameters are deep-merged underneath the remaining fields, so a config as
small as ``{"preset": "mixture-phs", "seed": 1}`` is complete::

    {
      "preset": "linreg-pt",
      "seed": 12345,
      "n_iter": 50000,
      "target":  {"kind": "linreg", "data": {"generate": {"collinear": true}}},
      "sampler": {"kind": "pt", "n_chains": 9, "ladder": {"linear": 5.0},
                  "swap_mode": "pt-independent", "swap_rate": 0.2},
      "out_dir": "runs/linreg"
    }

Every run writes ``trace.csv``, ``report.json``, ``histogram.csv`` and
``manifest.json``; tree runs add ``modal_tree.json``, ``km_table.csv`` and
``covariate_inclusion.json``.
"""
from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import re
from math import comb
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import logsumexp

from . import __version__
from .diagnostics import (
    RunReport,
    Trace,
    histogram,
    mcse_with_window,
    write_histogram_csv,
    write_trace_csv,
)
from .linreg import (
    ComponentFlipSweep,
    ModelSelectionTarget,
    RegressionData,
    enumerate_exact_posterior,
    generate_dataset,
    null_model,
    read_regression_csv,
)
from .mixture import FIVE_MODE_MIXTURE, GaussianMixture, MixtureTarget, UniformWalkProposal, mode_regions
from .samplers import SwapConfig, SwapMode, TemperatureLadder, log_progress, run_mh, run_phs, run_pt
from .survival import (
    LEAF,
    LIVER_SCHEMA,
    CrossChainMove,
    RuleSpace,
    SurvivalDataset,
    SurvivalTreeTarget,
    TreeMoveProposal,
    covariate_inclusion,
    enumerate_trees,
    ingest_survival_csv,
    leaf_km_table,
    modal_tree,
    simulate_survival_data,
    tree_to_dict,
    write_km_table,
)
from .survival.tree import covariates_used

__all__ = [
    "OUT_DIR_ENV",
    "PRESETS",
    "ConfigIssue",
    "ConfigError",
    "ExperimentConfig",
    "expand_config",
    "load_config",
    "validate_config",
    "run_experiment",
    "enumerate_experiment",
]

log = logging.getLogger(__name__)

OUT_DIR_ENV = "PHSMC_OUT_DIR"
DEFAULT_OUT_DIR = "phsmc-runs"

_MIXTURE_HIST = {"lo": -13.5, "hi": 6.6, "bins": 201}

PRESETS: dict[str, dict] = {
    "mixture-phs": {
        "n_iter": 100_000,
        "target": {"kind": "mixture", "mixture": "five-mode", "init": 0.0, "histogram": _MIXTURE_HIST},
        "sampler": {"kind": "phs", "n_chains": 10, "delta": 1.0},
    },
    "mixture-mh": {
        "n_iter": 1_000_000,
        "target": {"kind": "mixture", "mixture": "five-mode", "init": 0.0, "histogram": _MIXTURE_HIST},
        "sampler": {"kind": "mh", "delta": 1.0},
    },
    "linreg-mh": {
        "n_iter": 50_000,
        "target": {"kind": "linreg", "data": {"generate": {"collinear": False, "seed": 12345}}, "init": "null"},
        "sampler": {"kind": "mh"},
    },
    "linreg-pt": {
        "n_iter": 50_000,
        "target": {"kind": "linreg", "data": {"generate": {"collinear": False, "seed": 12345}}, "init": "null"},
        "sampler": {"kind": "pt", "n_chains": 9, "ladder": {"linear": 5.0}, "swap_mode": "pt-independent", "swap_rate": 0.2},
    },
    "linreg-phs": {
        "n_iter": 50_000,
        "target": {"kind": "linreg", "data": {"generate": {"collinear": False, "seed": 12345}}, "init": "null"},
        "sampler": {"kind": "phs", "n_chains": 9},
    },
    "cart-phs": {
        "n_iter": 50_000,
        "target": {
            "kind": "cart",
            "data": {"simulate": {"n": 622, "seed": 12345}},
            "b_max": 30,
            "form": "exact",
            "init": "root",
            "km_times": [12.0, 24.0, 36.0],
        },
        "sampler": {"kind": "phs", "n_chains": 20, "cross_moves": True},
    },
}
for _s in (0.5, 0.8):
    _p = copy.deepcopy(PRESETS["linreg-pt"])
    _p["sampler"]["swap_rate"] = _s
    PRESETS[f"linreg-pt-s{_s}"] = _p

_TARGETS = ("mixture", "linreg", "cart")
_SAMPLERS = ("mh", "pt", "phs")
_TOP_KEYS = {"preset", "seed", "n_iter", "target", "sampler", "out_dir", "name"}


@dataclass(frozen=True)
class ConfigIssue:
    field: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.field}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, issues: list[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(map(str, self.issues)))


@dataclass
class ExperimentConfig:
    """A fully expanded and validated experiment."""

    seed: int
    n_iter: int
    target: dict
    sampler: dict
    out_dir: Path
    preset: str | None = None
    base_dir: Path = field(default_factory=Path.cwd)
    raw: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "preset": self.preset,
            "seed": self.seed,
            "n_iter": self.n_iter,
            "target": self.target,
            "sampler": self.sampler,
        }

    def fingerprint(self) -> str:
        """sha256 of the canonical JSON of everything that affects the draws."""
        text = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


# -- loading and validation -------------------------------------------------


def _deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _locate(text: str | None, dotted: str) -> int | None:
    """Best-effort line number of a (possibly nested) key in the JSON source."""
    if not text:
        return None
    pos = 0
    found = None
    for part in dotted.split("."):
        m = re.compile(r'"%s"\s*:' % re.escape(part)).search(text, pos)
        if m is None:
            break
        pos = m.end()
        found = m.start()
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def expand_config(raw: dict) -> dict:
    """Apply the preset named in ``raw`` underneath the explicit fields."""
    name = raw.get("preset")
    if name is None:
        return copy.deepcopy(raw)
    if name not in PRESETS:
        raise ConfigError([ConfigIssue("preset", f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}")])
    return _deep_merge(PRESETS[name], raw)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _resolve(base: Path, p: str) -> Path:
    path = Path(p).expanduser()
    return path if path.is_absolute() else base / path


def _check(cfg: dict, base: Path) -> list[tuple[str, str]]:
    """Static checks; returns ``(field, message)`` pairs."""
    bad: list[tuple[str, str]] = []
    for k in cfg:
        if k not in _TOP_KEYS:
            bad.append((k, "unknown field"))
    seed = cfg.get("seed")
    if seed is None:
        bad.append(("seed", "missing; every run needs an explicit seed"))
    elif not _is_int(seed) or seed < 0:
        bad.append(("seed", f"must be a non-negative integer, got {seed!r}"))
    n_iter = cfg.get("n_iter")
    if n_iter is None:
        bad.append(("n_iter", "missing"))
    elif not _is_int(n_iter) or n_iter < 1:
        bad.append(("n_iter", f"must be a positive integer, got {n_iter!r}"))
    if "out_dir" in cfg and not isinstance(cfg["out_dir"], str):
        bad.append(("out_dir", "must be a path string"))

    target = cfg.get("target")
    sampler = cfg.get("sampler")
    if not isinstance(target, dict):
        bad.append(("target", "missing or not an object"))
        target = {}
    if not isinstance(sampler, dict):
        bad.append(("sampler", "missing or not an object"))
        sampler = {}
    tk = target.get("kind")
    sk = sampler.get("kind")
    if tk not in _TARGETS:
        bad.append(("target.kind", f"must be one of {', '.join(_TARGETS)}, got {tk!r}"))
    if sk not in _SAMPLERS:
        bad.append(("sampler.kind", f"must be one of {', '.join(_SAMPLERS)}, got {sk!r}"))

    # sampler
    m = sampler.get("n_chains")
    if sk in ("pt", "phs"):
        if not _is_int(m):
            bad.append(("sampler.n_chains", f"must be an integer, got {m!r}"))
        elif sk == "phs" and m < 3:
            bad.append(("sampler.n_chains", f"PHS requires M >= 3 chains, got M = {m}"))
        elif m < 1:
            bad.append(("sampler.n_chains", "must be >= 1"))
    if sk == "pt":
        ladder = sampler.get("ladder")
        if isinstance(ladder, dict):
            t_max = ladder.get("linear")
            if not _is_num(t_max) or t_max < 1:
                bad.append(("sampler.ladder", "linear ladder needs a top temperature >= 1"))
        elif isinstance(ladder, list):
            if _is_int(m) and len(ladder) != m:
                bad.append(("sampler.ladder", f"has {len(ladder)} temperatures for {m} chains"))
            elif not ladder or not all(_is_num(t) for t in ladder):
                bad.append(("sampler.ladder", "temperatures must be numbers"))
            elif ladder[0] != 1 or any(b < a for a, b in zip(ladder, ladder[1:])) or min(ladder) < 1:
                bad.append(("sampler.ladder", "must start at 1 and be non-decreasing"))
        else:
            bad.append(("sampler.ladder", "missing; give a list or {\"linear\": T_max}"))
        mode = sampler.get("swap_mode", "pt-independent")
        if mode not in ("pt-independent", "pt-deterministic"):
            bad.append(("sampler.swap_mode", f"must be pt-independent or pt-deterministic, got {mode!r}"))
        rate = sampler.get("swap_rate", 0.5)
        if mode == "pt-independent" and (not _is_num(rate) or not 0 < rate < 1):
            bad.append(("sampler.swap_rate", f"must lie strictly between 0 and 1, got {rate!r}"))
    if sampler.get("cross_moves") and tk != "cart":
        bad.append(("sampler.cross_moves", "structured cross-chain moves exist only for tree targets"))
    if sampler.get("cross_moves") and sk != "phs":
        bad.append(("sampler.cross_moves", "only the PHS sampler uses cross-chain moves"))

    # target
    if tk == "mixture":
        mix = target.get("mixture", "five-mode")
        if isinstance(mix, dict):
            try:
                GaussianMixture.normalized(mix["means"], mix["stddevs"], mix["weights"])
            except (KeyError, TypeError, ValueError) as exc:
                bad.append(("target.mixture", f"invalid mixture: {exc}"))
        elif mix != "five-mode":
            bad.append(("target.mixture", "must be \"five-mode\" or an object with means, stddevs, weights"))
        if not _is_num(target.get("init", 0.0)):
            bad.append(("target.init", "must be a number"))
        delta = sampler.get("delta", 1.0)
        if not _is_num(delta) or delta <= 0:
            bad.append(("sampler.delta", f"must be positive, got {delta!r}"))
        h = target.get("histogram", _MIXTURE_HIST)
        if not isinstance(h, dict) or not (
            _is_num(h.get("lo")) and _is_num(h.get("hi")) and h["lo"] < h["hi"] and _is_int(h.get("bins")) and h["bins"] >= 1
        ):
            bad.append(("target.histogram", "needs numbers lo < hi and an integer bins >= 1"))
    elif tk in ("linreg", "cart"):
        data = target.get("data")
        gen_key = "generate" if tk == "linreg" else "simulate"
        if isinstance(data, str):
            if not _resolve(base, data).is_file():
                bad.append(("target.data", f"file not found: {data}"))
        elif not (isinstance(data, dict) and isinstance(data.get(gen_key), dict)):
            bad.append(("target.data", f"must be a CSV path or {{\"{gen_key}\": {{...}}}}"))
        init = target.get("init")
        if tk == "linreg" and init not in (None, "null", "full"):
            bad.append(("target.init", "must be \"null\" or \"full\""))
        if tk == "cart":
            if init not in (None, "root"):
                bad.append(("target.init", "tree chains start from the root"))
            schema = target.get("schema", "liver")
            if isinstance(data, str):
                if isinstance(schema, str) and schema != "liver" and not _resolve(base, schema).is_file():
                    bad.append(("target.schema", f"file not found: {schema}"))
                elif not isinstance(schema, (str, dict)):
                    bad.append(("target.schema", "must be \"liver\", a path, or an object"))
            b_max = target.get("b_max", 30)
            if not _is_int(b_max) or b_max < 1:
                bad.append(("target.b_max", f"must be a positive integer, got {b_max!r}"))
            if target.get("form", "exact") not in ("exact", "shifted"):
                bad.append(("target.form", "must be \"exact\" or \"shifted\""))
            kt = target.get("km_times", [12.0, 24.0, 36.0])
            if not isinstance(kt, list) or not kt or not all(_is_num(t) and t >= 0 for t in kt):
                bad.append(("target.km_times", "must be a non-empty list of non-negative times"))
    return bad


def load_config(
    path: str | Path,
    *,
    seed: int | None = None,
    n_iter: int | None = None,
    out_dir: str | Path | None = None,
) -> ExperimentConfig:
    """Read, expand and validate a config file; CLI overrides win.

    Raises
    ------
    ConfigError
        Listing every problem with its field name and, when it can be found,
        its line in the file.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([ConfigIssue("config", f"cannot read {path}: {exc.strerror}")]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([ConfigIssue("config", f"invalid JSON: {exc.msg}", exc.lineno)]) from None
    if not isinstance(raw, dict):
        raise ConfigError([ConfigIssue("config", "top level must be a JSON object", 1)])
    cfg = expand_config(raw)
    if seed is not None:
        cfg["seed"] = seed
    if n_iter is not None:
        cfg["n_iter"] = n_iter
    base = path.resolve().parent
    problems = _check(cfg, base)
    if problems:
        raise ConfigError([ConfigIssue(f, msg, _locate(text, f)) for f, msg in problems])
    if out_dir is None:
        out_dir = cfg.get("out_dir")
        if out_dir is not None:
            out_dir = _resolve(base, out_dir)
    if out_dir is None:
        root = os.environ.get(OUT_DIR_ENV, DEFAULT_OUT_DIR)
        out_dir = Path(root) / (cfg.get("name") or cfg.get("preset") or path.stem)
    return ExperimentConfig(
        seed=int(cfg["seed"]),
        n_iter=int(cfg["n_iter"]),
        target=cfg["target"],
        sampler=cfg["sampler"],
        out_dir=Path(out_dir),
        preset=cfg.get("preset"),
        base_dir=base,
        raw=raw,
    )


def validate_config(path: str | Path, **overrides) -> list[ConfigIssue]:
    """All problems with a config file; an empty list means it is runnable."""
    try:
        load_config(path, **overrides)
    except ConfigError as exc:
        return exc.issues
    return []


# -- building targets ---------------------------------------------------------


def _mixture(cfg: ExperimentConfig) -> GaussianMixture:
    mix = cfg.target.get("mixture", "five-mode")
    if isinstance(mix, dict):
        return GaussianMixture.normalized(mix["means"], mix["stddevs"], mix["weights"])
    return FIVE_MODE_MIXTURE


def _regression_data(cfg: ExperimentConfig) -> RegressionData:
    data = cfg.target["data"]
    if isinstance(data, str):
        return read_regression_csv(_resolve(cfg.base_dir, data))
    g = dict(data["generate"])
    d, _, _ = generate_dataset(
        collinear=bool(g.get("collinear", False)),
        seed=int(g.get("seed", 12345)),
        n=int(g.get("n", 180)),
        p=int(g.get("p", 15)),
        noise_var=float(g.get("noise_var", 6.25)),
    )
    return d


def _survival_data(cfg: ExperimentConfig) -> SurvivalDataset:
    data = cfg.target["data"]
    if isinstance(data, str):
        schema = cfg.target.get("schema", "liver")
        if schema == "liver":
            schema = LIVER_SCHEMA
        elif isinstance(schema, str):
            schema = _resolve(cfg.base_dir, schema)
        return ingest_survival_csv(_resolve(cfg.base_dir, data), schema)
    s = dict(data["simulate"])
    return simulate_survival_data(int(s.get("n", 622)), int(s.get("seed", 12345)), effects=bool(s.get("effects", True)))


def _ladder(sampler: dict) -> TemperatureLadder:
    m = int(sampler["n_chains"])
    lad = sampler["ladder"]
    if isinstance(lad, dict):
        return TemperatureLadder.linear(m, float(lad["linear"]))
    return TemperatureLadder(tuple(float(t) for t in lad))


def _drive(cfg: ExperimentConfig, target, proposal, init, cross_move=None) -> Trace:
    s = cfg.sampler
    kind = s["kind"]
    if kind == "mh":
        return run_mh(target, proposal, init, cfg.n_iter, cfg.seed, progress=log_progress)
    if kind == "pt":
        swap = SwapConfig(SwapMode(s.get("swap_mode", "pt-independent")), float(s.get("swap_rate", 0.5)))
        return run_pt(target, _ladder(s), proposal, swap, init, cfg.n_iter, cfg.seed, progress=log_progress)
    return run_phs(
        target,
        proposal,
        init,
        cfg.n_iter,
        cfg.seed,
        n_chains=int(s["n_chains"]),
        cross_move=cross_move,
        progress=log_progress,
    )


def _mcse_all(columns: np.ndarray) -> tuple[list[float], list[int]]:
    vals, wins = [], []
    for col in np.atleast_2d(columns.T):
        if len(col) < 100:
            vals.append(float("nan"))
            wins.append(0)
            continue
        v, w = mcse_with_window(col)
        vals.append(v)
        wins.append(w)
    return vals, wins


# -- running --------------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Execute ``cfg`` and write its outputs into ``cfg.out_dir``."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    kind = cfg.target["kind"]
    log.info("running %s/%s: %d iterations, seed %d -> %s", kind, cfg.sampler["kind"], cfg.n_iter, cfg.seed, out)
    files = {"trace": "trace.csv", "report": "report.json", "histogram": "histogram.csv"}
    it = np.arange(cfg.n_iter)

    if kind == "mixture":
        mix = _mixture(cfg)
        target = MixtureTarget(mix)
        trace = _drive(cfg, target, UniformWalkProposal(float(cfg.sampler.get("delta", 1.0))), float(cfg.target.get("init", 0.0)))
        x = np.asarray(trace.states, dtype=float)
        write_trace_csv(out / files["trace"], {"iteration": it, "x": x, "log_density": trace.log_density})
        h = cfg.target.get("histogram", _MIXTURE_HIST)
        hist = histogram(x, h["lo"], h["hi"], h["bins"])
        se, win = _mcse_all(x[:, None])
        regions = []
        for lo, hi, mode in mode_regions(mix):
            regions.append({"lo": lo, "hi": hi, "mode": mode, "mass": float(np.mean((x > lo) & (x <= hi)))})
        report = RunReport(mcse=se, mcse_window=win, histogram=hist, extra={"mean": float(x.mean()), "mode_regions": regions})

    elif kind == "linreg":
        data = _regression_data(cfg)
        target = ModelSelectionTarget(data)
        init = null_model(data.p) if cfg.target.get("init", "null") in (None, "null") else np.ones(data.p, dtype=np.uint8)
        trace = _drive(cfg, target, ComponentFlipSweep(), init)
        g = np.asarray(trace.states, dtype=np.int64)
        cols = {"iteration": it, "log_density": trace.log_density}
        cols.update({f"gamma{j + 1}": g[:, j] for j in range(data.p)})
        write_trace_csv(out / files["trace"], cols)
        size = g.sum(axis=1)
        hist = histogram(size, -0.5, data.p + 0.5, data.p + 1)
        se, win = _mcse_all(g.astype(float))
        report = RunReport(
            inclusion_probabilities=[float(v) for v in g.mean(axis=0)],
            mcse=se,
            mcse_window=win,
            histogram=hist,
            extra={"n": data.n, "p": data.p, "singular_models": len(target.singular_models)},
        )

    elif kind == "cart":
        data = _survival_data(cfg)
        b_max = int(cfg.target.get("b_max", 30))
        target = SurvivalTreeTarget(data, b_max=b_max, form=cfg.target.get("form", "exact"))
        space = RuleSpace(data)
        cross = CrossChainMove(is_valid=target.is_valid) if cfg.sampler.get("cross_moves") else None
        trace = _drive(cfg, target, TreeMoveProposal(space, b_max), LEAF, cross_move=cross)
        trees = list(trace.states)
        b = np.array([t.n_leaves for t in trees])
        write_trace_csv(out / files["trace"], {"iteration": it, "logMarginal": trace.log_density, "b": b})
        hist = histogram(b, 0.5, b_max + 0.5, b_max)
        incl = covariate_inclusion(trees, data.n_covariates)
        used = np.array([[j in covariates_used(t) for j in range(data.n_covariates)] for t in trees], dtype=float)
        se, win = _mcse_all(used)
        best, best_lm, best_i = modal_tree(trees, trace.log_density)
        (out / "modal_tree.json").write_text(
            json.dumps(
                {"log_marginal": best_lm, "iteration": best_i, "n_leaves": best.n_leaves, "tree": tree_to_dict(best, data)},
                indent=2,
            )
        )
        write_km_table(out / "km_table.csv", leaf_km_table(best, data, tuple(cfg.target.get("km_times", (12.0, 24.0, 36.0)))))
        inclusion = dict(zip(data.names, (float(v) for v in incl)))
        (out / "covariate_inclusion.json").write_text(json.dumps(inclusion, indent=2))
        files.update(modal_tree="modal_tree.json", km_table="km_table.csv", covariate_inclusion="covariate_inclusion.json")
        report = RunReport(
            inclusion_probabilities=[float(v) for v in incl],
            mcse=se,
            mcse_window=win,
            histogram=hist,
            extra={"covariates": data.names, "n": data.n, "modal_log_marginal": best_lm, "modal_leaves": best.n_leaves},
        )
    else:  # pragma: no cover - rejected by validation
        raise ValueError(kind)

    report.acceptance_rates = [float(v) for v in trace.acceptance_rates]
    report.swap_rate = float(trace.swap_rate)
    report.extra["sampler"] = trace.meta
    report.to_json(out / files["report"])
    write_histogram_csv(out / files["histogram"], report.histogram)
    _write_manifest(cfg, files)
    return report


def _write_manifest(cfg: ExperimentConfig, files: dict[str, str]) -> None:
    manifest = {
        "package_version": __version__,
        "config": cfg.as_dict(),
        "config_sha256": cfg.fingerprint(),
        "seed": cfg.seed,
        "n_iter": cfg.n_iter,
        "files": {k: {"path": v, "sha256": _sha256(cfg.out_dir / v)} for k, v in files.items()},
    }
    (cfg.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


# -- exact oracles ----------------------------------------------------------


def enumerate_experiment(cfg: ExperimentConfig, max_leaves: int | None = None, max_trees: int = 2_000_000) -> dict[str, Any]:
    """Exact posterior for small linreg or tree instances; writes ``exact.json``.

    Tree enumeration covers trees with at most ``max_leaves`` leaves
    (default: the target's ``b_max``).
    """
    kind = cfg.target["kind"]
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if kind == "linreg":
        data = _regression_data(cfg)
        exact = enumerate_exact_posterior(data)
        result = {
            "kind": "linreg",
            "p": data.p,
            "n_models": len(exact.probabilities),
            "inclusion_probabilities": [float(v) for v in exact.inclusion_probabilities],
            "top_models": [{"gamma": [int(v) for v in g], "probability": pr} for g, pr in exact.top(10)],
        }
    elif kind == "cart":
        data = _survival_data(cfg)
        b_max = int(cfg.target.get("b_max", 30))
        limit = min(b_max, max_leaves) if max_leaves else b_max
        space = RuleSpace(data)
        estimate = _count_trees(space.n_rules, limit)
        if estimate > max_trees:
            raise ValueError(f"{estimate} trees with at most {limit} leaves exceeds the limit of {max_trees}")
        target = SurvivalTreeTarget(data, b_max=b_max, form=cfg.target.get("form", "exact"))
        trees = enumerate_trees(space, limit)
        lm = np.array([target.log_density(t) for t in trees])
        ok = np.isfinite(lm)
        probs = np.zeros(len(trees))
        probs[ok] = np.exp(lm[ok] - logsumexp(lm[ok]))
        order = np.argsort(-probs, kind="stable")
        used = np.array([[j in covariates_used(t) for j in range(data.n_covariates)] for t in trees], dtype=float)
        result = {
            "kind": "cart",
            "max_leaves": limit,
            "n_trees": len(trees),
            "n_valid": int(ok.sum()),
            "covariate_inclusion": dict(zip(data.names, (float(v) for v in probs @ used))),
            "top_trees": [
                {"probability": float(probs[i]), "log_marginal": float(lm[i]), "tree": tree_to_dict(trees[i], data)}
                for i in order[:10]
                if probs[i] > 0
            ],
        }
    else:
        raise ValueError("exact enumeration is available for linreg and cart targets only")
    (cfg.out_dir / "exact.json").write_text(json.dumps(result, indent=2))
    return result


def _count_trees(n_rules: int, max_leaves: int) -> int:
    # shapes with b leaves are Catalan(b - 1); each split picks one of n_rules
    return sum(comb(2 * (b - 1), b - 1) // b * n_rules ** (b - 1) for b in range(1, max_leaves + 1))
