"""Chain drivers: Metropolis-Hastings, parallel tempering and the parallel
hierarchical sampler (PHS).

Random streams: chain ``c`` (0-based) draws from ``make_rng(seed, c + 1)``;
sampler-level choices (update/swap, swap pairs, the PHS partner index and
cross-chain moves) come from ``make_rng(seed, 0)``. A single-chain MH run
therefore consumes exactly the stream of chain 0 of a tempered ensemble.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .core import (
    ChainState,
    InvalidStateError,
    Kernel,
    TargetDistribution,
    _accept,
    as_kernel,
    init_chain,
    make_rng,
)
from .diagnostics import Trace

__all__ = [
    "ConfigurationError",
    "SamplerRuntimeError",
    "TemperatureLadder",
    "HeatedTarget",
    "SwapMode",
    "SwapConfig",
    "pt_swap_log_ratio",
    "run_mh",
    "run_pt",
    "run_phs",
    "PTState",
    "PHSState",
    "pt_iteration",
    "phs_iteration",
]

log = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    pass


class SamplerRuntimeError(RuntimeError):
    """A failure inside the iteration loop, tagged with the 0-based iteration."""

    def __init__(self, iteration: int, cause: BaseException):
        super().__init__(f"iteration {iteration}: {type(cause).__name__}: {cause}")
        self.iteration = iteration
        self.cause = cause


@dataclass(frozen=True)
class TemperatureLadder:
    temperatures: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.temperatures)
        object.__setattr__(self, "temperatures", t)
        if not t:
            raise ConfigurationError("temperature ladder is empty")
        if t[0] != 1.0:
            raise ConfigurationError("first temperature must be exactly 1")
        if any(not math.isfinite(x) for x in t):
            raise ConfigurationError("temperatures must be finite")
        if any(b < a for a, b in zip(t, t[1:])):
            raise ConfigurationError("temperatures must be non-decreasing")

    @classmethod
    def linear(cls, n_chains: int, t_max: float) -> "TemperatureLadder":
        return cls(tuple(np.linspace(1.0, t_max, n_chains)))

    def __len__(self):
        return len(self.temperatures)


class HeatedTarget(TargetDistribution):
    """``base.log_density / temperature``; the normaliser is never needed."""

    def __init__(self, base: TargetDistribution, temperature: float):
        if temperature < 1:
            raise ConfigurationError("temperature must be >= 1")
        self.base = base
        self.temperature = float(temperature)
        self.kind = base.kind

    def log_density(self, state):
        lf = self.base.log_density(state)
        return lf if self.temperature == 1.0 else lf / self.temperature


class SwapMode(enum.Enum):
    PT_DETERMINISTIC = "pt-deterministic"
    PT_INDEPENDENT = "pt-independent"
    PHS_UNIFORM = "phs-uniform"


@dataclass(frozen=True)
class SwapConfig:
    mode: SwapMode = SwapMode.PT_INDEPENDENT
    rate: float = 0.5

    def __post_init__(self):
        mode = SwapMode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is SwapMode.PT_INDEPENDENT and not 0.0 < self.rate < 1.0:
            raise ConfigurationError("independent swap rate must lie in (0, 1)")


def _per_chain(obj, m: int, name: str) -> list:
    if isinstance(obj, (list, tuple)):
        if len(obj) != m:
            raise ConfigurationError(f"{name}: expected {m} entries, got {len(obj)}")
        return list(obj)
    return [obj] * m


class _Recorder:
    """Accumulates states; scalars and arrays are stacked at the end."""

    def __init__(self):
        self.items: list = []

    def append(self, value):
        self.items.append(value)

    def finish(self):
        if not self.items:
            return np.empty(0)
        first = self.items[0]
        if isinstance(first, (int, float, np.integer, np.floating)) and not isinstance(first, bool):
            return np.asarray(self.items)
        if isinstance(first, np.ndarray):
            return np.stack(self.items)
        return list(self.items)


def _progress(progress, i, n_iter, chains, swap_att, swap_acc):
    if progress is None:
        return
    step = max(1, n_iter // 100)
    if (i + 1) % step == 0 or i + 1 == n_iter:
        progress(i + 1, n_iter, chains[0].log_density, swap_acc / swap_att if swap_att else 0.0)


def log_progress(i: int, n: int, log_density: float, swap_rate: float) -> None:
    log.info("iter %d/%d (%.0f%%) log posterior %.4f swap rate %.3f", i, n, 100 * i / n, log_density, swap_rate)


def run_mh(
    target: TargetDistribution,
    proposal,
    init: Any,
    n_iter: int,
    seed: int,
    *,
    progress: Callable | None = None,
) -> Trace:
    """Single-chain Metropolis-Hastings. ``proposal`` may also be a kernel."""
    if n_iter < 1:
        raise ConfigurationError("n_iter must be >= 1")
    kernel = as_kernel(proposal)
    rng = make_rng(seed, 1)
    chain = init_chain(target, init)
    rec = _Recorder()
    lds = np.empty(n_iter)
    acc = prop = 0
    for i in range(n_iter):
        try:
            chain, a, p = kernel.update(target, chain, rng)
        except Exception as exc:
            raise SamplerRuntimeError(i, exc) from exc
        acc += a
        prop += p
        rec.append(chain.value)
        lds[i] = chain.log_density
        _progress(progress, i, n_iter, [chain], 0, 0)
    return Trace(
        states=rec.finish(),
        log_density=lds,
        acceptance_rates=np.array([acc / prop if prop else 0.0]),
        meta={"sampler": "mh", "n_iter": n_iter, "seed": seed},
    )


def pt_swap_log_ratio(log_f: Sequence[float], temperatures: Sequence[float], j: int, k: int) -> float:
    """Log tempered swap ratio between chains ``j`` and ``k``.

    ``log_f`` holds the untempered log densities of the chains' current states.
    Equals (1/T_j - 1/T_k) * (log f(theta_k) - log f(theta_j)).
    """
    m = len(log_f)
    if j == k:
        raise ValueError("swap needs two distinct chains")
    if not (0 <= j < m and 0 <= k < m):
        raise IndexError("chain index out of range")
    tj, tk = temperatures[j], temperatures[k]
    if tj == tk:
        return 0.0
    diff = log_f[k] - log_f[j]
    if diff == 0:
        return 0.0
    return (1.0 / tj - 1.0 / tk) * diff


@dataclass
class PTState:
    chains: list[ChainState]
    targets: list[HeatedTarget]
    kernels: list[Kernel]
    streams: list[np.random.Generator]
    control: np.random.Generator
    swap: SwapConfig
    accepted: np.ndarray
    proposed: np.ndarray
    last_was_swap: bool = True
    swap_attempts: int = 0
    swap_accepts: int = 0

    @property
    def temperatures(self):
        return [t.temperature for t in self.targets]

    def base_log_f(self, c: int) -> float:
        return self.chains[c].log_density * self.targets[c].temperature


def pt_iteration(st: PTState) -> None:
    """One PT iteration: either update every chain or attempt one swap."""
    m = len(st.chains)
    if m < 2:
        do_swap = False
    elif st.swap.mode is SwapMode.PT_DETERMINISTIC:
        do_swap = not st.last_was_swap
    else:
        do_swap = st.control.random() < st.swap.rate
    if do_swap:
        j = int(st.control.integers(m))
        k = int(st.control.integers(m - 1))
        if k >= j:
            k += 1
        log_f = [st.base_log_f(c) for c in range(m)]
        ratio = pt_swap_log_ratio(log_f, st.temperatures, j, k)
        st.swap_attempts += 1
        if _accept(ratio, st.control):
            st.swap_accepts += 1
            vj, vk = st.chains[j].value, st.chains[k].value
            st.chains[j] = ChainState.of(st.targets[j], vk)
            st.chains[k] = ChainState.of(st.targets[k], vj)
    else:
        for c in range(m):
            new, a, p = st.kernels[c].update(st.targets[c], st.chains[c], st.streams[c])
            st.chains[c] = new
            st.accepted[c] += a
            st.proposed[c] += p
    st.last_was_swap = do_swap


def run_pt(
    target: TargetDistribution,
    ladder: TemperatureLadder | Sequence[float],
    proposals,
    swap: SwapConfig,
    init,
    n_iter: int,
    seed: int,
    *,
    record_all: bool = False,
    progress: Callable | None = None,
) -> Trace:
    """Parallel tempering; returns the cold-chain trace.

    Each iteration is an update step (one kernel application per chain
    against ``f^(1/T_m)``) or a swap step between a uniformly drawn ordered
    pair, chosen by ``swap.mode``.
    """
    if not isinstance(ladder, TemperatureLadder):
        ladder = TemperatureLadder(tuple(ladder))
    if swap.mode is SwapMode.PHS_UNIFORM:
        raise ConfigurationError("phs-uniform swaps belong to run_phs")
    if n_iter < 1:
        raise ConfigurationError("n_iter must be >= 1")
    m = len(ladder)
    targets = [HeatedTarget(target, t) for t in ladder.temperatures]
    kernels = [as_kernel(p) for p in _per_chain(proposals, m, "proposals")]
    inits = _per_chain(init, m, "init")
    st = PTState(
        chains=[init_chain(targets[c], inits[c]) for c in range(m)],
        targets=targets,
        kernels=kernels,
        streams=[make_rng(seed, c + 1) for c in range(m)],
        control=make_rng(seed, 0),
        swap=swap,
        accepted=np.zeros(m, dtype=np.int64),
        proposed=np.zeros(m, dtype=np.int64),
    )
    recs = [_Recorder() for _ in range(m if record_all else 1)]
    lds = np.empty(n_iter)
    for i in range(n_iter):
        try:
            pt_iteration(st)
        except Exception as exc:
            raise SamplerRuntimeError(i, exc) from exc
        for c, r in enumerate(recs):
            r.append(st.chains[c].value)
        lds[i] = st.chains[0].log_density
        _progress(progress, i, n_iter, st.chains, st.swap_attempts, st.swap_accepts)
    rates = np.where(st.proposed > 0, st.accepted / np.maximum(st.proposed, 1), 0.0)
    out = [r.finish() for r in recs]
    return Trace(
        states=out[0],
        log_density=lds,
        acceptance_rates=rates,
        swap_attempts=st.swap_attempts,
        swap_accepts=st.swap_accepts,
        meta={
            "sampler": "pt",
            "n_iter": n_iter,
            "seed": seed,
            "temperatures": list(ladder.temperatures),
            "swap_mode": swap.mode.value,
            "swap_rate": swap.rate,
        },
        chains=out if record_all else None,
    )


CrossMove = Callable[[Any, Any, np.random.Generator], tuple[Any, Any]]


@dataclass
class PHSState:
    chains: list[ChainState]
    target: TargetDistribution
    kernels: list[Kernel]
    streams: list[np.random.Generator]
    control: np.random.Generator
    accepted: np.ndarray
    proposed: np.ndarray
    cross_move: CrossMove | None = None
    swap_attempts: int = 0


def _state_key(v):
    if isinstance(v, np.ndarray):
        return (v.dtype.str, v.shape, v.tobytes())
    return getattr(v, "key", v)


def phs_iteration(st: PHSState, m: int | None = None, debug: bool = False) -> int:
    """One PHS iteration; returns the (0-based) partner index used.

    (i) draw the partner m uniformly from chains 2..M, (ii) exchange chain 1
    and chain m, always accepted, (iii) one kernel update for every chain
    other than 1 and m, in ascending order.
    """
    n = len(st.chains)
    if m is None:
        m = 1 + int(st.control.integers(n - 1))
    elif not 1 <= m < n:
        raise IndexError("partner must be one of the auxiliary chains")
    if debug:
        before = sorted(map(repr, (_state_key(c.value) for c in st.chains)))
    if st.cross_move is None:
        st.chains[0], st.chains[m] = st.chains[m], st.chains[0]
    else:
        a, b = st.cross_move(st.chains[0].value, st.chains[m].value, st.control)
        st.chains[0] = ChainState.of(st.target, a)
        st.chains[m] = ChainState.of(st.target, b)
    st.swap_attempts += 1
    if debug and st.cross_move is None:
        after = sorted(map(repr, (_state_key(c.value) for c in st.chains)))
        if before != after:
            raise AssertionError("swap changed the multiset of chain values")
    for c in range(1, n):
        if c == m:
            continue
        new, a, p = st.kernels[c].update(st.target, st.chains[c], st.streams[c])
        st.chains[c] = new
        st.accepted[c] += a
        st.proposed[c] += p
    return m


def run_phs(
    target: TargetDistribution,
    proposals,
    init,
    n_iter: int,
    seed: int,
    *,
    n_chains: int | None = None,
    cross_move: CrossMove | None = None,
    record_all: bool = False,
    debug: bool = False,
    progress: Callable | None = None,
) -> Trace:
    """Parallel hierarchical sampler; returns chain 1's trace.

    ``proposals`` is one proposal/kernel shared by all chains or a list with
    one entry per chain (entry 0 is never used: chain 1 moves only by swaps).
    ``n_chains`` is required when neither ``proposals`` nor ``init`` is a
    list. ``cross_move`` replaces the plain exchange in step (ii).
    """
    m = n_chains
    for obj in (proposals, init):
        if m is None and isinstance(obj, (list, tuple)):
            m = len(obj)
    if m is None:
        raise ConfigurationError("number of chains is unknown; pass n_chains")
    if m < 3:
        raise ConfigurationError(f"PHS needs M >= 3 chains, got {m}")
    if n_iter < 1:
        raise ConfigurationError("n_iter must be >= 1")
    kernels = [as_kernel(p) for p in _per_chain(proposals, m, "proposals")]
    inits = _per_chain(init, m, "init")
    chains = []
    for c in range(m):
        try:
            chains.append(init_chain(target, inits[c]))
        except InvalidStateError as exc:
            raise InvalidStateError(f"chain {c + 1}: {exc}") from None
    st = PHSState(
        chains=chains,
        target=target,
        kernels=kernels,
        streams=[make_rng(seed, c + 1) for c in range(m)],
        control=make_rng(seed, 0),
        accepted=np.zeros(m, dtype=np.int64),
        proposed=np.zeros(m, dtype=np.int64),
        cross_move=cross_move,
    )
    recs = [_Recorder() for _ in range(m if record_all else 1)]
    lds = np.empty(n_iter)
    for i in range(n_iter):
        try:
            phs_iteration(st, debug=debug)
        except Exception as exc:
            raise SamplerRuntimeError(i, exc) from exc
        for c, r in enumerate(recs):
            r.append(st.chains[c].value)
        lds[i] = st.chains[0].log_density
        _progress(progress, i, n_iter, st.chains, st.swap_attempts, st.swap_attempts)
    rates = np.where(st.proposed > 0, st.accepted / np.maximum(st.proposed, 1), 0.0)
    # chain 1 always moves by swap
    rates[0] = 1.0
    out = [r.finish() for r in recs]
    return Trace(
        states=out[0],
        log_density=lds,
        acceptance_rates=rates,
        swap_attempts=st.swap_attempts,
        swap_accepts=st.swap_attempts,
        meta={"sampler": "phs", "n_iter": n_iter, "seed": seed, "n_chains": m},
        chains=out if record_all else None,
    )
