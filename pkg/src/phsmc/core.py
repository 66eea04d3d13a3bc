"""Targets, proposals, chain states and the single Metropolis-Hastings step.

Everything is evaluated in log space. A target returns ``-inf`` for states
carrying zero mass; samplers only ever look at differences of log densities,
so targets may be unnormalised.
"""
from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Protocol

import numpy as np

__all__ = [
    "StateSpaceKind",
    "TargetDistribution",
    "FunctionTarget",
    "Proposal",
    "ChainState",
    "InvalidStateError",
    "make_rng",
    "RngStream",
    "mh_accept_log_ratio",
    "mh_step",
    "Kernel",
    "MHKernel",
    "as_kernel",
    "init_chain",
]


class InvalidStateError(ValueError):
    """A chain sits on a state with non-finite log density."""


class StateSpaceKind(enum.Enum):
    CONTINUOUS_SCALAR = "continuous-scalar"
    BINARY_VECTOR = "binary-vector"
    TREE = "tree"
    DISCRETE = "discrete"


class TargetDistribution(ABC):
    """Unnormalised log density (or log mass) over some state space."""

    kind: StateSpaceKind = StateSpaceKind.CONTINUOUS_SCALAR

    @abstractmethod
    def log_density(self, state: Any) -> float:
        ...

    def __call__(self, state: Any) -> float:
        return self.log_density(state)


class FunctionTarget(TargetDistribution):
    """Wrap a plain callable as a target."""

    def __init__(self, fn: Callable[[Any], float], kind: StateSpaceKind = StateSpaceKind.CONTINUOUS_SCALAR):
        self._fn = fn
        self.kind = kind

    def log_density(self, state):
        return float(self._fn(state))


class Proposal(ABC):
    """Proposal distribution q(. | current).

    Subclasses implement :meth:`sample` and :meth:`log_density`; proposals
    whose reverse probability is easier to compute along with the draw (tree
    moves) override :meth:`propose` instead.
    """

    symmetric: bool = False

    @abstractmethod
    def sample(self, current: Any, rng: np.random.Generator) -> Any:
        ...

    def log_density(self, current: Any, proposed: Any) -> float:
        """log q(proposed | current)."""
        raise NotImplementedError

    def propose(self, current: Any, rng: np.random.Generator) -> tuple[Any, float]:
        """Draw a candidate and return it with log q(current|cand) - log q(cand|current)."""
        candidate = self.sample(current, rng)
        if self.symmetric:
            return candidate, 0.0
        return candidate, self.log_density(candidate, current) - self.log_density(current, candidate)


@dataclass(frozen=True)
class ChainState:
    value: Any
    log_density: float

    @classmethod
    def of(cls, target: TargetDistribution, value: Any) -> "ChainState":
        return cls(value, target.log_density(value))


def init_chain(target: TargetDistribution, value: Any) -> ChainState:
    state = ChainState.of(target, value)
    if not math.isfinite(state.log_density):
        raise InvalidStateError(f"initial state has log density {state.log_density}")
    return state


@dataclass(frozen=True)
class RngStream:
    """Identifies one independent random stream: (master seed, stream id)."""

    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream_id)


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based Philox generator keyed by ``(seed, stream_id)``.

    Distinct pairs give independent streams; equal pairs replay bit-for-bit.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def mh_accept_log_ratio(
    target: TargetDistribution,
    proposal: Proposal | None,
    current: ChainState,
    candidate: Any,
    *,
    candidate_log_density: float | None = None,
    log_q_ratio: float | None = None,
) -> float:
    """Log of the Metropolis-Hastings ratio f(c) q(x|c) / (f(x) q(c|x)).

    The caller accepts iff ``log(U) < min(0, ratio)``. ``log_q_ratio`` may be
    passed when the proposal already computed it; symmetric proposals skip the
    q terms altogether.
    """
    if not math.isfinite(current.log_density):
        raise InvalidStateError(f"current state has log density {current.log_density}")
    lf_new = target.log_density(candidate) if candidate_log_density is None else candidate_log_density
    if lf_new == -math.inf:
        return -math.inf
    ratio = lf_new - current.log_density
    if log_q_ratio is not None:
        ratio += log_q_ratio
    elif proposal is not None and not proposal.symmetric:
        ratio += proposal.log_density(candidate, current.value) - proposal.log_density(current.value, candidate)
    return ratio


def _accept(log_ratio: float, rng: np.random.Generator) -> bool:
    u = rng.random()
    log_u = math.log(u) if u > 0.0 else -math.inf
    # ties reject
    return log_u < min(0.0, log_ratio)


def mh_step(
    target: TargetDistribution,
    proposal: Proposal,
    current: ChainState,
    rng: np.random.Generator,
) -> tuple[ChainState, bool]:
    """One MH transition. Draws the candidate first, then the uniform."""
    candidate, log_q = proposal.propose(current.value, rng)
    lf_new = target.log_density(candidate)
    ratio = mh_accept_log_ratio(
        target, proposal, current, candidate, candidate_log_density=lf_new, log_q_ratio=log_q
    )
    if _accept(ratio, rng):
        return ChainState(candidate, lf_new), True
    return current, False


class Kernel(Protocol):
    """A within-chain update: returns the new state, #accepted and #proposed."""

    def update(
        self, target: TargetDistribution, current: ChainState, rng: np.random.Generator
    ) -> tuple[ChainState, int, int]:
        ...


class MHKernel:
    """One MH step with a fixed proposal."""

    def __init__(self, proposal: Proposal):
        self.proposal = proposal

    def update(self, target, current, rng):
        new, accepted = mh_step(target, self.proposal, current, rng)
        return new, int(accepted), 1

    def __repr__(self):
        return f"MHKernel({self.proposal!r})"


def as_kernel(obj) -> Kernel:
    if isinstance(obj, Proposal):
        return MHKernel(obj)
    if hasattr(obj, "update"):
        return obj
    raise TypeError(f"expected a Proposal or a kernel with .update(), got {type(obj).__name__}")
