"""Operator gain models, the sliding usage window and the restless-bandit encoding.

Three scenario kinds are supported:

``binary-nonstationary``
    Operators ``1..n1`` are (p=1, g=1) and the rest are (p=1, g=0).  The gain
    of operator ``o`` is ``g_max * (1 - occ / wsize)`` where ``occ`` counts
    ``o`` among the last ``wsize`` applied operators.
``fixed``
    Each operator pays ``g_max`` with probability ``p`` and 0 otherwise.
``epoch``
    Each operator draws uniformly from an interval; the intervals are
    reshuffled between operators every ``epoch_len`` iterations.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

BINARY = "binary-nonstationary"
FIXED = "fixed"
EPOCH = "epoch"
KINDS = (BINARY, FIXED, EPOCH)


class EpochBoundaryWarning(UserWarning):
    """Raised (as a warning) when an epoch change is requested off a boundary."""


@dataclass(frozen=True)
class OperatorSpec:
    id: int
    p: float = 1.0
    g_max: float = 1.0

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"operator ids start at 1, got {self.id}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"operator {self.id}: p={self.p} outside [0, 1]")
        if not 0.0 <= self.g_max <= 1.0:
            raise ValueError(f"operator {self.id}: g_max={self.g_max} outside [0, 1]")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    operators: tuple[OperatorSpec, ...]
    wsize: int = 1
    horizon: int = 1000
    n1: int | None = None
    epoch_len: int | None = None
    # per-operator (lo, hi) uniform intervals, epoch kind only
    intervals: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if not self.operators:
            raise ValueError("scenario needs at least one operator")
        ids = [op.id for op in self.operators]
        if ids != list(range(1, len(ids) + 1)):
            raise ValueError(f"operator ids must be 1..N_op in order, got {ids}")
        if self.wsize < 1:
            raise ValueError(f"wsize must be >= 1, got {self.wsize}")
        if self.horizon < 0:
            raise ValueError(f"horizon must be >= 0, got {self.horizon}")
        if self.kind == BINARY:
            if self.n1 is None or not 0 <= self.n1 <= self.n_op:
                raise ValueError(f"binary scenario needs 0 <= n1 <= N_op, got n1={self.n1}")
            for op in self.operators:
                want = (1.0, 1.0) if op.id <= self.n1 else (1.0, 0.0)
                if (op.p, op.g_max) != want:
                    raise ValueError(f"binary scenario: operator {op.id} must be {want}")
        if self.kind == EPOCH:
            if self.epoch_len is None or self.epoch_len < 1:
                raise ValueError("epoch scenario needs epoch_len >= 1")
            if self.intervals is None or len(self.intervals) != self.n_op:
                raise ValueError("epoch scenario needs one (lo, hi) interval per operator")
            for lo, hi in self.intervals:
                if not 0.0 <= lo <= hi <= 1.0:
                    raise ValueError(f"epoch interval ({lo}, {hi}) must satisfy 0 <= lo <= hi <= 1")

    @property
    def n_op(self) -> int:
        return len(self.operators)

    def operator(self, op: int) -> OperatorSpec:
        if not 1 <= op <= self.n_op:
            raise ValueError(f"unknown operator {op} (scenario has {self.n_op})")
        return self.operators[op - 1]

    def empty_window(self) -> "WindowState":
        return WindowState(self.wsize, n_op=self.n_op)


def binary_scenario(n_op: int, n1: int, wsize: int, horizon: int = 1000) -> ScenarioConfig:
    """The ``(N_op, N_1, wsize)`` scenario with one-operators numbered first."""
    ops = tuple(OperatorSpec(i, 1.0, 1.0 if i <= n1 else 0.0) for i in range(1, n_op + 1))
    return ScenarioConfig(BINARY, ops, wsize=wsize, horizon=horizon, n1=n1)


def fixed_scenario(pairs: Sequence[tuple[float, float]], horizon: int = 1000,
                   wsize: int = 1) -> ScenarioConfig:
    ops = tuple(OperatorSpec(i, p, g) for i, (p, g) in enumerate(pairs, start=1))
    return ScenarioConfig(FIXED, ops, wsize=wsize, horizon=horizon)


def default_epoch_intervals(n_op: int) -> tuple[tuple[float, float], ...]:
    """Overlapping intervals of width 2/(n_op+1), staggered by 1/(n_op+1)."""
    step = 1.0 / (n_op + 1)
    return tuple((i * step, min(1.0, (i + 2) * step)) for i in range(n_op))


def epoch_scenario(n_op: int, epoch_len: int, horizon: int = 1000,
                   intervals: Sequence[tuple[float, float]] | None = None,
                   wsize: int = 1) -> ScenarioConfig:
    if intervals is None:
        intervals = default_epoch_intervals(n_op)
    intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
    ops = tuple(OperatorSpec(i, 1.0, hi) for i, (_, hi) in enumerate(intervals, start=1))
    return ScenarioConfig(EPOCH, ops, wsize=wsize, horizon=horizon,
                          epoch_len=epoch_len, intervals=intervals)


@dataclass(frozen=True)
class WindowState:
    """The last ``wsize`` applied operators, oldest first."""

    wsize: int
    buffer: tuple[int, ...] = ()
    n_op: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.wsize < 1:
            raise ValueError(f"wsize must be >= 1, got {self.wsize}")
        if len(self.buffer) > self.wsize:
            raise ValueError("window buffer longer than its capacity")

    def __len__(self):
        return len(self.buffer)


@dataclass(frozen=True)
class GainSample:
    value: float
    operator: int
    iteration: int = 0


def window_push(w: WindowState, op: int) -> WindowState:
    if op < 1 or (w.n_op is not None and op > w.n_op):
        raise ValueError(f"invalid operator id {op}")
    buf = w.buffer + (op,)
    if len(buf) > w.wsize:
        buf = buf[1:]
    return replace(w, buffer=buf)


def occurrences(w: WindowState, op: int) -> int:
    return w.buffer.count(op)


def gain(cfg: ScenarioConfig, op: int, w: WindowState, rng=None,
         iteration: int = 0) -> GainSample:
    """Gain of applying ``op`` given the trajectory's window.

    ``rng`` only needs a ``random()`` method and is consumed by the
    stochastic kinds; binary gains are deterministic.
    """
    spec = cfg.operator(op)
    if cfg.kind == BINARY:
        # denominator is wsize even while the window is still filling
        value = spec.g_max * (1 - occurrences(w, op) / cfg.wsize)
    elif cfg.kind == FIXED:
        value = spec.g_max if rng.random() < spec.p else 0.0
    else:
        lo, hi = cfg.intervals[op - 1]
        value = lo + (hi - lo) * rng.random()
    return GainSample(value, op, iteration)


def binary_total(gains, wsize: int) -> float:
    """Exact total of binary-scenario gains.

    Every binary gain is an integer multiple of ``1/wsize``; the multiples
    are summed as integers and divided once, so totals such as
    ``(wsize + 1) / 2`` come out exact instead of carrying rounding drift.
    """
    units = 0
    for g in gains:
        units += int(round(g * wsize))
    return units / wsize


def expected_uniform_gain(cfg: ScenarioConfig) -> float:
    """Per-iteration expected gain of the uniform policy on a binary scenario."""
    return float(expected_uniform_gain_exact(cfg))


def expected_uniform_gain_exact(cfg: ScenarioConfig) -> Fraction:
    if cfg.kind != BINARY:
        raise ValueError("uniform-gain expectation is only defined for binary scenarios")
    n = cfg.n_op
    return Fraction(cfg.n1, n) * (1 - Fraction(1, n))


# -- restless-bandit view: one wsize-bit usage state per arm ------------------

def encode_state(w: WindowState, op: int) -> int:
    """Bit ``i-1`` is set iff ``op`` was applied ``i`` steps back (newest = bit 0)."""
    code = 0
    for back, applied in enumerate(reversed(w.buffer)):
        if applied == op:
            code |= 1 << back
    return code


def lshift(code: int, wsize: int) -> int:
    return (code << 1) & ((1 << wsize) - 1)


def next_state(code: int, played: bool, wsize: int) -> int:
    """Transition of an arm's state: ``Lshift(j)+1`` if played, ``Lshift(j)`` otherwise."""
    return lshift(code, wsize) + (1 if played else 0)


def state_reward(code: int, wsize: int, g_max: float = 1.0) -> float:
    return g_max * (1 - bin(code).count("1") / wsize)


# -- epoch scenarios -----------------------------------------------------------

def epoch_advance(cfg: ScenarioConfig, t: int, rng: np.random.Generator | None = None,
                  permutation: Sequence[int] | None = None) -> ScenarioConfig:
    """Reassign the epoch distributions at an epoch boundary.

    ``permutation`` (1-based, ``new[i] = old[perm[i]]``) overrides the random
    draw.  Off a boundary the config is returned unchanged and an
    :class:`EpochBoundaryWarning` is emitted.
    """
    if cfg.kind != EPOCH:
        raise ValueError("epoch_advance requires an epoch scenario")
    if t <= 0 or t % cfg.epoch_len:
        warnings.warn(f"iteration {t} is not an epoch boundary (epoch_len={cfg.epoch_len})",
                      EpochBoundaryWarning, stacklevel=2)
        return cfg
    if permutation is None:
        if rng is None:
            raise ValueError("epoch_advance needs an rng or an explicit permutation")
        perm = [int(i) for i in rng.permutation(cfg.n_op)]
    else:
        perm = [int(i) - 1 for i in permutation]
        if sorted(perm) != list(range(cfg.n_op)):
            raise ValueError(f"not a permutation of 1..{cfg.n_op}: {permutation}")
    intervals = tuple(cfg.intervals[j] for j in perm)
    ops = tuple(OperatorSpec(i + 1, 1.0, hi) for i, (_, hi) in enumerate(intervals))
    return replace(cfg, operators=ops, intervals=intervals)
