"""UCB1 and DMAB (UCB1 restarted by a Page-Hinkley change test)."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .policies import MEAN, Policy, PolicyFeedback, UtilityTracker, utility_update


class UcbState:
    """Empirical means and play counts for UCB1 with an exploration ``scale``."""

    def __init__(self, n: int, scale: float = 1.0, bounded: bool = True):
        if scale < 0.0:
            raise ValueError(f"scale={scale} must be >= 0")
        self.tracker = UtilityTracker(n, mode=MEAN)
        self.scale = scale
        self.bounded = bounded

    @property
    def nb(self) -> list[int]:
        return self.tracker.nb

    @property
    def u(self) -> list[float]:
        return self.tracker.u

    def reset(self):
        self.tracker.reset()


def ucb_bonus(total: int, nb: int, scale: float = 1.0) -> float:
    return scale * math.sqrt(2 * math.log(total) / nb)


def ucb_scores(s: UcbState) -> list[float]:
    total = sum(s.nb)
    return [u + ucb_bonus(total, nb, s.scale) for u, nb in zip(s.u, s.nb)]


def ucb_select(s: UcbState) -> int:
    nb = s.nb
    for k, count in enumerate(nb):
        if count == 0:
            return k + 1
    total = 0
    for count in nb:
        total += count
    best, best_score = 0, -math.inf
    for k in range(len(nb)):
        score = s.u[k] + s.scale * math.sqrt(2 * math.log(total) / nb[k])
        if score > best_score:
            best, best_score = k, score
    return best + 1


def ucb_observe(s: UcbState, fb: PolicyFeedback) -> UcbState:
    if s.bounded and not 0.0 <= fb.gain <= 1.0:
        raise ValueError(f"UCB1 gains must lie in [0, 1], got {fb.gain}")
    utility_update(s.tracker, fb)
    return s


@dataclass
class PageHinkleyState:
    """Page-Hinkley test for a drop in the mean of a gain stream.

    ``m`` accumulates ``g - mean + delta``; a drop pulls ``m`` below its
    running maximum ``M`` and the test fires once ``M - m > gamma``.
    ``gamma == delta == 0`` disables the test.
    """

    gamma: float = 0.0
    delta: float = 0.0
    count: int = 0
    mean: float = 0.0
    m: float = 0.0
    M: float = 0.0

    @property
    def armed(self) -> bool:
        return not (self.gamma == 0.0 and self.delta == 0.0)

    def reset(self):
        self.count = 0
        self.mean = 0.0
        self.m = 0.0
        self.M = 0.0


def ph_step(ph: PageHinkleyState, g: float) -> tuple[PageHinkleyState, bool]:
    ph.count += 1
    ph.mean += (g - ph.mean) / ph.count
    ph.m += g - ph.mean + ph.delta
    if ph.m > ph.M:
        ph.M = ph.m
    return ph, ph.armed and ph.M - ph.m > ph.gamma


class UCB(Policy):
    name = "UCB"
    kernel_code = 5

    def __init__(self, scale: float = 1.0):
        if scale < 0.0:
            raise ValueError(f"scale={scale} must be >= 0")
        self.scale = scale

    def reset(self, cfg):
        super().reset(cfg)
        self.state = UcbState(cfg.n_op, self.scale, bounded=self.scale == 1.0)

    def select(self, window, rng):
        return ucb_select(self.state)

    def observe(self, op, gain):
        ucb_observe(self.state, PolicyFeedback(op, gain))

    def params(self):
        return {"scale": self.scale}


class DMAB(UCB):
    name = "DMAB"
    kernel_code = 6

    def __init__(self, gamma: float = 0.0, delta: float = 0.0, scale: float = 1.0):
        super().__init__(scale)
        if gamma < 0.0 or delta < 0.0:
            raise ValueError("gamma and delta must be >= 0")
        self.gamma = gamma
        self.delta = delta

    def reset(self, cfg):
        super().reset(cfg)
        self.ph = PageHinkleyState(self.gamma, self.delta)
        self.restarts = 0

    def observe(self, op, gain):
        super().observe(op, gain)
        _, restart = ph_step(self.ph, gain)
        if restart:
            self.state.reset()
            self.ph.reset()
            self.restarts += 1

    def params(self):
        return {"gamma": self.gamma, "delta": self.delta, "scale": self.scale}


def dmab_select(s: UcbState, ph: PageHinkleyState) -> int:
    """DMAB decides exactly like UCB1; restarts happen on observation."""
    return ucb_select(s)
