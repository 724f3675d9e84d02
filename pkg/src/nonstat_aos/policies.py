"""Utility tracking, roulette selection and the probability-based policies.

Operators are 1-based everywhere in the public API; vectors (utilities,
probabilities) are plain lists indexed from 0, so ``u[op - 1]`` is the
utility of ``op``.  Lists rather than arrays keep the arithmetic order fixed
(sequential sums), which the compiled kernels reproduce bit for bit.

Every ``rng`` argument only needs a ``random()`` method returning a float in
[0, 1): a :class:`numpy.random.Generator` or a :class:`UniformStream`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scenario import ScenarioConfig, WindowState

RECENCY = "recency"
MEAN = "mean"
NORM_TOL = 1e-9


class UniformStream:
    """Replays a pre-drawn array of uniforms through a ``random()`` method.

    Trajectories draw all their policy randomness up front so the compiled
    and pure-Python paths consume exactly the same numbers.
    """

    def __init__(self, draws):
        self._draws = np.asarray(draws, dtype=np.float64)
        self.pos = 0

    def random(self) -> float:
        x = self._draws[self.pos]
        self.pos += 1
        return float(x)


@dataclass(frozen=True)
class PolicyFeedback:
    chosen: int
    gain: float
    iteration: int = 0


class UtilityTracker:
    """Per-operator utilities ``u``, counts ``nb`` and gain sums.

    In ``recency`` mode the chosen operator moves toward its gain at rate
    ``alpha`` and every other operator is treated as having gained 0, i.e.
    decays by ``1 - alpha``.  In ``mean`` mode ``u`` is the empirical mean
    of the gains each operator actually received.
    """

    def __init__(self, n: int, alpha: float = 0.5, mode: str = RECENCY):
        if mode not in (RECENCY, MEAN):
            raise ValueError(f"unknown utility mode {mode!r}")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha={alpha} outside [0, 1]")
        self.n = n
        self.alpha = alpha
        self.mode = mode
        self.reset()

    def reset(self):
        self.u = [0.0] * self.n
        self.nb = [0] * self.n
        self.sums = [0.0] * self.n

    def __repr__(self):
        return f"UtilityTracker(mode={self.mode}, u={self.u}, nb={self.nb})"


def utility_update(tr: UtilityTracker, fb: PolicyFeedback) -> UtilityTracker:
    i = fb.chosen - 1
    if not 0 <= i < tr.n:
        raise ValueError(f"invalid operator id {fb.chosen}")
    tr.nb[i] += 1
    tr.sums[i] += fb.gain
    if tr.mode == MEAN:
        tr.u[i] = tr.sums[i] / tr.nb[i]
        return tr
    a = tr.alpha
    u = tr.u
    for k in range(tr.n):
        if k == i:
            u[k] = (1 - a) * u[k] + a * fb.gain
        else:
            u[k] = (1 - a) * u[k]
    return tr


def argmax_lowest(values: Sequence[float]) -> int:
    """0-based index of the maximum, lowest index on ties."""
    best = 0
    for k in range(1, len(values)):
        if values[k] > values[best]:
            best = k
    return best


def check_distribution(p: Sequence[float]) -> None:
    total = 0.0
    for x in p:
        if x < 0.0:
            raise ValueError(f"negative probability in {list(p)}")
        total += x
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"probability vector sums to {total!r}, not 1")


def roulette_index(p: Sequence[float], x: float) -> int:
    """CDF inversion: the first 0-based index whose cumulative mass exceeds ``x``."""
    acc = 0.0
    for k, pk in enumerate(p):
        acc += pk
        if x < acc:
            return k
    # x landed past a total that rounded just below 1
    for k in range(len(p) - 1, -1, -1):
        if p[k] > 0.0:
            return k
    return len(p) - 1


def roulette_draw(p: Sequence[float], rng) -> int:
    check_distribution(p)
    return roulette_index(p, rng.random()) + 1


def uniform_index(n: int, x: float) -> int:
    return min(int(x * n), n - 1)


def gr_select(tr: UtilityTracker) -> int:
    return argmax_lowest(tr.u) + 1


def egr_select(tr: UtilityTracker, eps: float, rng) -> int:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0, 1]")
    if rng.random() < eps:
        return uniform_index(tr.n, rng.random()) + 1
    return gr_select(tr)


def arw_update(tr: UtilityTracker, p_min: float) -> list[float]:
    """Probability matching with a ``p_min`` floor; uniform while all utilities are 0."""
    n = tr.n
    if not 0.0 <= p_min <= 1.0 / n:
        raise ValueError(f"p_min={p_min} must lie in [0, 1/{n}]")
    s = 0.0
    for x in tr.u:
        s += x
    if s <= 0.0:
        return [1.0 / n] * n
    return [p_min + (1 - n * p_min) * x / s for x in tr.u]


def ap_update(sigma: Sequence[float], tr: UtilityTracker, p_min: float,
              beta: float) -> list[float]:
    """Adaptive pursuit: push the best operator toward ``p_max``, the rest toward ``p_min``."""
    n = tr.n
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta={beta} outside (0, 1]")
    if not 0.0 <= p_min <= 1.0 / n:
        raise ValueError(f"p_min={p_min} must lie in [0, 1/{n}]")
    p_max = 1 - (n - 1) * p_min
    best = argmax_lowest(tr.u)
    return [s + beta * ((p_max if k == best else p_min) - s) for k, s in enumerate(sigma)]


# -- policy objects -----------------------------------------------------------

class Policy:
    """One trajectory's operator-selection state.

    :meth:`reset` binds the policy to a scenario and clears all learned
    state; :meth:`select` and :meth:`observe` alternate once per iteration.
    """

    name = "?"
    kernel_code: int | None = None

    def reset(self, cfg: ScenarioConfig) -> None:
        self.n = cfg.n_op

    def select(self, window: WindowState, rng) -> int:
        raise NotImplementedError

    def observe(self, op: int, gain: float) -> None:
        pass

    def params(self) -> dict:
        return {}

    def kernel_params(self) -> list[float]:
        return kernel_param_vector(**self.params())

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


# slots of the flat parameter vector handed to the compiled kernels
PARAM_SLOTS = ("alpha", "eps", "p_min", "beta", "scale", "gamma", "delta", "utility")


def kernel_param_vector(**params) -> list[float]:
    vec = [0.0] * len(PARAM_SLOTS)
    for key, value in params.items():
        if key == "utility":
            value = 1.0 if value == MEAN else 0.0
        vec[PARAM_SLOTS.index(key)] = float(value)
    return vec


class _UtilityPolicy(Policy):
    def __init__(self, alpha: float = 0.5, utility: str = RECENCY):
        self.alpha = alpha
        self.utility = utility
        UtilityTracker(1, alpha, utility)  # validates

    def reset(self, cfg):
        super().reset(cfg)
        self.tracker = UtilityTracker(cfg.n_op, self.alpha, self.utility)

    def observe(self, op, gain):
        utility_update(self.tracker, PolicyFeedback(op, gain))

    def params(self):
        return {"alpha": self.alpha, "utility": self.utility}


class Greedy(_UtilityPolicy):
    name = "GR"
    kernel_code = 0

    def select(self, window, rng):
        return gr_select(self.tracker)


class EpsilonGreedy(_UtilityPolicy):
    name = "EGR"
    kernel_code = 1

    def __init__(self, eps: float = 0.05, alpha: float = 0.5, utility: str = RECENCY):
        super().__init__(alpha, utility)
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"eps={eps} outside [0, 1]")
        self.eps = eps

    def select(self, window, rng):
        return egr_select(self.tracker, self.eps, rng)

    def params(self):
        return {"eps": self.eps, **super().params()}


class Uniform(Policy):
    name = "U"
    kernel_code = 2

    def select(self, window, rng):
        return uniform_index(self.n, rng.random()) + 1


class AdaptiveRouletteWheel(_UtilityPolicy):
    name = "ARW"
    kernel_code = 3

    def __init__(self, p_min: float = 0.05, alpha: float = 0.5, utility: str = RECENCY):
        super().__init__(alpha, utility)
        self.p_min = p_min

    def reset(self, cfg):
        super().reset(cfg)
        if not 0.0 <= self.p_min <= 1.0 / cfg.n_op:
            raise ValueError(f"p_min={self.p_min} must lie in [0, 1/{cfg.n_op}]")
        self.sigma = [1.0 / cfg.n_op] * cfg.n_op

    def select(self, window, rng):
        return roulette_draw(self.sigma, rng)

    def observe(self, op, gain):
        super().observe(op, gain)
        self.sigma = arw_update(self.tracker, self.p_min)

    def params(self):
        return {"p_min": self.p_min, **super().params()}


class AdaptivePursuit(_UtilityPolicy):
    name = "AP"
    kernel_code = 4

    def __init__(self, p_min: float = 0.1, beta: float = 0.7, alpha: float = 0.5,
                 utility: str = RECENCY):
        super().__init__(alpha, utility)
        if not 0.0 < beta <= 1.0:
            raise ValueError(f"beta={beta} outside (0, 1]")
        self.p_min = p_min
        self.beta = beta

    def reset(self, cfg):
        super().reset(cfg)
        if not 0.0 <= self.p_min <= 1.0 / cfg.n_op:
            raise ValueError(f"p_min={self.p_min} must lie in [0, 1/{cfg.n_op}]")
        self.sigma = [1.0 / cfg.n_op] * cfg.n_op

    def select(self, window, rng):
        return roulette_draw(self.sigma, rng)

    def observe(self, op, gain):
        super().observe(op, gain)
        self.sigma = ap_update(self.sigma, self.tracker, self.p_min, self.beta)

    def params(self):
        return {"p_min": self.p_min, "beta": self.beta, **super().params()}
