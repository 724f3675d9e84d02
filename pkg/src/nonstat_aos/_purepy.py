"""Pure-Python kernels, built on the object-level API.

These are the reference semantics: the compiled ``_core`` module must
return bit-identical results for the same inputs.
"""
from __future__ import annotations

import numpy as np

from .island import CREDIT_MAX, CREDIT_MEAN, im_init, im_step, im_update_matrix
from .policies import UniformStream
from .scenario import EPOCH, binary_scenario, binary_total, epoch_advance, gain, window_push

BACKEND = "python"


def play(policy, cfg, rng, scenario_rng=None):
    """Run ``policy`` (already reset) for ``cfg.horizon`` iterations.

    ``rng`` feeds the policy, ``scenario_rng`` the stochastic gain kinds
    and the epoch permutations.  Returns ``(ops, gains)`` lists.
    """
    window = cfg.empty_window()
    ops, gains = [], []
    for t in range(cfg.horizon):
        if cfg.kind == EPOCH and t and t % cfg.epoch_len == 0:
            cfg = epoch_advance(cfg, t, scenario_rng)
        op = policy.select(window, rng)
        g = gain(cfg, op, window, scenario_rng, iteration=t + 1).value
        policy.observe(op, g)
        window = window_push(window, op)
        ops.append(op)
        gains.append(g)
    return ops, gains


def run_binary(code, params, n_op, n1, wsize, horizon, draws):
    from .roster import policy_from_kernel

    policy = policy_from_kernel(int(code), params)
    cfg = binary_scenario(n_op, n1, wsize, horizon)
    policy.reset(cfg)
    ops, gains = play(policy, cfg, UniformStream(draws))
    return (np.array(ops, dtype=np.int64), np.array(gains, dtype=np.float64),
            getattr(policy, "restarts", 0))


def run_binary_totals(code, params, n_op, n1, wsize, horizon, draws):
    draws = np.asarray(draws, dtype=np.float64)
    out = np.empty(draws.shape[0])
    for r in range(draws.shape[0]):
        _, gains, _ = run_binary(code, params, n_op, n1, wsize, horizon, draws[r])
        out[r] = binary_total(gains, wsize)
    return out


def run_island(n_op, n1, wsize, horizon, psize, alpha, beta, credit_mean, draws):
    cfg = binary_scenario(n_op, n1, wsize, horizon)
    pop = im_init(n_op, psize, alpha, beta, wsize=wsize,
                  credit=CREDIT_MEAN if credit_mean else CREDIT_MAX)
    stream = UniformStream(np.asarray(draws, dtype=np.float64).reshape(-1))
    units = [0] * psize
    for _ in range(horizon):
        moves = im_step(pop, cfg, stream)
        for j, (_, _, g) in enumerate(moves):
            units[j] += int(round(g * wsize))
        im_update_matrix(pop, moves)
    return np.array([u / wsize for u in units]), pop.matrix.copy()


def _numerator(x, wsize, q, r):
    """Sum of ``wsize - occ`` over one-operator positions of the cyclic schedule."""
    sc = len(x)
    counts = {}
    for op in x:
        counts[op] = counts.get(op, 0) + 1
    num = 0
    for t, op in enumerate(x):
        if not op:
            continue
        occ = q * counts[op]
        for back in range(1, r + 1):
            if x[(t - back) % sc] == op:
                occ += 1
        num += wsize - occ
    return num


def circular_best(n1, wsize, sc, has_zero):
    """Best ``(numerator, schedule)``; gain per iteration is ``numerator / (wsize*sc)``.

    Schedules use 0 for the zero-operator; one-operator labels appear in
    increasing order of first use.  Ties keep the first schedule found.
    """
    q, r = divmod(wsize, sc)
    best_num, best_x = -1, None
    x = [0] * sc

    def rec(pos, used):
        nonlocal best_num, best_x
        if pos == sc:
            num = _numerator(x, wsize, q, r)
            if num > best_num:
                best_num, best_x = num, tuple(x)
            return
        if has_zero:
            x[pos] = 0
            rec(pos + 1, used)
        for op in range(1, min(used + 1, n1) + 1):
            x[pos] = op
            rec(pos + 1, max(used, op))

    rec(0, 0)
    if best_x is None:  # no symbols at all
        return 0, (0,) * sc
    return best_num, best_x
