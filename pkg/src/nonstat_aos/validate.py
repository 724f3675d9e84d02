"""Self-checks run by ``nonstat-aos validate``.

Each check returns a :class:`CheckResult`; a check that raises counts as a
failure.  Monte-Carlo sizes shrink tenfold with ``quick=True``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import island, kernels, policies
from .harness import stream
from .roster import make_policy
from .scenario import binary_scenario, expected_uniform_gain


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0


def _draw_matrix(seed: int, runs: int, horizon: int) -> np.ndarray:
    return stream(seed, 0).random((runs, kernels.DRAWS_PER_STEP * horizon))


def check_property1(quick: bool = False):
    """Uniform operator sequences: mean gain of a one-operator is 1 - 1/N_op (within 1%)."""
    horizon = 10_000 if quick else 100_000
    n_op, wsize = 8, 4
    u = make_policy("U")
    _, gains, _ = kernels.run_binary(u.kernel_code, u.kernel_params(), n_op, n_op, wsize,
                                     horizon, _draw_matrix(11, 1, horizon)[0])
    mean = float(np.mean(gains))
    want = 1 - 1 / n_op
    return abs(mean - want) <= 0.01 * want, f"mean one-operator gain {mean:.5f}, expected {want:.5f}"


def check_property2(quick: bool = False):
    """Uniform policy totals match 1000 (N_1/8)(7/8) within 2% for N_1 in {1, 4, 8}."""
    runs = 1000 if quick else 10_000
    u = make_policy("U")
    worst = 0.0
    parts = []
    for n1 in (1, 4, 8):
        cfg = binary_scenario(8, n1, 4)
        totals = kernels.run_binary_totals(u.kernel_code, u.kernel_params(), 8, n1, 4,
                                           cfg.horizon, _draw_matrix(20 + n1, runs, cfg.horizon))
        want = cfg.horizon * expected_uniform_gain(cfg)
        err = abs(float(np.mean(totals)) - want) / want
        worst = max(worst, err)
        parts.append(f"N1={n1}: {np.mean(totals):.2f}/{want:.2f}")
    return worst <= 0.02, "; ".join(parts) + f" (worst {100 * worst:.2f}%)"


def check_gr_closed_form(quick: bool = False):
    """Greedy scores exactly (wsize + 1) / 2 on all 64 cells."""
    gr = make_policy("GR")
    bad = []
    for w in range(1, 9):
        for n1 in range(1, 9):
            totals = kernels.run_binary_totals(gr.kernel_code, gr.kernel_params(), 8, n1, w,
                                               1000, _draw_matrix(w * 10 + n1, 2, 1000))
            if any(t != (w + 1) / 2 for t in totals):
                bad.append((n1, w, float(totals[0])))
    return not bad, f"{64 - len(bad)}/64 cells exact" + (f"; first miss {bad[0]}" if bad else "")


def check_dmab_ucb(quick: bool = False):
    """DMAB with gamma = delta = 0 replays UCB's operator sequence on all 64 cells."""
    ucb, dmab = make_policy("UCB"), make_policy("DMAB", gamma=0.0, delta=0.0)
    bad = []
    for w in range(1, 9):
        for n1 in range(1, 9):
            draws = _draw_matrix(w * 10 + n1, 1, 1000)[0]
            a, _, _ = kernels.run_binary(ucb.kernel_code, ucb.kernel_params(), 8, n1, w, 1000, draws)
            b, _, r = kernels.run_binary(dmab.kernel_code, dmab.kernel_params(), 8, n1, w, 1000,
                                         draws)
            if r or not np.array_equal(a, b):
                bad.append((n1, w))
    return not bad, f"{64 - len(bad)}/64 cells identical" + (f"; differs at {bad[:3]}" if bad else "")


def check_arw_normalization(quick: bool = False):
    """ARW probability vectors stay normalized under random utilities."""
    updates = 10_000 if quick else 100_000
    rng = np.random.default_rng(5)
    tr = policies.UtilityTracker(8, 0.5)
    for _ in range(updates):
        tr = policies.utility_update(tr, policies.PolicyFeedback(int(rng.integers(1, 9)),
                                                                 float(rng.random())))
        policies.check_distribution(policies.arw_update(tr, 0.05))
    return True, f"{updates} updates normalized within {policies.NORM_TOL:g}"


def check_ap_normalization(quick: bool = False):
    """AP probability vectors stay normalized under random utilities."""
    updates = 10_000 if quick else 100_000
    rng = np.random.default_rng(6)
    tr = policies.UtilityTracker(8, 0.5)
    sigma = [1 / 8] * 8
    for _ in range(updates):
        tr = policies.utility_update(tr, policies.PolicyFeedback(int(rng.integers(1, 9)),
                                                                 float(rng.random())))
        sigma = policies.ap_update(sigma, tr, 0.1, 0.7)
        policies.check_distribution(sigma)
    return True, f"{updates} updates normalized within {policies.NORM_TOL:g}"


def check_im_rows(quick: bool = False):
    """Island-model transition rows stay stochastic over many updates."""
    steps = 1000 if quick else 10_000
    rng = np.random.default_rng(7)
    pop = island.im_init(8, 80, 0.8, 0.01)
    for _ in range(steps):
        trans = [(int(rng.integers(1, 9)), int(rng.integers(1, 9)), float(rng.random()))
                 for _ in range(16)]
        island.check_stochastic_rows(island.im_update_matrix(pop, trans))
    return True, f"{steps} matrix updates row-stochastic"


def check_backend_parity(quick: bool = False):
    """Compiled and pure-Python kernels agree bit for bit (skipped without the extension)."""
    impls = kernels.backends()
    if "cython" not in impls:
        return True, "compiled core not built; nothing to compare"
    py, cy = impls["python"], impls["cython"]
    draws = _draw_matrix(3, 1, 300)[0]
    for name in ("GR", "EGR", "U", "UCB", "ARW", "AP", "DMAB", "OR"):
        p = make_policy(name)
        a = py.run_binary(p.kernel_code, p.kernel_params(), 8, 3, 3, 300, draws)
        b = cy.run_binary(p.kernel_code, p.kernel_params(), 8, 3, 3, 300, draws)
        if not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])):
            return False, f"{name} traces differ between backends"
    return True, "8 policies identical on both backends"


CHECKS: dict[str, Callable] = {
    "property-1-uniform-sequence": check_property1,
    "property-2-uniform-policy": check_property2,
    "gr-closed-form": check_gr_closed_form,
    "dmab-equals-ucb": check_dmab_ucb,
    "arw-normalization": check_arw_normalization,
    "ap-normalization": check_ap_normalization,
    "im-row-stochastic": check_im_rows,
    "backend-parity": check_backend_parity,
}


def run_checks(quick: bool = False, names=None) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(quick)
        except Exception as exc:  # a broken invariant usually surfaces as an exception
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def report(results: list[CheckResult]) -> str:
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name:<30} {r.detail}  ({r.seconds:.2f}s)"
             for r in results]
    failed = [r.name for r in results if not r.ok]
    lines.append("all checks passed" if not failed else f"failed invariants: {', '.join(failed)}")
    return "\n".join(lines)


__all__ = ["CHECKS", "CheckResult", "report", "run_checks"]
