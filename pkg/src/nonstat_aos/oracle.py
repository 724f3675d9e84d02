"""The myopic oracle and optimal circular schedules for binary scenarios.

A circular schedule ``x`` of length ``Sc`` is repeated forever; position
``t`` holding a one-operator earns ``1 - occ / wsize`` where ``occ`` counts
that operator in the ``wsize`` positions before ``t`` (wrapping around, and
wrapping more than once when ``wsize > Sc``).  Operators ``1..n1`` are
one-operators, anything else is the zero-operator.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import kernels
from .policies import Policy
from .scenario import BINARY, ScenarioConfig, WindowState, gain

DEFAULT_SC_CAP = 16
# refuse searches whose (reduced) enumeration exceeds this many schedules
DEFAULT_SEARCH_LIMIT = 50_000_000

# Published expected gain per iteration, N_op=2, N_1=1.  Keys (wsize, Sc).
PUBLISHED_TABLE1: dict[tuple[int, int], float] = {}
_PUBLISHED_ROWS = {
    1: "0.500 0.333 0.500 0.400 0.500 0.428 0.500 0.333 0.500 0.454 0.500 0.461 0.500 0.400",
    2: "0.250 0.333 0.375 0.300 0.333 0.357 0.375 0.333 0.300 0.363 0.375 0.346 0.357 0.333",
    3: "0.333 0.222 0.333 0.333 0.333 0.286 0.333 0.333 0.333 0.333 0.333 0.333 0.333 0.333",
    4: "0.250 0.250 0.250 0.300 0.333 0.321 0.313 0.278 0.300 0.318 0.333 0.326 0.321 0.300",
    5: "0.300 0.267 0.300 0.240 0.300 0.314 0.325 0.311 0.300 0.273 0.300 0.308 0.314 0.320",
    6: "0.250 0.222 0.292 0.267 0.250 0.286 0.313 0.315 0.317 0.303 0.292 0.269 0.286 0.300",
    7: "0.286 0.238 0.286 0.257 0.286 0.035 0.286 0.302 0.314 0.312 0.310 0.297 0.286 0.267",
    8: "0.125 0.250 0.063 0.275 0.135 0.268 0.031 0.278 0.150 0.307 0.078 0.308 0.152 0.292",
}
for _w, _row in _PUBLISHED_ROWS.items():
    for _sc, _val in enumerate(_row.split(), start=2):
        PUBLISHED_TABLE1[(_w, _sc)] = float(_val)
del _w, _row, _sc, _val


# -- myopic oracle --------------------------------------------------------------

def oracle_select(cfg: ScenarioConfig, w: WindowState, rng) -> int:
    """An operator of maximal immediate gain, uniformly among ties.

    Always consumes exactly one draw from ``rng``.
    """
    if cfg.kind != BINARY:
        raise ValueError("the myopic oracle is defined for binary scenarios")
    gains = [gain(cfg, op, w).value for op in range(1, cfg.n_op + 1)]
    best = max(gains)
    ties = [k for k, g in enumerate(gains) if g == best]
    x = rng.random()
    return ties[min(int(x * len(ties)), len(ties) - 1)] + 1


class MyopicOracle(Policy):
    name = "OR"
    kernel_code = 7

    def reset(self, cfg):
        if cfg.kind != BINARY:
            raise ValueError("the myopic oracle is defined for binary scenarios")
        super().reset(cfg)
        self.cfg = cfg

    def select(self, window, rng):
        return oracle_select(self.cfg, window, rng)


# -- circular schedules -----------------------------------------------------------

@dataclass(frozen=True)
class CircularSchedule:
    x: tuple[int, ...]
    wsize: int
    n1: int
    per_iter_gain: Fraction

    @property
    def sc(self) -> int:
        return len(self.x)

    @property
    def comps(self) -> int:
        return math.lcm(self.wsize, self.sc)

    @property
    def total(self) -> Fraction:
        return self.per_iter_gain * self.sc


def circular_gain(x: Sequence[int], wsize: int, n1: int = 1) -> Fraction:
    """Exact total gain of one period of the repeated schedule ``x``."""
    sc = len(x)
    if sc < 1:
        raise ValueError("schedule must be non-empty")
    if wsize < 1:
        raise ValueError("wsize must be >= 1")
    total = Fraction(0)
    for t, op in enumerate(x):
        if not 1 <= op <= n1:
            continue
        occ = sum(1 for back in range(1, wsize + 1) if x[(t - back) % sc] == op)
        total += 1 - Fraction(occ, wsize)
    return total


def circular_per_iter(x: Sequence[int], wsize: int, n1: int = 1) -> Fraction:
    return circular_gain(x, wsize, n1) / len(x)


def search_size(n1: int, sc: int) -> int:
    """Number of schedules left after fixing the labelling of one-operators.

    One-operators are interchangeable, so only schedules in which they
    first appear in the order 1, 2, 3, ... are enumerated.
    """
    # count sequences over {0} + labels with restricted growth on the labels
    # dp[j] = number of prefixes using j distinct labels
    dp = [1] + [0] * n1
    for _ in range(sc):
        nxt = [0] * (n1 + 1)
        for j, c in enumerate(dp):
            if not c:
                continue
            nxt[j] += c * (1 + j)  # zero-operator or a label already used
            if j < n1:
                nxt[j + 1] += c
        dp = nxt
    return sum(dp)


def solve_circular(n_op: int, n1: int, wsize: int, sc: int, cap: int = DEFAULT_SC_CAP,
                   limit: int = DEFAULT_SEARCH_LIMIT) -> CircularSchedule:
    """Globally optimal circular schedule of length ``sc`` by exhaustive search.

    Zero-operators are interchangeable so at most one is used; ``n_op`` only
    decides whether one is available (``n_op > n1``).
    """
    if sc < 1 or wsize < 1:
        raise ValueError("sc and wsize must be >= 1")
    if sc > cap:
        raise ValueError(f"Sc={sc} exceeds the search cap {cap}; pass a larger cap "
                         "(the search is exponential in Sc)")
    if not 0 <= n1 <= n_op:
        raise ValueError(f"need 0 <= n1 <= n_op, got n1={n1}, n_op={n_op}")
    if search_size(n1, sc) > limit:
        raise ValueError(f"{search_size(n1, sc)} schedules to enumerate for n1={n1}, Sc={sc}; "
                         f"raise limit={limit} or reduce Sc")
    has_zero = n_op > n1
    num, best = kernels.circular_best(n1, wsize, sc, has_zero)
    x = tuple(op if op else n1 + 1 for op in best)
    return CircularSchedule(x, wsize, n1, Fraction(num, wsize * sc))


@dataclass(frozen=True)
class Table1Cell:
    wsize: int
    comps: int
    gain: Fraction
    published_gain: float | None
    schedule: tuple[int, ...]

    @property
    def match(self) -> bool | None:
        """Published values are 3-decimal, sometimes rounded, sometimes truncated."""
        if self.published_gain is None:
            return None
        return self.published_gain in three_decimal_forms(self.gain)


def three_decimal_forms(g: Fraction) -> tuple[float, float]:
    """``g`` rounded half-up and truncated to 3 decimals."""
    scaled = Fraction(g) * 1000
    return (math.floor(scaled + Fraction(1, 2)) / 1000, math.floor(scaled) / 1000)


def table1(wsize_range: Iterable[int] = range(1, 9), comps_range: Iterable[int] = range(2, 16),
           n_op: int = 2, n1: int = 1, cap: int = DEFAULT_SC_CAP) -> list[Table1Cell]:
    """Optimal per-iteration gains over a (wsize, Sc) grid, alongside the published values.

    The published table labels its columns ``comps`` but the values are
    those of schedules of that length, so each column is solved as ``Sc``.
    Cells that disagree are flagged by :attr:`Table1Cell.match`, never forced.
    """
    cells = []
    for w in wsize_range:
        for sc in comps_range:
            sol = solve_circular(n_op, n1, w, sc, cap=cap)
            published = PUBLISHED_TABLE1.get((w, sc)) if (n_op, n1) == (2, 1) else None
            cells.append(Table1Cell(w, sc, sol.per_iter_gain, published, sol.x))
    return cells


def table1_csv(cells: Sequence[Table1Cell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["wsize", "comps", "gain", "published_gain", "match"])
    for c in cells:
        writer.writerow([
            c.wsize, c.comps, f"{float(c.gain):.3f}",
            "" if c.published_gain is None else f"{c.published_gain:.3f}",
            "" if c.match is None else str(c.match).lower(),
        ])
    return buf.getvalue()
