"""Policy names, tuned defaults and construction."""
from __future__ import annotations

from .bandits import DMAB, UCB
from .island import IslandModel
from .oracle import MyopicOracle
from .policies import (RECENCY, AdaptivePursuit, AdaptiveRouletteWheel, EpsilonGreedy, Greedy,
                       Policy, Uniform)

# tuned values of the published parameter table; alpha (utility recency) is
# not published and defaults to 0.5
DEFAULT_PARAMS: dict[str, dict] = {
    "OR": {},
    # alpha weighs the reward vector by default (see IslandModel.alpha_role)
    "IM": {"alpha": 0.8, "beta": 0.01, "psize": 80, "credit": "max", "alpha_role": "reward"},
    "GR": {"alpha": 0.5, "utility": RECENCY},
    "EGR": {"eps": 0.05, "alpha": 0.5, "utility": RECENCY},
    "U": {},
    "UCB": {"scale": 1.0},
    "ARW": {"p_min": 0.05, "alpha": 0.5, "utility": RECENCY},
    "AP": {"p_min": 0.1, "beta": 0.7, "alpha": 0.5, "utility": RECENCY},
    "DMAB": {"gamma": 0.0, "delta": 0.0, "scale": 1.0},
}
# row order of the published result tables
TABLE_ORDER = ("OR", "IM", "GR", "EGR", "U", "UCB", "ARW", "AP", "DMAB")
ALIASES = {"MAB": "DMAB"}

_CLASSES: dict[str, type[Policy]] = {
    "OR": MyopicOracle,
    "GR": Greedy,
    "EGR": EpsilonGreedy,
    "U": Uniform,
    "UCB": UCB,
    "ARW": AdaptiveRouletteWheel,
    "AP": AdaptivePursuit,
    "DMAB": DMAB,
}
_BY_CODE = {cls.kernel_code: cls for cls in _CLASSES.values()}


def canonical_name(name: str) -> str:
    key = name.strip().upper()
    key = ALIASES.get(key, key)
    if key not in DEFAULT_PARAMS:
        raise ValueError(f"unknown policy {name!r}; choose from {', '.join(TABLE_ORDER)}")
    return key


def is_population(name: str) -> bool:
    return canonical_name(name) == "IM"


def make_policy(name: str, **params) -> Policy | IslandModel:
    """A policy with tuned defaults overridden by ``params``."""
    key = canonical_name(name)
    unknown = set(params) - set(DEFAULT_PARAMS[key])
    if unknown:
        raise ValueError(f"{key} takes no parameter(s) {sorted(unknown)}; "
                         f"valid: {sorted(DEFAULT_PARAMS[key])}")
    merged = {**DEFAULT_PARAMS[key], **params}
    if key == "IM":
        return IslandModel(**merged)
    return _CLASSES[key](**merged)


def policy_from_kernel(code: int, params) -> Policy:
    """Rebuild a policy object from the flat kernel parameter vector."""
    from .policies import MEAN, PARAM_SLOTS

    cls = _BY_CODE[code]
    values = dict(zip(PARAM_SLOTS, params))
    wanted = {k: values[k] for k in DEFAULT_PARAMS[cls.name]}
    if "utility" in wanted:
        wanted["utility"] = MEAN if wanted["utility"] else RECENCY
    return cls(**wanted)
