"""Hand-encoded example models and relations shipped with the package.

Models: fig1 (two-stage voting), fig2a and fig2b (its abstractions),
g1/g2 (strategy-transfer counterexample), g3/g4 and g5/g6 (equivalent
but not bisimilar), g7/g8 (pre-bisimilar yet distinguishable),
timed_left/timed_right (timed epistemic pair).
"""
from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..icgs import ICGS, load_model

MODELS = ("fig1", "fig2a", "fig2b", "g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8",
          "timed_left", "timed_right")

# relation name -> (model, model')
RELATIONS = {
    "rel_fig1_fig2a": ("fig1", "fig2a"),
    "rel_fig1_fig2a_as_printed": ("fig1", "fig2a"),
    "rel_fig1_fig2b": ("fig1", "fig2b"),
    "rel_g1_g2": ("g1", "g2"),
    "rel_g3_g4": ("g3", "g4"),
    "rel_g7_g8": ("g7", "g8"),
}


def path(name: str):
    return resources.files(__name__) / f"{name}.json"


@lru_cache(maxsize=None)
def model(name: str) -> ICGS:
    if name not in MODELS:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(MODELS)}")
    return load_model(path(name))


def relation(name: str):
    """(M, M', relation) for a shipped relation."""
    from ..bisim import load_relation

    if name not in RELATIONS:
        raise KeyError(f"unknown relation {name!r}; known: {', '.join(RELATIONS)}")
    m1, m2 = RELATIONS[name]
    M, M2 = model(m1), model(m2)
    return M, M2, load_relation(path(name), M, M2)
