"""Built-in example automata over Q(t), t^2 = t + 1, t ~ -0.618."""

from __future__ import annotations

from .automaton import Dfao
from .exactalg import NumberField

GOLDEN_MINPOLY = (-1, -1, 1)
GOLDEN_HINT = -0.618

# parity of the number of digits 2 in base 3
THUE3 = {
    "q": 3,
    "states": ["A", "B"],
    "init": "A",
    "delta": {"A": ["A", "A", "B"], "B": ["B", "B", "A"]},
    "output": {"A": "0", "B": "1"},
}

# four states; digit 1 swaps A<->B and C<->D, digit 2 swaps A<->D and B<->C
FOUR_STATE = {
    "q": 3,
    "states": ["A", "B", "C", "D"],
    "init": "A",
    "delta": {
        "A": ["A", "B", "D"],
        "B": ["B", "A", "C"],
        "C": ["C", "D", "B"],
        "D": ["D", "C", "A"],
    },
    "output": {"A": "1", "B": "0", "C": "0", "D": "0"},
}

DEMOS = {"thue3": THUE3, "four-state": FOUR_STATE}


def golden_field() -> NumberField:
    return NumberField(GOLDEN_MINPOLY, GOLDEN_HINT)


def demo_automaton(name: str, field: NumberField | None = None) -> Dfao:
    if name not in DEMOS:
        raise KeyError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    return Dfao.from_dict(DEMOS[name], field or golden_field())
