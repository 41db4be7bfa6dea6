"""Deterministic finite automata with output over base-q digits.

Digits are read most-significant first and ``n = 0`` reads the empty word.
The q-kernel closure of the output map compiles the automaton into a Mahler
system F(z) = A(z) F(z^q) with A[i][j] = sum of z^r over digits r sending map
i to map j.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

from .exactalg import FieldElem, NumberField, Poly, RatFunc


@dataclass(frozen=True)
class Dfao:
    """Normalized automaton: states are indices, ``init`` loops on digit 0."""

    q: int
    states: tuple[str, ...]
    init: int
    delta: tuple[tuple[int, ...], ...]
    output: tuple[FieldElem, ...]
    field: NumberField

    @classmethod
    def build(cls, q: int, states: Sequence[str], init: str, delta: Mapping[str, Sequence[str]],
              output: Mapping[str, FieldElem], field: NumberField) -> "Dfao":
        if q < 2:
            raise ValueError("base q must be at least 2")
        states = list(states)
        if len(set(states)) != len(states):
            raise ValueError("duplicate state names")
        if init not in states:
            raise ValueError(f"initial state {init!r} is not a state")
        for s in states:
            row = delta.get(s)
            if row is None or len(row) != q:
                raise ValueError(f"transition row of state {s!r} must list {q} targets")
            for tgt in row:
                if tgt not in states:
                    raise ValueError(f"transition from {s!r} to unknown state {tgt!r}")
            if s not in output:
                raise ValueError(f"state {s!r} has no output")
        delta = {s: list(delta[s]) for s in states}
        output = {s: field(output[s]) for s in states}

        if delta[init][0] != init:
            # a fresh initial state that ignores leading zeros reads the same words
            fresh = init + "'"
            while fresh in delta:
                fresh += "'"
            warnings.warn(f"initial state {init!r} does not loop on digit 0; adding {fresh!r}", stacklevel=2)
            delta[fresh] = [fresh] + delta[init][1:]
            output[fresh] = output[init]
            states.append(fresh)
            init = fresh

        seen = {init}
        todo = [init]
        while todo:
            s = todo.pop()
            for tgt in delta[s]:
                if tgt not in seen:
                    seen.add(tgt)
                    todo.append(tgt)
        dropped = [s for s in states if s not in seen]
        if dropped:
            warnings.warn(f"pruning unreachable states {dropped}", stacklevel=2)
        kept = [s for s in states if s in seen]
        pos = {s: i for i, s in enumerate(kept)}
        return cls(
            q=q,
            states=tuple(kept),
            init=pos[init],
            delta=tuple(tuple(pos[t] for t in delta[s]) for s in kept),
            output=tuple(output[s] for s in kept),
            field=field,
        )

    @classmethod
    def from_dict(cls, data: Mapping, field: NumberField, parse=None) -> "Dfao":
        if parse is None:
            from .cli import parse_expression as parse
        outputs = {}
        for s, v in data["output"].items():
            val = parse(str(v), field) if not isinstance(v, (int,)) else field(v)
            if not isinstance(val, FieldElem):
                raise ValueError(f"output of state {s!r} must be a field element, got {v!r}")
            outputs[s] = val
        return cls.build(int(data["q"]), data["states"], data["init"], data["delta"], outputs, field)

    @classmethod
    def load(cls, path: str, field: NumberField) -> "Dfao":
        from .cli import read_document

        return cls.from_dict(read_document(path), field)

    def run(self, n: int) -> int:
        """State reached after reading the digits of n."""
        digits = []
        while n:
            n, r = divmod(n, self.q)
            digits.append(r)
        state = self.init
        for r in reversed(digits):
            state = self.delta[state][r]
        return state


def coefficient(a: Dfao, n: int) -> FieldElem:
    if n < 0:
        raise ValueError("index must be nonnegative")
    return a.output[a.run(n)]


@dataclass(frozen=True)
class KernelClosure:
    maps: tuple[tuple[FieldElem, ...], ...]
    sigma: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.maps)


def kernel_closure(a: Dfao) -> KernelClosure:
    """Closure of the output map under precomposition with delta(., r).

    Maps are numbered in depth-first preorder from the output map, trying
    digits in ascending order.
    """
    maps = [a.output]
    index = {a.output: 0}
    sigma: dict[int, list[int]] = {}
    stack = [(0, 0)]
    sigma[0] = [0] * a.q
    while stack:
        i, r = stack.pop()
        if r == a.q:
            continue
        stack.append((i, r + 1))
        image = tuple(maps[i][a.delta[s][r]] for s in range(len(a.states)))
        j = index.get(image)
        if j is None:
            j = len(maps)
            maps.append(image)
            index[image] = j
            sigma[j] = [0] * a.q
            stack.append((j, 0))
        sigma[i][r] = j
    return KernelClosure(maps=tuple(maps), sigma=tuple(tuple(sigma[i]) for i in range(len(maps))))


def closure_matrix(a: Dfao, closure: KernelClosure) -> list[list[RatFunc]]:
    n = len(closure)
    rows = []
    for i in range(n):
        coeffs: list[list] = [[a.field.zero] * a.q for _ in range(n)]
        for r, j in enumerate(closure.sigma[i]):
            coeffs[j][r] = a.field.one
        rows.append([RatFunc(Poly(a.field, c)) for c in coeffs])
    return rows


def to_mahler_system(a: Dfao):
    """Compile to (MahlerSystem, AutomatonStream); raises DegenerateSystem if det A = 0."""
    from .series import AutomatonStream
    from .system import MahlerSystem

    closure = kernel_closure(a)
    system = MahlerSystem(a.q, closure_matrix(a, closure))
    stream = AutomatonStream(a.q, a.delta, a.init, closure.maps, a.field)
    return system, stream
