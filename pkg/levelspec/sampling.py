"""Reproducible G(n, p) sampling keyed by (seed, trial, edge).

The generator is "sha256-ctr": the uniform integer for edge ``k`` of trial
``t`` under master seed ``m`` is read from the 256-bit words
``SHA-256(f"{m}|{t}|{k}|{counter}")`` for ``counter = 0, 1, ...`` by
rejection sampling. No state is carried between calls, so a trial depends
only on its key and never on scheduling or call order.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import PreconditionError
from .graphs import Graph

GENERATOR_NAME = "sha256-ctr"
SEED_BITS = 64
_WORD_BITS = 256


def _word(*key: int) -> int:
    material = "|".join(str(k) for k in key).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest(), "big")


def uniform_below(bound: int, *key: int) -> int:
    """Uniform integer in ``[0, bound)`` determined by ``key``."""
    if bound < 1:
        raise PreconditionError(f"bound must be positive, got {bound}")
    if bound.bit_length() > _WORD_BITS:
        raise PreconditionError("bound exceeds the 256-bit word size")
    limit = (1 << _WORD_BITS) - (1 << _WORD_BITS) % bound
    for counter in itertools.count():
        word = _word(*key, counter)
        if word < limit:
            return word % bound
    raise AssertionError("unreachable")  # pragma: no cover


@dataclass(frozen=True)
class GnpSampler:
    n: int
    p: Fraction
    master_seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        if self.n < 0:
            raise PreconditionError(f"vertex count must be non-negative, got {self.n}")
        if not 0 <= self.p <= 1:
            raise PreconditionError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.master_seed < 1 << SEED_BITS:
            raise PreconditionError(f"master seed must be a {SEED_BITS}-bit integer")

    def sample(self, trial_index: int) -> Graph:
        return sample(self, trial_index)

    def stream(self, trials: int, start: int = 0) -> Iterator[Graph]:
        for trial_index in range(start, start + trials):
            yield sample(self, trial_index)


def sample(sampler: GnpSampler, trial_index: int) -> Graph:
    """Draw trial ``trial_index``: each potential edge independently with p."""
    a, b = sampler.p.numerator, sampler.p.denominator
    masks = [0] * sampler.n
    pairs = itertools.combinations(range(sampler.n), 2)
    for edge_index, (u, v) in enumerate(pairs):
        if a == 0:
            break
        if a == b or uniform_below(b, sampler.master_seed, trial_index, edge_index) < a:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
    return Graph(sampler.n, tuple(masks))
