"""Two-site correlation boxes and their CHSH behaviour.

A box has one binary input and one binary output per site.  Alice inputs
``x`` and receives ``alpha``; Bob inputs ``y`` and receives ``beta``.  A
:class:`CorrelationModel` fixes the joint law ``P(alpha, beta | x, y)``.

Outcomes are indexed ``2 * alpha + beta`` throughout, i.e. in the order
``(0,0), (0,1), (1,0), (1,1)``.

Models whose law is rational (deterministic strategies, mixtures of them and
the PR family) report probabilities as :class:`fractions.Fraction`, so CHSH
scores such as 3 and 4 come out exact.  The quantum model uses floats.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgumentError

OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))
SETTINGS = ((0, 0), (0, 1), (1, 0), (1, 1))

TSIRELSON_SCORE = 2 + math.sqrt(2)


class BoxInput(NamedTuple):
    x: int
    y: int


class BoxOutput(NamedTuple):
    alpha: int
    beta: int


class Site(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


def _check_bit(name: str, value) -> int:
    if isinstance(value, bool):
        value = int(value)
    if value not in (0, 1):
        raise InvalidArgumentError(f"{name} must be 0 or 1, got {value!r}")
    return int(value)


def as_probability(value) -> Fraction:
    """Exact rational for a probability given as str, int, float or Fraction.

    Floats are read through their shortest repr, so ``0.9`` becomes ``9/10``.
    """
    try:
        if isinstance(value, float):
            q = Fraction(repr(value))
        else:
            q = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidArgumentError(f"not a probability: {value!r}") from exc
    if not 0 <= q <= 1:
        raise InvalidArgumentError(f"probability out of [0, 1]: {value!r}")
    return q


class _SamplingTables(NamedTuple):
    cdf: tuple  # cdf[x][y] -> np.ndarray of 4 thresholds
    alice_marginal: tuple  # [x] -> P(alpha=1)
    bob_marginal: tuple  # [y] -> P(beta=1)
    beta_given_alpha: tuple  # [x][y][alpha] -> P(beta=1 | alpha)
    alpha_given_beta: tuple  # [x][y][beta] -> P(alpha=1 | beta)


def _conditional(p_one_and: float, p_given: float) -> float:
    return p_one_and / p_given if p_given > 0 else 0.0


class CorrelationModel:
    """Base class; subclasses implement :meth:`joint`."""

    exact: bool = True

    def joint(self, x: int, y: int) -> tuple:
        """Probabilities of the four outcomes, indexed ``2*alpha + beta``."""
        raise NotImplementedError

    @property
    def descriptor(self) -> str:
        raise NotImplementedError

    def marginal(self, site: Site, own_input: int, other_input: int):
        if site is Site.ALICE:
            p = self.joint(own_input, other_input)
            return p[2] + p[3]
        p = self.joint(other_input, own_input)
        return p[1] + p[3]

    @property
    def _tables(self) -> _SamplingTables:
        return _sampling_tables(self)


@lru_cache(maxsize=1024)
def _sampling_tables(model: CorrelationModel) -> _SamplingTables:
    # models are immutable and hashable by value, so tables are shared
    cdf = [[None, None], [None, None]]
    b_given_a = [[None, None], [None, None]]
    a_given_b = [[None, None], [None, None]]
    for x, y in SETTINGS:
        p = [float(v) for v in model.joint(x, y)]
        c = np.cumsum(p)
        # zero-probability tail outcomes must be unreachable for u < 1
        last = max(i for i, v in enumerate(p) if v > 0)
        c[last:] = 1.0
        cdf[x][y] = c
        b_given_a[x][y] = (
            _conditional(p[1], p[0] + p[1]),
            _conditional(p[3], p[2] + p[3]),
        )
        a_given_b[x][y] = (
            _conditional(p[2], p[0] + p[2]),
            _conditional(p[3], p[1] + p[3]),
        )
    # first-measured marginals; valid because the models are non-signalling
    alice = tuple(float(model.marginal(Site.ALICE, x, 0)) for x in (0, 1))
    bob = tuple(float(model.marginal(Site.BOB, y, 0)) for y in (0, 1))
    return _SamplingTables(
        tuple(tuple(r) for r in cdf),
        alice,
        bob,
        tuple(tuple(r) for r in b_given_a),
        tuple(tuple(r) for r in a_given_b),
    )


@dataclass(frozen=True)
class LocalDeterministic(CorrelationModel):
    """Each site outputs a fixed bit per setting: ``alpha = a[x]``, ``beta = b[y]``."""

    a0: int
    a1: int
    b0: int
    b1: int

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, _check_bit(name, getattr(self, name)))

    @classmethod
    def from_bits(cls, bits: str) -> "LocalDeterministic":
        if len(bits) != 4 or set(bits) - {"0", "1"}:
            raise InvalidArgumentError(f"local strategy needs 4 bits, got {bits!r}")
        return cls(*(int(c) for c in bits))

    @property
    def descriptor(self) -> str:
        return f"local:{self.a0}{self.a1}{self.b0}{self.b1}"

    def outcome(self, x: int, y: int) -> int:
        """Index ``2*alpha + beta`` of the one outcome this strategy produces."""
        return 2 * (self.a1 if x else self.a0) + (self.b1 if y else self.b0)

    def joint(self, x, y):
        probs = [Fraction(0)] * 4
        probs[self.outcome(x, y)] = Fraction(1)
        return tuple(probs)


@dataclass(frozen=True)
class SharedRandomness(CorrelationModel):
    """Convex mixture of deterministic strategies selected by a shared coin."""

    mixture: tuple

    def __post_init__(self):
        if not self.mixture:
            raise InvalidArgumentError("mixture must not be empty")
        parts = []
        for weight, strategy in self.mixture:
            if not isinstance(strategy, LocalDeterministic):
                raise InvalidArgumentError("mixture components must be LocalDeterministic")
            parts.append((as_probability(weight), strategy))
        total = sum(w for w, _ in parts)
        if total != 1:
            raise InvalidArgumentError(f"mixture weights sum to {total}, not 1")
        object.__setattr__(self, "mixture", tuple(parts))

    @property
    def descriptor(self) -> str:
        inner = ";".join(f"{w}*{s.descriptor}" for w, s in self.mixture)
        return f"mixture[{inner}]"

    def joint(self, x, y):
        probs = [Fraction(0)] * 4
        for weight, strategy in self.mixture:
            probs[strategy.outcome(x, y)] += weight
        return tuple(probs)


@dataclass(frozen=True)
class Quantum(CorrelationModel):
    """Maximally entangled pair measured at angles ``a[x]`` and ``b[y]``.

    ``P(alpha, beta | x, y) = (1 + (-1)**(alpha ^ beta) * cos(a[x] - b[y])) / 4``.
    """

    a0: float = 0.0
    a1: float = math.pi / 2
    b0: float = math.pi / 4
    b1: float = -math.pi / 4

    exact = False

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, Real) or not math.isfinite(v):
                raise InvalidArgumentError(f"angle {name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))

    @classmethod
    def canonical(cls) -> "Quantum":
        return cls()

    @property
    def descriptor(self) -> str:
        if self == Quantum.canonical():
            return "quantum:canonical"
        return f"quantum:{self.a0!r},{self.a1!r},{self.b0!r},{self.b1!r}"

    def joint(self, x, y):
        c = math.cos((self.a1 if x else self.a0) - (self.b1 if y else self.b0))
        same = (1 + c) / 4
        diff = (1 - c) / 4
        return (same, diff, diff, same)

    def marginal(self, site, own_input, other_input):
        # summing the law over the other outcome cancels the cosine
        return 0.5


@dataclass(frozen=True)
class NoisyPR(CorrelationModel):
    """PR box that honours ``alpha ^ beta == x*y`` with probability ``p``.

    Otherwise it behaves as a PR box with Alice's bit flipped.  Marginals stay
    uniform for every ``p`` and the CHSH score is ``4p``.
    """

    p: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "p", as_probability(self.p))

    @property
    def descriptor(self) -> str:
        p = self.p
        text = str(float(p)) if Fraction(repr(float(p))) == p else str(p)
        return f"noisy-pr:{text}"

    def joint(self, x, y):
        good = self.p / 2
        bad = (1 - self.p) / 2
        if x & y:
            return (bad, good, good, bad)
        return (good, bad, bad, good)


@dataclass(frozen=True)
class PerfectPR(NoisyPR):
    """The Popescu-Rohrlich box: uniform outputs with ``alpha ^ beta == x*y``."""

    p: Fraction = field(default=Fraction(1), init=False)

    @property
    def descriptor(self) -> str:
        return "pr"


def joint_distribution(model: CorrelationModel, inp: BoxInput) -> dict:
    x, y = _check_bit("x", inp[0]), _check_bit("y", inp[1])
    return {BoxOutput(*o): p for o, p in zip(OUTCOMES, model.joint(x, y))}


def marginal_distribution(model: CorrelationModel, site: Site, own_input: int, other_input: int):
    """Probability that ``site`` outputs 1."""
    return model.marginal(site, _check_bit("own_input", own_input),
                          _check_bit("other_input", other_input))


def chsh_score_exact(model: CorrelationModel):
    """Sum over the four settings of ``P(alpha ^ beta == x*y)``."""
    total = Fraction(0) if model.exact else 0.0
    for x, y in SETTINGS:
        p = model.joint(x, y)
        if x & y:
            total += p[1] + p[2]
        else:
            total += p[0] + p[3]
    return total


def enumerate_local_strategies() -> list:
    return [
        (s, chsh_score_exact(s))
        for s in (LocalDeterministic(*bits) for bits in itertools.product((0, 1), repeat=4))
    ]


def sample_box(model: CorrelationModel, inp: BoxInput, rng: np.random.Generator) -> BoxOutput:
    """Draw one joint outcome; consumes exactly one uniform from ``rng``."""
    cdf = model._tables.cdf[inp[0]][inp[1]]
    u = rng.random()
    k = 0
    while k < 3 and u >= cdf[k]:
        k += 1
    return BoxOutput(k >> 1, k & 1)


def sample_boxes(model: CorrelationModel, x: int, y: int, size: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`sample_box` for a fixed setting.

    Draws the same uniforms, in the same order, as ``size`` scalar calls.
    """
    cdf = model._tables.cdf[x][y]
    k = np.searchsorted(cdf[:3], rng.random(size), side="right").astype(np.uint8)
    return k >> 1, k & 1


def is_valid_distribution(probs: Sequence, tol: float = 0.0) -> bool:
    return all(p >= -tol for p in probs) and abs(sum(probs) - 1) <= tol
