"""Two-party protocols that spend pre-shared correlation boxes.

Alice holds ``x``, Bob holds ``y``, and they share a :class:`BoxPool`.  In the
one-bit protocols every term ``i`` of the function's inner-product form gets
its own box: Alice feeds it her bit ``P_i(x)``, Bob feeds it ``Q_i(y)``.  With
a PR box the outcomes satisfy ``alpha_i ^ beta_i == P_i(x) & Q_i(y)``, so Bob's
single message ``b = XOR beta_i`` lets Alice finish with ``b ^ XOR alpha_i``.

The parties are separate objects.  Alice never sees ``y`` or Bob's outcomes,
only the transcript; the same holds the other way round.
"""

from __future__ import annotations

import enum
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boolfn import (
    BipartiteDecomposition,
    TruthTable,
    all_functions,
    bits_to_index,
    decompose_bipartite,
)
from .correlations import CorrelationModel
from .errors import BoxReuseError, InvalidArgumentError, PoolExhaustedError, ResourceLimitError
from .seeding import check_seed, derive_rng

VERIFY_MAX_N = 8


class Direction(enum.Enum):
    ALICE_TO_BOB = "alice->bob"
    BOB_TO_ALICE = "bob->alice"


@dataclass(frozen=True)
class Message:
    direction: Direction
    payload: tuple


class Transcript:
    """Append-only record of everything sent over the channel."""

    def __init__(self):
        self._messages: list[Message] = []

    def send(self, direction: Direction, payload: Sequence[int]) -> Message:
        msg = Message(direction, tuple(int(b) for b in payload))
        self._messages.append(msg)
        return msg

    @property
    def messages(self) -> tuple:
        return tuple(self._messages)

    @property
    def bits_communicated(self) -> int:
        return sum(len(m.payload) for m in self._messages)

    def __len__(self):
        return len(self._messages)

    def __repr__(self):
        return f"Transcript({self._messages!r})"


@dataclass(frozen=True)
class ProtocolResult:
    output: int
    transcript: Transcript
    boxes_consumed: int
    bob_output: int | None = None

    @property
    def bits_communicated(self) -> int:
        return self.transcript.bits_communicated


class BoxInstance:
    """One shared box.  Each site may measure it exactly once, in either order.

    The first site to measure draws from its marginal; the second draws from
    the conditional law given the first outcome.  For non-signalling models
    this reproduces the joint law regardless of who goes first.
    """

    __slots__ = ("_tables", "_rng", "_alice", "_bob")

    def __init__(self, model: CorrelationModel, rng: np.random.Generator, _tables=None):
        self._tables = model._tables if _tables is None else _tables
        self._rng = rng
        self._alice = None
        self._bob = None

    def measure_alice(self, x: int) -> int:
        if self._alice is not None:
            raise BoxReuseError("Alice already measured this box")
        t = self._tables
        if self._bob is None:
            p = t.alice_marginal[x]
        else:
            y, beta = self._bob
            p = t.alpha_given_beta[x][y][beta]
        alpha = int(self._rng.random() < p)
        self._alice = (x, alpha)
        return alpha

    def measure_bob(self, y: int) -> int:
        if self._bob is not None:
            raise BoxReuseError("Bob already measured this box")
        t = self._tables
        if self._alice is None:
            p = t.bob_marginal[y]
        else:
            x, alpha = self._alice
            p = t.beta_given_alpha[x][y][alpha]
        beta = int(self._rng.random() < p)
        self._bob = (y, beta)
        return beta


class BoxPool:
    """``capacity`` pre-shared boxes of one model, handed out in index order."""

    def __init__(self, model: CorrelationModel, capacity: int):
        if capacity < 0:
            raise InvalidArgumentError("capacity must be non-negative")
        self.model = model
        self.capacity = int(capacity)
        self._consumed = 0
        self._tables = model._tables

    @property
    def consumed(self) -> int:
        return self._consumed

    @property
    def remaining(self) -> int:
        return self.capacity - self._consumed

    def take(self, count: int, rng: np.random.Generator) -> list[BoxInstance]:
        if count > self.remaining:
            raise PoolExhaustedError(
                f"need {count} boxes, pool has {self.remaining} of {self.capacity} left")
        self._consumed += count
        return [BoxInstance(self.model, rng, self._tables) for _ in range(count)]


class Alice:
    def __init__(self, x_index: int, box_inputs: list[int]):
        self._x = x_index
        self.box_inputs = box_inputs
        self.outcomes: list[int] | None = None

    def measure(self, boxes: Sequence[BoxInstance]) -> None:
        self.outcomes = [box.measure_alice(v) for box, v in zip(boxes, self.box_inputs)]

    def conclude(self, transcript: Transcript) -> int:
        (b,) = transcript.messages[0].payload
        parity = b
        for a in self.outcomes:
            parity ^= a
        return parity


class Bob:
    def __init__(self, y_index: int, box_inputs: list[int]):
        self._y = y_index
        self.box_inputs = box_inputs
        self.outcomes: list[int] | None = None

    def measure(self, boxes: Sequence[BoxInstance]) -> None:
        self.outcomes = [box.measure_bob(v) for box, v in zip(boxes, self.box_inputs)]

    def message(self) -> int:
        parity = 0
        for b in self.outcomes:
            parity ^= b
        return parity


def run_parties(alice: Alice, bob: Bob, pool: BoxPool, rng: np.random.Generator,
                both_learn: bool = False) -> ProtocolResult:
    """Box phase, Bob's one-bit message, Alice's conclusion."""
    boxes = pool.take(len(alice.box_inputs), rng)
    transcript = Transcript()
    bob.measure(boxes)
    transcript.send(Direction.BOB_TO_ALICE, (bob.message(),))
    alice.measure(boxes)
    output = alice.conclude(transcript)
    bob_output = None
    if both_learn:
        bob_output = transcript.send(Direction.ALICE_TO_BOB, (output,)).payload[0]
    return ProtocolResult(output, transcript, len(boxes), bob_output)


def _check_bits(name: str, bits: Sequence[int], n: int) -> int:
    if len(bits) != n:
        raise InvalidArgumentError(f"{name} has {len(bits)} bits, expected {n}")
    return bits_to_index(bits)


def run_ip_protocol(n: int, x: Sequence[int], y: Sequence[int], pool: BoxPool,
                    rng: np.random.Generator, both_learn: bool = False) -> ProtocolResult:
    """Inner product mod 2 with one box per coordinate and one bit from Bob."""
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    alice = Alice(_check_bits("x", x, n), [int(b) for b in x])
    bob = Bob(_check_bits("y", y, n), [int(b) for b in y])
    return run_parties(alice, bob, pool, rng, both_learn)


def run_general_protocol(decomp: BipartiteDecomposition, x: Sequence[int], y: Sequence[int],
                         pool: BoxPool, rng: np.random.Generator, prune: bool = False,
                         both_learn: bool = False) -> ProtocolResult:
    """Any two-party function via its inner-product form; box ``i`` serves term ``i``.

    ``prune`` drops terms whose ``P_S`` is identically zero; both parties know
    the decomposition, so this needs no communication.
    """
    xi = _check_bits("x", x, decomp.n)
    yi = _check_bits("y", y, decomp.n)
    return _run_general_indexed(decomp, xi, yi, pool, rng, prune, both_learn)


def _run_general_indexed(decomp, x_index, y_index, pool, rng, prune=False, both_learn=False):
    terms = decomp.nonzero_terms() if prune else decomp.terms
    alice = Alice(x_index, [t.alice_poly.eval_index(x_index) for t in terms])
    bob = Bob(y_index, [t.bob_value(y_index) for t in terms])
    return run_parties(alice, bob, pool, rng, both_learn)


def run_baseline_protocol(tt: TruthTable, x: Sequence[int], y: Sequence[int]) -> ProtocolResult:
    """Bob sends his whole input; Alice looks up the answer."""
    if tt.num_vars % 2:
        raise InvalidArgumentError("baseline needs a two-party table")
    n = tt.num_vars // 2
    xi = _check_bits("x", x, n)
    _check_bits("y", y, n)
    transcript = Transcript()
    msg = transcript.send(Direction.BOB_TO_ALICE, y)
    return ProtocolResult(tt.value(xi, bits_to_index(msg.payload), n), transcript, 0)


@dataclass
class VerifyReport:
    n: int
    trials_per_pair: int
    seed: int
    errors: int
    error_frequency: np.ndarray  # [x_index, y_index]
    bits_histogram: Counter
    boxes_per_run: int
    functions: int = 1
    runs: int = field(init=False)

    def __post_init__(self):
        self.runs = self.functions * self.pairs * self.trials_per_pair

    @property
    def pairs(self) -> int:
        return 1 << (2 * self.n)

    @property
    def bits_per_run(self):
        if len(self.bits_histogram) == 1:
            return next(iter(self.bits_histogram))
        return {str(k): v for k, v in sorted(self.bits_histogram.items())}

    def to_dict(self, function: str, model: str) -> dict:
        return {
            "function": function,
            "model": model,
            "n": self.n,
            "pairs": self.pairs,
            "trials_per_pair": self.trials_per_pair,
            "errors": self.errors,
            "bits_per_run": self.bits_per_run,
            "boxes_per_run": self.boxes_per_run,
            "seed": self.seed,
        }


def _verify_pair(args):
    decomp, tt, model, pair, trials, seed, prune = args
    n = decomp.n
    x_index, y_index = pair & ((1 << n) - 1), pair >> n
    expected = tt.value(x_index, y_index, n)
    rng = derive_rng(seed, pair)
    errors = 0
    bits = Counter()
    boxes = 0
    for _ in range(trials):
        pool = BoxPool(model, len(decomp.terms))
        res = _run_general_indexed(decomp, x_index, y_index, pool, rng, prune)
        errors += res.output != expected
        bits[res.bits_communicated] += 1
        boxes = res.boxes_consumed
    return pair, errors, bits, boxes


def verify_exhaustive(tt: TruthTable, n: int, model: CorrelationModel, trials_per_pair: int = 1,
                      seed: int = 0, workers: int = 1, prune: bool = False) -> VerifyReport:
    """Run the one-bit protocol on every input pair and compare with the table.

    Each pair draws from its own stream keyed by ``(seed, pair)``, so the
    report does not depend on ``workers``.
    """
    if n > VERIFY_MAX_N:
        raise ResourceLimitError(f"n={n} exceeds the verification cap of {VERIFY_MAX_N}")
    if trials_per_pair < 1:
        raise InvalidArgumentError("trials_per_pair must be at least 1")
    seed = check_seed(seed)
    decomp = decompose_bipartite(tt, n)
    units = [(decomp, tt, model, pair, trials_per_pair, seed, prune) for pair in range(1 << (2 * n))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_verify_pair, units, chunksize=max(1, len(units) // (4 * workers))))
    else:
        results = map(_verify_pair, units)

    freq = np.zeros((1 << n, 1 << n))
    bits = Counter()
    total_errors = 0
    boxes_per_run = 0
    for pair, errors, hist, boxes in results:
        freq[pair & ((1 << n) - 1), pair >> n] = errors / trials_per_pair
        bits.update(hist)
        total_errors += errors
        boxes_per_run = boxes
    return VerifyReport(n, trials_per_pair, seed, total_errors, freq, bits, boxes_per_run)


def verify_all_functions(n: int, model: CorrelationModel, seed: int = 0) -> VerifyReport:
    """Exhaustive sweep over every function on ``n + n`` variables, one trial per pair.

    Function number ``k`` (its table read as a binary number) uses the stream
    ``(seed, k)``.  ``error_frequency`` aggregates over functions.
    """
    seed = check_seed(seed)
    size = 1 << n
    freq = np.zeros((size, size))
    bits = Counter()
    total_errors = 0
    functions = 0
    boxes_per_run = size
    for code, tt in enumerate(all_functions(n)):
        decomp = decompose_bipartite(tt, n)
        rng = derive_rng(seed, code)
        values = tt.values
        for pair in range(size * size):
            x_index, y_index = pair & (size - 1), pair >> n
            res = _run_general_indexed(decomp, x_index, y_index, BoxPool(model, size), rng)
            if res.output != values[pair]:
                total_errors += 1
                freq[x_index, y_index] += 1
            bits[res.bits_communicated] += 1
        functions += 1
    freq /= functions
    return VerifyReport(n, 1, seed, total_errors, freq, bits, boxes_per_run, functions=functions)
