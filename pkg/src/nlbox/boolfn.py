"""Boolean functions as truth tables and as mod-2 polynomials.

Index convention: variable ``z_j`` (1-based) contributes ``2**(j-1)`` to a
truth-table index, so ``z_1`` is the least significant bit.  For a two-party
function on ``n + n`` variables the first ``n`` variables are Alice's ``x``
and the last ``n`` are Bob's ``y``; the table index is
``x_index + 2**n * y_index``.

A monomial is a bitmask over the variables it multiplies (bit ``j-1`` set for
``z_j``); the empty mask is the constant 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .seeding import check_seed, derive_rng

MAX_TABLE_VARS = 24
MAX_PARTY_VARS = 12

BUILTIN_NAMES = ("ip", "eq", "neq", "and", "or", "maj", "random")


def _check_num_vars(m) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidArgumentError(f"num_vars must be a positive integer, got {m!r}")
    if m > MAX_TABLE_VARS:
        raise ResourceLimitError(f"num_vars={m} exceeds the cap of {MAX_TABLE_VARS}")
    return int(m)


@dataclass(frozen=True, eq=False)
class TruthTable:
    num_vars: int
    values: np.ndarray

    def __post_init__(self):
        m = _check_num_vars(self.num_vars)
        v = np.asarray(self.values)
        if v.shape != (1 << m,):
            raise InvalidArgumentError(f"expected {1 << m} values for {m} variables, got shape {v.shape}")
        if v.size and not np.isin(v, (0, 1)).all():
            raise InvalidArgumentError("truth table values must be bits")
        v = v.astype(np.uint8, copy=True)
        v.flags.writeable = False
        object.__setattr__(self, "num_vars", m)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.num_vars == other.num_vars and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.num_vars, self.values.tobytes()))

    def __getitem__(self, index: int) -> int:
        return int(self.values[index])

    def __xor__(self, other: "TruthTable") -> "TruthTable":
        if self.num_vars != other.num_vars:
            raise InvalidArgumentError("tables differ in num_vars")
        return TruthTable(self.num_vars, self.values ^ other.values)

    def __repr__(self):
        return f"TruthTable(num_vars={self.num_vars}, hex={self.to_hex()!r})"

    def value(self, x_index: int, y_index: int, n: int) -> int:
        """Value of a two-party table at ``(x, y)`` given per-party length ``n``."""
        return int(self.values[x_index + (y_index << n)])

    def to_hex(self) -> str:
        """Four table entries per hex digit, lowest index in the digit's low bit."""
        v = self.values
        pad = (-v.size) % 4
        if pad:
            v = np.concatenate([v, np.zeros(pad, dtype=np.uint8)])
        digits = v.reshape(-1, 4) @ np.array([1, 2, 4, 8], dtype=np.uint8)
        return "".join("0123456789abcdef"[d] for d in digits)

    @classmethod
    def from_hex(cls, num_vars: int, text: str) -> "TruthTable":
        m = _check_num_vars(num_vars)
        size = 1 << m
        if len(text) != (size + 3) // 4:
            raise InvalidArgumentError(f"expected {(size + 3) // 4} hex digits for {m} variables, got {len(text)}")
        try:
            digits = np.array([int(c, 16) for c in text], dtype=np.uint8)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad hex string {text!r}") from exc
        bits = ((digits[:, None] >> np.arange(4, dtype=np.uint8)) & 1).reshape(-1)
        if bits[size:].any():
            raise InvalidArgumentError("hex string sets bits beyond the table length")
        return cls(m, bits[:size])


@dataclass(frozen=True)
class AnfPolynomial:
    num_vars: int
    monomials: frozenset

    def __post_init__(self):
        m = _check_num_vars(self.num_vars)
        monos = frozenset(int(mask) for mask in self.monomials)
        if any(mask < 0 or mask >> m for mask in monos):
            raise InvalidArgumentError(f"monomial mask outside {m} variables")
        object.__setattr__(self, "num_vars", m)
        object.__setattr__(self, "monomials", monos)

    def __xor__(self, other: "AnfPolynomial") -> "AnfPolynomial":
        if self.num_vars != other.num_vars:
            raise InvalidArgumentError("polynomials differ in num_vars")
        return AnfPolynomial(self.num_vars, self.monomials ^ other.monomials)

    def __str__(self):
        return format_anf(self)

    def is_zero(self) -> bool:
        return not self.monomials

    def eval_index(self, index: int) -> int:
        """Evaluate at the assignment encoded as a table index."""
        bit = 0
        for mask in self.monomials:
            if mask & index == mask:
                bit ^= 1
        return bit


def format_anf(poly: AnfPolynomial, names: Sequence[str] | None = None) -> str:
    """Human readable form, e.g. ``1 + z1 + z1*z2``; ``0`` for the zero polynomial."""
    if names is None:
        names = [f"z{j + 1}" for j in range(poly.num_vars)]
    if not poly.monomials:
        return "0"
    terms = []
    for mask in sorted(poly.monomials, key=lambda k: (k.bit_count(), k)):
        if mask == 0:
            terms.append("1")
        else:
            terms.append("*".join(names[j] for j in range(poly.num_vars) if mask >> j & 1))
    return " + ".join(terms)


def _xor_transform(values: np.ndarray, m: int) -> np.ndarray:
    # In-place butterfly over each variable; the transform is its own inverse.
    v = values.astype(np.uint8, copy=True)
    for j in range(m):
        block = v.reshape(-1, 2, 1 << j)
        block[:, 1, :] ^= block[:, 0, :]
    return v


def anf_from_truth_table(tt: TruthTable) -> AnfPolynomial:
    coeffs = _xor_transform(tt.values, tt.num_vars)
    return AnfPolynomial(tt.num_vars, frozenset(np.flatnonzero(coeffs).tolist()))


def truth_table_from_anf(poly: AnfPolynomial) -> TruthTable:
    coeffs = np.zeros(1 << poly.num_vars, dtype=np.uint8)
    if poly.monomials:
        coeffs[list(poly.monomials)] = 1
    return TruthTable(poly.num_vars, _xor_transform(coeffs, poly.num_vars))


def bits_to_index(bits: Sequence[int]) -> int:
    """``bits[0]`` is variable 1 (least significant)."""
    index = 0
    for j, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidArgumentError(f"not a bit: {b!r}")
        index |= int(b) << j
    return index


def index_to_bits(index: int, length: int) -> list[int]:
    return [index >> j & 1 for j in range(length)]


def evaluate_anf(poly: AnfPolynomial, assignment: Sequence[int]) -> int:
    if len(assignment) != poly.num_vars:
        raise InvalidArgumentError(
            f"assignment has {len(assignment)} bits, polynomial has {poly.num_vars} variables")
    return poly.eval_index(bits_to_index(assignment))


@dataclass(frozen=True)
class DecompositionTerm:
    """One summand ``P(x) * Q(y)``; ``Q`` is the product of Bob's variables in ``subset``."""

    alice_poly: AnfPolynomial
    subset: int

    def bob_value(self, y_index: int) -> int:
        return int(self.subset & y_index == self.subset)


@dataclass(frozen=True)
class BipartiteDecomposition:
    """``f(x, y) = XOR_S P_S(x) * prod_{j in S} y_j`` with one term per subset ``S``.

    ``terms[i].subset == i``; zero ``P_S`` are kept so there are exactly
    ``2**n`` terms.
    """

    n: int
    terms: tuple

    def evaluate(self, x_index: int, y_index: int) -> int:
        bit = 0
        for term in self.terms:
            if term.bob_value(y_index):
                bit ^= term.alice_poly.eval_index(x_index)
        return bit

    def nonzero_terms(self) -> list:
        return [t for t in self.terms if not t.alice_poly.is_zero()]


def decompose_bipartite(tt: TruthTable, n: int) -> BipartiteDecomposition:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    if tt.num_vars % 2:
        raise InvalidArgumentError(f"bipartite function needs an even variable count, got {tt.num_vars}")
    if tt.num_vars != 2 * n:
        raise InvalidArgumentError(f"table has {tt.num_vars} variables, expected {2 * n}")
    if n > MAX_PARTY_VARS:
        raise ResourceLimitError(f"n={n} exceeds the decomposition cap of {MAX_PARTY_VARS}")
    low = (1 << n) - 1
    groups: list[set] = [set() for _ in range(1 << n)]
    for mask in anf_from_truth_table(tt).monomials:
        groups[mask >> n].add(mask & low)
    terms = tuple(
        DecompositionTerm(AnfPolynomial(n, frozenset(g)), s) for s, g in enumerate(groups)
    )
    return BipartiteDecomposition(n, terms)


def _party_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << (2 * n), dtype=np.int64)
    return idx & ((1 << n) - 1), idx >> n


def builtin_function(name: str, n: int, seed: int | None = None) -> TruthTable:
    """Two-party table on ``2n`` variables.

    ``ip``  inner product mod 2;  ``eq`` / ``neq`` string (in)equality;
    ``and`` AND over i of ``x_i & y_i``;  ``or`` OR over i of ``x_i & y_i``;
    ``maj`` 1 iff more than ``n`` of the ``2n`` input bits are set;
    ``random`` uniform table drawn from ``seed``.
    """
    key = name.lower()
    if key not in BUILTIN_NAMES:
        raise InvalidArgumentError(f"unknown function {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    if 2 * n > MAX_TABLE_VARS:
        raise ResourceLimitError(f"n={n} exceeds the table cap of {MAX_TABLE_VARS // 2}")
    x, y = _party_indices(n)
    full = (1 << n) - 1
    if key == "ip":
        values = np.bitwise_count(x & y) & 1
    elif key == "eq":
        values = x == y
    elif key == "neq":
        values = x != y
    elif key == "and":
        values = (x & y) == full
    elif key == "or":
        values = (x & y) != 0
    elif key == "maj":
        values = (np.bitwise_count(x) + np.bitwise_count(y)) > n
    else:
        if seed is None:
            raise InvalidArgumentError("random function needs a seed")
        values = derive_rng(check_seed(seed)).integers(0, 2, size=1 << (2 * n))
    return TruthTable(2 * n, np.asarray(values, dtype=np.uint8))


def all_functions(n: int) -> Iterable[TruthTable]:
    """Every two-party function on ``n + n`` variables (only sensible for tiny n)."""
    size = 1 << (2 * n)
    if size > 16:
        raise ResourceLimitError(f"enumerating all functions for n={n} is infeasible")
    shifts = np.arange(size, dtype=np.uint32)
    for code in range(1 << size):
        yield TruthTable(2 * n, (np.uint32(code) >> shifts) & 1)


def function_to_json(tt: TruthTable, anf: bool = False) -> str:
    if anf:
        doc = {"num_vars": tt.num_vars,
               "anf_monomials": sorted(anf_from_truth_table(tt).monomials)}
    else:
        doc = {"num_vars": tt.num_vars, "truth_table_hex": tt.to_hex()}
    return json.dumps(doc, indent=2) + "\n"


def function_from_json(text: str) -> TruthTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"function file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "num_vars" not in doc:
        raise InvalidArgumentError("function file needs a num_vars field")
    has_tt, has_anf = "truth_table_hex" in doc, "anf_monomials" in doc
    if has_tt == has_anf:
        raise InvalidArgumentError("function file needs exactly one of truth_table_hex, anf_monomials")
    if has_tt:
        return TruthTable.from_hex(doc["num_vars"], str(doc["truth_table_hex"]))
    monos = doc["anf_monomials"]
    if not isinstance(monos, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in monos):
        raise InvalidArgumentError("anf_monomials must be a list of integers")
    if len(set(monos)) != len(monos):
        raise InvalidArgumentError("anf_monomials contains duplicates")
    return truth_table_from_anf(AnfPolynomial(doc["num_vars"], frozenset(monos)))
