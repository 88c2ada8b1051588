"""Monte Carlo harness: CHSH estimation, no-signalling checks, noise sweeps.

Work is split into fixed-size chunks, each with its own stream keyed by
``(seed, tag, ...)``.  Results are reduced by key, so they are identical for
any worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .correlations import (
    SETTINGS,
    CorrelationModel,
    NoisyPR,
    Site,
    as_probability,
    enumerate_local_strategies,
    sample_boxes,
)
from .errors import InvalidArgumentError
from .protocol import BoxPool, run_ip_protocol
from .seeding import check_seed, derive_rng

CHUNK = 1 << 16

_TAG_CHSH = 1
_TAG_NOSIG = 2
_TAG_SWEEP = 3

SWEEP_COLUMNS = ("p", "N", "trials", "empirical_success", "analytic_success", "std_error", "seed")


def _chunks(total: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(i, min(size, total - start)) for i, start in enumerate(range(0, total, size))]


def _map(fn: Callable, units: Sequence, workers: int) -> Iterable:
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, units))
    return [fn(u) for u in units]


@dataclass(frozen=True)
class ChshEstimate:
    score: float
    std_error: float
    trials_per_setting: int
    seed: int
    wins: tuple  # per setting, in SETTINGS order


def _chsh_unit(args):
    model, setting, chunk, count, seed = args
    x, y = SETTINGS[setting]
    alpha, beta = sample_boxes(model, x, y, count, derive_rng(seed, _TAG_CHSH, setting, chunk))
    return setting, int(np.count_nonzero((alpha ^ beta) == (x & y)))


def chsh_monte_carlo(model: CorrelationModel, trials_per_setting: int, seed: int,
                     workers: int = 1) -> ChshEstimate:
    if trials_per_setting < 1:
        raise InvalidArgumentError("trials_per_setting must be at least 1")
    seed = check_seed(seed)
    units = [(model, s, c, k, seed) for s in range(4) for c, k in _chunks(trials_per_setting)]
    wins = [0] * 4
    for setting, w in _map(_chsh_unit, units, workers):
        wins[setting] += w
    t = trials_per_setting
    freqs = [w / t for w in wins]
    return ChshEstimate(
        score=sum(freqs),
        std_error=math.sqrt(sum(f * (1 - f) for f in freqs) / t),
        trials_per_setting=t,
        seed=seed,
        wins=tuple(wins),
    )


@dataclass(frozen=True)
class SignallingCheck:
    site: str
    own_input: int
    freq_other_0: float
    freq_other_1: float
    tv_distance: float


@dataclass(frozen=True)
class NoSignallingReport:
    checks: tuple
    trials: int
    threshold: float
    seed: int

    @property
    def max_tv(self) -> float:
        return max(c.tv_distance for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.tv_distance < self.threshold for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "threshold": self.threshold,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }


def _nosig_unit(args):
    model, site_i, own, other, chunk, count, seed = args
    x, y = (own, other) if site_i == 0 else (other, own)
    alpha, beta = sample_boxes(model, x, y, count,
                               derive_rng(seed, _TAG_NOSIG, site_i, own, other, chunk))
    out = alpha if site_i == 0 else beta
    return (site_i, own, other), int(np.count_nonzero(out))


def no_signalling_test(model: CorrelationModel, trials: int, seed: int,
                       threshold: float = 0.01, workers: int = 1) -> NoSignallingReport:
    """Compare each site's output frequencies across the other site's two inputs.

    For binary outputs the total-variation distance is the absolute
    difference of the frequencies of outcome 1.
    """
    if trials < 10_000:
        raise InvalidArgumentError("no-signalling test needs at least 10^4 trials")
    seed = check_seed(seed)
    units = [
        (model, site_i, own, other, c, k, seed)
        for site_i in (0, 1) for own in (0, 1) for other in (0, 1)
        for c, k in _chunks(trials)
    ]
    ones: dict = {}
    for key, count in _map(_nosig_unit, units, workers):
        ones[key] = ones.get(key, 0) + count
    checks = []
    for site_i, site in enumerate((Site.ALICE, Site.BOB)):
        for own in (0, 1):
            f0 = ones[(site_i, own, 0)] / trials
            f1 = ones[(site_i, own, 1)] / trials
            checks.append(SignallingCheck(site.value, own, f0, f1, abs(f1 - f0)))
    return NoSignallingReport(tuple(checks), trials, threshold, seed)


def analytic_ip_success(p, n: int):
    """Success probability of the one-bit IP protocol when each box honours
    the PR condition independently with probability ``p``.

    The output is wrong exactly when an odd number of the ``n`` boxes fail.
    """
    bias = 2 * p - 1
    return (1 + bias**n) / 2


@dataclass(frozen=True)
class SweepRow:
    p: float
    N: int
    trials: int
    empirical_success: float
    analytic_success: float
    std_error: float  # of the estimator at the analytic success rate
    seed: int

    @property
    def deviation(self) -> float:
        return abs(self.empirical_success - self.analytic_success)

    def within(self, sigmas: float = 3.0) -> bool:
        return self.deviation <= sigmas * self.std_error


def _sweep_unit(args):
    row, p, n, chunk, count, seed = args
    rng = derive_rng(seed, _TAG_SWEEP, row, chunk)
    model = NoisyPR(p)
    inputs = rng.integers(0, 2, size=(count, 2, n), dtype=np.uint8).tolist()
    successes = 0
    for x, y in inputs:
        res = run_ip_protocol(n, x, y, BoxPool(model, n), rng)
        ip = 0
        for a, b in zip(x, y):
            ip ^= a & b
        successes += res.output == ip
    return row, successes


def noisy_sweep(p_grid: Sequence, n_list: Sequence[int], trials: int, seed: int,
                workers: int = 1) -> list[SweepRow]:
    """Empirical vs analytic success of the one-bit IP protocol over noisy PR boxes."""
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    seed = check_seed(seed)
    grid = []
    for p in p_grid:
        q = as_probability(p)
        if q < Fraction(1, 2):
            raise InvalidArgumentError(f"sweep needs p in [1/2, 1], got {p}")
        for n in n_list:
            if n < 1:
                raise InvalidArgumentError(f"box count must be positive, got {n}")
            grid.append((q, int(n)))
    units = [
        (row, q, n, c, k, seed)
        for row, (q, n) in enumerate(grid)
        for c, k in _chunks(trials, CHUNK // 8)
    ]
    successes = [0] * len(grid)
    for row, s in _map(_sweep_unit, units, workers):
        successes[row] += s
    rows = []
    for (q, n), s in zip(grid, successes):
        analytic = float(analytic_ip_success(q, n))
        rows.append(SweepRow(
            p=float(q),
            N=n,
            trials=trials,
            empirical_success=s / trials,
            analytic_success=analytic,
            std_error=math.sqrt(analytic * (1 - analytic) / trials),
            seed=seed,
        ))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow([repr(r.p), r.N, r.trials, repr(r.empirical_success),
                         repr(r.analytic_success), repr(r.std_error), r.seed])
    return buf.getvalue()


def local_bound_report() -> dict:
    strategies = enumerate_local_strategies()
    best = max(score for _, score in strategies)
    return {
        "strategies": [{"strategy": s.descriptor, "score": str(score)} for s, score in strategies],
        "max": str(best),
        "min": str(min(score for _, score in strategies)),
        "argmax": [s.descriptor for s, score in strategies if score == best],
    }
