"""Monte Carlo oracle: sample escape trajectories and histogram the counts.

Each shot draws the inter-escape waiting times (sums of three exponential
stages) and counts how many escapes fit inside the observation window.
Random numbers come from counter-based Philox substreams with a fixed
per-shot layout, so a histogram is a pure function of (seed, parameters):
identical across runs, chunk sizes and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .counting import CountDistribution

# each Philox counter tick yields 4 uint64 words = 4 uniform doubles
_WORDS_PER_TICK = 4


@dataclass
class RngStream:
    """Counter-based random stream: a seed plus a position in tick units.

    Positions advance in whole ticks (4 doubles each), so consumers that
    draw in padded blocks occupy disjoint, reproducible counter ranges
    no matter how the work is chunked.
    """

    seed: int
    position: int = 0

    def generator_at(self, tick: int) -> Generator:
        """Fresh generator positioned at an absolute tick."""
        gen = Generator(Philox(key=self.seed))
        if tick:
            gen.bit_generator.advance(tick)
        return gen

    def draw_uniforms(self, count: int) -> np.ndarray:
        """Draw count uniforms in [0, 1), consuming whole ticks."""
        ticks = -(-count // _WORDS_PER_TICK)
        gen = self.generator_at(self.position)
        block = gen.random(ticks * _WORDS_PER_TICK)
        self.position += ticks
        return block[:count]


def _stage_rates(k: int, n: int, q: float, tau0: float) -> np.ndarray:
    m = float(n - k)
    if math.isinf(q):
        return np.array([m / tau0])
    return np.array([m, m + q, m + 2.0 * q]) / tau0


def sample_waiting_time(
    k: int, n: int, q: float, tau0: float, rng: RngStream
) -> float:
    """One draw of the waiting time before escape k+1 out of n.

    Sum of three inverse-CDF exponential draws with rates (n-k+jq)/tau0;
    exactly one draw for the q = inf sentinel, whose fast stages take
    zero time.
    """
    if not 0 <= k < n:
        raise ValueError(f"need 0 <= k < n, got k = {k}, n = {n}")
    rates = _stage_rates(k, n, q, tau0)
    u = rng.draw_uniforms(len(rates))
    return float((-np.log1p(-u) / rates).sum())


def _ticks_per_shot(n: int, q: float) -> int:
    draws = n if math.isinf(q) else 3 * n
    return -(-draws // _WORDS_PER_TICK)


def simulate_counts(
    n: int,
    q: float,
    p: float,
    shots: int,
    rng: RngStream | int,
    chunk_size: int = 1 << 16,
) -> CountDistribution:
    """Empirical count distribution from shots independent trajectories.

    Each shot occupies a fixed tick range of the stream: shot i draws its
    3n stage exponentials (n for q = inf) from ticks [i*t, (i+1)*t), so
    the histogram does not depend on chunk_size. The count is how many
    full waiting times fit before theta = -ln(1-p) in 1/tau0 units (tau0
    cancels between rates and horizon).

    Returns
    -------
    CountDistribution
        method "monte-carlo", with per-bin standard errors
        sqrt(P(1-P)/shots) in stderr.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if not (q > 0 or math.isinf(q)):
        raise ValueError(f"q must be positive or inf, got {q}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if isinstance(rng, int):
        rng = RngStream(seed=rng)

    counts = np.zeros(n + 1, dtype=np.int64)
    if n == 0 or p == 0.0:
        counts[0] = shots
    elif p == 1.0:
        counts[n] = shots
    else:
        theta = -math.log1p(-p)
        stages = 1 if math.isinf(q) else 3
        if math.isinf(q):
            rates = np.arange(n, 0, -1, dtype=float)
        else:
            k = np.arange(n, dtype=float)[:, None]
            rates = ((n - k) + np.array([0.0, 1.0, 2.0]) * q).ravel()
        tps = _ticks_per_shot(n, q)
        base = rng.position
        done = 0
        while done < shots:
            todo = min(chunk_size, shots - done)
            gen = rng.generator_at(base + done * tps)
            block = gen.random((todo, tps * _WORDS_PER_TICK))
            u = block[:, : stages * n]
            waits = (-np.log1p(-u) / rates).reshape(todo, n, stages).sum(axis=2)
            arrival = np.cumsum(waits, axis=1)
            a = (arrival <= theta).sum(axis=1)
            counts += np.bincount(a, minlength=n + 1)
            done += todo
        rng.position = base + shots * tps

    probs = counts / shots
    stderr = np.sqrt(probs * (1.0 - probs) / shots)
    return CountDistribution(
        n=n, probabilities=probs, q=q, p=p, method="monte-carlo", stderr=stderr
    )
