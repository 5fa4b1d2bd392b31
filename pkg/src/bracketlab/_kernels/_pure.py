"""Pure-Python reference kernels for the Monte Carlo hot loop.

The compiled extension (_speedups.pyx) implements exactly these
algorithms with the same IEEE-754 operation order, so both backends
produce bit-identical output. Any change here must be mirrored there.
"""

from __future__ import annotations

from math import exp

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0

BACKEND = "pure"


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First `count` raw 64-bit outputs of SplitMix64 for `seed`."""
    state = seed & _MASK64
    out = []
    for _ in range(count):
        state = (state + _GOLDEN) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        out.append((z ^ (z >> 31)) & _MASK64)
    return out


def pair_probability(fa, fb, means, stds, coefs, intercept: float) -> float:
    """Win probability for the first team of a pair.

    Left-to-right scalar accumulation; the standardized difference is
    formed per feature as ((fa - fb) - mean) / std.
    """
    t = float(intercept)
    for f in range(len(coefs)):
        t += coefs[f] * ((fa[f] - fb[f]) - means[f]) / stds[f]
    if t >= 0.0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


def run_iterations(feats, means, stds, coefs, intercept, base_seed, iterations):
    """Simulate `iterations` single-elimination tournaments.

    feats is an (n_slots, n_features) float64 array of raw feature
    values in first-round slot order; n_slots must be a power of two
    (at most 64). Iteration i uses a fresh SplitMix64 stream seeded
    with base_seed + i and draws one uniform per game, in structural
    game order. The winner of a game is the first slot iff u < p.

    Returns a (iterations, n_slots - 1) uint8 array of winning slot
    indices, games in structural order (round 1 first).
    """
    n = len(feats)
    if n < 2 or n & (n - 1) or n > 64:
        raise ValueError("slot count must be a power of two between 2 and 64")
    rows = [[float(v) for v in row] for row in np.asarray(feats, dtype=np.float64)]
    mu = [float(v) for v in means]
    sd = [float(v) for v in stds]
    w = [float(v) for v in coefs]
    b0 = float(intercept)
    p = len(w)
    n_games = n - 1

    out = np.empty((iterations, n_games), dtype=np.uint8)
    for it in range(iterations):
        state = (base_seed + it) & _MASK64
        cur = list(range(n))
        g = 0
        size = n
        row = out[it]
        while size > 1:
            nxt = []
            for j in range(size // 2):
                a = cur[2 * j]
                b = cur[2 * j + 1]
                fa = rows[a]
                fb = rows[b]
                t = b0
                for f in range(p):
                    t += w[f] * ((fa[f] - fb[f]) - mu[f]) / sd[f]
                if t >= 0.0:
                    pa = 1.0 / (1.0 + exp(-t))
                else:
                    e = exp(t)
                    pa = e / (1.0 + e)
                state = (state + _GOLDEN) & _MASK64
                z = state
                z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
                z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
                u = (((z ^ (z >> 31)) & _MASK64) >> 11) * _INV_2_53
                winner = a if u < pa else b
                row[g] = winner
                nxt.append(winner)
                g += 1
            cur = nxt
            size //= 2
    return out
