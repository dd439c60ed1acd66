"""Monte Carlo estimate of per-trial forge success for candidate desk levels.

For each candidate (n, p, small, large) we sample symmetric graphs with loops
and check: every set of size <= small has a common neighbour, max degree
(loop counts once) < large. Also reports how often the extension-axiom
condition used at depth 3 holds (any <= k vertices have >= k+1 common
neighbours, every degree >= 2).
"""
import itertools
import sys

import numpy as np


def sample(n, p, rng):
    upper = rng.random((n, n)) < p
    adj = np.triu(upper)
    adj = adj | adj.T
    return adj


def covered_all(adj, s):
    n = adj.shape[0]
    rows = [int("".join("1" if b else "0" for b in adj[v][::-1]), 2) for v in range(n)]
    full = (1 << n) - 1

    def rec(start, depth, acc):
        if acc == 0:
            return False
        if depth == s:
            return True
        for v in range(start, n):
            if not rec(v + 1, depth + 1, acc & rows[v]):
                return False
        return True

    return rec(0, 0, full)


def ext_ok(adj, k):
    n = adj.shape[0]
    if adj.sum(axis=1).min() < 2:
        return False
    for u in itertools.combinations(range(n), k):
        common = np.logical_and.reduce([adj[v] for v in u])
        if common.sum() < k + 1:
            return False
    return True


def main():
    rng = np.random.default_rng(12345)
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    candidates = [
        (1, 12, 0.80, 3, 12),
        (1, 12, 0.80, 3, 11),
        (1, 16, 0.75, 3, 16),
        (2, 24, 0.80, 4, 24),
        (2, 24, 0.80, 4, 23),
        (2, 24, 0.75, 4, 24),
        (3, 48, 0.80, 5, 48),
        (3, 48, 0.80, 5, 46),
        (3, 40, 0.80, 5, 40),
    ]
    for level, n, p, s, big in candidates:
        ok = 0
        ext = 0
        for _ in range(trials):
            adj = sample(n, p, rng)
            deg = adj.sum(axis=1).max()
            good = deg < big and covered_all(adj, s)
            ok += good
            if good and level <= 2:
                ext += ext_ok(adj, level)
        print(f"level={level} n={n} p={p} small={s} large={big}: "
              f"P(success)={ok / trials:.3f} ext|success={ext / max(ok, 1):.3f}")


if __name__ == "__main__":
    main()
