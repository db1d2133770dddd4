"""Reference implementations that share no code with the package.

They are slow and simple on purpose: brute-force cycle search, a string
evaluator for hand-written eigenvalue formulas, central differences.
"""
import math
import re

import numpy as np


def iter_simple_cycles(adj):
    """Elementary cycles of ``adj`` ({v: iterable of successors}) by plain DFS.

    Each cycle is produced once, rooted at its smallest vertex.
    """
    rank = {v: p for p, v in enumerate(sorted(adj))}

    def dfs(root, v, path, seen):
        for w in adj.get(v, ()):
            if w == root:
                yield tuple(path)
            elif w not in seen and rank[w] > rank[root]:
                seen.add(w)
                path.append(w)
                yield from dfs(root, w, path, seen)
                path.pop()
                seen.discard(w)

    for r in sorted(adj):
        yield from dfs(r, r, [r], {r})


def simple_cycles(adj):
    return list(iter_simple_cycles(adj))


def any_cycle_not_above_one(adj, weight_of, tol=1e-9):
    """Exhaustive check: is there an elementary cycle with product <= 1 + tol.

    ``weight_of(cycle)`` returns the list of positive factors for the cycle.
    """
    return any(math.prod(weight_of(c)) <= 1 + tol for c in iter_simple_cycles(adj))


_LAM = re.compile(r"λ(\d)(\d)")


def evaluate(formula: str, table) -> float:
    """Evaluate a formula such as ``min(-λ14/λ12, 1-λ15/λ12)``.

    ``table[j][k-1]`` is the eigenvalue at node j in direction k.
    """
    expr = _LAM.sub(lambda m: f"L[{m.group(1)}][{int(m.group(2)) - 1}]", formula)
    return float(eval(expr, {"__builtins__": {}}, {"L": table, "min": min, "max": max}))


def normalize(formula: str) -> str:
    return formula.replace(" ", "")


def fd_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    n = len(x)
    J = np.empty((n, n))
    for k in range(n):
        d = np.zeros(n)
        d[k] = h
        J[:, k] = (f(x + d) - f(x - d)) / (2 * h)
    return J


def rescaled_table(table, rng, lo=0.1, hi=5.0):
    """Same sign pattern, fresh magnitudes."""
    return {j: [math.copysign(rng.uniform(lo, hi), v) if v != 0 else 0.0 for v in row]
            for j, row in table.items()}
