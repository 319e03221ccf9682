"""Structure of finite Markov chains: closed classes, primitivity, stationary law.

Two independent unichain tests live here on purpose. classify_chain walks
the support digraph (strongly connected components, then closed-class
counting); unichain_by_invertibility decides the same question numerically
from the pivots of I + E - P. Their agreement on every stochastic matrix is
a core verified property of the package, so neither may be implemented in
terms of the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPrimitiveError, NotUnichainError
from .linalg import is_invertible

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class ChainClassification:
    """Closed-class count, transient states, and the unichain verdict."""

    closed_class_count: int
    transient_states: frozenset
    is_unichain: bool


@dataclass(frozen=True)
class PrimitivityCertificate:
    """Smallest exponent with an entrywise-positive kernel power.

    ``omega`` is the minimum entry of that power; ``exponent`` never exceeds
    the Wielandt bound n^2 - 2n + 2.
    """

    exponent: int
    omega: float


def check_stochastic(p: np.ndarray, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    """Return ``p`` as a float64 array, raising ValueError if not row-stochastic."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {p.shape}")
    if np.any(p < 0.0):
        raise ValueError("matrix has negative entries")
    sums = p.sum(axis=1)
    bad = np.abs(sums - 1.0) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"row {i} sums to {sums[i]!r}, not 1")
    return p


def _strongly_connected_components(adj: list) -> list:
    """Tarjan's algorithm, iterative to survive deep graphs."""
    n = len(adj)
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work.pop()
            if ei == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while ei < len(adj[v]):
                w = adj[v][ei]
                ei += 1
                if index[w] == -1:
                    work.append((v, ei))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
    return components


def classify_chain(p: np.ndarray) -> ChainClassification:
    """Count closed irreducible classes of the support digraph of ``p``.

    An edge i -> j exists iff p[i, j] > 0 (exact, inputs are model data).
    A component is closed iff no edge leaves it; states outside every closed
    component are transient. Unichain means exactly one closed class.
    """
    p = check_stochastic(p)
    n = p.shape[0]
    adj = [list(np.flatnonzero(p[i] > 0.0)) for i in range(n)]
    components = _strongly_connected_components(adj)
    comp_of = np.empty(n, dtype=np.int64)
    for ci, comp in enumerate(components):
        for v in comp:
            comp_of[v] = ci
    closed = []
    for ci, comp in enumerate(components):
        if all(comp_of[w] == ci for v in comp for w in adj[v]):
            closed.append(ci)
    closed_set = set(closed)
    transient = frozenset(
        v for v in range(n) if comp_of[v] not in closed_set
    )
    return ChainClassification(
        closed_class_count=len(closed),
        transient_states=transient,
        is_unichain=len(closed) == 1,
    )


def unichain_by_invertibility(p: np.ndarray) -> bool:
    """Unichain test via invertibility of I + E - P (E the all-ones matrix)."""
    p = check_stochastic(p)
    n = p.shape[0]
    m = np.eye(n) + np.ones((n, n)) - p
    return is_invertible(m)


def primitivity_certificate(p: np.ndarray) -> PrimitivityCertificate:
    """Smallest N with p^N entrywise positive, and the minimum entry of p^N.

    Raises NotPrimitiveError when no such N exists within the Wielandt bound
    n^2 - 2n + 2, which signals a periodic or multichain kernel.
    """
    p = check_stochastic(p)
    n = p.shape[0]
    bound = n * n - 2 * n + 2
    power = p.copy()
    for exponent in range(1, bound + 1):
        if np.all(power > 0.0):
            return PrimitivityCertificate(exponent=exponent, omega=float(power.min()))
        power = power @ p
    raise NotPrimitiveError(
        f"no entrywise-positive power up to the Wielandt bound {bound}"
    )


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """The unique row vector mu >= 0 with mu @ p = mu and sum 1.

    Solves (P^T - I) stacked with the normalization row in the least-squares
    sense; for a unichain kernel the stacked system has a unique solution.
    Raises NotUnichainError on multichain input.
    """
    p = check_stochastic(p)
    n = p.shape[0]
    if not classify_chain(p).is_unichain:
        raise NotUnichainError("stationary distribution requires a unichain kernel")
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    mu, *_ = np.linalg.lstsq(a, b, rcond=None)
    mu = np.where(np.abs(mu) < 1e-13, 0.0, mu)
    mu = mu / mu.sum()
    residual = float(np.max(np.abs(mu @ p - mu)))
    if residual > 1e-10 or np.any(mu < 0.0):
        raise NotUnichainError(
            f"stationary solve residual {residual:.3e} exceeds 1e-10"
        )
    return mu
