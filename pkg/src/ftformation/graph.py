"""Directed leader-follower graphs and their positivity certificate.

Node 0 is the leader; followers are numbered 1..N. An edge ``(j, i, w)``
means follower i listens to node j with weight w, stored as ``a_ij = w``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = [
    "GraphError",
    "DirectedLeaderGraph",
    "GraphCertificate",
    "build_graph",
    "has_leader_spanning_tree",
    "certificate",
    "parse_edge_list",
    "read_edge_list",
]

RESIDUAL_TOL = 1e-10
SYMMETRY_TOL = 1e-9


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedLeaderGraph:
    n_followers: int
    follower_weights: np.ndarray
    leader_weights: np.ndarray

    def __post_init__(self):
        A = np.array(self.follower_weights, dtype=float)
        b = np.array(self.leader_weights, dtype=float).ravel()
        n = int(self.n_followers)
        if n < 1:
            raise GraphError("need at least one follower")
        if A.shape != (n, n) or b.shape != (n,):
            raise GraphError(f"weight arrays do not match {n} followers")
        if np.any(np.diag(A) != 0):
            raise GraphError("self-loops are not allowed")
        if np.any(A < 0) or np.any(b < 0):
            raise GraphError("weights must be nonnegative")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "n_followers", n)
        object.__setattr__(self, "follower_weights", A)
        object.__setattr__(self, "leader_weights", b)

    @property
    def laplacian(self) -> np.ndarray:
        A = self.follower_weights
        return np.diag(A.sum(axis=1)) - A

    @property
    def info_matrix(self) -> np.ndarray:
        return self.laplacian + np.diag(self.leader_weights)

    def edges(self) -> list[tuple[int, int, float]]:
        out = [(0, i + 1, float(w)) for i, w in enumerate(self.leader_weights) if w > 0]
        rows, cols = np.nonzero(self.follower_weights)
        out += [(int(j) + 1, int(i) + 1, float(self.follower_weights[i, j])) for i, j in zip(rows, cols)]
        return out


@dataclass(frozen=True)
class GraphCertificate:
    H: np.ndarray
    pi: np.ndarray
    Xi: np.ndarray
    lambda_min_Xi: float
    residual: float


def build_graph(
    edges: Iterable[tuple[int, int, float]],
    leader_links: Iterable[tuple[int, float]],
    n: int,
) -> DirectedLeaderGraph:
    if n < 1:
        raise GraphError("need at least one follower")
    A = np.zeros((n, n))
    b = np.zeros(n)
    seen = set()
    for src, dst, w in edges:
        src, dst, w = int(src), int(dst), float(w)
        for node in (src, dst):
            if not 1 <= node <= n:
                raise GraphError(f"follower index {node} outside 1..{n}")
        if src == dst:
            raise GraphError(f"self-loop on node {src}")
        if not w > 0:
            raise GraphError(f"edge {src}->{dst} has non-positive weight {w}")
        if (src, dst) in seen:
            raise GraphError(f"duplicate edge {src}->{dst}")
        seen.add((src, dst))
        A[dst - 1, src - 1] = w
    pinned = set()
    for node, w in leader_links:
        node, w = int(node), float(w)
        if not 1 <= node <= n:
            raise GraphError(f"leader link to {node} outside 1..{n}")
        if not w > 0:
            raise GraphError(f"leader link to {node} has non-positive weight {w}")
        if node in pinned:
            raise GraphError(f"duplicate leader link to {node}")
        pinned.add(node)
        b[node - 1] = w
    return DirectedLeaderGraph(n, A, b)


def has_leader_spanning_tree(g: DirectedLeaderGraph) -> bool:
    """Every follower reachable from the leader along directed edges."""
    n = g.n_followers
    A = g.follower_weights
    reached = np.zeros(n, dtype=bool)
    queue = deque(int(i) for i in np.flatnonzero(g.leader_weights > 0))
    reached[list(queue)] = True
    while queue:
        j = queue.popleft()
        for i in np.flatnonzero(A[:, j] > 0):
            if not reached[i]:
                reached[i] = True
                queue.append(int(i))
    return bool(reached.all())


def certificate(g: DirectedLeaderGraph) -> GraphCertificate:
    """Solve H^T pi = 1 and report Xi = (Pi H + H^T Pi) / 2 with its smallest eigenvalue."""
    if not has_leader_spanning_tree(g):
        raise GraphError("graph has no spanning tree rooted at the leader; certificate refused")
    H = g.info_matrix
    ones = np.ones(g.n_followers)
    try:
        pi = np.linalg.solve(H.T, ones)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("H is singular despite a leader-rooted spanning tree") from exc
    residual = float(np.max(np.abs(H.T @ pi - ones)))
    if residual > RESIDUAL_TOL:
        raise RuntimeError(f"H^T pi = 1 residual {residual:.3e} above {RESIDUAL_TOL:g}")
    Pi = np.diag(pi)
    raw = 0.5 * (Pi @ H + H.T @ Pi)
    asym = float(np.max(np.abs(raw - raw.T)))
    if asym > SYMMETRY_TOL:
        raise RuntimeError(f"Xi asymmetry {asym:.3e}")
    Xi = 0.5 * (raw + raw.T)
    lam = float(np.linalg.eigvalsh(Xi)[0])
    if not (np.all(pi > 0) and lam > 0):
        raise RuntimeError(f"certificate failed: min pi={pi.min():.3e}, lambda_min={lam:.3e}")
    return GraphCertificate(H, pi, Xi, lam, residual)


def parse_edge_list(text: str, source: str = "<edges>") -> DirectedLeaderGraph:
    """Parse ``from to weight`` lines; node 0 is the leader, ``#`` starts a comment."""
    edges, links = [], []
    nodes = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphError(f"{source}:{lineno}: expected 'from to weight', got {raw.strip()!r}")
        try:
            src, dst, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphError(f"{source}:{lineno}: cannot parse {raw.strip()!r}") from None
        if dst == 0:
            raise GraphError(f"{source}:{lineno}: the leader (node 0) takes no inputs")
        if src < 0 or dst < 0:
            raise GraphError(f"{source}:{lineno}: negative node index")
        nodes.update((src, dst))
        if src == 0:
            links.append((dst, w))
        else:
            edges.append((src, dst, w))
    nodes.discard(0)
    if not nodes:
        raise GraphError(f"{source}: no followers declared")
    return build_graph(edges, links, max(nodes))


def read_edge_list(path) -> DirectedLeaderGraph:
    path = Path(path)
    return parse_edge_list(path.read_text(), str(path))
