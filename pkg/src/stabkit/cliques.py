"""Commutation graphs over Weyl labels and maximal-clique enumeration."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import f2lin
from .errors import CapExceededError, ParameterError
from .f2lin import _sp

VERTEX_CAP = 60


@dataclass(frozen=True)
class CommGraph:
    """Distinct nonzero labels joined when their Weyl operators commute.

    ``adjacency[i]`` is a bitset over vertex indices; vertices are sorted
    numerically, which is the lexicographic order of their bitstrings.
    """

    n: int
    vertices: tuple[int, ...]
    adjacency: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def to_json(self) -> dict:
        v = len(self.vertices)
        return {
            "n": self.n,
            "vertices": [f2lin.to_bits(x, self.n) for x in self.vertices],
            "adjacency": ["".join("1" if r >> j & 1 else "0" for j in range(v)) for r in self.adjacency],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def build_comm_graph(samples: Iterable[int], n: int) -> CommGraph:
    verts = sorted({int(x) for x in samples} - {0})
    for x in verts:
        f2lin.check_vec(x, n)
    adj = [0] * len(verts)
    for i, u in enumerate(verts):
        for j in range(i + 1, len(verts)):
            if not _sp(u, verts[j], n):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return CommGraph(n, tuple(verts), tuple(adj))


def _bits(s: int) -> Iterable[int]:
    while s:
        low = s & -s
        yield low.bit_length() - 1
        s ^= low


def bron_kerbosch(adjacency: Sequence[int]) -> list[tuple[int, ...]]:
    """All maximal cliques of a bitset graph (Tomita pivoting), sorted.

    Each clique is a sorted tuple of vertex indices.
    """
    adj = list(adjacency)
    for i, r in enumerate(adj):
        if r >> i & 1:
            raise ParameterError("self-loops are not allowed")
    out: list[tuple[int, ...]] = []

    def expand(R: int, P: int, X: int) -> None:
        if not P and not X:
            out.append(tuple(_bits(R)))
            return
        pivot = max(_bits(P | X), key=lambda u: (P & adj[u]).bit_count())
        for v in _bits(P & ~adj[pivot]):
            expand(R | (1 << v), P & adj[v], X & adj[v])
            P &= ~(1 << v)
            X |= 1 << v

    if adj:
        expand(0, (1 << len(adj)) - 1, 0)
    else:
        out.append(())
    out.sort()
    return out


def maximal_cliques(g: CommGraph, cap: int = VERTEX_CAP) -> list[tuple[int, ...]]:
    """Maximal cliques as sorted tuples of vertex labels, in lexicographic order."""
    if len(g) > cap:
        raise CapExceededError(
            f"comm graph has {len(g)} vertices, above the cap of {cap}; raise the cap "
            "(--cap-vertices) or lower the sample count"
        )
    if not g.vertices:
        return []
    return [tuple(g.vertices[i] for i in c) for c in bron_kerbosch(g.adjacency)]
