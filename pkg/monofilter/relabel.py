"""Minimal monotone relabelling.

The violation graph is a comparability graph: orienting every clash edge from the
higher-labelled endpoint to the lower one is transitive, so a maximum independent
set is a maximum antichain of that order. Its size follows from a minimum s-t cut
on the split (bipartite) network of the order, which is exact and polynomial.
"""
from __future__ import annotations
import logging
from typing import Iterable
import networkx as nx
import numpy as np
from .config import EXACT_CHECK_LIMIT, LEXICOGRAPHIC_COMPONENT_LIMIT
from .dataset import dominance_matrix
from .errors import MonoFilterError
from .metrics import clash_matrix
from .models import OrdinalDataset, RelabelResult, ViolationGraph

log = logging.getLogger(__name__)


def build_violation_graph(ds: OrdinalDataset) -> ViolationGraph:
    clash = np.triu(clash_matrix(ds.X, ds.y), k=1)
    return ViolationGraph(n=ds.n, edges=[(int(i), int(j)) for i, j in np.argwhere(clash)])


def _arcs(vertices: set[int], adj: list[set[int]], y: np.ndarray) -> list[tuple[int, int]]:
    return [(i, j) for i in vertices for j in adj[i] if j in vertices and y[i] > y[j]]


def _antichain(vertices: set[int], adj: list[set[int]], y: np.ndarray) -> list[int]:
    """Maximum antichain of the induced suborder via min cut (König on the split network)."""
    if not vertices:
        return []
    arcs = _arcs(vertices, adj, y)
    if not arcs:
        return sorted(vertices)
    net = nx.DiGraph()
    for v in vertices:
        net.add_edge("s", ("L", v), capacity=1)
        net.add_edge(("R", v), "t", capacity=1)
    for i, j in arcs:
        net.add_edge(("L", i), ("R", j))   # no capacity attribute = infinite
    _, (reach, _) = nx.minimum_cut(net, "s", "t")
    return sorted(v for v in vertices if ("L", v) in reach and ("R", v) not in reach)


def _width(vertices: set[int], adj: list[set[int]], y: np.ndarray) -> int:
    return len(_antichain(vertices, adj, y))


def exact_independent_set(vertices: Iterable[int], adj: list[set[int]]) -> list[int]:
    """Branch and bound, include-first in index order; returns the lexicographically smallest maximum set."""
    order = sorted(vertices)
    best: list[int] = []

    def search(k: int, chosen: list[int], banned: set[int]) -> None:
        nonlocal best
        free = sum(1 for v in order[k:] if v not in banned)
        if len(chosen) + free <= len(best):
            return
        if k == len(order):
            best = list(chosen)
            return
        v = order[k]
        if v not in banned:
            search(k + 1, chosen + [v], banned | adj[v])
        search(k + 1, chosen, banned)

    search(0, [], set())
    return best


def _lexicographic(component: list[int], adj: list[set[int]], y: np.ndarray) -> list[int]:
    avail = set(component)
    remaining = _width(avail, adj, y)
    chosen = []
    for v in component:
        if remaining == 0:
            break
        if v not in avail:
            continue
        if not adj[v] & avail:
            chosen.append(v)
            avail.discard(v)
            remaining -= 1
            continue
        rest = avail - {v} - adj[v]
        if _width(rest, adj, y) == remaining - 1:
            chosen.append(v)
            avail, remaining = rest, remaining - 1
        else:
            avail.discard(v)
    return chosen


def max_independent_set(g: ViolationGraph, ds: OrdinalDataset,
                        lexicographic_limit: int = LEXICOGRAPHIC_COMPONENT_LIMIT,
                        exact_limit: int = EXACT_CHECK_LIMIT) -> list[int]:
    """Exact maximum independent set of the violation graph, sorted.

    Components up to lexicographic_limit vertices get the lexicographically smallest
    maximum set; larger ones keep the min-cut antichain. Components up to exact_limit
    vertices are cross-checked against exhaustive search.
    """
    adj = g.adjacency
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from(g.edges)
    out: list[int] = []
    for comp in nx.connected_components(graph):
        comp = sorted(comp)
        if len(comp) == 1:
            out.extend(comp)
            continue
        if len(comp) <= lexicographic_limit:
            chosen = _lexicographic(comp, adj, ds.y)
        else:
            chosen = _antichain(set(comp), adj, ds.y)
            log.debug("component of %d vertices: lexicographic refinement skipped", len(comp))
        if len(comp) <= exact_limit:
            exact = exact_independent_set(comp, adj)
            if len(exact) != len(chosen):
                raise MonoFilterError(f"independent set size {len(chosen)} disagrees with exhaustive {len(exact)}")
        out.extend(chosen)
    return sorted(out)


def relabel(ds: OrdinalDataset) -> RelabelResult:
    """Keep a maximum independent set of the violation graph and move every other label
    to the nearest value inside its feasibility interval, in a linear extension of the order."""
    original = ds.y.tolist()
    g = build_violation_graph(ds)
    if not g.edges:
        return RelabelResult(dataset=ds, changed_indices=[], changes=0, original_labels=original)
    kept = np.zeros(ds.n, dtype=bool)
    kept[max_independent_set(g, ds)] = True
    le = dominance_matrix(ds.X)
    labels = ds.y.copy()
    clamped = []
    order = np.lexsort([np.arange(ds.n), *(ds.X[:, j] for j in reversed(range(ds.f)))])
    for i in order:
        if kept[i]:
            continue
        below, above = le[:, i] & kept, le[i, :] & kept
        lo = int(labels[below].max()) if below.any() else 0
        hi = int(labels[above].min()) if above.any() else ds.class_count - 1
        if lo > hi:
            labels[i] = lo
            clamped.append(int(i))
        else:
            labels[i] = min(max(int(labels[i]), lo), hi)
        kept[i] = True
    changed = np.flatnonzero(labels != ds.y).tolist()
    if clamped:
        log.warning("%s: %d relabelled instances clamped to an empty interval", ds.name, len(clamped))
    log.info("%s: relabelled %d of %d instances", ds.name, len(changed), ds.n)
    return RelabelResult(dataset=ds.with_labels(labels), changed_indices=changed, changes=len(changed),
                         original_labels=original, clamped=sorted(clamped))
