"""Genus-0 floor diagrams of h-transverse toric polygons.

Floors are numbered 0..h-1 from bottom to top. Elevators run from an upper
floor down to a lower one; TOP ends enter a floor from above and BOTTOM ends
leave it downward, all of weight 1. Every floor satisfies

    out + bottom_ends - in - top_ends = c

with c the width lost per floor (1 for CP2, 0 for F0, 2 for F2).

The floor order is part of the data, so a diagram is determined by its tree
of elevators together with the distribution of TOP and BOTTOM ends; the
elevator weights then follow from the cut through each edge.
"""
import functools
import itertools
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import NamedTuple

import networkx as nx
from scipy.special import comb

from app.core.errors import (
    ConsistencyError,
    EmptyClassError,
    InputError,
    MarkingError,
    UnsupportedSurfaceError,
)
from app.core.lattice import (
    TangencyVector,
    c1_dot,
    get_surface,
    intersect,
    newton_polygon,
    toric_coordinates,
)
from app.utils.logger import get_logger

log = get_logger(__name__)

TOP = "TOP"
BOTTOM = "BOTTOM"

# In-process memo of enumerations and totals
_count_caches = {
    "diagrams": {},
    "gw": {},
    "welschinger": {},
}


def clear_count_caches():
    for name, cache in _count_caches.items():
        cache.clear()
        log.debug(f"🧹 Cleared cache: {name}")


@dataclass(frozen=True)
class Elevator:
    source: object
    target: object
    weight: int

    @property
    def bounded(self):
        return self.source != TOP and self.target != BOTTOM


def _endpoint_code(x):
    if x == TOP:
        return -2
    if x == BOTTOM:
        return -1
    return x


@dataclass(frozen=True)
class FloorDiagram:
    height: int
    edges: tuple
    divergence: int
    genus: int = 0

    @property
    def floors(self):
        return tuple(range(self.height))

    @property
    def bounded_edges(self):
        return tuple(e for e in self.edges if e.bounded)

    @property
    def top_ends(self):
        return tuple(e for e in self.edges if e.source == TOP)

    @property
    def bottom_ends(self):
        return tuple(e for e in self.edges if e.target == BOTTOM)

    @property
    def markable_count(self):
        # one mark per floor and per edge segment
        return self.height + len(self.edges)

    def canonical_key(self):
        edges = sorted(
            (_endpoint_code(e.source), _endpoint_code(e.target), e.weight) for e in self.edges
        )
        return (self.height, self.divergence, tuple(edges))

    def tree(self):
        graph = nx.Graph()
        graph.add_nodes_from(self.floors)
        graph.add_edges_from((e.source, e.target) for e in self.bounded_edges)
        return graph

    def validate(self, polygon=None):
        """Raise ConsistencyError unless the diagram satisfies the floor invariants."""
        if self.genus != 0:
            raise ConsistencyError("Only genus 0 diagrams are supported")
        if self.height < 1:
            raise ConsistencyError("A floor diagram needs at least one floor")
        for e in self.edges:
            if e.weight < 1:
                raise ConsistencyError(f"Non-positive weight on {e}")
            if e.bounded and not (0 <= e.target < e.source < self.height):
                raise ConsistencyError(f"Elevator {e} does not run downward between floors")
            if not e.bounded and (e.source == TOP) == (e.target == BOTTOM):
                raise ConsistencyError(f"Malformed end {e}")
        if not nx.is_tree(self.tree()):
            raise ConsistencyError("Floors and elevators do not form a tree")
        for f in self.floors:
            flow = sum(e.weight for e in self.edges if e.source == f) - sum(
                e.weight for e in self.edges if e.target == f
            )
            if flow != self.divergence:
                raise ConsistencyError(f"Floor {f} has divergence {flow}, expected {self.divergence}")
        if polygon is not None:
            if self.height != polygon.height:
                raise ConsistencyError(f"{self.height} floors for a polygon of height {polygon.height}")
            if sum(e.weight for e in self.top_ends) != polygon.top_length:
                raise ConsistencyError("TOP ends do not match the top edge")
            if sum(e.weight for e in self.bottom_ends) != polygon.bottom_length:
                raise ConsistencyError("BOTTOM ends do not match the bottom edge")
        return True


# Marking groups: (token, count, first gap, last gap). Gap g means g floors,
# counted from the top, have already been placed.
def _marking_groups(diagram):
    h = diagram.height
    rank = lambda f: h - 1 - f
    groups = []
    for f in reversed(diagram.floors):
        tops = sum(1 for e in diagram.top_ends if e.target == f)
        if tops:
            groups.append((("top", f), tops, 0, rank(f)))
    for e in diagram.bounded_edges:
        groups.append((("edge", e.source, e.target, e.weight), 1, rank(e.source) + 1, rank(e.target)))
    for f in reversed(diagram.floors):
        bottoms = sum(1 for e in diagram.bottom_ends if e.source == f)
        if bottoms:
            groups.append((("bottom", f), bottoms, rank(f) + 1, h))
    return groups


@dataclass(frozen=True)
class MarkedFloorDiagram:
    diagram: FloorDiagram
    marking: tuple

    def __post_init__(self):
        if len(self.marking) != self.diagram.markable_count:
            raise MarkingError(
                f"Marking has {len(self.marking)} elements, diagram has {self.diagram.markable_count}"
            )
        h = self.diagram.height
        groups = _marking_groups(self.diagram)
        expected = Counter({token: count for token, count, _, _ in groups})
        expected.update(("floor", f) for f in self.diagram.floors)
        if Counter(self.marking) != expected:
            raise MarkingError("Marking does not use every element of the diagram exactly once")
        bounds = {token: (lo, hi) for token, _, lo, hi in groups}
        placed = 0
        for token in self.marking:
            if token[0] == "floor":
                if token[1] != h - 1 - placed:
                    raise MarkingError(f"Floor {token[1]} marked out of order")
                placed += 1
        placed = 0
        for token in self.marking:
            if token[0] == "floor":
                placed += 1
                continue
            lo, hi = bounds[token]
            if not lo <= placed <= hi:
                raise MarkingError(f"{token} is not compatible with the floor order")


def _extension_counter(height, groups):
    bounds = tuple((lo, hi) for _, _, lo, hi in groups)

    @functools.lru_cache(maxsize=None)
    def extend(g, remaining):
        if g == height and not any(remaining):
            return 1
        total = 0
        for i, left in enumerate(remaining):
            lo, hi = bounds[i]
            if left and lo <= g <= hi:
                total += extend(g, remaining[:i] + (left - 1,) + remaining[i + 1:])
        if g < height and all(not left for left, (_, hi) in zip(remaining, bounds) if hi == g):
            total += extend(g + 1, remaining)
        return total

    return extend


def count_markings(diagram, n_points):
    """Linear extensions of the floor order, with ends at a common floor interchangeable."""
    if n_points != diagram.markable_count:
        raise MarkingError(
            f"{n_points} points given, diagram has {diagram.markable_count} markable elements"
        )
    groups = _marking_groups(diagram)
    extend = _extension_counter(diagram.height, groups)
    return extend(0, tuple(count for _, count, _, _ in groups))


def enumerate_markings(diagram):
    """Yield every marked diagram; exponential, for cross-checking count_markings."""
    h = diagram.height
    groups = _marking_groups(diagram)

    def walk(g, remaining, prefix):
        if g == h and not any(remaining):
            yield tuple(prefix)
            return
        for i, left in enumerate(remaining):
            token, _, lo, hi = groups[i]
            if left and lo <= g <= hi:
                yield from walk(g, remaining[:i] + (left - 1,) + remaining[i + 1:], prefix + [token])
        if g < h and all(not left for left, (_, _, _, hi) in zip(remaining, groups) if hi == g):
            yield from walk(g + 1, remaining, prefix + [("floor", h - 1 - g)])

    for marking in walk(0, tuple(count for _, count, _, _ in groups), []):
        yield MarkedFloorDiagram(diagram, marking)


# Multiplicities
def complex_multiplicity(diagram):
    return prod(e.weight ** 2 for e in diagram.bounded_edges)


def real_multiplicity(diagram):
    if any(e.weight % 2 == 0 for e in diagram.edges):
        return 0
    return 1


# Enumeration
def _compositions(total, parts):
    """Weak compositions of total into parts, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _tree_partitions(height):
    """Labelled trees on the floors grouped by their first Pruefer symbol."""
    if height == 1:
        return [[()]]
    if height == 2:
        return [[((1, 0),)]]
    partitions = []
    for first in range(height):
        trees = []
        for rest in itertools.product(range(height), repeat=height - 3):
            graph = nx.from_prufer_sequence([first, *rest])
            trees.append(tuple(sorted((max(u, v), min(u, v)) for u, v in graph.edges())))
        partitions.append(trees)
    return partitions


def _enumerate_partition(height, divergence, top, bottom, trees):
    diagrams = []
    for tree in trees:
        graph = nx.Graph()
        graph.add_nodes_from(range(height))
        graph.add_edges_from(tree)
        cuts = []
        for upper, lower in tree:
            graph.remove_edge(upper, lower)
            cuts.append((upper, lower, tuple(nx.node_connected_component(graph, upper))))
            graph.add_edge(upper, lower)
        for sources in _compositions(top, height):
            for sinks in _compositions(bottom, height):
                weights = [
                    divergence * len(side) + sum(sources[f] for f in side) - sum(sinks[f] for f in side)
                    for _, _, side in cuts
                ]
                if any(w < 1 for w in weights):
                    continue
                edges = [Elevator(u, l, w) for (u, l, _), w in sorted(
                    zip(cuts, weights), key=lambda item: (-item[1], -item[0][0], item[0][1])
                )]
                for f in reversed(range(height)):
                    edges.extend(Elevator(TOP, f, 1) for _ in range(sources[f]))
                for f in reversed(range(height)):
                    edges.extend(Elevator(f, BOTTOM, 1) for _ in range(sinks[f]))
                diagrams.append(FloorDiagram(height, tuple(edges), divergence))
    log.debug(f"🔍 Partition of {len(trees)} trees gave {len(diagrams)} diagrams")
    return diagrams


def search_floor_diagrams(polygon, max_weight=None):
    """Every diagram of the polygon found by trying all weighted elevator sets.

    Weights come from the search, not from cuts; exponential, for
    cross-checking enumerate_floor_diagrams on small polygons.
    """
    h = polygon.height
    c = polygon.floor_divergence
    top, bottom = polygon.top_length, polygon.bottom_length
    max_weight = max_weight or top + bottom
    pairs = [(upper, lower) for upper in range(h) for lower in range(upper)]
    found = []
    for chosen in itertools.combinations(pairs, h - 1):
        for weights in itertools.product(range(1, max_weight + 1), repeat=h - 1):
            for sources in _compositions(top, h):
                for sinks in _compositions(bottom, h):
                    edges = [Elevator(u, l, w) for (u, l), w in zip(chosen, weights)]
                    edges += [Elevator(TOP, f, 1) for f in range(h) for _ in range(sources[f])]
                    edges += [Elevator(f, BOTTOM, 1) for f in range(h) for _ in range(sinks[f])]
                    diagram = FloorDiagram(h, tuple(edges), c)
                    try:
                        diagram.validate(polygon)
                    except ConsistencyError:
                        continue
                    found.append(diagram)
    log.debug(f"🔍 Search found {len(found)} diagrams")
    return sorted(found, key=FloorDiagram.canonical_key)


def enumerate_floor_diagrams(polygon, workers=1):
    if polygon.height == 0:
        raise EmptyClassError(f"Polygon {list(polygon.vertices)} has height 0: no floors")
    cache = _count_caches["diagrams"]
    key = polygon.vertices
    if key in cache:
        return list(cache[key])

    h = polygon.height
    c = polygon.floor_divergence
    top, bottom = polygon.top_length, polygon.bottom_length
    partitions = _tree_partitions(h)
    log.info(f"🔍 Enumerating floor diagrams: {h} floors, top {top}, bottom {bottom}, divergence {c}")

    args = [(h, c, top, bottom, trees) for trees in partitions]
    if workers > 1 and len(partitions) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_enumerate_partition, *zip(*args)))
    else:
        chunks = [_enumerate_partition(*a) for a in args]

    diagrams = sorted(itertools.chain.from_iterable(chunks), key=FloorDiagram.canonical_key)
    keys = [d.canonical_key() for d in diagrams]
    if len(set(keys)) != len(keys):
        raise ConsistencyError("Floor diagram enumeration produced duplicates")
    for diagram in diagrams:
        diagram.validate(polygon)
    log.info(f"✅ {len(diagrams)} floor diagrams")
    cache[key] = tuple(diagrams)
    return diagrams


# Counts
def _effective_polygon(surface, d):
    model = get_surface(surface)
    if not model.is_toric:
        raise UnsupportedSurfaceError(f"Surface {model.name} has no floor-diagram model")
    if d.is_zero:
        raise EmptyClassError(f"{d} is the zero class")
    return model, newton_polygon(model, d)


def _height_zero_count(polygon):
    # a multiple of the fiber class: irreducible only once
    return 1 if polygon.top_length == 1 else 0


def _weighted_total(surface, d, multiplicity, workers):
    model, polygon = _effective_polygon(surface, d)
    if polygon.height == 0:
        return _height_zero_count(polygon)
    n_points = c1_dot(d) - 1
    total = 0
    for diagram in enumerate_floor_diagrams(polygon, workers):
        if diagram.markable_count != n_points:
            raise ConsistencyError(
                f"Diagram has {diagram.markable_count} marks but {d} needs {n_points} points"
            )
        weight = multiplicity(diagram)
        if weight:
            total += weight * count_markings(diagram, n_points)
    return total


def gw_toric(surface, d, workers=1):
    """Number of rational curves in class d through c1.d - 1 generic points."""
    key = (get_surface(surface).name, d.coords)
    cache = _count_caches["gw"]
    if key not in cache:
        cache[key] = _weighted_total(surface, d, complex_multiplicity, workers)
        log.info(f"✅ GW {d} = {cache[key]}")
    return cache[key]


def welschinger_toric(surface, d, workers=1):
    """Welschinger count for s = 0 and the standard real structure."""
    key = (get_surface(surface).name, d.coords)
    cache = _count_caches["welschinger"]
    if key not in cache:
        cache[key] = _weighted_total(surface, d, real_multiplicity, workers)
        log.info(f"✅ Welschinger {d} = {cache[key]}")
    return cache[key]


# Strata relative to the (-2)-curve of F2
class StratumKey(NamedTuple):
    k: int
    a: int
    b: int


@dataclass(frozen=True)
class StratifiedCounts:
    d_dot_e: int
    entries: dict

    def __post_init__(self):
        for key in self.entries:
            k, a, b = key
            if min(k, a, b) < 0 or a + 2 * b != self.d_dot_e + 2 * k:
                raise ConsistencyError(f"Stratum {tuple(key)} violates a + 2b = d.E + 2k")

    def items(self):
        return sorted(self.entries.items())

    def by_k(self):
        totals = {}
        for key, value in self.items():
            totals[key.k] = totals.get(key.k, 0) + value
        return totals


def stratum_range(d, k_max=None):
    """ks with d - kE effective; d.E + 2k >= 0 bounds k from below."""
    if d.surface_id != "F2":
        raise InputError(f"Strata are defined for F2 classes, got {d}")
    if k_max is not None and k_max < 0:
        raise InputError(f"k_max must be nonnegative, got {k_max}")
    height, _ = toric_coordinates(d)
    if height < 0:
        raise InputError(f"{d} is not effective")
    d_e = intersect(d, get_surface("F2").cls("E"))
    k_min = max(0, -(d_e // 2))
    k_top = height if k_max is None else min(k_max, height)
    return d_e, range(k_min, k_top + 1)


def _stratum_class(d, k):
    return d - k * get_surface("F2").cls("E")


def relative_real_counts_f2(d, k_max=None, workers=1):
    d_e, ks = stratum_range(d, k_max)
    entries = {}
    for k in ks:
        cls = _stratum_class(d, k)
        a_expected = d_e + 2 * k
        if cls.is_zero:
            entries[StratumKey(k, 0, 0)] = 0
            continue
        _, polygon = _effective_polygon("F2", cls)
        if polygon.height == 0:
            entries[StratumKey(k, a_expected, 0)] = _height_zero_count(polygon)
            continue
        n_points = c1_dot(cls) - 1
        counts = {}
        for diagram in enumerate_floor_diagrams(polygon, workers):
            profile = TangencyVector.from_weights(e.weight for e in diagram.top_ends)
            conjugate, odd = divmod(a_expected - profile.size, 2)
            if not profile.is_transverse or odd or conjugate != 0:
                raise ConsistencyError(
                    f"Stratum k={k} of {d}: diagram meets E with profile {profile.entries}, "
                    f"expected {a_expected} real transverse points"
                )
            key = StratumKey(k, profile.size, conjugate)
            weight = real_multiplicity(diagram)
            counts[key] = counts.get(key, 0) + (weight * count_markings(diagram, n_points) if weight else 0)
        if not counts:
            counts[StratumKey(k, a_expected, 0)] = 0
        entries.update(counts)
        log.debug(f"🔍 Real strata at k={k}: {counts}")
    return StratifiedCounts(d_e, entries)


def relative_complex_counts_f2(d, k_max=None, workers=1):
    """{k: GW(d - kE)} over the effective range of k."""
    d_e, ks = stratum_range(d, k_max)
    counts = {}
    for k in ks:
        cls = _stratum_class(d, k)
        counts[k] = 0 if cls.is_zero else gw_toric("F2", cls, workers)
    return d_e, counts


# Independent oracle for CP2
@functools.lru_cache(maxsize=None)
def kontsevich_cp2(d):
    if d < 1:
        raise InputError(f"Degree must be positive, got {d}")
    if d == 1:
        return 1
    total = 0
    for d1 in range(1, d):
        d2 = d - d1
        total += kontsevich_cp2(d1) * kontsevich_cp2(d2) * d1 * d2 * (
            d1 * d2 * comb(3 * d - 4, 3 * d1 - 2, exact=True)
            - d1 * d1 * comb(3 * d - 4, 3 * d1 - 1, exact=True)
        )
    return total
