"""Lattice-path counts of rational curves on the toric surfaces.

A path visits lattice points of the Newton polygon in increasing order of
x - eps*y, from the leftmost point (highest among ties) to the rightmost
(lowest among ties), in c1.d - 1 steps. Each path is reduced one corner at
a time to the two boundary paths: cutting off the triangle at the corner
contributes its multiplicity, flipping the corner to the opposite
parallelogram vertex contributes 1. The count is the sum over paths of
the products of both reductions.

Floor diagrams never enter here, so these totals cross-check
``floors.gw_toric`` and ``floors.welschinger_toric``.
"""
import functools
import itertools
import math

from app.core.errors import InputError
from app.core.lattice import LatticePolygon, c1_dot, get_surface, newton_polygon
from app.utils.logger import get_logger

log = get_logger(__name__)

LEFT = 1
RIGHT = -1


def _turn(a, b, c):
    """Positive for a left turn at b."""
    return (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])


def _order(p):
    return (p[0], -p[1])


def _require_2d(polygon):
    if len(polygon.vertices) < 3:
        raise InputError(f"Polygon {list(polygon.vertices)} is not two-dimensional")


def contains(polygon, p):
    # vertices are counterclockwise
    return all(_turn(u, v, p) >= 0 for u, v in polygon.edges)


def lattice_points(polygon):
    _require_2d(polygon)
    xs = [x for x, _ in polygon.vertices]
    ys = [y for _, y in polygon.vertices]
    return sorted(
        (
            (x, y)
            for x in range(min(xs), max(xs) + 1)
            for y in range(min(ys), max(ys) + 1)
            if contains(polygon, (x, y))
        ),
        key=_order,
    )


def boundary_paths(polygon):
    """(lower, upper): the two boundary chains from the first point to the last."""
    _require_2d(polygon)
    ring = []
    for (ux, uy), (vx, vy) in polygon.edges:
        g = math.gcd(vx - ux, vy - uy)
        step = ((vx - ux) // g, (vy - uy) // g)
        ring.extend((ux + i * step[0], uy + i * step[1]) for i in range(g))
    start = min(ring, key=_order)
    end = max(ring, key=_order)
    i = ring.index(start)
    ring = ring[i:] + ring[:i]
    j = ring.index(end)
    lower = tuple(ring[: j + 1])
    upper = (start,) + tuple(reversed(ring[j:]))
    return lower, upper


def lattice_paths(polygon, steps):
    points = lattice_points(polygon)
    start, end = points[0], points[-1]
    for chosen in itertools.combinations(points[1:-1], steps - 1):
        yield (start, *chosen, end)


def triangle_multiplicity(a, b, c, real=False):
    twice_area = abs(_turn(a, b, c))
    if not real:
        return twice_area
    if twice_area % 2 == 0:
        return 0
    return (-1) ** LatticePolygon((a, b, c)).interior_points


def _reducer(polygon, target, side, real):
    @functools.lru_cache(maxsize=None)
    def reduce(path):
        if path == target:
            return 1
        for j in range(1, len(path) - 1):
            if side * _turn(path[j - 1], path[j], path[j + 1]) > 0:
                break
        else:
            return 0
        a, b, c = path[j - 1: j + 2]
        total = 0
        weight = triangle_multiplicity(a, b, c, real)
        if weight:
            total += weight * reduce(path[:j] + path[j + 1:])
        corner = (a[0] + c[0] - b[0], a[1] + c[1] - b[1])
        if contains(polygon, corner):
            total += reduce(path[:j] + (corner,) + path[j + 1:])
        return total

    return reduce


def lattice_path_count(surface, d, real=False):
    model = get_surface(surface)
    polygon = newton_polygon(model, d)
    lower, upper = boundary_paths(polygon)
    steps = c1_dot(d) - 1
    if steps != len(lower) + len(upper) - 3:
        raise InputError(f"{d} does not have one boundary point per unit of c1.d")
    above = _reducer(polygon, upper, LEFT, real)
    below = _reducer(polygon, lower, RIGHT, real)
    total = 0
    paths = 0
    for path in lattice_paths(polygon, steps):
        paths += 1
        m = above(path)
        if m:
            total += m * below(path)
    log.debug(f"🔍 {paths} lattice paths for {model.name} {list(d.coords)}: {total}")
    return total


def gw_lattice_paths(surface, d):
    return lattice_path_count(surface, d)


def welschinger_lattice_paths(surface, d):
    return lattice_path_count(surface, d, real=True)
