"""Integer homology lattices of the toric surfaces CP2, F0 and F2.

Classes are integer vectors in a fixed basis of H2(X; Z):

* CP2: the line.
* F0: the two rulings l1, l2 (so a*l1 + b*l2 has coordinates (a, b)).
* F2: the (-2)-section E and the fiber F.

Polygons use toric coordinates. For F2 the toric pair (a, b) means
a = d.F floors and b = d.E, i.e. the class a*E + (2a + b)*F, so that
c1 . (a, b) = 4a + 2b.
"""
import math
from dataclasses import dataclass

import numpy as np

from app.core.errors import (
    ConsistencyError,
    DomainError,
    InputError,
    UnsupportedSurfaceError,
)

TANGENCY_CAP = 64


@dataclass(frozen=True)
class SurfaceModel:
    name: str
    rank: int
    intersection_matrix: tuple
    c1_row: tuple
    distinguished: tuple = ()
    polygon_rule: str = None

    def __post_init__(self):
        matrix = tuple(tuple(int(x) for x in row) for row in self.intersection_matrix)
        object.__setattr__(self, "intersection_matrix", matrix)
        object.__setattr__(self, "c1_row", tuple(int(x) for x in self.c1_row))
        object.__setattr__(
            self, "distinguished",
            tuple((label, tuple(int(x) for x in coords)) for label, coords in self.distinguished),
        )
        if self.rank < 1:
            raise InputError(f"Surface {self.name}: rank must be positive")
        if len(matrix) != self.rank or any(len(row) != self.rank for row in matrix):
            raise InputError(f"Surface {self.name}: intersection matrix must be {self.rank}x{self.rank}")
        if any(matrix[i][j] != matrix[j][i] for i in range(self.rank) for j in range(self.rank)):
            raise InputError(f"Surface {self.name}: intersection matrix is not symmetric")
        if len(self.c1_row) != self.rank:
            raise InputError(f"Surface {self.name}: c1 row must have {self.rank} entries")
        if any(len(coords) != self.rank for _, coords in self.distinguished):
            raise InputError(f"Surface {self.name}: distinguished class of wrong length")

    @property
    def matrix(self):
        return np.array(self.intersection_matrix, dtype=object)

    @property
    def is_toric(self):
        return self.polygon_rule in _POLYGON_RULES

    def has(self, label):
        return any(name == label for name, _ in self.distinguished)

    def cls(self, label):
        """Distinguished class by name (``E``, ``F``, ``l1``, ``line`` ...)."""
        for name, coords in self.distinguished:
            if name == label:
                return DivisorClass(self.name, coords)
        raise InputError(f"Surface {self.name} has no distinguished class {label!r}")

    def class_of(self, *coords):
        return DivisorClass(self.name, coords)


@dataclass(frozen=True)
class DivisorClass:
    surface_id: str
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        model = SURFACES.get(self.surface_id)
        if model is not None and len(self.coords) != model.rank:
            raise InputError(
                f"Class {list(self.coords)} has {len(self.coords)} coordinates, "
                f"surface {self.surface_id} has rank {model.rank}"
            )

    def _same_surface(self, other):
        if not isinstance(other, DivisorClass):
            return NotImplemented
        if other.surface_id != self.surface_id:
            raise InputError(f"Cannot combine classes on {self.surface_id} and {other.surface_id}")
        return other

    def __add__(self, other):
        other = self._same_surface(other)
        if other is NotImplemented:
            return other
        return DivisorClass(self.surface_id, (x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        other = self._same_surface(other)
        if other is NotImplemented:
            return other
        return DivisorClass(self.surface_id, (x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return DivisorClass(self.surface_id, (-x for x in self.coords))

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return DivisorClass(self.surface_id, (k * x for x in self.coords))

    __rmul__ = __mul__

    @property
    def is_zero(self):
        return not any(self.coords)

    def __str__(self):
        return f"{self.surface_id}({', '.join(str(c) for c in self.coords)})"


@dataclass(frozen=True)
class TangencyVector:
    """Finite-support sequence (alpha_1, alpha_2, ...) indexed from 1."""

    entries: tuple = ()

    def __post_init__(self):
        entries = [int(x) for x in self.entries]
        while entries and entries[-1] == 0:
            entries.pop()
        if len(entries) > TANGENCY_CAP:
            raise InputError(f"Tangency vectors are supported up to index {TANGENCY_CAP}")
        if any(x < 0 for x in entries):
            raise InputError("Tangency vector entries must be nonnegative")
        object.__setattr__(self, "entries", tuple(entries))

    @classmethod
    def unit(cls, i):
        if not 1 <= i <= TANGENCY_CAP:
            raise InputError(f"Unit tangency index must lie in 1..{TANGENCY_CAP}, got {i}")
        return cls((0,) * (i - 1) + (1,))

    @classmethod
    def from_weights(cls, weights):
        """Profile counting how many of ``weights`` equal each index."""
        weights = list(weights)
        if not weights:
            return cls()
        if min(weights) < 1:
            raise InputError("Weights must be positive")
        top = max(weights)
        if top > TANGENCY_CAP:
            raise InputError(f"Tangency vectors are supported up to index {TANGENCY_CAP}")
        return cls(tuple(weights.count(i) for i in range(1, top + 1)))

    def __getitem__(self, i):
        return self.entries[i - 1] if 1 <= i <= len(self.entries) else 0

    def __add__(self, other):
        n = max(len(self.entries), len(other.entries))
        return TangencyVector(tuple(self[i] + other[i] for i in range(1, n + 1)))

    @property
    def size(self):
        # |alpha|
        return sum(self.entries)

    @property
    def weighted_size(self):
        # I alpha
        return sum(i * x for i, x in enumerate(self.entries, start=1))

    @property
    def is_transverse(self):
        return len(self.entries) <= 1


@dataclass(frozen=True)
class LatticePolygon:
    """Convex lattice polygon, counterclockwise, without repeated vertices."""

    vertices: tuple

    def __post_init__(self):
        points = [(int(x), int(y)) for x, y in self.vertices]
        cleaned = []
        for p in points:
            if not cleaned or cleaned[-1] != p:
                cleaned.append(p)
        while len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
            cleaned.pop()
        if not cleaned:
            raise InputError("Polygon needs at least one vertex")
        if _shoelace(cleaned) < 0:
            cleaned = [cleaned[0]] + cleaned[:0:-1]
        object.__setattr__(self, "vertices", tuple(cleaned))

    @property
    def edges(self):
        n = len(self.vertices)
        if n == 1:
            return ()
        if n == 2:
            return ((self.vertices[0], self.vertices[1]),)
        return tuple((self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    @property
    def edge_lengths(self):
        return tuple(_lattice_length(p, q) for p, q in self.edges)

    @property
    def height(self):
        ys = [y for _, y in self.vertices]
        return max(ys) - min(ys)

    def _row_length(self, y):
        xs = [x for x, vy in self.vertices if vy == y]
        return max(xs) - min(xs)

    @property
    def top_length(self):
        return self._row_length(max(y for _, y in self.vertices))

    @property
    def bottom_length(self):
        return self._row_length(min(y for _, y in self.vertices))

    @property
    def twice_area(self):
        return abs(_shoelace(self.vertices))

    @property
    def boundary_points(self):
        return sum(self.edge_lengths) if len(self.vertices) > 2 else sum(self.edge_lengths) + 1

    @property
    def interior_points(self):
        if len(self.vertices) < 3:
            return 0
        # Pick: A = I + B/2 - 1
        return (self.twice_area - self.boundary_points + 2) // 2

    @property
    def floor_divergence(self):
        """Width lost per floor: (bottom - top) / height."""
        if self.height == 0:
            raise InputError("A polygon of height 0 has no floors")
        shrink = self.bottom_length - self.top_length
        if shrink % self.height:
            raise UnsupportedSurfaceError(
                f"Polygon {list(self.vertices)} does not shrink by a constant integer per floor"
            )
        return shrink // self.height


def _shoelace(points):
    n = len(points)
    return sum(points[i][0] * points[(i + 1) % n][1] - points[(i + 1) % n][0] * points[i][1] for i in range(n))


def _lattice_length(p, q):
    return math.gcd(q[0] - p[0], q[1] - p[1])


# Built-in toric models
SURFACES = {}


def register_surface(model):
    SURFACES[model.name] = model
    return model


def get_surface(name):
    if isinstance(name, SurfaceModel):
        return name
    key = str(name)
    if key in SURFACES:
        return SURFACES[key]
    for registered, model in SURFACES.items():
        if registered.lower() == key.lower():
            return model
    raise UnsupportedSurfaceError(f"Unknown surface {name!r}; known: {', '.join(sorted(SURFACES))}")


CP2 = register_surface(SurfaceModel(
    name="CP2", rank=1,
    intersection_matrix=((1,),), c1_row=(3,),
    distinguished=(("line", (1,)),),
    polygon_rule="triangle",
))
F0 = register_surface(SurfaceModel(
    name="F0", rank=2,
    intersection_matrix=((0, 1), (1, 0)), c1_row=(2, 2),
    distinguished=(("l1", (1, 0)), ("l2", (0, 1))),
    polygon_rule="rectangle",
))
F2 = register_surface(SurfaceModel(
    name="F2", rank=2,
    intersection_matrix=((-2, 1), (1, 0)), c1_row=(0, 2),
    distinguished=(("E", (1, 0)), ("F", (0, 1))),
    polygon_rule="trapezoid",
))


def _model_of(d, model=None):
    return get_surface(d.surface_id) if model is None else model


# Pairings
def intersect(d1, d2, model=None):
    if d1.surface_id != d2.surface_id:
        raise InputError(f"Cannot intersect classes on {d1.surface_id} and {d2.surface_id}")
    m = _model_of(d1, model).matrix
    v1 = np.array(d1.coords, dtype=object)
    v2 = np.array(d2.coords, dtype=object)
    return int(np.dot(np.dot(v1, m), v2))


def self_intersection(d, model=None):
    return intersect(d, d, model)


def c1_dot(d, model=None):
    return int(sum(c * x for c, x in zip(_model_of(d, model).c1_row, d.coords)))


# Adjunction
def virtual_node_count(d, model=None):
    """(d^2 - c1.d + 2) / 2 without the domain check; may be negative."""
    numerator = self_intersection(d, model) - c1_dot(d, model) + 2
    if numerator % 2:
        raise DomainError(f"d^2 - c1.d + 2 = {numerator} is odd for {d}")
    return numerator // 2


def node_count(d, model=None):
    numerator = self_intersection(d, model) - c1_dot(d, model) + 2
    if numerator % 2 or numerator < 0:
        raise DomainError(
            f"{d} is not of rational immersed type: d^2 - c1.d + 2 = {numerator}"
        )
    return numerator // 2


def constraint_split(d, s, model=None):
    """Number r of real point constraints when s conjugate pairs are imposed."""
    if s < 0:
        raise InputError(f"s must be nonnegative, got {s}")
    r = c1_dot(d, model) - 1 - 2 * s
    if r < 0:
        raise InputError(f"{d} is overconstrained by s={s}: c1.d - 1 - 2s = {r}")
    return r


# Symplectic sum bookkeeping
def sum_decompose(d, k):
    """Split d into its F2-side class d - kE and the F0-side class k*l1 + (d.E + k)*l2."""
    model = _model_of(d)
    if not model.has("E"):
        raise InputError(f"Surface {model.name} has no distinguished (-2)-curve E")
    if k < 0:
        raise InputError(f"k must be nonnegative, got {k}")
    E = model.cls("E")
    x1 = d - k * E
    x0 = DivisorClass("F0", (k, intersect(d, E) + k))
    if c1_dot(E) == 0 and c1_dot(x1) != c1_dot(d):
        raise ConsistencyError(f"c1 not preserved splitting {d} at k={k}")
    return x1, x0


def check_node_conservation(d, k):
    model = _model_of(d)
    if not model.has("E"):
        raise InputError(f"Surface {model.name} has no distinguished (-2)-curve E")
    E = model.cls("E")
    if self_intersection(E) != -2 or c1_dot(E) != 0:
        raise InputError(f"Surface {model.name}: E must satisfy E.E = -2 and c1.E = 0")
    if k < 0:
        raise InputError(f"k must be nonnegative, got {k}")
    # doubled node counts avoid the parity check
    doubled = lambda c: self_intersection(c) - c1_dot(c) + 2
    d_e = intersect(d, E)
    return doubled(d - k * E) + 2 * k * (d_e + k) == doubled(d)


def deform_f0_to_f2(d):
    """l1 -> E + F, l2 -> F; squares and c1 are preserved."""
    if d.surface_id != "F0":
        raise InputError(f"Expected an F0 class, got {d}")
    a, b = d.coords
    return DivisorClass("F2", (a, a + b))


def deform_f2_to_f0(d):
    if d.surface_id != "F2":
        raise InputError(f"Expected an F2 class, got {d}")
    x, y = d.coords
    return DivisorClass("F0", (x, y - x))


# Toric coordinates and polygons
_POLYGON_RULES = ("triangle", "rectangle", "trapezoid")


def toric_coordinates(d):
    model = _model_of(d)
    if model.polygon_rule == "triangle":
        return d.coords
    if model.polygon_rule == "rectangle":
        return d.coords
    if model.polygon_rule == "trapezoid":
        x, y = d.coords
        return (x, y - 2 * x)
    raise UnsupportedSurfaceError(f"Surface {model.name} is not a toric model")


def from_toric(surface, coords):
    model = get_surface(surface)
    coords = tuple(int(c) for c in coords)
    if model.polygon_rule in ("triangle", "rectangle"):
        return DivisorClass(model.name, coords)
    if model.polygon_rule == "trapezoid":
        if len(coords) != 2:
            raise InputError(f"F2 toric coordinates are a pair (a, b), got {list(coords)}")
        a, b = coords
        return DivisorClass(model.name, (a, 2 * a + b))
    raise UnsupportedSurfaceError(f"Surface {model.name} is not a toric model")


def newton_polygon(surface, d):
    model = get_surface(surface)
    if not model.is_toric:
        raise UnsupportedSurfaceError(f"Surface {model.name} is not a toric model")
    if d.surface_id != model.name:
        raise InputError(f"Class {d} does not live on {model.name}")
    coords = toric_coordinates(d)
    if any(c < 0 for c in coords):
        raise InputError(f"{d} has negative toric coordinates {list(coords)}")
    if model.polygon_rule == "triangle":
        (n,) = coords
        return LatticePolygon(((0, 0), (n, 0), (0, n)))
    if model.polygon_rule == "rectangle":
        a, b = coords
        return LatticePolygon(((0, 0), (b, 0), (b, a), (0, a)))
    a, b = coords
    return LatticePolygon(((0, 0), (2 * a + b, 0), (b, a), (0, a)))


def verify_builtin_surfaces():
    """Startup self-check of the basis conventions."""
    E, F = F2.cls("E"), F2.cls("F")
    l1, l2 = F0.cls("l1"), F0.cls("l2")
    checks = {
        "F2: E.E = -2": intersect(E, E) == -2,
        "F2: c1.E = 0": c1_dot(E) == 0,
        "F2: c1.F = 2": c1_dot(F) == 2,
        "F2: c1.(a,b) = 4a + 2b": all(
            c1_dot(from_toric(F2, (a, b))) == 4 * a + 2 * b for a in range(3) for b in range(3)
        ),
        "F0: l1.l1 = 0": intersect(l1, l1) == 0,
        "F0: l2.l2 = 0": intersect(l2, l2) == 0,
        "F0: l1.l2 = 1": intersect(l1, l2) == 1,
        "CP2: c1.line = 3": c1_dot(CP2.cls("line")) == 3,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise ConsistencyError(f"Lattice self-check failed: {', '.join(failed)}")
    return True


verify_builtin_surfaces()
