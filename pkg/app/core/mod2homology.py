"""GF(2) models of H2(X minus L; Z/2) with the involution action.

A model lists a basis of H2(X minus L; Z/2), the mod-2 intersection pairing of
the images in H2(X; Z/2), the matrix of tau_* (column j is the image of basis
vector j) and generators of the subgroup G. Generators of Ker(iota) are
phantom basis vectors: they pair trivially, are tau-fixed and always lie in G.
The quotient of the tau-invariant classes by G is the group H(X_R, L).
"""
import re
from dataclasses import dataclass

import numpy as np

from app.core.errors import InputError, ModelConsistencyError, SchemaError
from app.utils.logger import get_logger

log = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class GF2Matrix:
    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise InputError("GF(2) matrices are two-dimensional")
        arr = (arr % 2).astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_rows(cls, rows, cols=None):
        rows = [list(r) for r in rows]
        if not rows:
            return cls(np.zeros((0, cols or 0), dtype=np.uint8))
        return cls(np.array(rows))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def from_packed(cls, packed, cols):
        arr = np.array(packed, dtype=np.uint8)
        if arr.size == 0:
            return cls.zeros(len(packed), cols)
        return cls(np.unpackbits(arr, axis=1, count=cols))

    @property
    def rows(self):
        return self.bits.shape[0]

    @property
    def cols(self):
        return self.bits.shape[1]

    @property
    def T(self):
        return GF2Matrix(self.bits.T)

    def packed(self):
        return np.packbits(self.bits, axis=1).tolist()

    def __matmul__(self, other):
        if isinstance(other, GF2Matrix):
            return GF2Matrix(self.bits.astype(np.int64) @ other.bits.astype(np.int64))
        vector = np.array(other, dtype=np.int64)
        return tuple(int(x) for x in (self.bits.astype(np.int64) @ vector) % 2)

    def __add__(self, other):
        return GF2Matrix(np.bitwise_xor(self.bits, other.bits))

    def __eq__(self, other):
        return isinstance(other, GF2Matrix) and self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))

    def is_symmetric(self):
        return self.rows == self.cols and bool(np.array_equal(self.bits, self.bits.T))


# Elimination
def _row_reduce(arr):
    """Reduced row echelon form over GF(2) and the pivot columns."""
    m = np.array(arr, dtype=np.uint8) % 2
    pivots = []
    row = 0
    for col in range(m.shape[1]):
        if row == m.shape[0]:
            break
        hits = np.nonzero(m[row:, col])[0]
        if hits.size == 0:
            continue
        pivot = row + hits[0]
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        m[others] ^= m[row]
        pivots.append(col)
        row += 1
    return m, pivots


def rank(m):
    bits = m.bits if isinstance(m, GF2Matrix) else np.array(m)
    if bits.size == 0:
        return 0
    return len(_row_reduce(bits)[1])


def nullspace(m):
    """Basis of {v : m v = 0}."""
    reduced, pivots = _row_reduce(m.bits)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(m.cols, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = reduced[i, f]
        basis.append(tuple(int(x) for x in v))
    return basis


def span_rank(vectors, dim):
    if not vectors:
        return 0
    return rank(GF2Matrix.from_rows(vectors, dim))


def in_span(vector, vectors, dim):
    return span_rank(list(vectors) + [vector], dim) == span_rank(list(vectors), dim)


def _xor(*vectors):
    return tuple(int(x) for x in np.bitwise_xor.reduce(np.array(vectors, dtype=np.uint8), axis=0))


@dataclass(frozen=True, eq=False)
class RealHomologyModel:
    name: str
    labels: tuple
    pairing: GF2Matrix
    tau: GF2Matrix
    kernel_indices: tuple = ()
    g_generators: tuple = ()
    claimed_basis: tuple = ()

    def __post_init__(self):
        n = len(self.labels)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "kernel_indices", tuple(self.kernel_indices))
        for name in ("g_generators", "claimed_basis"):
            vectors = tuple(tuple(int(x) % 2 for x in v) for v in getattr(self, name))
            if any(len(v) != n for v in vectors):
                raise InputError(f"Model {self.name}: {name} vectors must have length {n}")
            object.__setattr__(self, name, vectors)
        for matrix in (self.pairing, self.tau):
            if (matrix.rows, matrix.cols) != (n, n):
                raise InputError(f"Model {self.name}: matrices must be {n}x{n}")
        if any(not 0 <= i < n for i in self.kernel_indices):
            raise InputError(f"Model {self.name}: kernel index out of range")

    @property
    def dim(self):
        return len(self.labels)

    @property
    def kernel_dim(self):
        return len(self.kernel_indices)

    def vector(self, *labels):
        v = [0] * self.dim
        for label in labels:
            v[self.labels.index(label)] ^= 1
        return tuple(v)

    def unit(self, i):
        return tuple(1 if j == i else 0 for j in range(self.dim))

    def apply_tau(self, v):
        return self.tau @ v

    def is_invariant(self, v):
        return self.apply_tau(v) == tuple(v)

    def g_span(self):
        return [self.unit(i) for i in self.kernel_indices] + list(self.g_generators)

    def validate(self):
        if not (self.tau @ self.tau) == GF2Matrix.identity(self.dim):
            raise ModelConsistencyError(f"Model {self.name}: tau is not an involution")
        if not self.pairing.is_symmetric():
            raise ModelConsistencyError(f"Model {self.name}: pairing is not symmetric")
        for i in self.kernel_indices:
            if self.pairing.bits[i].any() or not self.is_invariant(self.unit(i)):
                raise ModelConsistencyError(
                    f"Model {self.name}: kernel generator {self.labels[i]} must pair trivially and be tau-fixed"
                )
        _check_generators(self)
        return True


def _check_generators(model):
    for v in model.g_generators:
        if not model.is_invariant(v):
            raise ModelConsistencyError(f"Model {model.name}: generator {v} of G is not tau-invariant")


# Operations
def invariant_subspace(model):
    return nullspace(model.tau + GF2Matrix.identity(model.dim))


def quotient_dimension(model):
    _check_generators(model)
    return len(invariant_subspace(model)) - span_rank(model.g_span(), model.dim)


def verify_claimed_basis(model):
    claimed = list(model.claimed_basis)
    if not all(model.is_invariant(v) for v in claimed):
        return False
    g = model.g_span()
    independent = span_rank(g + claimed, model.dim) - span_rank(g, model.dim) == len(claimed)
    return independent and len(claimed) == quotient_dimension(model)


def is_nontrivial_class(model, vector):
    """Whether a tau-invariant class survives in H(X_R, L)."""
    vector = tuple(int(x) % 2 for x in vector)
    if len(vector) != model.dim:
        raise InputError(f"Vector of length {len(vector)} for a model of dimension {model.dim}")
    if not model.is_invariant(vector):
        raise ModelConsistencyError(f"{vector} is not tau-invariant in model {model.name}")
    return not in_span(vector, model.g_span(), model.dim)


def betti_x_minus_l(b2X, b1L, L_class_nonzero):
    if b2X < 0 or b1L < 0:
        raise InputError("Betti numbers are nonnegative")
    return b2X + b1L + (0 if L_class_nonzero else 1) - 1


# Ambient surfaces: full H2(X; Z/2) with its pairing
@dataclass(frozen=True, eq=False)
class AmbientSurface:
    name: str
    labels: tuple
    pairing: GF2Matrix
    relations: tuple = ()

    def vector(self, *labels):
        v = [0] * len(self.labels)
        for label in labels:
            if label in self.labels:
                v[self.labels.index(label)] ^= 1
            else:
                v = list(_xor(v, self.relation(label)))
        return tuple(v)

    def relation(self, label):
        for name, parts in self.relations:
            if name == label:
                return self.vector(*parts)
        raise InputError(f"Surface {self.name} has no class {label!r}")

    def pair(self, u, v):
        return int(np.array(u) @ self.pairing.bits.astype(np.int64) @ np.array(v)) % 2


def _ambient(name, labels, products, relations=()):
    index = {label: i for i, label in enumerate(labels)}
    bits = np.zeros((len(labels), len(labels)), dtype=np.uint8)
    for x, y in products:
        bits[index[x], index[y]] = 1
        bits[index[y], index[x]] = 1
    return AmbientSurface(name, tuple(labels), GF2Matrix(bits), tuple(relations))


def _spheres(first, last):
    return [f"S{i}" for i in range(first, last + 1)]


def _chain(labels):
    return list(zip(labels, labels[1:]))


def conic_bundle_surface(n):
    spheres = _spheres(2, 2 * n - 1)
    products = [("c1", "E2"), ("E2", "E2"), ("B", "F")]
    products += [("E2", s) for s in spheres if s in ("S2", "S3")]
    products += _chain(spheres)
    return _ambient(f"conic_bundle({n})", ["c1", "B", "F", "E2"] + spheres, products)


def dp2_surface():
    spheres = _spheres(2, 7)
    products = [("c1", "E"), ("E", "E"), ("E", "S2")] + _chain(spheres)
    return _ambient("dp2", ["c1", "E"] + spheres, products)


def dp1_surface():
    spheres = _spheres(1, 8)
    products = [("c1", "c1")] + _chain(_spheres(1, 7)) + [("S8", "S1")]
    relations = (
        ("N", ("c1", "S1", "S3", "S5", "S7")),
        ("S9", ("S8", "S2", "S4")),
        # meets c1 and itself once, misses N
        ("E", ("c1", "S8")),
    )
    return _ambient("dp1", ["c1"] + spheres, products, relations)


def f0_surface():
    return _ambient("f0", ["l1", "l2"], [("l1", "l2")])


def cp2_surface():
    return _ambient("cp2", ["line"], [("line", "line")])


def ambient_surface(name):
    name, n = _parse_model_name(name)
    if name == "conic_bundle":
        return conic_bundle_surface(n)
    builders = {"dp2": dp2_surface, "dp1": dp1_surface, "f0": f0_surface, "cp2": cp2_surface}
    key = name.split("_")[0]
    if key not in builders:
        raise InputError(f"Unknown surface {name!r}")
    return builders[key]()


def _assemble(name, ambient, basis, tau_images=None, g_labels=(), claimed_labels=()):
    """Model from basis entries (label, ambient class labels or None for a kernel generator)."""
    labels = [label for label, _ in basis]
    index = {label: i for i, label in enumerate(labels)}
    zero = tuple([0] * len(ambient.labels))
    vectors = [ambient.vector(*parts) if parts is not None else zero for _, parts in basis]
    pairing = np.array([[ambient.pair(u, v) for v in vectors] for u in vectors], dtype=np.uint8)
    tau = np.eye(len(labels), dtype=np.uint8)
    for label, image in (tau_images or {}).items():
        column = np.zeros(len(labels), dtype=np.uint8)
        for part in image:
            column[index[part]] ^= 1
        tau[:, index[label]] = column

    def vec(label):
        v = [0] * len(labels)
        v[index[label]] = 1
        return tuple(v)

    model = RealHomologyModel(
        name=name,
        labels=tuple(labels),
        pairing=GF2Matrix(pairing),
        tau=GF2Matrix(tau),
        kernel_indices=tuple(i for i, (_, parts) in enumerate(basis) if parts is None),
        g_generators=tuple(vec(label) for label in g_labels),
        claimed_basis=tuple(vec(label) for label in claimed_labels),
    )
    model.validate()
    return model


def conic_bundle_model(n):
    """X minus S1 for a conic bundle whose real part is a chain of n spheres."""
    if n < 1:
        raise InputError(f"A conic bundle needs n >= 1, got {n}")
    ambient = conic_bundle_surface(n)
    tail = _spheres(3, 2 * n - 1)
    basis = [("c1", ("c1",)), ("B", ("B",)), ("F", ("F",))]
    if n >= 2:
        basis.append(("E2", ("E2",)))
    basis += [(s, (s,)) for s in tail]
    tau = {"B": ["B", "c1"] + (["F"] if n % 2 else [])}
    if n >= 2:
        tau["E2"] = ["E2", "F"]
    return _assemble(f"conic_bundle({n})", ambient, basis, tau, ("c1", "F"), tail)


def dp2_model():
    ambient = dp2_surface()
    tail = _spheres(3, 7)
    basis = [("c1", ("c1",)), ("E", ("E",))] + [(s, (s,)) for s in tail]
    return _assemble("dp2", ambient, basis, {"E": ["E", "c1"]}, ("c1",), tail)


def dp1_s1_model():
    ambient = dp1_surface()
    claimed = _spheres(3, 7) + ["S9", "N"]
    basis = [("c1", ("c1",))] + [(s, (s,)) for s in claimed]
    return _assemble("dp1_S1", ambient, basis, None, ("c1",), claimed)


def dp1_s7_model():
    ambient = dp1_surface()
    claimed = _spheres(1, 5) + ["S8", "N"]
    basis = [("c1", ("c1",))] + [(s, (s,)) for s in claimed]
    return _assemble("dp1_S7", ambient, basis, None, ("c1",), claimed)


def dp1_n_model():
    ambient = dp1_surface()
    claimed = _spheres(1, 7)
    basis = [("B", None), ("E", ("E",))] + [(s, (s,)) for s in claimed]
    return _assemble("dp1_N", ambient, basis, {"E": ["E", "B"]}, (), claimed)


def f0_hyperboloid_model():
    ambient = f0_surface()
    basis = [("K1", None), ("K2", None), ("l1", ("l1",)), ("l2", ("l2",))]
    tau = {"l1": ["l1", "K1"], "l2": ["l2", "K2"]}
    return _assemble("f0_hy", ambient, basis, tau)


def f0_ellipsoid_model():
    ambient = f0_surface()
    return _assemble("f0_el", ambient, [("Q", ("l1", "l2"))], None, ("Q",))


def cp2_model():
    # the empty real conic: 2*line vanishes mod 2, so it spans Ker(iota)
    return _assemble("cp2", cp2_surface(), [("C", None)])


_BUILDERS = {
    "dp2": dp2_model,
    "dp1_S1": dp1_s1_model,
    "dp1_S7": dp1_s7_model,
    "dp1_N": dp1_n_model,
    "f0_hy": f0_hyperboloid_model,
    "f0_el": f0_ellipsoid_model,
    "cp2": cp2_model,
}
BUILTIN_NAMES = ("conic_bundle",) + tuple(_BUILDERS)

_CONIC = re.compile(r"conic_bundle(?:\((\d+)\))?")


def _parse_model_name(name, n=None):
    match = _CONIC.fullmatch(str(name))
    if match:
        if match.group(1) is not None:
            n = int(match.group(1))
        return "conic_bundle", n if n is not None else 2
    return str(name), n


def builtin_model(name, n=None):
    """Built-in model by name; ``conic_bundle(3)`` or ``conic_bundle`` with n."""
    key, n = _parse_model_name(name, n)
    if key == "conic_bundle":
        return conic_bundle_model(n)
    if key not in _BUILDERS:
        raise InputError(f"Unknown model {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    return _BUILDERS[key]()


def all_builtin_models(conic_range=range(1, 6)):
    return [conic_bundle_model(n) for n in conic_range] + [build() for build in _BUILDERS.values()]


# Blow-ups
def _extend(model, new_labels, tau_block, self_pairing):
    old, new = model.dim, len(new_labels)
    size = old + new
    pairing = np.zeros((size, size), dtype=np.uint8)
    pairing[:old, :old] = model.pairing.bits
    pairing[old:, old:] = self_pairing
    tau = np.zeros((size, size), dtype=np.uint8)
    tau[:old, :old] = model.tau.bits
    tau[old:, old:] = tau_block
    pad = lambda v: tuple(v) + (0,) * new
    return pairing, tau, pad


def blowup_transform(model, kind):
    count = sum(1 for label in model.labels if label.startswith("e"))
    if kind == "conjugate_pair":
        labels = (f"e{count}+", f"e{count}-")
        pairing, tau, pad = _extend(model, labels, [[0, 1], [1, 0]], np.eye(2, dtype=np.uint8))
        kernel = model.kernel_indices
        extra = [(0,) * model.dim + (1, 1)]
    elif kind == "real_point_on_L":
        labels = (f"e{count}", f"K_e{count}")
        pairing, tau, pad = _extend(model, labels, np.eye(2, dtype=np.uint8), [[1, 0], [0, 0]])
        kernel = model.kernel_indices + (model.dim + 1,)
        extra = [(0,) * model.dim + (1, 1)]
    else:
        raise InputError(f"Unknown blow-up kind {kind!r}")
    result = RealHomologyModel(
        name=f"{model.name}+{kind}",
        labels=model.labels + labels,
        pairing=GF2Matrix(pairing),
        tau=GF2Matrix(tau),
        kernel_indices=kernel,
        g_generators=tuple(pad(v) for v in model.g_generators) + tuple(extra),
        claimed_basis=tuple(pad(v) for v in model.claimed_basis),
    )
    result.validate()
    log.debug(f"🔍 Blew up {model.name} ({kind}): dimension {model.dim} -> {result.dim}")
    return result


# JSON model format
def model_to_dict(model):
    return {
        "name": model.name,
        "labels": list(model.labels),
        "pairing": model.pairing.packed(),
        "tau": model.tau.packed(),
        "kernel": list(model.kernel_indices),
        "g_generators": [list(v) for v in model.g_generators],
        "claimed_basis": [list(v) for v in model.claimed_basis],
    }


def model_from_dict(data):
    try:
        labels = tuple(data["labels"])
        n = len(labels)
        return RealHomologyModel(
            name=str(data.get("name", "model")),
            labels=labels,
            pairing=GF2Matrix.from_packed(data["pairing"], n),
            tau=GF2Matrix.from_packed(data["tau"], n),
            kernel_indices=tuple(data.get("kernel", ())),
            g_generators=tuple(tuple(v) for v in data.get("g_generators", ())),
            claimed_basis=tuple(tuple(v) for v in data.get("claimed_basis", ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"Invalid homology model: {e}") from e
