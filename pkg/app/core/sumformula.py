"""Multiplicities and combination sums across the F0 / F2 symplectic sum.

The F2 side is cut along its (-2)-curve E. A curve of class d - kE meets E in
d.E + 2k points: a real ones and b conjugate pairs. Strata keyed by (k, a, b)
carry counts already signed by (-1)^m, so the multiplicities below are always
applied with m = 0.
"""
from dataclasses import dataclass

from scipy.special import comb

from app.core.errors import ConsistencyError, InputError
from app.core.floors import (
    StratifiedCounts,
    relative_complex_counts_f2,
    relative_real_counts_f2,
    welschinger_toric,
)
from app.core.lattice import deform_f0_to_f2, from_toric
from app.utils.logger import get_logger

log = get_logger(__name__)

# Bit relating [F0 u L0] to the vanishing cycle in the hyperboloid degeneration.
CALIBRATED_GAMMA = 0

HYPOTHESES = ("H1", "H2")


@dataclass(frozen=True)
class CombinationMode:
    chi_rx0: int = 0
    gamma: int = CALIBRATED_GAMMA
    hypothesis: str = "H1"

    def __post_init__(self):
        if self.chi_rx0 not in (0, 2):
            raise InputError(f"chi(RX0) must be 0 or 2, got {self.chi_rx0}")
        if self.gamma not in (0, 1):
            raise InputError(f"gamma is a bit, got {self.gamma}")
        if self.hypothesis not in HYPOTHESES:
            raise InputError(f"hypothesis must be one of {HYPOTHESES}, got {self.hypothesis!r}")


def binomial(n, k):
    if n < 0 or k < 0 or k > n:
        return 0
    return int(comb(n, k, exact=True))


def _sign(exponent):
    return -1 if exponent % 2 else 1


def _require_nonnegative(**values):
    negative = [name for name, v in values.items() if v < 0]
    if negative:
        raise InputError(f"Multiplicity arguments must be nonnegative: {', '.join(negative)}")


def mu0(k, a, b, m, gamma):
    _require_nonnegative(k=k, a=a, b=b, m=m)
    weight = sum(
        binomial(a, k - 2 * b_k) * binomial(b, b_k)
        for b_k in range(0, k // 2 + 1)
    )
    return _sign(m + gamma * (a + b)) * weight


def mu2(k, a, b, m, gamma):
    _require_nonnegative(k=k, a=a, b=b, m=m)
    if a != 0 or k != b:
        return 0
    return _sign(m + gamma * b) * 2 ** b


def muH2(k, a, b, m):
    _require_nonnegative(k=k, a=a, b=b, m=m)
    return _sign(m) if k == a == b == 0 else 0


def combine_complex(d_e, counts):
    """Sum of C(d.E + 2k, k) * N_k."""
    total = 0
    for k, count in sorted(counts.items()):
        if d_e + 2 * k < 0:
            raise InputError(f"d.E + 2k = {d_e + 2 * k} < 0 at k={k}")
        total += binomial(d_e + 2 * k, k) * count
    return total


def combine_real(mode, strata):
    if isinstance(strata, StratifiedCounts):
        strata = dict(strata.items())
    total = 0
    for (k, a, b), count in sorted(strata.items()):
        if not count:
            continue
        if mode.hypothesis == "H2":
            total += muH2(k, a, b, 0) * count
        elif mode.chi_rx0 == 0:
            total += mu0(k, a, b, 0, mode.gamma) * count
        else:
            total += mu2(k, a, b, 0, mode.gamma) * count
    return total


def welschinger_ellipsoid(d, workers=1):
    """Ellipsoid invariant of d(l1 + l2), s = 0, read off the F2 floor count of (d, 0)."""
    if d < 1:
        raise InputError(f"Degree must be positive, got {d}")
    return welschinger_toric("F2", from_toric("F2", (d, 0)), workers)


# Routes through the strata
def complex_via_strata(f0_class, workers=1):
    d = deform_f0_to_f2(f0_class)
    d_e, counts = relative_complex_counts_f2(d, workers=workers)
    return combine_complex(d_e, counts)


def hyperboloid_via_strata(f0_class, gamma=CALIBRATED_GAMMA, workers=1):
    strata = relative_real_counts_f2(deform_f0_to_f2(f0_class), workers=workers)
    return combine_real(CombinationMode(chi_rx0=0, gamma=gamma), strata)


def ellipsoid_via_strata(d, gamma=CALIBRATED_GAMMA, workers=1):
    strata = relative_real_counts_f2(from_toric("F2", (d, 0)), workers=workers)
    for (k, a, b), count in strata.items():
        if k >= 1 and count and mu2(k, a, b, 0, gamma):
            raise ConsistencyError(f"Stratum {(k, a, b)} contributes to the ellipsoid count")
    return combine_real(CombinationMode(chi_rx0=2, gamma=gamma), strata)


def calibrate_gamma(f0_classes, workers=1):
    """The single gamma for which the hyperboloid identity holds on every class."""
    working = []
    for gamma in (0, 1):
        if all(welschinger_toric("F0", c, workers) == hyperboloid_via_strata(c, gamma, workers) for c in f0_classes):
            working.append(gamma)
    if len(working) != 1:
        raise ConsistencyError(f"gamma calibration is ambiguous or fails: candidates {working}")
    log.info(f"✅ Calibrated gamma = {working[0]}")
    return working[0]


# Quadric degenerations: hyperboloid (chi = 0) against ellipsoid (chi = 2)
def quadric_series(d, workers=1):
    hyperboloid = welschinger_toric("F0", from_toric("F0", (d, d)), workers)
    return [(0, hyperboloid), (2, welschinger_ellipsoid(d, workers))]


def quadric_decrement(d, workers=1):
    """Sum over k >= 1 of C(2k, k) * W_F2(d - kE); equals hyperboloid minus ellipsoid."""
    strata = relative_real_counts_f2(from_toric("F2", (d, 0)), workers=workers)
    return sum(binomial(a, k) * count for (k, a, b), count in strata.items() if k >= 1 and b == 0)
