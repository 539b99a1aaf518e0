"""Checkers for vanishing, divisibility, sign and monotonicity statements.

Hypothesis flags travel with the tables. Missing flags give ``n/a``, never
``pass``.
"""
from dataclasses import dataclass

from app.core.errors import DomainError, InputError
from app.core.lattice import c1_dot, constraint_split, node_count
from app.core.tables import F_STANDARD

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "n/a"


@dataclass(frozen=True)
class ReportLine:
    entry: str
    check: str
    status: str
    detail: str = ""

    def to_record(self):
        return {"entry": self.entry, "check": self.check, "status": self.status, "detail": self.detail}


@dataclass(frozen=True)
class Report:
    lines: tuple = ()

    def __add__(self, other):
        return Report(self.lines + other.lines)

    @property
    def failed(self):
        return any(line.status == FAIL for line in self.lines)

    def statuses(self, check=None):
        return [line.status for line in self.lines if check is None or line.check == check]

    def to_records(self):
        return [line.to_record() for line in self.lines]


def _gated(table, check):
    if table.meta.flags.hypotheses_hold:
        return None
    return Report((ReportLine(
        "*", check, NOT_APPLICABLE,
        "needs flags chain_of_spheres and F_nontrivial set to true",
    ),))


def check_vanishing(table):
    skipped = _gated(table, "vanishing")
    if skipped:
        return skipped
    model = table.meta.model
    lines = []
    for e in table.entries:
        r = constraint_split(e.cls, e.s, model)
        if r < 2:
            lines.append(ReportLine(e.label, "vanishing", NOT_APPLICABLE, f"r={r}"))
        elif e.value == 0:
            lines.append(ReportLine(e.label, "vanishing", PASS, f"r={r}"))
        else:
            lines.append(ReportLine(e.label, "vanishing", FAIL, f"r={r} but value {e.value} != 0"))
    return Report(tuple(lines))


def check_divisibility(table):
    skipped = _gated(table, "divisibility")
    if skipped:
        return skipped
    model = table.meta.model
    lines = []
    for e in table.entries:
        r = constraint_split(e.cls, e.s, model)
        c1d = c1_dot(e.cls, model)
        if r != 1:
            lines.append(ReportLine(e.label, "divisibility", NOT_APPLICABLE, f"r={r}"))
            continue
        if c1d < 4 or c1d % 2:
            lines.append(ReportLine(
                e.label, "divisibility", NOT_APPLICABLE,
                f"exponent (c1.d - 4)/2 with c1.d={c1d} is not a nonnegative integer",
            ))
            continue
        divisor = 2 ** ((c1d - 4) // 2)
        status = PASS if e.value % divisor == 0 else FAIL
        lines.append(ReportLine(e.label, "divisibility", status, f"{divisor} | {e.value}"))
    return Report(tuple(lines))


def check_sign(table):
    skipped = _gated(table, "sign")
    if skipped:
        return skipped
    if table.meta.F != F_STANDARD:
        return Report((ReportLine("*", "sign", NOT_APPLICABLE, f"F={table.meta.F} is not [RX minus L]"),))
    model = table.meta.model
    lines = []
    for e in table.entries:
        r = constraint_split(e.cls, e.s, model)
        if r != 1:
            lines.append(ReportLine(e.label, "sign", NOT_APPLICABLE, f"r={r}"))
            continue
        try:
            nodes = node_count(e.cls, model)
        except DomainError as err:
            lines.append(ReportLine(e.label, "sign", NOT_APPLICABLE, str(err)))
            continue
        signed = (-1) ** nodes * e.value
        status = PASS if signed >= 0 else FAIL
        lines.append(ReportLine(e.label, "sign", status, f"(-1)^{nodes} * {e.value} = {signed}"))
    return Report(tuple(lines))


def run_table_checks(table):
    return check_vanishing(table) + check_divisibility(table) + check_sign(table)


def sign_twist_curve(value, d_dot_delta):
    if d_dot_delta < 0 or d_dot_delta % 2:
        raise InputError(f"d.delta must be even and nonnegative, got {d_dot_delta}")
    return -value if (d_dot_delta // 2) % 2 else value


def sign_twist_kernel(value, delta_dot_ld):
    if delta_dot_ld not in (0, 1):
        raise InputError(f"delta.l_d is a bit, got {delta_dot_ld}")
    return -value if delta_dot_ld else value


def check_monotonicity(series):
    """Values must be nonnegative and non-increasing in chi."""
    ordered = sorted(series, key=lambda item: item[0])
    lines = []
    for chi, value in ordered:
        status = PASS if value >= 0 else FAIL
        lines.append(ReportLine(f"chi={chi}", "nonnegative", status, str(value)))
    for (chi1, v1), (chi2, v2) in zip(ordered, ordered[1:]):
        ok = v1 == v2 if chi1 == chi2 else v1 >= v2
        lines.append(ReportLine(
            f"chi={chi1}..{chi2}", "monotonicity", PASS if ok else FAIL, f"{v1} >= {v2}"
        ))
    return Report(tuple(lines))
