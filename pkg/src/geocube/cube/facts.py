"""Cuboid and flow fact types plus the measure-merging arithmetic.

A cuboid is one (spatial cell, temporal interval, population group)
compartment.  Transitions between cuboids (a user's consecutive footprints,
or a user's home moving between interval ends) are kept dual-keyed by their
origin and destination cuboids; a transition is stored only when the two
cuboids differ.  Merging follows the cube's aggregation functions:
activity and flows sum; centroids merge activity-weighted; in/out counts
and the distinct-count approximations subtract the flows that become
internal to the merged compartment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

GROUP_ALL = "all"
GROUP_ILI = "ili"
GROUPS = (GROUP_ALL, GROUP_ILI)

# (col, row, t_index) at some (level, t_level)
CuboidKey = tuple[int, int, int]
# origin cuboid + destination cuboid
FlowKey = tuple[int, int, int, int, int, int]


class MissingChildren(RuntimeError):
    """Roll-up requested over a level that was never materialized."""


class EmptyRegion(ValueError):
    """Query region resolves to no grid cells."""


@dataclass
class Fact:
    """Measures of one cuboid.

    A: activities; V: distinct visitors; V_flu: distinct visitors infected
    at posting time; R: distinct residents (home in cell at interval end);
    O/I: transitions out of / into the cuboid; S_lon/S_lat: activity
    centroid, unset (None) while A == 0.
    """

    A: int = 0
    V: int = 0
    V_flu: int = 0
    R: int = 0
    O: int = 0
    I: int = 0
    S_lon: float | None = None
    S_lat: float | None = None

    def copy(self) -> "Fact":
        return Fact(self.A, self.V, self.V_flu, self.R, self.O, self.I, self.S_lon, self.S_lat)

    def check_constraints(self) -> list[str]:
        """Names of violated cuboid constraints (empty when consistent)."""
        bad = []
        if self.O > self.V:
            bad.append("O<=V")
        if self.I > self.V:
            bad.append("I<=V")
        if self.V_flu > self.V:
            bad.append("V_flu<=V")
        if self.V > self.A:
            bad.append("V<=A")
        if min(self.A, self.V, self.V_flu, self.R, self.O, self.I) < 0:
            bad.append("non-negative")
        return bad


ZERO_FACT = Fact()


@dataclass
class Diagnostics:
    """Counters for the distinct-count approximation's failure modes."""

    clamped: int = 0      # cuboids where a distinct count went negative
    reconciled: int = 0   # cuboids where V was raised to cover O/I/V_flu

    def merge(self, other: "Diagnostics") -> None:
        self.clamped += other.clamped
        self.reconciled += other.reconciled

    def as_dict(self) -> dict:
        return {"clamped": self.clamped, "reconciled": self.reconciled}


def merge_cuboids(
    children: list[Fact],
    internal_f: int = 0,
    internal_f_flu: int = 0,
    internal_f_migration: int = 0,
    diagnostics: Diagnostics | None = None,
) -> Fact:
    """Merge disjoint child cuboids into their union.

    internal_* are the transition counts between distinct children (flows
    that disappear inside the union).  A and S merge exactly; O and I are
    exact given the internal flows; V, V_flu and R are the flow-corrected
    approximations of the true distinct counts, clamped at zero and raised
    when they undershoot the exact O/I/V_flu lower bounds so the published
    cuboid always satisfies the constraint suite.
    """
    if not children:
        return Fact()
    out = Fact()
    s_lon = s_lat = 0.0
    for c in children:
        out.A += c.A
        out.V += c.V
        out.V_flu += c.V_flu
        out.R += c.R
        out.O += c.O
        out.I += c.I
        if c.A and c.S_lon is not None:
            s_lon += c.A * c.S_lon
            s_lat += c.A * c.S_lat
    if out.A:
        out.S_lon = s_lon / out.A
        out.S_lat = s_lat / out.A

    out.O -= internal_f
    out.I -= internal_f
    v = out.V - internal_f
    v_flu = out.V_flu - internal_f_flu
    r = out.R - internal_f_migration

    clamped = 0
    # any activity implies at least one true visitor, so v <= 0 < A is a
    # provable undershoot even before going negative
    if v < 0 or (v == 0 and out.A > 0):
        v, clamped = max(v, 0), clamped + 1
    if v_flu < 0:
        v_flu, clamped = 0, clamped + 1
    if r < 0:
        r, clamped = 0, clamped + 1

    floor = max(out.O, out.I, v_flu)
    reconciled = 0
    if v < floor:
        v = floor
        reconciled = 1

    out.V, out.V_flu, out.R = v, v_flu, r
    if diagnostics is not None:
        diagnostics.clamped += clamped
        diagnostics.reconciled += reconciled
    return out
