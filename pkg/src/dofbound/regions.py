"""Exact 2-D degrees-of-freedom (DoF) regions for the two-user MIMO
interference channel with channel state known at receivers only.

All region math is done with exact rational arithmetic
(:class:`fractions.Fraction`): constraint coefficients such as
``min(N1, N2, M2) / min(N2, M2)`` are rationals, and vertex comparison
with floats would make region-equality checks flaky.

A region is an intersection of half-planes ``a*d1 + b*d2 <= c`` in the
nonnegative quadrant; nonnegativity ``d1 >= 0`` and ``d2 >= 0`` is always
implicit and never stored. Vertices are enumerated by pairwise constraint
intersection followed by feasibility filtering, which is exact and fast
for the small constraint counts that occur here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations


class PreconditionError(ValueError):
    """A builder precondition on the antenna configuration failed."""


class UnboundedRegionError(ValueError):
    """Some direction of the positive quadrant is unconstrained."""


class EmptyRegionError(ValueError):
    """The constraint set has no feasible point in the positive quadrant."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational (int, str or Fraction), got {type(x).__name__}")


def _frac_str(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts of a two-user interference channel.

    ``M1``/``M2`` are transmit-antenna counts, ``N1``/``N2`` receive-antenna
    counts. All four must be positive.
    """

    M1: int
    M2: int
    N1: int
    N2: int

    def __post_init__(self):
        for name in ("M1", "M2", "N1", "N2"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise PreconditionError(f"antenna count {name} must be a positive integer, got {value!r}")

    @property
    def symmetric(self) -> bool:
        return self.M1 == self.M2 and self.N1 == self.N2

    def to_json_dict(self) -> dict:
        return {"M1": self.M1, "M2": self.M2, "N1": self.N1, "N2": self.N2}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "AntennaConfig":
        return cls(M1=doc["M1"], M2=doc["M2"], N1=doc["N1"], N2=doc["N2"])


@dataclass(frozen=True)
class HalfPlane:
    """Half-plane constraint ``a*d1 + b*d2 <= c`` with exact rational coefficients."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", _frac(self.a))
        object.__setattr__(self, "b", _frac(self.b))
        object.__setattr__(self, "c", _frac(self.c))
        if self.a == 0 and self.b == 0:
            raise ValueError("degenerate half-plane: (a, b) must not be (0, 0)")

    def evaluate(self, d1, d2) -> Fraction:
        return self.a * _frac(d1) + self.b * _frac(d2)

    def admits(self, d1, d2) -> bool:
        return self.evaluate(d1, d2) <= self.c

    def to_json_dict(self) -> dict:
        return {"a": _frac_str(self.a), "b": _frac_str(self.b), "c": _frac_str(self.c)}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "HalfPlane":
        return cls(Fraction(doc["a"]), Fraction(doc["b"]), Fraction(doc["c"]))

    def __str__(self) -> str:
        def term(coef: Fraction, var: str) -> str:
            if coef == 1:
                return var
            if coef.denominator == 1:
                return f"{coef} {var}"
            return f"({coef}) {var}"

        parts = []
        if self.a != 0:
            parts.append(term(self.a, "d1"))
        if self.b != 0:
            parts.append(term(self.b, "d2"))
        return " + ".join(parts) + f" <= {self.c}"


@dataclass(frozen=True)
class Vertex:
    """A corner point of a DoF region, with exact rational coordinates."""

    d1: Fraction
    d2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "d1", _frac(self.d1))
        object.__setattr__(self, "d2", _frac(self.d2))
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError(f"vertex ({self.d1}, {self.d2}) outside the nonnegative quadrant")

    def __iter__(self):
        yield self.d1
        yield self.d2

    def __str__(self) -> str:
        return f"({self.d1}, {self.d2})"


# Implicit nonnegativity, written as half-planes: -d1 <= 0 and -d2 <= 0.
_NONNEGATIVITY = (HalfPlane(-1, 0, 0), HalfPlane(0, -1, 0))


def _intersection(g: HalfPlane, h: HalfPlane):
    det = g.a * h.b - h.a * g.b
    if det == 0:
        return None
    d1 = (g.c * h.b - h.c * g.b) / det
    d2 = (g.a * h.c - h.a * g.c) / det
    return (d1, d2)


def _assert_bounded(constraints) -> None:
    # The region is unbounded iff the recession cone within the quadrant
    # contains a nonzero direction; its extreme rays are among the axis
    # directions and the boundary directions of individual constraints.
    candidates = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
    for h in constraints:
        for u in ((h.b, -h.a), (-h.b, h.a)):
            if u[0] >= 0 and u[1] >= 0 and (u[0] > 0 or u[1] > 0):
                candidates.append(u)
    for u in candidates:
        if all(h.a * u[0] + h.b * u[1] <= 0 for h in constraints):
            raise UnboundedRegionError(
                f"region is unbounded along direction ({u[0]}, {u[1]})"
            )


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_ccw(points):
    """Counterclockwise convex hull (monotone chain), exact arithmetic.

    Collinear interior points are dropped, so degenerate regions reduce to
    their minimal vertex set (segment endpoints or a single point).
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _enumerate_vertices(constraints) -> tuple:
    _assert_bounded(constraints)
    rows = tuple(constraints) + _NONNEGATIVITY
    points = set()
    for g, h in combinations(rows, 2):
        p = _intersection(g, h)
        if p is None:
            continue
        d1, d2 = p
        if d1 < 0 or d2 < 0:
            continue
        if all(r.a * d1 + r.b * d2 <= r.c for r in rows):
            points.add(p)
    if not points:
        raise EmptyRegionError("no feasible point in the nonnegative quadrant")
    hull = _hull_ccw(points)
    # Serialization convention: start from the on-axis vertex with largest d1.
    on_axis = [i for i, p in enumerate(hull) if p[1] == 0]
    if on_axis:
        start = max(on_axis, key=lambda i: hull[i][0])
        hull = hull[start:] + hull[:start]
    return tuple(Vertex(d1, d2) for d1, d2 in hull)


@dataclass(frozen=True)
class DofRegion:
    """A bounded convex DoF region: half-plane list plus derived vertices."""

    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not all(isinstance(h, HalfPlane) for h in self.constraints):
            raise TypeError("constraints must be HalfPlane instances")

    @cached_property
    def vertices(self) -> tuple:
        """Counterclockwise hull vertices, deduplicated, exact rationals."""
        return _enumerate_vertices(self.constraints)

    def contains(self, point) -> bool:
        """Exact membership test: ``point`` satisfies every constraint."""
        d1, d2 = point
        d1, d2 = _frac(d1), _frac(d2)
        if d1 < 0 or d2 < 0:
            return False
        return all(h.admits(d1, d2) for h in self.constraints)

    def sum_dof(self) -> Fraction:
        """Maximum of d1 + d2 over the region (attained at a vertex)."""
        return max(v.d1 + v.d2 for v in self.vertices)

    def without_constraint(self, idx: int) -> "DofRegion":
        if not 0 <= idx < len(self.constraints):
            raise IndexError(f"constraint index {idx} out of range (0..{len(self.constraints) - 1})")
        kept = self.constraints[:idx] + self.constraints[idx + 1:]
        return DofRegion(kept)

    def is_redundant(self, idx: int) -> bool:
        """True iff removing constraint ``idx`` leaves the vertex set unchanged."""
        reduced = self.without_constraint(idx)
        try:
            return set(reduced.vertices) == set(self.vertices)
        except UnboundedRegionError:
            return False

    def to_json_dict(self, config: AntennaConfig | None = None) -> dict:
        doc = {}
        if config is not None:
            doc["config"] = config.to_json_dict()
        doc["constraints"] = [h.to_json_dict() for h in self.constraints]
        doc["vertices"] = [[_frac_str(v.d1), _frac_str(v.d2)] for v in self.vertices]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DofRegion":
        return cls(tuple(HalfPlane.from_json_dict(h) for h in doc["constraints"]))


def regions_equal(r1: DofRegion, r2: DofRegion) -> bool:
    """True iff the two regions have identical vertex sets (exact)."""
    return set(r1.vertices) == set(r2.vertices)


def build_outer_bound(cfg: AntennaConfig) -> DofRegion:
    """DoF outer bound for isotropic fading without transmitter CSI.

    Constraints, in serialization order: the two single-user bounds
    ``d_i <= min(Mi, Ni)``, then the two weighted multiple-access bounds,
    one per receiver. Both weighted bounds are always included; redundancy
    between them is discovered by the audit, not assumed here.
    """
    M1, M2, N1, N2 = cfg.M1, cfg.M2, cfg.N1, cfg.N2
    single_1 = HalfPlane(1, 0, min(M1, N1))
    single_2 = HalfPlane(0, 1, min(M2, N2))
    mac_rx1 = HalfPlane(1, Fraction(min(N1, N2, M2), min(N2, M2)), min(M1 + M2, N1))
    mac_rx2 = HalfPlane(Fraction(min(N1, N2, M1), min(N1, M1)), 1, min(M1 + M2, N2))
    return DofRegion((single_1, single_2, mac_rx1, mac_rx2))


def build_exact_region_weak_interference(cfg: AntennaConfig) -> DofRegion:
    """Exact DoF region when each receiver has at least as many antennas
    as the interfering transmitter (N1 >= M2 and N2 >= M1).

    Sum bound form: ``d1 + d2 <= min(M1 + M2, N1, N2)``.
    """
    _require_weak_interference(cfg)
    M1, M2, N1, N2 = cfg.M1, cfg.M2, cfg.N1, cfg.N2
    return DofRegion((
        HalfPlane(1, 0, min(M1, N1)),
        HalfPlane(0, 1, min(M2, N2)),
        HalfPlane(1, 1, min(M1 + M2, N1, N2)),
    ))


def build_exact_region_weak_interference_alt(cfg: AntennaConfig) -> DofRegion:
    """Alternative published form of the weak-interference region, with sum
    bound ``d1 + d2 <= min(N1, N2)``. Equivalent to
    :func:`build_exact_region_weak_interference` on its whole domain.
    """
    _require_weak_interference(cfg)
    M1, M2, N1, N2 = cfg.M1, cfg.M2, cfg.N1, cfg.N2
    return DofRegion((
        HalfPlane(1, 0, min(M1, N1)),
        HalfPlane(0, 1, min(M2, N2)),
        HalfPlane(1, 1, min(N1, N2)),
    ))


def _require_weak_interference(cfg: AntennaConfig) -> None:
    if cfg.N1 < cfg.M2:
        raise PreconditionError(
            f"weak-interference region requires N1 >= M2, got N1={cfg.N1} < M2={cfg.M2}"
        )
    if cfg.N2 < cfg.M1:
        raise PreconditionError(
            f"weak-interference region requires N2 >= M1, got N2={cfg.N2} < M1={cfg.M1}"
        )


def build_tdma_region(cfg: AntennaConfig) -> DofRegion:
    """Exact DoF region when both transmitters have at least as many
    antennas as their own receivers (M1 >= N1 and M2 >= N2); achieved by
    time sharing: ``d1/N1 + d2/N2 <= 1``.
    """
    if cfg.M1 < cfg.N1:
        raise PreconditionError(f"TDMA region requires M1 >= N1, got M1={cfg.M1} < N1={cfg.N1}")
    if cfg.M2 < cfg.N2:
        raise PreconditionError(f"TDMA region requires M2 >= N2, got M2={cfg.M2} < N2={cfg.N2}")
    return DofRegion((HalfPlane(Fraction(1, cfg.N1), Fraction(1, cfg.N2), 1),))


def fullcsit_sum_dof(cfg: AntennaConfig) -> Fraction:
    """Sum DoF with full channel knowledge at all terminals:
    ``min(M1 + M2, N1 + N2, max(M1, N2), max(M2, N1))``.
    """
    return Fraction(min(
        cfg.M1 + cfg.M2,
        cfg.N1 + cfg.N2,
        max(cfg.M1, cfg.N2),
        max(cfg.M2, cfg.N1),
    ))


def symmetric_dof_loss(m: int, n: int) -> Fraction:
    """Sum-DoF loss of the symmetric M x N system due to absent transmitter
    CSI: ``min(N, (M - N)+)``. Zero whenever N >= M.
    """
    if m < 1 or n < 1:
        raise PreconditionError(f"antenna counts must be positive, got M={m}, N={n}")
    return Fraction(min(n, max(0, m - n)))


def exactness_case(cfg: AntennaConfig) -> str | None:
    """Name of the proven-exact special case covering ``cfg``, or None.

    Returns ``"weak-interference"`` when N1 >= M2 and N2 >= M1,
    ``"tdma"`` when M1 >= N1 and M2 >= N2, and None otherwise (only the
    outer bound is known; no tightness claim is made).
    """
    if cfg.N1 >= cfg.M2 and cfg.N2 >= cfg.M1:
        return "weak-interference"
    if cfg.M1 >= cfg.N1 and cfg.M2 >= cfg.N2:
        return "tdma"
    return None


def build_exact_region(cfg: AntennaConfig) -> DofRegion | None:
    """The exact region for ``cfg`` when a proven special case applies."""
    case = exactness_case(cfg)
    if case == "weak-interference":
        return build_exact_region_weak_interference(cfg)
    if case == "tdma":
        return build_tdma_region(cfg)
    return None
