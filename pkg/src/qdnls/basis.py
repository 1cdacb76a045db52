"""Occupation basis for bosons on a periodic ring, translation orbits, momentum sectors.

States are plain tuples of site occupations.  The sector (f sites, n bosons) is
enumerated in descending lexicographic order, so the first state is |n 0 ... 0>
and the last |0 ... 0 n>.  Translation orbits use the lexicographically maximal
rotation as representative, which puts the largest occupation first and matches
the usual shorthand for class labels such as |22> or |202>.

The Bloch state attached to an orbit with representative |r> and period d at
crystal momentum k = 2 pi l / f is

    (1/sqrt(d)) * sum_{t=0}^{d-1} exp(-i k t) T^t |r>

and exists exactly when l * d = 0 (mod f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityError, ValidationError

Occ = tuple[int, ...]

DEFAULT_STATE_CAP = 10**7


def check_sector(f, n):
    if not isinstance(f, int) or f < 2:
        raise ValidationError(f"need an integer ring size f >= 2, got {f!r}")
    if not isinstance(n, int) or n < 0:
        raise ValidationError(f"need an integer boson count n >= 0, got {n!r}")


def sector_dimension(f: int, n: int) -> int:
    """Number of occupation vectors of length f summing to n."""
    check_sector(f, n)
    return math.comb(n + f - 1, n)


def enumerate_sector(f: int, n: int, max_states: int | None = None) -> list[Occ]:
    """All occupation vectors of the (f, n) sector in descending lexicographic order."""
    dim = sector_dimension(f, n)
    cap = DEFAULT_STATE_CAP if max_states is None else max_states
    if dim > cap:
        raise CapacityError(f"sector (f={f}, n={n}) has {dim} states, above the cap {cap}")
    return list(_compositions(f, n))


def _compositions(sites, total):
    if sites == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(sites - 1, total - head):
            yield (head,) + tail


def check_state(state):
    if len(state) < 2 or any((not isinstance(c, int)) or c < 0 for c in state):
        raise ValidationError(f"not a valid occupation vector: {state!r}")


def rank(state) -> int:
    """Index of `state` in the descending-lex enumeration of its own sector.

    Computed combinatorially (no table), inverse of `enumerate_sector` indexing.
    """
    check_state(state)
    f = len(state)
    r = 0
    rem = sum(state)
    for j, occ in enumerate(state[:-1]):
        m = f - j - 1
        u = rem - occ - 1
        # states sharing the prefix but with a larger occupation at site j come first
        if u >= 0:
            r += math.comb(u + m, m)
        rem -= occ
    return r


def translate(state, t: int) -> Occ:
    """Cyclic shift: site s of the output holds site (s - t) mod f of the input."""
    s = tuple(state)
    f = len(s)
    t %= f
    if t == 0:
        return s
    return s[-t:] + s[:-t]


def _period(state):
    for t in range(1, len(state) + 1):
        if translate(state, t) == state:
            return t


@dataclass(frozen=True)
class TranslationOrbit:
    """Equivalence class of a state under ring translations."""

    rep: Occ
    period: int

    @property
    def size(self) -> int:
        return self.period

    def members(self) -> list[Occ]:
        """The distinct rotations T^u |rep> for u = 0 .. period-1."""
        return [translate(self.rep, u) for u in range(self.period)]


def orbit_of(state) -> TranslationOrbit:
    """Translation orbit of a state: lex-maximal representative, minimal period."""
    check_state(state)
    s = tuple(state)
    members = [s]
    r = translate(s, 1)
    while r != s:
        members.append(r)
        r = translate(r, 1)
    return TranslationOrbit(rep=max(members), period=len(members))


class SectorOrbits:
    """All translation orbits of one (f, n) sector, ordered by representative.

    `locate` maps every state of the sector to (orbit index, shift u) such that
    state == translate(orbits[index].rep, u).
    """

    def __init__(self, f: int, n: int, max_states: int | None = None):
        states = enumerate_sector(f, n, max_states)
        self.f = f
        self.n = n
        self.dim = len(states)
        orbits: list[TranslationOrbit] = []
        locate: dict[Occ, tuple[int, int]] = {}
        for s in states:
            if s in locate:
                continue
            # descending-lex enumeration meets each orbit at its maximal rotation first
            orb = TranslationOrbit(rep=s, period=_period(s))
            idx = len(orbits)
            orbits.append(orb)
            for u in range(orb.period):
                locate[translate(s, u)] = (idx, u)
        self.orbits = orbits
        self.locate = locate


@dataclass(frozen=True)
class MomentumIndex:
    """Crystal momentum label l on an f-site ring; k = 2 pi l / f."""

    l: int
    f: int

    def __post_init__(self):
        if not isinstance(self.f, int) or self.f < 2:
            raise ValidationError(f"ring size must be an integer >= 2, got {self.f!r}")
        if not isinstance(self.l, int):
            raise ValidationError(f"momentum label must be an integer, got {self.l!r}")

    @property
    def k(self) -> float:
        return 2.0 * math.pi * self.l / self.f

    def compatible(self, orbit: TranslationOrbit) -> bool:
        """An orbit of period d carries momentum l iff l * d = 0 (mod f)."""
        return (self.l * orbit.period) % self.f == 0


def momentum_grid(f: int) -> list[MomentumIndex]:
    """Conventional momentum labels: -sigma .. sigma for odd f = 2 sigma + 1, else 0 .. f-1."""
    check_sector(f, 0)
    if f % 2:
        sigma = (f - 1) // 2
        return [MomentumIndex(l, f) for l in range(-sigma, sigma + 1)]
    return [MomentumIndex(l, f) for l in range(f)]


@dataclass
class MomentumBasis:
    """Bloch-symmetrized orbit basis of one momentum sector."""

    k: MomentumIndex
    sector: SectorOrbits
    orbit_indices: list
    local_index: dict

    @property
    def orbits(self) -> list[TranslationOrbit]:
        return [self.sector.orbits[g] for g in self.orbit_indices]

    @property
    def dim(self) -> int:
        return len(self.orbit_indices)


def momentum_basis(f: int, n: int, k: MomentumIndex, sector: SectorOrbits | None = None) -> MomentumBasis:
    """Orbits of the (f, n) sector compatible with momentum k, in sector order."""
    if sector is None:
        sector = SectorOrbits(f, n)
    if (sector.f, sector.n) != (f, n) or k.f != f:
        raise ValidationError("sector and momentum index do not match the requested (f, n)")
    idx = [g for g, orb in enumerate(sector.orbits) if k.compatible(orb)]
    return MomentumBasis(k=k, sector=sector, orbit_indices=idx,
                         local_index={g: j for j, g in enumerate(idx)})
