"""Combinatorics of the root system BC_q.

The positive roots are ``e_i`` (short, multiplicity ``m1``), ``2 e_i`` (long,
``m2``) and ``e_i +- e_j`` for ``i < j`` (medium, ``m3``).  With ``m2 = 0`` the
system degenerates to ``B_q``.  The Weyl group is the hyperoctahedral group of
signed permutations in every case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

FIELD_DIMENSIONS = (1, 2, 4)
FIELD_NAMES = {1: "R", 2: "C", 4: "H"}

SHORT, LONG, MEDIUM = "short", "long", "medium"


@dataclass(frozen=True)
class RootData:
    """Rank plus a multiplicity triple ``(m1, m2, m3)``.

    This is the minimal input for everything that only depends on the root
    system with multiplicities (roots, ``rho``, the weight function, the
    c-function).  :class:`RankProfile` exposes the same attributes.
    """

    q: int
    m1: float
    m2: float
    m3: float

    @property
    def multiplicities(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)


@dataclass(frozen=True)
class RankProfile:
    """Rank ``q``, field dimension ``d`` and interpolation parameter ``mu``.

    The multiplicities are ``m = (2 mu - d q, d - 1, d)``.  ``mu`` must exceed
    ``gamma - 1`` where ``gamma = d (q - 1/2) + 1``.

    Examples
    --------
    >>> p = RankProfile(q=2, d=2, mu=4)
    >>> p.multiplicities
    (4.0, 1.0, 2.0)
    >>> p.is_geometric, p.p
    (True, 4)
    """

    q: int
    d: int
    mu: float

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"rank q must be a positive integer, got {self.q!r}")
        if self.d not in FIELD_DIMENSIONS:
            raise ValueError(f"field dimension d must be one of {FIELD_DIMENSIONS}, got {self.d!r}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "mu", float(self.mu))
        if not self.mu > self.gamma - 1:
            raise ValueError(
                f"mu = {self.mu} must exceed gamma - 1 = {self.gamma - 1} for q={self.q}, d={self.d}"
            )

    @property
    def gamma(self) -> float:
        return self.d * (self.q - 0.5) + 1

    @property
    def m1(self) -> float:
        return 2 * self.mu - self.d * self.q

    @property
    def m2(self) -> float:
        return float(self.d - 1)

    @property
    def m3(self) -> float:
        return float(self.d)

    @property
    def multiplicities(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)

    @property
    def root_data(self) -> RootData:
        return RootData(self.q, *self.multiplicities)

    @property
    def field(self) -> str:
        return FIELD_NAMES[self.d]

    @property
    def lattice_scale(self) -> int:
        # 2e_i is a root (possibly of multiplicity 0) so lambda_{2e_i} in Z^+ forces even entries.
        return 2

    @property
    def p(self) -> int | None:
        """Grassmannian dimension ``p = 2 mu / d`` when it is an integer, else None."""
        ratio = 2 * self.mu / self.d
        if abs(ratio - round(ratio)) < 1e-12:
            return int(round(ratio))
        return None

    @property
    def is_geometric(self) -> bool:
        return self.p is not None and self.p >= 2 * self.q

    @property
    def rho(self) -> np.ndarray:
        return rho(self)


@dataclass(frozen=True)
class Root:
    vector: tuple[int, ...]
    multiplicity_class: str

    def __post_init__(self):
        v = np.asarray(self.vector)
        nz = np.flatnonzero(v)
        expected = {SHORT: 1, LONG: 4, MEDIUM: 2}[self.multiplicity_class]
        shape_ok = (
            (self.multiplicity_class == SHORT and len(nz) == 1 and abs(v[nz[0]]) == 1)
            or (self.multiplicity_class == LONG and len(nz) == 1 and abs(v[nz[0]]) == 2)
            or (self.multiplicity_class == MEDIUM and len(nz) == 2 and np.all(np.abs(v[nz]) == 1))
        )
        if not shape_ok or int(v @ v) != expected:
            raise ValueError(f"{self.vector} is not a {self.multiplicity_class} root of BC_q")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)

    @property
    def squared_length(self) -> int:
        return int(sum(c * c for c in self.vector))


@dataclass(frozen=True, order=True)
class DominantWeight:
    """A dominant weight ``lambda_1 >= ... >= lambda_q >= 0``.

    Entries must be multiples of ``scale``.  The default ``scale=2`` is the
    lattice used for every field (see :attr:`RankProfile.lattice_scale`);
    ``scale=1`` is accepted for pure combinatorics on all partitions.
    """

    entries: tuple[int, ...]
    scale: int = 2

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(int(e) != e for e in self.entries):
            raise ValueError(f"weight entries must be integers: {self.entries}")
        object.__setattr__(self, "entries", entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"weight entries must be nonnegative: {entries}")
        if any(a < b for a, b in zip(entries, entries[1:])):
            raise ValueError(f"weight entries must be nonincreasing: {entries}")
        if self.scale not in (1, 2):
            raise ValueError(f"scale must be 1 or 2, got {self.scale}")
        if any(e % self.scale for e in entries):
            raise ValueError(f"weight entries must be divisible by {self.scale}: {entries}")

    @classmethod
    def coerce(cls, lam, scale: int = 2) -> "DominantWeight":
        if isinstance(lam, DominantWeight):
            return lam
        if np.isscalar(lam):
            lam = (lam,)
        return cls(tuple(lam), scale)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def q(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(e * e for e in self.entries))

    @property
    def l1(self) -> int:
        return sum(self.entries)

    @property
    def mixed_parity(self) -> bool:
        """True when entries differ in parity, i.e. some ``lambda_{e_i +- e_j}`` is not integral."""
        return len({e % 2 for e in self.entries}) > 1

    def sort_key(self):
        return (self.l1, self.entries)

    def __str__(self):
        return ",".join(str(e) for e in self.entries)


@dataclass(frozen=True)
class WeylElement:
    """Signed permutation: ``(w v)_i = signs[i] * v[perm[i]]``."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")
        if len(self.signs) != len(self.perm) or any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"bad sign vector: {self.signs}")

    def act(self, v) -> np.ndarray:
        v = np.asarray(v)
        return np.asarray(self.signs) * v[..., list(self.perm)]

    def matrix(self) -> np.ndarray:
        q = len(self.perm)
        out = np.zeros((q, q))
        out[np.arange(q), list(self.perm)] = self.signs
        return out


def weyl_group(q: int) -> Iterator[WeylElement]:
    """All ``2^q q!`` elements of the hyperoctahedral group."""
    for perm in itertools.permutations(range(q)):
        for signs in itertools.product((1, -1), repeat=q):
            yield WeylElement(perm, signs)


def weyl_group_order(q: int) -> int:
    return 2**q * math.factorial(q)


@lru_cache(maxsize=None)
def _root_vectors(q: int) -> tuple[tuple[tuple[int, ...], str], ...]:
    out = []
    for i in range(q):
        e = [0] * q
        e[i] = 1
        out.append((tuple(e), SHORT))
    for i in range(q):
        e = [0] * q
        e[i] = 2
        out.append((tuple(e), LONG))
    for i in range(q):
        for j in range(i + 1, q):
            for sign in (-1, 1):
                e = [0] * q
                e[i], e[j] = 1, sign
                out.append((tuple(e), MEDIUM))
    return tuple(out)


def positive_roots(profile) -> list[tuple[Root, float]]:
    """Positive roots with multiplicities, short roots first.

    ``profile`` is anything with ``q`` and ``multiplicities`` attributes.
    """
    m1, m2, m3 = profile.multiplicities
    mult = {SHORT: m1, LONG: m2, MEDIUM: m3}
    return [(Root(v, cls), float(mult[cls])) for v, cls in _root_vectors(profile.q)]


def rho(profile) -> np.ndarray:
    """Half sum of positive roots weighted by multiplicity.

    Closed form: ``rho_i = m1/2 + m2 + m3 (q - i)`` (1-based ``i``).
    """
    out = np.zeros(profile.q)
    for root, m in positive_roots(profile):
        out += m * root.array
    return out / 2


def lambda_alpha(lam, alpha) -> float:
    """``<lam, alpha> / <alpha, alpha>``."""
    a = alpha.array if isinstance(alpha, Root) else np.asarray(alpha, dtype=float)
    lam = lam.array if isinstance(lam, DominantWeight) else np.asarray(lam, dtype=float)
    return float(lam @ a / (a @ a))


def dominance_leq(mu_w, lam) -> bool:
    """``mu_w <= lam`` in the dominance order, i.e. ``lam - mu_w`` in ``Z^+ . Sigma^+``.

    The positive cone of BC_q over ``Z^+`` is spanned by the simple roots
    ``e_1 - e_2, ..., e_{q-1} - e_q, e_q``; a vector lies in it iff it is
    integral with nonnegative prefix sums.  Arguments may be arbitrary vectors,
    not only dominant weights.
    """
    a = np.asarray(tuple(mu_w), dtype=float)
    b = np.asarray(tuple(lam), dtype=float)
    if a.shape != b.shape:
        raise ValueError("weights of different rank")
    diff = b - a
    if not np.all(diff == np.round(diff)):
        return False
    return bool(np.all(np.cumsum(diff) >= 0))


def dominant_weights(q: int, max_entry: float, scale: int = 2) -> list[DominantWeight]:
    """All dominant weights with entries ``<= max_entry``, graded-lex sorted."""
    top = int(math.floor(max_entry / scale)) * scale
    values = range(top, -1, -scale)
    out = [DominantWeight(c, scale) for c in itertools.combinations_with_replacement(values, q)]
    return sorted(out, key=DominantWeight.sort_key)


def weights_up_to_l1(q: int, max_l1: int, scale: int = 2) -> list[DominantWeight]:
    """All dominant weights with ``|lambda|_1 <= max_l1``, graded-lex sorted."""
    return [w for w in dominant_weights(q, max_l1, scale) if w.l1 <= max_l1]


def lower_set(lam, scale: int | None = None) -> list[DominantWeight]:
    """Dominant weights ``mu <= lam``, graded-lex sorted (``lam`` is last).

    Every such ``mu`` has ``|mu| <= |lam|``, which bounds the search box.
    """
    lam = DominantWeight.coerce(lam, scale or 2)
    scale = lam.scale if scale is None else scale
    candidates = dominant_weights(lam.q, lam.norm, scale)
    return [mu for mu in candidates if dominance_leq(mu, lam)]


def weyl_orbit(lam) -> set[tuple[int, ...]]:
    """The orbit ``W . lam`` as a set of integer tuples."""
    entries = tuple(lam)
    out = set()
    for perm in set(itertools.permutations(entries)):
        nonzero = [i for i, e in enumerate(perm) if e != 0]
        for signs in itertools.product((1, -1), repeat=len(nonzero)):
            v = list(perm)
            for i, s in zip(nonzero, signs):
                v[i] = s * v[i]
            out.add(tuple(v))
    return out


def orbit_array(lam) -> np.ndarray:
    """Orbit as a sorted ``(|W.lam|, q)`` float array (deterministic order)."""
    return _orbit_array(tuple(lam))


@lru_cache(maxsize=4096)
def _orbit_array(entries: tuple[int, ...]) -> np.ndarray:
    arr = np.array(sorted(weyl_orbit(entries)), dtype=float)
    arr.setflags(write=False)
    return arr


def sort_desc(v: Sequence[float]) -> np.ndarray:
    return -np.sort(-np.asarray(v, dtype=float), axis=-1)


def as_weights(lams: Iterable, scale: int = 2) -> list[DominantWeight]:
    return [DominantWeight.coerce(lam, scale) for lam in lams]
