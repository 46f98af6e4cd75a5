"""Lattice geometry: boxes in Z^d, site sets, edge boundaries, hole filling.

Sites are integer coordinate tuples and two sites are adjacent when their
l1-distance is one.  "Simply connected" here means: nonempty, connected,
and the complement has no finite component.  Complement connectivity is
decided on the bounding box padded by one cell, whose shell stands in for
the single infinite component; this convention is uniform in the
dimension (the right notion for d >= 3 is a modelling choice, and this is
the one used throughout).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Site = tuple


@dataclass(frozen=True)
class LatticeBox:
    """The centered box [-N, N]^d."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.N < 0:
            raise ValueError(f"radius must be >= 0, got {self.N}")

    @property
    def n_sites(self) -> int:
        return (2 * self.N + 1) ** self.d

    def sites(self) -> list[Site]:
        """All sites, in lexicographic order (the canonical ordering)."""
        rng = range(-self.N, self.N + 1)
        return list(itertools.product(rng, repeat=self.d))

    def __contains__(self, site) -> bool:
        return len(site) == self.d and all(-self.N <= x <= self.N for x in site)


def box_sites(box: LatticeBox) -> list[Site]:
    """Sites of the box in canonical order; exactly (2N+1)^d of them."""
    return box.sites()


def neighbors(site: Site):
    """Yield the 2d nearest neighbors of a site."""
    for i in range(len(site)):
        yield site[:i] + (site[i] - 1,) + site[i + 1:]
        yield site[:i] + (site[i] + 1,) + site[i + 1:]


def edge_boundary(sites, d: int | None = None) -> set:
    """Ordered boundary edges (u, v) with u inside, v outside, u ~ v."""
    sites = _as_frozenset(sites)
    out = set()
    for u in sites:
        for v in neighbors(u):
            if v not in sites:
                out.add((u, v))
    return out


def is_connected(sites, d: int | None = None) -> bool:
    """True when the set is connected under l1-adjacency (empty set counts)."""
    sites = _as_frozenset(sites)
    if not sites:
        return True
    start = next(iter(sites))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in neighbors(u):
            if v in sites and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(sites)


def _complement_holes(sites: frozenset, d: int) -> set:
    # Flood the complement from the padded shell; unreached complement
    # cells inside the padded bounding box are the holes.
    lo = [min(s[i] for s in sites) - 1 for i in range(d)]
    hi = [max(s[i] for s in sites) + 1 for i in range(d)]
    start = tuple(lo)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in neighbors(u):
            if v in seen or v in sites:
                continue
            if any(v[i] < lo[i] or v[i] > hi[i] for i in range(d)):
                continue
            seen.add(v)
            queue.append(v)
    holes = set()
    for cell in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(d)]):
        if cell not in sites and cell not in seen:
            holes.add(cell)
    return holes


def fill(A, d: int | None = None) -> "SiteSet":
    """A together with every finite component of its complement.

    Requires connected input; idempotent, and the result is simply
    connected.
    """
    ss = A if isinstance(A, SiteSet) else SiteSet(A, d)
    if not ss.sites:
        return ss
    if not ss.is_connected:
        raise ValueError("fill requires a connected site set")
    holes = _complement_holes(ss.sites, ss.d)
    if not holes:
        return ss
    return SiteSet(ss.sites | holes, ss.d)


def is_simply_connected(A, d: int | None = None) -> bool:
    """Nonempty, connected, and hole-free (fill leaves it unchanged)."""
    ss = A if isinstance(A, SiteSet) else SiteSet(A, d)
    if not ss.sites:
        return False
    if not ss.is_connected:
        return False
    return not _complement_holes(ss.sites, ss.d)


def symmetric_difference(A, B) -> "SiteSet":
    """(A \\ B) union (B \\ A)."""
    a = A if isinstance(A, SiteSet) else SiteSet(A)
    b = B if isinstance(B, SiteSet) else SiteSet(B)
    if a.d != b.d:
        raise ValueError("site sets live in different dimensions")
    return SiteSet(a.sites ^ b.sites, a.d)


class SiteSet:
    """A finite subset of Z^d with cached boundary and connectivity flags.

    Immutable after construction; the cached boundary and flags always
    equal a fresh recomputation from the sites.
    """

    __slots__ = ("sites", "d", "_boundary", "_connected", "_simply")

    def __init__(self, sites, d: int | None = None):
        sites = frozenset(tuple(int(x) for x in s) for s in sites)
        if d is None:
            if not sites:
                raise ValueError("dimension is required for an empty site set")
            d = len(next(iter(sites)))
        for s in sites:
            if len(s) != d:
                raise ValueError(f"site {s} is not {d}-dimensional")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "_boundary", None)
        object.__setattr__(self, "_connected", None)
        object.__setattr__(self, "_simply", None)

    def __setattr__(self, name, value):
        raise AttributeError("SiteSet is immutable")

    @property
    def boundary(self) -> set:
        if self._boundary is None:
            object.__setattr__(self, "_boundary", frozenset(edge_boundary(self.sites)))
        return self._boundary

    @property
    def boundary_size(self) -> int:
        return len(self.boundary)

    @property
    def is_connected(self) -> bool:
        if self._connected is None:
            object.__setattr__(self, "_connected", is_connected(self.sites))
        return self._connected

    @property
    def is_simply_connected(self) -> bool:
        if self._simply is None:
            simply = bool(self.sites) and self.is_connected and \
                not _complement_holes(self.sites, self.d)
            object.__setattr__(self, "_simply", simply)
        return self._simply

    def __eq__(self, other):
        if not isinstance(other, SiteSet):
            return NotImplemented
        return self.d == other.d and self.sites == other.sites

    def __hash__(self):
        return hash((self.d, self.sites))

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(sorted(self.sites))

    def __contains__(self, site):
        return tuple(site) in self.sites

    def __repr__(self):
        return f"SiteSet(d={self.d}, n={len(self.sites)})"

    def to_text(self) -> str:
        """Canonical serialization: sorted coordinate tuples, one per line."""
        return "\n".join(" ".join(str(x) for x in s) for s in sorted(self.sites))

    @classmethod
    def from_text(cls, text: str, d: int | None = None) -> "SiteSet":
        sites = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            sites.append(tuple(int(x) for x in line.split()))
        return cls(sites, d)


def _as_frozenset(sites) -> frozenset:
    if isinstance(sites, SiteSet):
        return sites.sites
    if isinstance(sites, frozenset):
        return sites
    return frozenset(tuple(s) for s in sites)


class BoxGeometry:
    """Precomputed index structure of a box: bonds, outside-edge counts,
    neighbor index lists.  Shared by the energy, sampling and cut codes."""

    __slots__ = ("box", "sites", "index", "bonds_i", "bonds_j", "n_out",
                 "neighbor_idx", "origin_index")

    def __init__(self, box: LatticeBox):
        self.box = box
        self.sites = tuple(box.sites())
        self.index = {s: i for i, s in enumerate(self.sites)}
        bi, bj = [], []
        n = len(self.sites)
        n_out = np.zeros(n, dtype=np.int64)
        nb_lists = [[] for _ in range(n)]
        for i, u in enumerate(self.sites):
            for v in neighbors(u):
                j = self.index.get(v)
                if j is None:
                    n_out[i] += 1
                else:
                    nb_lists[i].append(j)
                    if i < j:
                        bi.append(i)
                        bj.append(j)
        self.bonds_i = np.asarray(bi, dtype=np.int64)
        self.bonds_j = np.asarray(bj, dtype=np.int64)
        self.n_out = n_out
        self.neighbor_idx = tuple(np.asarray(v, dtype=np.int64) for v in nb_lists)
        self.origin_index = self.index[(0,) * box.d]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds_i)


@lru_cache(maxsize=None)
def box_geometry(d: int, N: int) -> BoxGeometry:
    return BoxGeometry(LatticeBox(d, N))
