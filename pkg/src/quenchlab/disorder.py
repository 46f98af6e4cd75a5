"""Quenched Gaussian fields and the flip / rotation maps acting on them.

Fields are standard normal per coordinate (Ising: one value per site,
Potts: one value per state and site); the strength eps multiplies the
field inside the Hamiltonian, never here.  Sampling uses the
counter-based Philox generator keyed by the seed (plus an optional
stream index), drawn in one vectorized call over the canonical site
order, so values never depend on iteration order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .lattice import LatticeBox, SiteSet, box_geometry
from .model import ISING, POTTS, ModelParams, SpinConfig, rotate_state, inverse_rotate_state


@dataclass(frozen=True)
class DisorderField:
    """A frozen field sample on a box, with seed provenance."""

    box: LatticeBox
    kind: str
    values: np.ndarray
    seed: int | None = None
    q: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        n = self.box.n_sites
        if self.kind == ISING:
            if vals.shape != (n,):
                raise ValueError(f"Ising field must have shape ({n},), got {vals.shape}")
        elif self.kind == POTTS:
            if self.q is None or vals.shape != (self.q, n):
                raise ValueError(
                    f"Potts field must have shape (q, {n}) with q={self.q}, got {vals.shape}")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    def value_at(self, site, state: int | None = None) -> float:
        geo = box_geometry(self.box.d, self.box.N)
        i = geo.index[tuple(site)]
        if self.kind == ISING:
            return float(self.values[i])
        if state is None:
            raise ValueError("Potts field lookup requires a state")
        return float(self.values[state - 1, i])

    def site_indices(self, A: SiteSet) -> np.ndarray:
        geo = box_geometry(self.box.d, self.box.N)
        try:
            return np.asarray(sorted(geo.index[s] for s in A.sites), dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"site {exc.args[0]} lies outside the box") from None


def field_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream)."""
    key = np.array([np.uint64(seed & (2**64 - 1)), np.uint64(stream & (2**64 - 1))])
    return np.random.Generator(np.random.Philox(key=key))


def sample_field(params: ModelParams, seed: int, stream: int = 0) -> DisorderField:
    """Draw the i.i.d. standard-normal field, deterministically in (params, seed)."""
    rng = field_rng(seed, stream)
    n = params.box.n_sites
    if params.kind == ISING:
        values = rng.standard_normal(n)
    else:
        values = rng.standard_normal((params.q, n))
    return DisorderField(params.box, params.kind, values, seed=seed, q=params.q)


def flip(h: DisorderField, A: SiteSet) -> DisorderField:
    """Negate the field on A; an involution, measure-preserving for fixed A."""
    if h.kind != ISING:
        raise ValueError("flip applies to Ising fields; use rotate_field for Potts")
    idx = h.site_indices(A)
    values = h.values.copy()
    values[idx] = -values[idx]
    return replace(h, values=values)


def rotate_field(h: DisorderField, A: SiteSet, j: int) -> DisorderField:
    """Permute the per-site state values on A by theta^{-j}; identity off A."""
    if h.kind != POTTS:
        raise ValueError("rotate_field applies to Potts fields; use flip for Ising")
    if not 1 <= j <= h.q:
        raise ValueError(f"rotation power must lie in 1..{h.q}, got {j}")
    idx = h.site_indices(A)
    values = h.values.copy()
    # new value at state k is the old value at theta^{-j}(k)
    src = np.array([inverse_rotate_state(k, j, h.q) - 1 for k in range(1, h.q + 1)])
    values[:, idx] = h.values[src][:, idx]
    return replace(h, values=values)


def flip_spins(sigma: SpinConfig, A: SiteSet) -> SpinConfig:
    """Negate Ising spins on A."""
    if sigma.kind != ISING:
        raise ValueError("flip_spins applies to Ising configurations")
    geo = box_geometry(sigma.box.d, sigma.box.N)
    idx = np.asarray(sorted(geo.index[s] for s in A.sites), dtype=np.int64)
    values = sigma.values.copy()
    values[idx] = -values[idx]
    return SpinConfig(sigma.box, sigma.kind, values, sigma.q)


def rotate_spins(sigma: SpinConfig, A: SiteSet, j: int) -> SpinConfig:
    """Apply theta^j to the spins on A."""
    if sigma.kind != POTTS:
        raise ValueError("rotate_spins applies to Potts configurations")
    geo = box_geometry(sigma.box.d, sigma.box.N)
    idx = np.asarray(sorted(geo.index[s] for s in A.sites), dtype=np.int64)
    values = sigma.values.copy()
    table = np.array([rotate_state(k, j, sigma.q) for k in range(1, sigma.q + 1)],
                     dtype=np.int8)
    values[idx] = table[values[idx] - 1]
    return SpinConfig(sigma.box, sigma.kind, values, sigma.q)


def write_field_csv(h: DisorderField, fh) -> None:
    """Field dump: comment line with (d, N, q, seed), then one row per value."""
    close = False
    if isinstance(fh, str):
        fh = open(fh, "w")
        close = True
    try:
        q = h.q if h.q is not None else 0
        fh.write(f"# d={h.box.d} N={h.box.N} q={q} seed={h.seed} kind={h.kind}\n")
        coords = [f"x{i}" for i in range(h.box.d)]
        geo = box_geometry(h.box.d, h.box.N)
        if h.kind == ISING:
            fh.write(",".join(coords + ["value"]) + "\n")
            for i, site in enumerate(geo.sites):
                fh.write(",".join(str(x) for x in site) + f",{h.values[i]!r}\n")
        else:
            fh.write(",".join(["state"] + coords + ["value"]) + "\n")
            for k in range(1, h.q + 1):
                for i, site in enumerate(geo.sites):
                    row = [str(k)] + [str(x) for x in site] + [repr(h.values[k - 1, i])]
                    fh.write(",".join(row) + "\n")
    finally:
        if close:
            fh.close()


def read_field_csv(fh) -> DisorderField:
    close = False
    if isinstance(fh, str):
        fh = open(fh)
        close = True
    try:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("field file must start with a metadata comment line")
        meta = dict(part.split("=") for part in header[1:].split())
        d, N, q = int(meta["d"]), int(meta["N"]), int(meta["q"])
        seed = None if meta["seed"] == "None" else int(meta["seed"])
        kind = meta["kind"]
        box = LatticeBox(d, N)
        geo = box_geometry(d, N)
        fh.readline()  # column header
        if kind == ISING:
            values = np.empty(box.n_sites)
            for line in fh:
                parts = line.strip().split(",")
                site = tuple(int(x) for x in parts[:d])
                values[geo.index[site]] = float(parts[d])
            return DisorderField(box, kind, values, seed=seed)
        values = np.empty((q, box.n_sites))
        for line in fh:
            parts = line.strip().split(",")
            k = int(parts[0])
            site = tuple(int(x) for x in parts[1:1 + d])
            values[k - 1, geo.index[site]] = float(parts[1 + d])
        return DisorderField(box, kind, values, seed=seed, q=q)
    finally:
        if close:
            fh.close()


def restrict_field(h: DisorderField, N: int) -> DisorderField:
    """The restriction of a field to the smaller box [-N, N]^d.

    Used to couple experiments across box sizes: the value at a site is
    identical to its value in the large-box sample.
    """
    if N > h.box.N:
        raise ValueError("restriction target must not exceed the source box")
    if N == h.box.N:
        return h
    small = LatticeBox(h.box.d, N)
    big_geo = box_geometry(h.box.d, h.box.N)
    idx = np.asarray([big_geo.index[s] for s in small.sites()], dtype=np.int64)
    if h.kind == ISING:
        return DisorderField(small, h.kind, h.values[idx], seed=h.seed)
    return DisorderField(small, h.kind, h.values[:, idx], seed=h.seed, q=h.q)
