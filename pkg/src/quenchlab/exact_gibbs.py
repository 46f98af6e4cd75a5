"""Exact finite-volume Gibbs computations.

Partition functions, free energies, marginals, boundary influence, the
flip / rotation free-energy differences, and the joint field-spin density
ratio, all by full enumeration over spin configurations.  Everything runs
in the log domain with log-sum-exp; a 2-D transfer matrix extends exact
partition functions past the enumeration budget on strips.

Configurations are indexed 0 .. states^n - 1; site i of configuration c
carries bit (c >> i) & 1 (Ising, bit 1 meaning spin +1) or digit
(c // q^i) % q (Potts, digit s meaning state s+1).
"""

from __future__ import annotations

import math
from dataclasses import replace
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import BudgetError
from .lattice import LatticeBox, SiteSet, box_geometry, fill
from .model import ISING, POTTS, ModelParams, SpinConfig
from .disorder import DisorderField, flip, flip_spins, rotate_field, rotate_spins

DEFAULT_BUDGET = 2 ** 28
MATERIALIZE_LIMIT = 2 ** 20
CHUNK = 2 ** 16

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _require_positive_temperature(p: ModelParams):
    if p.T <= 0:
        raise ValueError("Gibbs computations need T > 0; use the ground-state "
                         "solver for T = 0")


def _check_budget(p: ModelParams, budget: int):
    n = p.box.n_sites
    if p.n_states ** n > budget:
        raise BudgetError(
            f"{p.n_states}^{n} configurations exceed the enumeration budget {budget}")


def hamiltonian(sigma: SpinConfig, h: DisorderField, p: ModelParams) -> float:
    """Energy of one configuration, straight from the defining sum."""
    if sigma.kind != p.kind or h.kind != p.kind:
        raise ValueError("configuration, field and parameters must share a kind")
    geo = box_geometry(p.d, p.N)
    s = sigma.values
    if p.kind == ISING:
        bonds = float(np.sum(s[geo.bonds_i] * s[geo.bonds_j], dtype=np.float64))
        boundary = p.bc * float(np.sum(geo.n_out * s, dtype=np.float64))
        field = p.eps * float(np.dot(h.values, s))
    else:
        bonds = float(np.sum(s[geo.bonds_i] == s[geo.bonds_j]))
        boundary = float(np.sum(geo.n_out * (s == p.bc)))
        field = p.eps * float(np.sum(h.values[s - 1, np.arange(len(s))]))
    return -(bonds + boundary + field)


# ---------------------------------------------------------------------------
# streaming enumeration (arbitrary boxes within budget)

def _spin_chunks(p: ModelParams, chunk: int):
    """Yield (start, spins) blocks covering all configurations.

    Ising blocks hold spins +-1; Potts blocks hold 0-based digits.
    """
    n = p.box.n_sites
    total = p.n_states ** n
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        idx = np.arange(start, stop, dtype=np.int64)
        if p.kind == ISING:
            bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
            yield start, (2 * bits - 1).astype(np.int8)
        else:
            powers = p.q ** np.arange(n, dtype=np.int64)
            yield start, ((idx[:, None] // powers) % p.q).astype(np.int8)


def _chunk_energies(spins: np.ndarray, h: DisorderField, p: ModelParams) -> np.ndarray:
    geo = box_geometry(p.d, p.N)
    if p.kind == ISING:
        bonds = np.sum(spins[:, geo.bonds_i] * spins[:, geo.bonds_j],
                       axis=1, dtype=np.float64)
        boundary = p.bc * (spins @ geo.n_out.astype(np.float64))
        field = p.eps * (spins @ h.values)
    else:
        bonds = np.sum(spins[:, geo.bonds_i] == spins[:, geo.bonds_j],
                       axis=1, dtype=np.float64)
        boundary = (spins == (p.bc - 1)) @ geo.n_out.astype(np.float64)
        cols = np.arange(spins.shape[1])
        field = p.eps * np.sum(h.values[spins, cols], axis=1)
    return -(bonds + boundary + field)


def partition_function(h: DisorderField, p: ModelParams,
                       budget: int = DEFAULT_BUDGET, chunk: int = CHUNK) -> float:
    """log Z by stable log-sum-exp over all configurations."""
    _require_positive_temperature(p)
    _check_budget(p, budget)
    log_z = -np.inf
    for _, spins in _spin_chunks(p, chunk):
        logw = -_chunk_energies(spins, h, p) / p.T
        log_z = np.logaddexp(log_z, logsumexp(logw))
    return float(log_z)


def free_energy(h: DisorderField, p: ModelParams,
                budget: int = DEFAULT_BUDGET, chunk: int = CHUNK) -> float:
    """-T log Z."""
    return -p.T * partition_function(h, p, budget=budget, chunk=chunk)


def marginal(h: DisorderField, p: ModelParams, v,
             budget: int = DEFAULT_BUDGET, chunk: int = CHUNK) -> dict:
    """mu(sigma_v = s) for every spin value s at site v."""
    _require_positive_temperature(p)
    _check_budget(p, budget)
    geo = box_geometry(p.d, p.N)
    i = geo.index[tuple(v)]
    states = (-1, 1) if p.kind == ISING else tuple(range(1, p.q + 1))
    raw = {s: -np.inf for s in states}
    for _, spins in _spin_chunks(p, chunk):
        logw = -_chunk_energies(spins, h, p) / p.T
        col = spins[:, i] if p.kind == ISING else spins[:, i] + 1
        for s in states:
            mask = col == s
            if np.any(mask):
                raw[s] = np.logaddexp(raw[s], logsumexp(logw[mask]))
    log_z = logsumexp(np.array(list(raw.values())))
    return {s: float(np.exp(raw[s] - log_z)) for s in states}


def magnetization(h: DisorderField, p: ModelParams, v,
                  budget: int = DEFAULT_BUDGET) -> float:
    """<sigma_v> for the Ising measure."""
    if p.kind != ISING:
        raise ValueError("magnetization is an Ising observable")
    m = marginal(h, p, v, budget=budget)
    return m[1] - m[-1]


def boundary_influence(h: DisorderField, p: ModelParams,
                       budget: int = DEFAULT_BUDGET) -> float:
    """mu^+(sigma_o = 1) - mu^-(sigma_o = 1) on the same field."""
    if p.kind != ISING:
        raise ValueError("boundary influence is defined for the Ising model")
    origin = (0,) * p.d
    plus = marginal(h, p.with_(bc=1), origin, budget=budget)[1]
    minus = marginal(h, p.with_(bc=-1), origin, budget=budget)[1]
    return plus - minus


def delta_A(h: DisorderField, p: ModelParams, A: SiteSet,
            budget: int = DEFAULT_BUDGET) -> float:
    """Free-energy difference -T log Z(h) + T log Z(h^A) under the plus law."""
    if p.kind != ISING:
        raise ValueError("delta_A applies to the Ising model; see delta_A_j")
    if len(A) == 0:
        return 0.0
    pp = p.with_(bc=1)
    return p.T * (partition_function(flip(h, A), pp, budget=budget)
                  - partition_function(h, pp, budget=budget))


def delta_A_j(h: DisorderField, p: ModelParams, A: SiteSet, j: int,
              budget: int = DEFAULT_BUDGET) -> float:
    """Potts free-energy difference -T log Z(h) + T log Z(h^{A,j}), bc state 1."""
    if p.kind != POTTS:
        raise ValueError("delta_A_j applies to the Potts model")
    if len(A) == 0:
        return 0.0
    pk = p.with_(bc=1)
    return p.T * (partition_function(rotate_field(h, A, j), pk, budget=budget)
                  - partition_function(h, pk, budget=budget))


# ---------------------------------------------------------------------------
# sign component and joint density

def sign_component(sigma: SpinConfig) -> SiteSet:
    """The hole-filled disagreeing cluster at the origin.

    Ising: empty unless sigma_o = -1, else the fill of the minus cluster
    of the origin.  Potts: empty unless sigma_o = 2, else the fill of the
    spin-2 cluster of the origin.
    """
    d = sigma.box.d
    geo = box_geometry(d, sigma.box.N)
    origin = (0,) * d
    target = -1 if sigma.kind == ISING else 2
    if sigma.spin_at(origin) != target:
        return SiteSet((), d)
    cluster = {origin}
    stack = [geo.origin_index]
    seen = {geo.origin_index}
    while stack:
        i = stack.pop()
        for j in geo.neighbor_idx[i]:
            j = int(j)
            if j not in seen and sigma.values[j] == target:
                seen.add(j)
                stack.append(j)
                cluster.add(geo.sites[j])
    return fill(SiteSet(cluster, d))


def _log_gauss_density(h: DisorderField) -> float:
    return float(np.sum(-0.5 * h.values ** 2 - LOG_SQRT_2PI))


def joint_density_ratio(h: DisorderField, sigma: SpinConfig, A: SiteSet,
                        p: ModelParams, budget: int = DEFAULT_BUDGET) -> tuple[float, float]:
    """Both sides of the flip identity for the joint field-spin density.

    Left: nu^+(h, sigma) / nu^+(h^A, sigma^A) assembled from the explicit
    joint density (Gaussian factors, Hamiltonians, partition functions).
    Right: exp(-2 |dA| / T) * Z^+(h^A) / Z^+(h).  The two evaluations are
    independent up to the shared partition functions; equality holds only
    on the fiber A = sign_component(sigma), which is validated.
    """
    if p.kind != ISING:
        raise ValueError("the flip density identity is an Ising statement")
    _require_positive_temperature(p)
    if sign_component(sigma) != A:
        raise ValueError("A must equal the sign component of sigma")
    pp = p.with_(bc=1)
    h_flip = flip(h, A)
    s_flip = flip_spins(sigma, A)
    log_z = partition_function(h, pp, budget=budget)
    log_z_flip = partition_function(h_flip, pp, budget=budget)
    log_nu = _log_gauss_density(h) - hamiltonian(sigma, h, pp) / p.T - log_z
    log_nu_flip = (_log_gauss_density(h_flip)
                   - hamiltonian(s_flip, h_flip, pp) / p.T - log_z_flip)
    lhs = math.exp(log_nu - log_nu_flip)
    rhs = math.exp(-2.0 * A.boundary_size / p.T + log_z_flip - log_z)
    return lhs, rhs


def potts_joint_density_ratio(h: DisorderField, sigma: SpinConfig, A: SiteSet,
                              p: ModelParams, budget: int = DEFAULT_BUDGET
                              ) -> tuple[float, float]:
    """Left side and bound of the rotation analogue of the flip identity.

    Left: nu^1(h, sigma) / sum_{j=1}^{q-1} nu^1(h^{A,j}, sigma^{A,j}).
    Bound: exp(-|dA| / ((q-1) T)) * max_j Z^1(h^{A,j}) / Z^1(h).
    """
    if p.kind != POTTS:
        raise ValueError("the rotation density bound is a Potts statement")
    _require_positive_temperature(p)
    if sign_component(sigma) != A:
        raise ValueError("A must equal the spin-2 component of sigma")
    pk = p.with_(bc=1)
    log_z = partition_function(h, pk, budget=budget)
    log_nu = _log_gauss_density(h) - hamiltonian(sigma, h, pk) / p.T - log_z
    log_nu_rot = []
    log_z_rot = []
    for j in range(1, p.q):
        hj = rotate_field(h, A, j)
        sj = rotate_spins(sigma, A, j)
        lzj = partition_function(hj, pk, budget=budget)
        log_z_rot.append(lzj)
        log_nu_rot.append(_log_gauss_density(hj) - hamiltonian(sj, hj, pk) / p.T - lzj)
    denom = logsumexp(np.array(log_nu_rot))
    lhs = math.exp(log_nu - denom)
    bound = math.exp(-A.boundary_size / ((p.q - 1) * p.T)
                     + max(log_z_rot) - log_z)
    return lhs, bound


# ---------------------------------------------------------------------------
# materialized model for small boxes (vectorized over disorder replicas)

class EnumeratedModel:
    """Configuration table for a small box, reused across fields.

    Caches the bond and boundary parts of the energy for every
    configuration so that partition functions over many disorder replicas
    reduce to one matrix product per replica block.
    """

    def __init__(self, d: int, N: int, kind: str, q: int | None = None):
        self.d, self.N, self.kind, self.q = d, N, kind, q
        self.geo = box_geometry(d, N)
        n = self.geo.n_sites
        states = 2 if kind == ISING else q
        if states ** n > MATERIALIZE_LIMIT:
            raise BudgetError(
                f"{states}^{n} configurations exceed the materialization limit")
        self.n_configs = states ** n
        idx = np.arange(self.n_configs, dtype=np.int64)
        if kind == ISING:
            bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
            self.spins = (2 * bits - 1).astype(np.int8)
            self.bond_sum = np.sum(
                self.spins[:, self.geo.bonds_i] * self.spins[:, self.geo.bonds_j],
                axis=1, dtype=np.int64)
            self.out_sum = self.spins @ self.geo.n_out
        else:
            powers = q ** np.arange(n, dtype=np.int64)
            self.digits = ((idx[:, None] // powers) % q).astype(np.int8)
            self.bond_sum = np.sum(
                self.digits[:, self.geo.bonds_i] == self.digits[:, self.geo.bonds_j],
                axis=1, dtype=np.int64)
            self.out_match = np.stack([
                (self.digits == k) @ self.geo.n_out for k in range(q)])

    def energies(self, h: DisorderField, p: ModelParams) -> np.ndarray:
        if p.kind == ISING:
            field = self.spins @ h.values
            fixed = self.bond_sum + p.bc * self.out_sum
        else:
            cols = np.arange(self.geo.n_sites)
            field = np.sum(h.values[self.digits, cols], axis=1)
            fixed = self.bond_sum + self.out_match[p.bc - 1]
        return -(fixed.astype(np.float64) + p.eps * field)

    def log_weights(self, h: DisorderField, p: ModelParams) -> np.ndarray:
        _require_positive_temperature(p)
        return -self.energies(h, p) / p.T

    def log_z(self, h: DisorderField, p: ModelParams) -> float:
        return float(logsumexp(self.log_weights(h, p)))

    def spin_column(self, site) -> np.ndarray:
        """Spin values at one site across all configurations (1-based for Potts)."""
        i = self.geo.index[tuple(site)]
        if self.kind == ISING:
            return self.spins[:, i]
        return self.digits[:, i] + 1

    def config_of(self, sigma: SpinConfig) -> int:
        if self.kind == ISING:
            bits = (sigma.values > 0).astype(np.int64)
        else:
            bits = (sigma.values - 1).astype(np.int64)
        states = 2 if self.kind == ISING else self.q
        powers = states ** np.arange(self.geo.n_sites, dtype=np.int64)
        return int(np.dot(bits, powers))

    def spin_config(self, c: int, box=None) -> SpinConfig:
        box = box or LatticeBox(self.d, self.N)
        if self.kind == ISING:
            return SpinConfig(box, ISING, self.spins[c])
        return SpinConfig(box, POTTS, self.digits[c] + 1, self.q)

    def flip_permutation(self, A: SiteSet) -> np.ndarray:
        """Configuration index map c -> index of sigma^A."""
        if self.kind != ISING:
            raise ValueError("flip permutation is for the Ising table")
        mask = 0
        for s in A.sites:
            mask |= 1 << self.geo.index[s]
        return np.arange(self.n_configs, dtype=np.int64) ^ mask

    def rotate_permutation(self, A: SiteSet, j: int) -> np.ndarray:
        """Configuration index map c -> index of sigma^{A,j}."""
        if self.kind != POTTS:
            raise ValueError("rotate permutation is for the Potts table")
        q = self.q
        idx = np.arange(self.n_configs, dtype=np.int64)
        out = idx.copy()
        for s in A.sites:
            i = self.geo.index[s]
            power = q ** i
            digit = (idx // power) % q
            new_digit = (digit - j) % q
            out += (new_digit - digit) * power
        return out

    def free_coupling(self, free) -> np.ndarray:
        """Configuration-by-coordinate coupling matrix for batch partition sums.

        Ising: `free` is a site-index array and row c holds the spins there.
        Potts: `free` is a (state0, site) index pair array and row c holds
        the indicators sigma_site = state.
        """
        if self.kind == ISING:
            return self.spins[:, np.asarray(free, dtype=np.int64)].astype(np.float64)
        states = np.asarray([f[0] for f in free], dtype=np.int64)
        sites = np.asarray([f[1] for f in free], dtype=np.int64)
        return (self.digits[:, sites] == states).astype(np.float64)

    def batch_log_z(self, p: ModelParams, base: DisorderField, free,
                    values: np.ndarray, block: int = 4096) -> np.ndarray:
        """log Z for many fields equal to `base` off the free coordinates.

        `values` has one row per replica, one column per free coordinate;
        the corresponding base entries are ignored.
        """
        _require_positive_temperature(p)
        masked = self._mask_base(base, free)
        e_frozen = self.energies(masked, p)
        coupling = self.free_coupling(free)
        values = np.asarray(values, dtype=np.float64)
        out = np.empty(values.shape[0])
        for start in range(0, values.shape[0], block):
            stop = min(start + block, values.shape[0])
            energies = e_frozen[None, :] - p.eps * (values[start:stop] @ coupling.T)
            out[start:stop] = logsumexp(-energies / p.T, axis=1)
        return out

    def _mask_base(self, base: DisorderField, free) -> DisorderField:
        values = base.values.copy()
        if self.kind == ISING:
            values[np.asarray(free, dtype=np.int64)] = 0.0
        else:
            for k0, i in free:
                values[k0, i] = 0.0
        return replace(base, values=values)


@lru_cache(maxsize=8)
def enumerated_model(d: int, N: int, kind: str, q: int | None = None) -> EnumeratedModel:
    return EnumeratedModel(d, N, kind, q)


# ---------------------------------------------------------------------------
# 2-D transfer matrix on strips

def strip_log_partition(h: DisorderField, p: ModelParams, width: int | None = None,
                        max_states: int = 2 ** 11, split_at: int | None = None) -> float:
    """log Z of the 2-D box by a column-to-column transfer matrix.

    The column state space has 2^W configurations for width W = 2N+1;
    message passing runs in the log domain so small temperatures cannot
    overflow.  `split_at` evaluates the product as a left and a right
    message joined at that column boundary (the result must not depend on
    the split point).
    """
    if p.kind != ISING or p.d != 2:
        raise ValueError("the transfer matrix covers the d=2 Ising model only")
    _require_positive_temperature(p)
    W = 2 * p.N + 1
    if width is not None and width != W:
        raise ValueError(f"strip width must be 2N+1 = {W}, got {width}")
    if 2 ** W > max_states:
        raise BudgetError(f"2^{W} column states exceed the budget {max_states}")
    geo = box_geometry(2, p.N)
    columns = np.arange(2 ** W, dtype=np.int64)
    rows = ((columns[:, None] >> np.arange(W, dtype=np.int64)) & 1) * 2 - 1
    rows = rows.astype(np.float64)
    log_k = (rows @ rows.T) / p.T

    h_grid = np.empty((W, W))
    for i, site in enumerate(geo.sites):
        x, y = site
        h_grid[x + p.N, y + p.N] = h.values[i]

    def column_log_weight(xi: int) -> np.ndarray:
        vert = np.sum(rows[:, :-1] * rows[:, 1:], axis=1)
        vert_out = p.bc * (rows[:, 0] + rows[:, -1])
        side = p.bc * rows.sum(axis=1) if xi in (0, W - 1) else 0.0
        field = p.eps * (rows @ h_grid[xi])
        return (vert + vert_out + side + field) / p.T

    def forward(x_range) -> np.ndarray:
        msg = None
        for xi in x_range:
            self_w = column_log_weight(xi)
            if msg is None:
                msg = self_w
            else:
                msg = logsumexp(msg[:, None] + log_k, axis=0) + self_w
        return msg

    if split_at is None:
        return float(logsumexp(forward(range(W))))
    if not 0 <= split_at < W - 1:
        raise ValueError("split point must leave columns on both sides")
    left = forward(range(split_at + 1))
    right = forward(range(W - 1, split_at, -1))
    return float(logsumexp(left[:, None] + log_k + right[None, :]))
