"""Model parameters, spin configurations and state rotations.

Ising spins take values in {-1, +1}; Potts spins in {1, ..., q}.  Spins
outside the box are implicit and fixed by the boundary condition (bc=+1
or -1 for Ising, bc=k for Potts).  The Potts rotation theta sends k to
k-1 and 1 to q, so theta^q is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import LatticeBox, box_geometry

ISING = "ising"
POTTS = "potts"


@dataclass(frozen=True)
class ModelParams:
    """Everything a finite-volume measure depends on."""

    d: int
    N: int
    T: float
    eps: float
    kind: str = ISING
    q: int | None = None
    bc: int = 1

    def __post_init__(self):
        if self.kind not in (ISING, POTTS):
            raise ValueError(f"kind must be '{ISING}' or '{POTTS}', got {self.kind!r}")
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.N < 0:
            raise ValueError(f"radius must be >= 0, got {self.N}")
        if self.T < 0:
            raise ValueError(f"temperature must be >= 0, got {self.T}")
        if self.eps < 0:
            raise ValueError(f"field strength must be >= 0, got {self.eps}")
        if self.kind == ISING:
            if self.q is not None:
                raise ValueError("q applies to the Potts kind only")
            if self.bc not in (1, -1):
                raise ValueError(f"Ising boundary condition must be +1 or -1, got {self.bc}")
        else:
            if self.q is None or self.q < 3:
                raise ValueError(f"Potts requires q >= 3, got {self.q}")
            if not 1 <= self.bc <= self.q:
                raise ValueError(f"Potts boundary condition must lie in 1..{self.q}, got {self.bc}")

    @property
    def box(self) -> LatticeBox:
        return LatticeBox(self.d, self.N)

    @property
    def n_states(self) -> int:
        return 2 if self.kind == ISING else self.q

    def n_configs(self) -> int:
        return self.n_states ** self.box.n_sites

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass
class SpinConfig:
    """A spin assignment on the box, in canonical site order."""

    box: LatticeBox
    kind: str
    values: np.ndarray
    q: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.values.shape != (self.box.n_sites,):
            raise ValueError(
                f"expected {self.box.n_sites} spins, got shape {self.values.shape}")
        if self.kind == ISING:
            if not np.all(np.abs(self.values) == 1):
                raise ValueError("Ising spins must be +1 or -1")
        else:
            if self.q is None:
                raise ValueError("Potts spin configuration requires q")
            if not (np.all(self.values >= 1) and np.all(self.values <= self.q)):
                raise ValueError(f"Potts spins must lie in 1..{self.q}")

    @classmethod
    def constant(cls, params: ModelParams, value: int) -> "SpinConfig":
        vals = np.full(params.box.n_sites, value, dtype=np.int8)
        return cls(params.box, params.kind, vals, params.q)

    @classmethod
    def from_assignment(cls, params: ModelParams, assignment: dict, default: int) -> "SpinConfig":
        geo = box_geometry(params.d, params.N)
        vals = np.full(params.box.n_sites, default, dtype=np.int8)
        for site, value in assignment.items():
            vals[geo.index[tuple(site)]] = value
        return cls(params.box, params.kind, vals, params.q)

    def spin_at(self, site) -> int:
        geo = box_geometry(self.box.d, self.box.N)
        return int(self.values[geo.index[tuple(site)]])

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.box, self.kind, self.values.copy(), self.q)


def rotate_state(k: int, j: int, q: int) -> int:
    """Apply theta^j to a state in 1..q (theta: k -> k-1, 1 -> q)."""
    return (k - 1 - j) % q + 1


def inverse_rotate_state(k: int, j: int, q: int) -> int:
    """Apply theta^{-j} to a state in 1..q."""
    return (k - 1 + j) % q + 1
