import io

import numpy as np
import pytest
from scipy import stats

from quenchlab.lattice import SiteSet
from quenchlab.model import ISING, POTTS, ModelParams, SpinConfig
from quenchlab.disorder import (
    DisorderField,
    field_rng,
    flip,
    flip_spins,
    read_field_csv,
    restrict_field,
    rotate_field,
    rotate_spins,
    sample_field,
    write_field_csv,
)

P_ISING = ModelParams(d=2, N=1, T=1.0, eps=0.5)
P_POTTS = ModelParams(d=2, N=1, T=1.0, eps=0.5, kind=POTTS, q=3)


def test_sampling_is_deterministic():
    a = sample_field(P_ISING, seed=42)
    b = sample_field(P_ISING, seed=42)
    assert np.array_equal(a.values, b.values)
    c = sample_field(P_ISING, seed=43)
    assert not np.array_equal(a.values, c.values)


def test_sampling_streams_differ():
    a = sample_field(P_ISING, seed=42, stream=0)
    b = sample_field(P_ISING, seed=42, stream=1)
    assert not np.array_equal(a.values, b.values)


def test_marginals_standard_normal_clt():
    # one large draw; bounds are 4 sigma for the mean and 0.01 for the variance
    n = 10 ** 6
    rng = field_rng(2024)
    sample = rng.standard_normal(n)
    assert abs(sample.mean()) <= 4 / np.sqrt(n)
    assert abs(sample.var() - 1.0) <= 0.01


def test_potts_field_shape():
    h = sample_field(P_POTTS, seed=1)
    assert h.values.shape == (3, 9)
    assert h.value_at((0, 0), state=2) == h.values[1, 4]


def test_flip_empty_and_involution():
    h = sample_field(P_ISING, seed=5)
    empty = SiteSet([], 2)
    assert np.array_equal(flip(h, empty).values, h.values)
    A = SiteSet([(0, 0), (1, 0)])
    assert np.array_equal(flip(flip(h, A), A).values, h.values)


def test_flip_single_site_value():
    values = np.zeros(9)
    h = DisorderField(P_ISING.box, ISING, values)
    values = h.values.copy()
    values[4] = 0.7  # canonical index of the origin in the 3x3 box
    h = DisorderField(P_ISING.box, ISING, values)
    flipped = flip(h, SiteSet([(0, 0)]))
    assert flipped.value_at((0, 0)) == -0.7
    others = [i for i in range(9) if i != 4]
    assert np.array_equal(flipped.values[others], h.values[others])


def test_flip_rejects_potts():
    with pytest.raises(ValueError):
        flip(sample_field(P_POTTS, seed=1), SiteSet([(0, 0)]))


def test_flip_outside_domain_rejected():
    h = sample_field(P_ISING, seed=5)
    with pytest.raises(ValueError):
        flip(h, SiteSet([(5, 5)]))


def test_flip_preserves_gaussian_law():
    # Kolmogorov-Smirnov on the flipped marginals against N(0, 1)
    p = ModelParams(d=2, N=3, T=1.0, eps=0.5)
    A = SiteSet([(0, 0), (1, 0), (0, 1), (-2, 3)])
    samples = []
    for r in range(300):
        h = sample_field(p, seed=99, stream=r)
        samples.append(flip(h, A).values)
    stat, pvalue = stats.kstest(np.concatenate(samples), "norm")
    assert pvalue > 0.01


def test_rotate_identity_at_q():
    h = sample_field(P_POTTS, seed=3)
    A = SiteSet([(0, 0), (0, 1)])
    assert np.allclose(rotate_field(h, A, 3).values, h.values)


def test_rotate_group_inverse():
    h = sample_field(P_POTTS, seed=3)
    A = SiteSet([(0, 0), (1, 1)])
    for j in (1, 2):
        back = rotate_field(rotate_field(h, A, j), A, 3 - j)
        assert np.allclose(back.values, h.values)


def test_rotate_cycles_values():
    # q=3, A={o}, j=1: (h1, h2, h3) -> (h2, h3, h1) at the origin
    h = sample_field(P_POTTS, seed=3)
    rotated = rotate_field(h, SiteSet([(0, 0)]), 1)
    o = 4
    assert rotated.values[0, o] == h.values[1, o]
    assert rotated.values[1, o] == h.values[2, o]
    assert rotated.values[2, o] == h.values[0, o]
    off = [i for i in range(9) if i != o]
    assert np.array_equal(rotated.values[:, off], h.values[:, off])


def test_rotate_full_cycle_over_all_j():
    h = sample_field(P_POTTS, seed=9)
    A = SiteSet([(0, 0), (1, 0), (0, -1)])
    out = h
    for _ in range(3):
        out = rotate_field(out, A, 1)
    assert np.allclose(out.values, h.values)


def test_rotate_rejects_ising():
    with pytest.raises(ValueError):
        rotate_field(sample_field(P_ISING, seed=1), SiteSet([(0, 0)]), 1)


def test_flip_spins_examples():
    sigma = SpinConfig.constant(P_ISING, 1)
    empty = SiteSet([], 2)
    assert np.array_equal(flip_spins(sigma, empty).values, sigma.values)
    A = SiteSet([(0, 0), (1, 1)])
    twice = flip_spins(flip_spins(sigma, A), A)
    assert np.array_equal(twice.values, sigma.values)
    once = flip_spins(sigma, A)
    assert once.spin_at((0, 0)) == -1
    assert once.spin_at((0, 1)) == 1


def test_rotate_spins_theta():
    # sigma_o = 2, j = 1 -> theta(2) = 1
    sigma = SpinConfig.from_assignment(P_POTTS, {(0, 0): 2}, default=3)
    rotated = rotate_spins(sigma, SiteSet([(0, 0)]), 1)
    assert rotated.spin_at((0, 0)) == 1
    assert rotated.spin_at((1, 0)) == 3
    # theta(1) = q
    sigma = SpinConfig.from_assignment(P_POTTS, {(0, 0): 1}, default=3)
    rotated = rotate_spins(sigma, SiteSet([(0, 0)]), 1)
    assert rotated.spin_at((0, 0)) == 3


def test_field_csv_roundtrip_ising():
    h = sample_field(P_ISING, seed=17)
    buf = io.StringIO()
    write_field_csv(h, buf)
    text = buf.getvalue()
    assert text.startswith("# d=2 N=1 q=0 seed=17 kind=ising")
    back = read_field_csv(io.StringIO(text))
    assert np.array_equal(back.values, h.values)
    assert back.seed == 17


def test_field_csv_roundtrip_potts():
    h = sample_field(P_POTTS, seed=17)
    buf = io.StringIO()
    write_field_csv(h, buf)
    back = read_field_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back.values, h.values)
    assert back.q == 3


def test_restrict_field_nests():
    big = ModelParams(d=2, N=3, T=1.0, eps=0.5)
    h = sample_field(big, seed=4)
    small = restrict_field(h, 1)
    assert small.box.N == 1
    for site in [(0, 0), (1, -1), (-1, 1)]:
        assert small.value_at(site) == h.value_at(site)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(d=1, N=1, T=1.0, eps=0.0)
    with pytest.raises(ValueError):
        ModelParams(d=2, N=1, T=-1.0, eps=0.0)
    with pytest.raises(ValueError):
        ModelParams(d=2, N=1, T=1.0, eps=0.0, kind=POTTS, q=2)
    with pytest.raises(ValueError):
        ModelParams(d=2, N=1, T=1.0, eps=0.0, bc=2)
    with pytest.raises(ValueError):
        ModelParams(d=2, N=1, T=1.0, eps=0.0, kind=POTTS, q=3, bc=4)
    p = ModelParams(d=2, N=1, T=1.0, eps=0.0, kind=POTTS, q=3, bc=2)
    assert p.n_states == 3
    assert p.n_configs() == 3 ** 9
