import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochleray.noise import (
    NoiseConfig,
    NoiseIncrement,
    NoiseModel,
    NoiseStream,
    apply_Q,
    half_plane_modes,
    hs_norms_Q,
    hs_norms_Q_diff,
    make_noise_model,
    sample_increment,
    zero_noise,
)
from stochleray.spectral import (
    ConfigError,
    GridSpec,
    apply_helmholtz_filter,
    apply_stokes_power,
    divergence_defect,
    eigenmode,
    hermitian_defect,
    norm,
    random_field,
)

from conftest import field_from_seed

seeds = st.integers(0, 2**32 - 1)


def hs_columns(uh, model, op=None):
    """Brute-force ||op Q(u)||_HS^2 by applying Q(u) to every unit increment."""
    total = 0.0
    for j in range(model.n_real):
        e = np.zeros(model.n_real)
        e[j] = 1.0
        col = apply_Q(uh, e, model)
        if op is not None:
            col = op(col)
        total += norm(model.grid, col) ** 2
    return total


def one_mode_model(grid, a, b, mode=(1, 0)):
    modes = np.array([mode])
    return NoiseModel(grid, modes, np.array([a, 0.0]), np.array([b, 0.0]))


def test_half_plane_modes_cover_lattice_once():
    m = half_plane_modes(4)
    assert len(m) == ((2 * 4 + 1) ** 2 - 1) // 2
    full = {tuple(k) for k in m} | {tuple(-k) for k in m}
    assert len(full) == 2 * len(m)
    assert tuple(m[0]) == (0, 1) and tuple(m[1]) == (1, 0)


def test_zero_model():
    g = GridSpec(N=16)
    model = make_noise_model(g, sigma_a=0.0, sigma_b=0.0, noise_cutoff=4)
    assert model.is_zero
    assert model.ell0 == model.ell1 == model.ell2 == model.ell3 == 0.0
    u = field_from_seed(g, 0)
    dW = np.ones(model.n_real)
    assert np.all(apply_Q(u, dW, model) == 0)
    assert zero_noise(g).is_zero


def test_single_mode_constants():
    g = GridSpec(N=16)
    model = one_mode_model(g, 0.3, 0.2)
    assert model.lam[0] == pytest.approx(1.0)
    assert model.ell0 == model.ell1 == 0.2
    assert model.ell2**2 == pytest.approx(0.26, rel=1e-15)
    assert model.ell3**2 == pytest.approx(0.26, rel=1e-15)


def test_lattice_sum_matches_brute_force():
    g = GridSpec(N=32)
    model = make_noise_model(g, gamma=2.0, sigma_a=1.0, noise_cutoff=4)
    brute = 0.0
    for kx in range(-4, 5):
        for ky in range(-4, 5):
            if kx or ky:
                brute += float(kx * kx + ky * ky) ** -3
    assert np.sum(model.lam * model.a**2) == pytest.approx(brute, rel=1e-13)


def test_refinement_decreases_tail():
    g = GridSpec(N=64)
    tail = [np.sum(m.lam * m.a**2) for m in (make_noise_model(g, sigma_a=1.0, noise_cutoff=c) for c in (4, 8, 16))]
    # the partial sums converge: successive increments shrink
    assert tail[2] - tail[1] < tail[1] - tail[0]


@pytest.mark.parametrize("gamma", [1.0, 0.5, -1.0])
def test_gamma_at_most_one_rejected(gamma):
    with pytest.raises(ConfigError, match="Hilbert-Schmidt"):
        make_noise_model(GridSpec(N=32), gamma=gamma)


@pytest.mark.parametrize("kw", [dict(sigma_a=-1.0), dict(sigma_b=-0.1), dict(noise_cutoff=0),
                                dict(noise_cutoff=11)])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        make_noise_model(GridSpec(N=32), NoiseConfig(**kw))


def test_increment_size_mismatch():
    g = GridSpec(N=16)
    model = make_noise_model(g, noise_cutoff=2)
    with pytest.raises(ConfigError):
        apply_Q(field_from_seed(g, 0), np.ones(model.n_real + 1), model)


def test_additive_noise_ignores_state():
    g = GridSpec(N=32)
    model = make_noise_model(g, sigma_b=0.0)
    dW = np.random.default_rng(0).standard_normal(model.n_real)
    a = apply_Q(field_from_seed(g, 1), dW, model)
    b = apply_Q(field_from_seed(g, 2), dW, model)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("kind,slot", [("cos", 0), ("sin", 1)])
def test_single_term_evaluation(kind, slot):
    g = GridSpec(N=16)
    psi = eigenmode(g, 1, 0, kind)
    a, b = np.zeros(2), np.zeros(2)
    b[slot] = 0.5
    model = NoiseModel(g, np.array([[1, 0]]), a, b)
    dW = np.zeros(2)
    dW[slot] = 1.0
    np.testing.assert_allclose(apply_Q(psi, dW, model), 0.5 * psi, atol=1e-16)


def test_coordinates_are_orthonormal_projections():
    g = GridSpec(L=3.0, N=16)
    model = make_noise_model(g, noise_cutoff=3)
    m = len(model.modes)
    for j, (kx, ky) in enumerate(model.modes[:5]):
        for kind, off in (("cos", 0), ("sin", m)):
            x = model.coordinates(eigenmode(g, kx, ky, kind))
            expect = np.zeros(model.n_real)
            expect[j + off] = 1.0
            np.testing.assert_allclose(x, expect, atol=1e-14)
    u = field_from_seed(g, 4, kmax=3)
    x = model.coordinates(u)
    np.testing.assert_allclose(model.from_coordinates(x), u, atol=1e-15)
    assert np.sum(x**2) == pytest.approx(norm(g, u) ** 2, rel=1e-13)


@given(seeds)
def test_output_in_solenoidal_space(seed):
    g = GridSpec(N=32)
    model = make_noise_model(g)
    rng = np.random.default_rng(seed)
    out = apply_Q(random_field(g, rng), rng.standard_normal(model.n_real), model)
    assert hermitian_defect(out) == 0.0
    assert divergence_defect(g, out) < 1e-14
    assert np.all(out[:, 0, 0] == 0)


def test_hs_norms_at_zero():
    g = GridSpec(N=32)
    model = make_noise_model(g)
    h, hA = hs_norms_Q(np.zeros(g.shape, complex), model)
    assert h == pytest.approx(np.sum(model.a**2), rel=1e-15)
    assert hA == pytest.approx(np.sum(model.lam * model.a**2), rel=1e-15)


@given(seeds)
def test_hs_norms_match_brute_force(seed):
    g = GridSpec(N=16)
    model = make_noise_model(g, sigma_b=0.3, noise_cutoff=3, mult_cutoff=2)
    u = field_from_seed(g, seed)
    h, hA = hs_norms_Q(u, model)
    assert h == pytest.approx(hs_columns(u, model), rel=1e-12)
    sqrtA = lambda f: apply_stokes_power(g, f, 0.5)  # noqa: E731
    assert hA == pytest.approx(hs_columns(u, model, sqrtA), rel=1e-12)


def test_growth_bounds_on_random_states():
    g = GridSpec(N=32)
    model = make_noise_model(g)
    rng = np.random.default_rng(11)
    u = np.stack([random_field(g, rng, kmax=int(rng.integers(1, 10))) * rng.uniform(0.01, 10) for _ in range(1000)])
    h, hA = hs_norms_Q(u, model)
    assert np.all(np.sqrt(h) <= model.ell2 * (1 + norm(g, u)))
    assert np.all(np.sqrt(hA) <= model.ell3 * (1 + norm(g, u, "V")))


@given(seeds)
def test_lipschitz_identity_is_exact(seed):
    g = GridSpec(N=16)
    model = make_noise_model(g, sigma_b=0.4, noise_cutoff=3, mult_cutoff=3)
    rng = np.random.default_rng(seed)
    u1, u2 = random_field(g, rng), random_field(g, rng)
    d = u1 - u2
    h, hA = hs_norms_Q_diff(u1, u2, model)
    # brute force: HS norm of the difference operator, column by column
    brute = 0.0
    for j in range(model.n_real):
        e = np.zeros(model.n_real)
        e[j] = 1.0
        brute += norm(g, apply_Q(u1, e, model) - apply_Q(u2, e, model)) ** 2
    assert h == pytest.approx(brute, rel=1e-12)
    # closed form sum b_j^2 delta_j^2
    x = model.coordinates(d)
    assert h == pytest.approx(np.sum(model.b**2 * x**2), rel=1e-12)
    assert np.sqrt(h) <= model.ell0 * norm(g, d) * (1 + 1e-12)
    assert np.sqrt(hA) <= model.ell1 * norm(g, d, "V") * (1 + 1e-12)


def test_lipschitz_bound_attained_on_multiplicative_band():
    g = GridSpec(N=16)
    model = make_noise_model(g, sigma_b=0.4, noise_cutoff=3, mult_cutoff=3)
    d = field_from_seed(g, 5, kmax=3)
    h, hA = hs_norms_Q_diff(d, np.zeros_like(d), model)
    assert np.sqrt(h) == pytest.approx(model.ell0 * norm(g, d), rel=1e-12)
    assert np.sqrt(hA) == pytest.approx(model.ell1 * norm(g, d, "V"), rel=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 0.1, 0.01])
def test_filtered_noise_contracts(alpha):
    g = GridSpec(N=16)
    model = make_noise_model(g, sigma_b=0.2, noise_cutoff=4)
    u = field_from_seed(g, 3)
    filt = lambda f: apply_helmholtz_filter(g, f, alpha)  # noqa: E731
    assert hs_columns(u, model, filt) <= hs_columns(u, model) * (1 + 1e-12)


# -- increments ---------------------------------------------------------------


def test_increment_determinism():
    g = GridSpec(N=16)
    model = make_noise_model(g, noise_cutoff=4)
    a = sample_increment(NoiseStream(7, 3), 0.01, model, 12)
    b = sample_increment(NoiseStream(7, 3), 0.01, model, 12)
    assert isinstance(a, NoiseIncrement)
    np.testing.assert_array_equal(a.values, b.values)
    c = sample_increment(NoiseStream(7, 3), 0.01, model, 13)
    d = sample_increment(NoiseStream(7, 4), 0.01, model, 12)
    e = sample_increment(NoiseStream(7, 3, domain=2), 0.01, model, 12)
    for other in (c, d, e):
        assert not np.array_equal(a.values, other.values)


def test_increment_rejects_bad_dt():
    g = GridSpec(N=16)
    with pytest.raises(ConfigError):
        sample_increment(NoiseStream(0, 0), 0.0, make_noise_model(g, noise_cutoff=2), 0)


def test_increment_moments():
    g = GridSpec(N=16)
    model = make_noise_model(g, noise_cutoff=1)
    dt, n = 0.01, 10_000
    stream = NoiseStream(2024, 0)
    W = np.stack([sample_increment(stream, dt, model, m).values for m in range(n)])
    # variance of the sample variance is 2 dt^2 / n for Gaussian draws
    var = W.var(axis=0, ddof=1)
    assert np.all(np.abs(var - dt) <= 3 * dt * np.sqrt(2 / n))
    assert np.all(np.abs(W.mean(axis=0)) <= 3 * np.sqrt(dt / n))
    cov = np.cov(W, rowvar=False)
    off = cov[~np.eye(model.n_real, dtype=bool)]
    # off-diagonal sample covariance has standard error dt / sqrt(n)
    assert np.all(np.abs(off) <= 3 * dt / np.sqrt(n))
