import math

import numpy as np
import pytest

from bootchain import models
from bootchain.experiments import derive_stream, unit_sin_theta


def test_gaussian_shift_clt_mean_bound():
    # MC oracle: the average of N draws of X - theta is N(0, I d/(n N)) exact,
    # so its norm stays under 4 sqrt(d/(n N)) with overwhelming probability
    d, n, reps = 3, 4, 100_000
    model = models.GaussianShift(dim=d)
    theta = unit_sin_theta(d)
    rng = derive_stream(101, 0, 0)
    acc = np.zeros(d)
    for _ in range(reps):
        acc += models.sample_data(model, theta, n, rng).mean - theta
    assert np.linalg.norm(acc / reps) <= 4.0 * math.sqrt(d / (n * reps))


def test_rademacher_draws_have_pm1_support():
    model = models.IndependentComponents(dim=4, noise_dist="rademacher")
    rng = derive_stream(102, 0, 0)
    data = models.sample_data(model, np.zeros(4), 64, rng)
    assert set(np.unique(data.raw)) <= {-1.0, 1.0}


def test_poisson_coordinate_means_near_one():
    model = models.ExponentialFamily(dim=2, family="poisson_product")
    rng = derive_stream(103, 0, 0)
    n = 100_000
    data = models.sample_data(model, np.zeros(2), n, rng)
    se = math.sqrt(1.0 / n)  # Poisson variance e^0 = 1
    assert np.all(np.abs(data.mean - 1.0) <= 3.0 * se)


def test_estimate_identity_for_shift_model():
    model = models.GaussianShift(dim=3)
    rng = derive_stream(104, 0, 0)
    data = models.sample_data(model, np.ones(3), 50, rng)
    assert np.array_equal(models.estimate(model, data), data.mean)


def test_poisson_mle_and_fallback():
    explicit = models.ExponentialFamily(
        dim=2, family="poisson_product", theta0=np.array([0.3, -0.2])
    )
    zero_counts = models.Data(n=5, mean=np.zeros(2))
    assert np.array_equal(models.estimate(explicit, zero_counts), [0.3, -0.2])

    default = models.ExponentialFamily(dim=2, family="poisson_product")
    got = models.estimate(default, zero_counts)
    assert np.allclose(got, np.log(1e-6))  # clamp rule

    data = models.Data(n=5, mean=np.array([1.0, math.e]))
    assert np.allclose(models.estimate(default, data), [0.0, 1.0], atol=1e-15)


def test_exponential_family_round_trip_on_grid():
    rng = np.random.default_rng(6)
    pois = models.ExponentialFamily(dim=4, family="poisson_product")
    gmean = models.ExponentialFamily(dim=4, family="gaussian_mean", base=[0.5, 1.0, 2.0, 4.0])
    for _ in range(100):
        theta = rng.uniform(-2.0, 2.0, 4)
        for model in (pois, gmean):
            back = models.mean_map_inverse(model, models.mean_map(model, theta))
            assert np.abs(back - theta).max() <= 1e-10


def test_poisson_mean_map_is_exp_exactly():
    model = models.ExponentialFamily(dim=3, family="poisson_product")
    theta = np.array([-1.0, 0.0, 2.5])
    assert np.array_equal(models.mean_map(model, theta), np.exp(theta))


def test_sample_xi_identity_covariance():
    model = models.GaussianShift(dim=3)
    rng = derive_stream(105, 0, 0)
    xi = models.sample_xi_block(model, np.zeros((100_000, 3)), rng)
    emp = xi.T @ xi / xi.shape[0]
    assert np.abs(emp - np.eye(3)).max() <= 0.05


def test_zero_noise_map_gives_zero_xi():
    model = models.GaussianShift(dim=3, noise_map=models.IdentityMap(scale=0.0))
    rng = derive_stream(106, 0, 0)
    assert np.array_equal(models.sample_xi(model, np.ones(3), rng), np.zeros(3))


def test_poisson_surrogate_covariance_is_exp_theta():
    model = models.ExponentialFamily(dim=3, family="poisson_product")
    theta = np.array([-0.5, 0.0, 1.0])
    assert np.allclose(models.sigma(model, theta), np.diag(np.exp(theta)))
    # MC sanity on the sampler variance
    rng = derive_stream(107, 0, 0)
    xi = models.sample_xi_block(model, np.broadcast_to(theta, (50_000, 3)), rng)
    emp_var = xi.var(axis=0)
    se = np.exp(theta) * math.sqrt(2.0 / 50_000)
    assert np.all(np.abs(emp_var - np.exp(theta)) <= 5.0 * se)


def test_sigma_examples():
    ic = models.IndependentComponents(dim=3, noise_dist="gaussian")
    assert np.allclose(models.sigma(ic, np.zeros(3)), np.eye(3))

    loc = models.LogConcaveLocation(dim=2, noise_dist="laplace", scale=[0.5, 2.0])
    assert np.allclose(models.sigma(loc, np.zeros(2)), np.diag([2 * 0.5**2, 2 * 2.0**2]))

    dmap = models.DiagTanhMap(a=np.array([2.0, 3.0]), b=np.array([0.5, -1.0]))
    gs = models.GaussianShift(dim=2, noise_map=dmap)
    theta = np.array([0.3, -0.7])
    diag = dmap.a + dmap.b * np.tanh(theta)
    assert np.allclose(models.sigma(gs, theta), np.diag(diag**2))


def test_log_concave_poincare_metadata():
    loc = models.LogConcaveLocation(
        dim=3, noise_dist=("laplace", "gaussian", "logistic"), scale=[0.5, 2.0, 1.0]
    )
    cp = loc.poincare_constants()
    assert cp[0] == pytest.approx(4 * 0.5**2)
    assert cp[1] == pytest.approx(4.0)
    assert cp[2] == pytest.approx(12.0 * math.pi**2 / 3.0)


@pytest.mark.parametrize(
    "model",
    [
        models.GaussianShift(dim=3),
        models.IndependentComponents(dim=3, noise_dist=("rademacher", "uniform", "centered_exponential")),
        models.ExponentialFamily(dim=3, family="poisson_product"),
        models.LogConcaveLocation(dim=3, noise_dist=("laplace", "logistic", "gaussian")),
    ],
)
def test_estimator_consistency_median_decreasing(model):
    theta = unit_sin_theta(3) * 0.5
    reps = 200
    medians = []
    for i, n in enumerate((100, 400, 1600)):
        rng = derive_stream(108, i, 0)
        hats = models.estimate_block(model, np.broadcast_to(theta, (reps, 3)), n, rng)
        medians.append(np.median(np.linalg.norm(hats - theta, axis=1)))
    inversions = sum(medians[i + 1] >= medians[i] for i in range(2))
    assert inversions <= 1


def test_independent_components_second_moment_matches_sigma():
    dirs = np.array([[1.0, 0.0, 0.3], [0.2, 1.0, 0.0], [0.0, -0.4, 1.0]]).T
    model = models.IndependentComponents(
        dim=3,
        noise_dist=("rademacher", "centered_exponential", "gaussian"),
        directions=dirs,
        noise_map=models.DiagTanhMap(a=np.array([1.5, 2.0, 1.0]), b=np.array([0.5, -0.5, 0.0])),
    )
    theta = np.array([0.2, -0.1, 0.4])
    n, reps = 50, 10_000
    rng = derive_stream(109, 0, 0)
    hats = models.estimate_block(model, np.broadcast_to(theta, (reps, 3)), n, rng)
    dev = math.sqrt(n) * (hats - theta)
    emp = dev.T @ dev / reps
    sig = models.sigma(model, theta)
    se = np.sqrt((np.outer(np.diag(sig), np.diag(sig)) + sig**2) / reps)
    assert np.all(np.abs(emp - sig) <= 5.0 * se)


def test_poisson_domain_errors():
    model = models.ExponentialFamily(dim=2, family="poisson_product")
    rng = derive_stream(110, 0, 0)
    with pytest.raises(models.DomainError):
        models.sample_data(model, np.array([800.0, 0.0]), 10, rng)
    with pytest.raises(models.DomainError):
        models.sample_data(model, np.array([25.0, 0.0]), 100, rng)  # n * e^theta > guard


def test_estimate_block_marks_aborted_rows():
    model = models.ExponentialFamily(dim=1, family="poisson_product")
    rng = derive_stream(111, 0, 0)
    thetas = np.array([[0.0], [40.0]])
    out = models.estimate_block(model, thetas, 10, rng)
    assert np.isfinite(out[0, 0])
    assert np.isnan(out[1, 0])


def test_raw_retention_policy():
    model = models.LogConcaveLocation(dim=2, noise_dist="laplace", scale=1.0)
    rng = derive_stream(112, 0, 0)
    small = models.sample_data(model, np.zeros(2), 10, rng)
    assert small.raw is not None and small.raw.shape == (10, 2)
    big = models.sample_data(model, np.zeros(2), models.RAW_RETENTION_MAX + 1, rng)
    assert big.raw is None and big.mean.shape == (2,)


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        models.DiagTanhMap(a=np.array([1.0]), b=np.array([1.0]))  # needs a > |b|
    with pytest.raises(ValueError):
        models.IndependentComponents(dim=2, directions=np.ones((2, 2)))  # rank 1
    with pytest.raises(ValueError):
        models.IndependentComponents(dim=2, noise_dist=("rademacher",))
    with pytest.raises(ValueError):
        models.LogConcaveLocation(dim=2, noise_dist="laplace", scale=0.0)
    with pytest.raises(ValueError):
        models.ExponentialFamily(dim=2, family="gaussian_mean", base=[-1.0, 1.0])
    with pytest.raises(ValueError):
        models.ExponentialFamily(dim=2, family="poisson_product", theta0=np.zeros(3))
    with pytest.raises(ValueError):
        models.ExponentialFamily(dim=2, family="nope")
    with pytest.raises(ValueError):
        models.LogConcaveLocation(dim=2, noise_dist="cauchy")


def test_gaussian_mean_family():
    base = np.array([0.5, 2.0])
    model = models.ExponentialFamily(dim=2, family="gaussian_mean", base=base)
    theta = np.array([1.0, -0.5])
    assert np.allclose(models.mean_map(model, theta), base * theta)
    assert np.allclose(models.sigma(model, theta), np.diag(base))
    rng = derive_stream(113, 0, 0)
    data = models.sample_data(model, theta, 4000, rng)
    hat = models.estimate(model, data)
    assert np.linalg.norm(hat - theta) <= 0.2  # sd ~ sqrt(1/(v n)) per coord
