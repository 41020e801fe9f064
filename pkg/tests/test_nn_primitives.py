import math

import pytest
import torch
from scipy.integrate import quad
from scipy.stats import norm

from shared.exceptions import EmptyInputError, NonFiniteValueError, ShapeMismatchError
from utils.nn_primitives import (
    adversarial_losses,
    conv1d_reference,
    cross_entropy_loss,
    gelu,
    grad_check,
    kl_diag_gaussian,
    leaky_relu,
    log_likelihood_recon,
    mse_loss,
    relu,
    sigmoid,
    softmax_fake_probability,
    vae_total_loss,
)
from networks.autoencoders import reparameterize


def test_activations_match_torch():
    x = torch.linspace(-4, 4, 101, dtype=torch.float64)
    assert torch.allclose(sigmoid(x), torch.sigmoid(x))
    assert torch.equal(relu(x), torch.relu(x))
    assert torch.allclose(gelu(x), torch.nn.functional.gelu(x), atol=1e-12)
    assert torch.allclose(leaky_relu(x, 0.01), torch.nn.functional.leaky_relu(x, 0.01))


def test_relu_is_idempotent():
    x = torch.randn(1000, generator=torch.Generator().manual_seed(11), dtype=torch.float64)
    once = relu(x)
    assert torch.equal(relu(once), once)


def test_gelu_shape():
    x = torch.linspace(-10, 10, 20001, dtype=torch.float64)
    y = gelu(x)
    assert gelu(torch.zeros(1)).item() == 0.0
    # exact GELU dips to its minimum near -0.7518 and is nondecreasing after it
    turn = int(torch.argmin(y))
    assert float(x[turn]) == pytest.approx(-0.7518, abs=1e-3)
    assert torch.all(torch.diff(y[turn:]) >= 0)
    # below -5 the float64 tail of 1 + erf is too coarse to order neighbours
    left = int(torch.searchsorted(x, torch.tensor(-5.0, dtype=torch.float64)))
    assert torch.all(torch.diff(y[left : turn + 1]) <= 0)


def test_leaky_relu_rejects_bad_slope():
    with pytest.raises(ValueError):
        leaky_relu(torch.zeros(3), 1.5)


def test_softmax_rows_sum_to_one():
    logits = torch.randn(50, 2, generator=torch.Generator().manual_seed(1))
    p = softmax_fake_probability(logits)
    both = torch.softmax(logits, dim=-1)
    assert torch.allclose(both.sum(dim=-1), torch.ones(50), atol=1e-6)
    assert torch.allclose(p, both[:, 1])
    with pytest.raises(ShapeMismatchError):
        softmax_fake_probability(torch.zeros(4, 3))


def test_mse_examples():
    assert mse_loss(torch.tensor([1.0, 2.0]), torch.tensor([1.0, 2.0])).value == 0.0
    assert mse_loss(torch.tensor([0.0, 0.0]), torch.tensor([1.0, 1.0])).value == 1.0
    with pytest.raises(ShapeMismatchError):
        mse_loss(torch.zeros(2), torch.zeros(3))


def test_cross_entropy_examples():
    perfect = cross_entropy_loss(torch.tensor([1.0, 0.0]), torch.tensor([1.0, 0.0]))
    assert perfect.value == 0.0
    half = cross_entropy_loss(torch.tensor([1.0]), torch.tensor([0.5]))
    assert half.value == pytest.approx(math.log(2), abs=1e-7)
    clamped = cross_entropy_loss(torch.tensor([1.0]), torch.tensor([0.0]))
    assert math.isfinite(clamped.value)
    assert clamped.value == pytest.approx(-math.log(1e-7), rel=1e-5)
    assert set(perfect.components) == {"ce"}


def test_log_likelihood_recon_component():
    x = torch.rand(2, 3, 4, 4, generator=torch.Generator().manual_seed(2))
    loss = log_likelihood_recon(x, torch.full_like(x, 0.5))
    assert loss.value == pytest.approx(math.log(2), abs=1e-6)
    assert set(loss.components) == {"nll"}


def test_kl_zero_and_nonnegative():
    zero = kl_diag_gaussian(torch.zeros(4, 8), torch.zeros(4, 8))
    assert zero.value == 0.0
    generator = torch.Generator().manual_seed(3)
    for _ in range(100):
        mu = torch.randn(2, 16, generator=generator, dtype=torch.float64)
        logvar = torch.randn(2, 16, generator=generator, dtype=torch.float64)
        assert kl_diag_gaussian(mu, logvar).value >= 0.0


def test_kl_known_value():
    # KL(N(1, 1) || N(0, 1)) = 0.5 per dimension
    value = kl_diag_gaussian(torch.ones(1, 4, dtype=torch.float64), torch.zeros(1, 4, dtype=torch.float64))
    assert value.value == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("mu, logvar", [(1.0, 0.0), (0.0, 0.0), (-0.7, 0.9), (2.5, -1.6), (0.3, -4.0)])
def test_kl_matches_numerical_integration(mu: float, logvar: float):
    sigma = math.exp(0.5 * logvar)
    q = norm(loc=mu, scale=sigma)

    def integrand(z: float) -> float:
        return q.pdf(z) * (q.logpdf(z) - norm.logpdf(z))

    integral, _ = quad(integrand, mu - 12 * sigma, mu + 12 * sigma, limit=200)
    closed = kl_diag_gaussian(torch.tensor([mu], dtype=torch.float64), torch.tensor([logvar], dtype=torch.float64))
    assert closed.value == pytest.approx(integral, abs=1e-8)


def test_vae_total_loss_components():
    recon = mse_loss(torch.zeros(3), torch.ones(3))
    kl = kl_diag_gaussian(torch.ones(1, 2), torch.zeros(1, 2))
    total = vae_total_loss(recon, kl, beta=0.5)
    assert total.value == pytest.approx(1.0 + 0.5 * 1.0)
    assert set(total.components) == {"recon", "kl", "weighted_kl"}


def test_vae_total_loss_needs_positive_beta():
    recon = mse_loss(torch.zeros(3), torch.ones(3))
    kl = kl_diag_gaussian(torch.ones(1, 2), torch.zeros(1, 2))
    for beta in (0.0, -0.5):
        with pytest.raises(ValueError, match="beta"):
            vae_total_loss(recon, kl, beta=beta)


def test_adversarial_losses_at_equilibrium():
    d, g = adversarial_losses(torch.full((8,), 0.5), torch.full((8,), 0.5))
    assert d.value == pytest.approx(2 * math.log(0.5), abs=1e-6)
    assert g.value == pytest.approx(math.log(0.5), abs=1e-6)


def test_reparameterize_monte_carlo_mean():
    generator = torch.Generator().manual_seed(4)
    mu = torch.full((10000,), 0.3, dtype=torch.float64)
    logvar = torch.full((10000,), math.log(0.25), dtype=torch.float64)
    noise = torch.randn(10000, generator=generator, dtype=torch.float64)
    z = reparameterize(mu, logvar, noise)
    sigma = 0.5
    assert abs(float(z.mean()) - 0.3) < 3 * sigma / math.sqrt(10000)
    with pytest.raises(ShapeMismatchError):
        reparameterize(mu, logvar, noise[:10])


def naive_conv1d(f: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    h = torch.zeros(len(f) + len(g) - 1, dtype=torch.float64)
    for i in range(len(f)):
        for j in range(len(g)):
            h[i + j] += f[i] * g[j]
    return h


def test_conv1d_reference_matches_naive_loop():
    generator = torch.Generator().manual_seed(5)
    for _ in range(200):
        n_f, n_g = (int(n) for n in torch.randint(1, 33, (2,), generator=generator))
        f = torch.randn(n_f, generator=generator, dtype=torch.float64)
        g = torch.randn(n_g, generator=generator, dtype=torch.float64)
        assert torch.equal(conv1d_reference(f, g), naive_conv1d(f, g))
    g = torch.randn(4, generator=generator)
    assert torch.equal(conv1d_reference(torch.tensor([1.0]), g), g)


def test_conv1d_reference_is_commutative():
    generator = torch.Generator().manual_seed(15)
    for _ in range(50):
        n_f, n_g = (int(n) for n in torch.randint(1, 33, (2,), generator=generator))
        f = torch.randn(n_f, generator=generator, dtype=torch.float64)
        g = torch.randn(n_g, generator=generator, dtype=torch.float64)
        assert torch.allclose(conv1d_reference(f, g), conv1d_reference(g, f), atol=1e-12)
    # small integers multiply and add exactly in either order
    f = torch.tensor([1.0, -2.0, 3.0])
    g = torch.tensor([4.0, 0.0, -1.0, 2.0])
    assert torch.equal(conv1d_reference(f, g), conv1d_reference(g, f))


def test_conv1d_reference_errors():
    with pytest.raises(EmptyInputError):
        conv1d_reference(torch.tensor([]), torch.tensor([1.0]))
    with pytest.raises(ShapeMismatchError):
        conv1d_reference(torch.zeros(2, 2), torch.tensor([1.0]))


def test_grad_check_losses():
    generator = torch.Generator().manual_seed(6)
    target = torch.rand(12, generator=generator, dtype=torch.float64)
    labels = (torch.rand(6, generator=generator) > 0.5).double()
    logvar = torch.randn(2, 5, generator=generator, dtype=torch.float64)

    assert grad_check(lambda x: mse_loss(target, x).total, torch.rand(12, dtype=torch.float64)) < 1e-4
    assert (
        grad_check(
            lambda x: cross_entropy_loss(labels, torch.sigmoid(x)).total,
            torch.randn(6, generator=generator, dtype=torch.float64),
        )
        < 1e-4
    )
    assert (
        grad_check(
            lambda mu: kl_diag_gaussian(mu, logvar).total,
            torch.randn(2, 5, generator=generator, dtype=torch.float64),
        )
        < 1e-4
    )


def test_grad_check_reports_non_finite():
    with pytest.raises(NonFiniteValueError):
        grad_check(lambda x: torch.log(x).sum(), torch.tensor([-1.0]))
