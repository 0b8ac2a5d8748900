import numpy as np
import pytest

from robust_rl import generate_garnet
from robust_rl.garnet import garnet_draws


def test_shape_of_benchmark_instance():
    mdp = generate_garnet(30, 20, seed=0)
    assert (mdp.num_states, mdp.num_actions) == (30, 20)
    assert mdp.gamma == 0.95
    np.testing.assert_array_equal(mdp.rho, np.full(30, 1 / 30))


def test_valid_for_many_seeds():
    for seed in range(100):
        mdp = generate_garnet(30, 20, seed=seed)
        assert np.all(np.abs(mdp.kernel.sum(axis=2) - 1) <= 1e-12)
        assert mdp.reward.min() == 0.0 and mdp.reward.max() == 1.0


def test_deterministic():
    a, b = generate_garnet(6, 4, seed=9), generate_garnet(6, 4, seed=9)
    assert a.kernel.tobytes() == b.kernel.tobytes()
    assert a.reward.tobytes() == b.reward.tobytes()
    assert not np.array_equal(a.kernel, generate_garnet(6, 4, seed=10).kernel)


def test_rescaling_preserves_order():
    for seed in range(20):
        _, raw = garnet_draws(7, 5, seed)
        mdp = generate_garnet(7, 5, seed)
        assert np.argmax(raw) == np.argmax(mdp.reward)
        assert np.array_equal(np.argsort(raw, axis=None), np.argsort(mdp.reward, axis=None))


def test_custom_gamma_and_rho():
    mdp = generate_garnet(3, 2, seed=0, gamma=0.5, rho=[1.0, 0.0, 0.0])
    assert mdp.gamma == 0.5 and mdp.rho.tolist() == [1.0, 0.0, 0.0]


@pytest.mark.parametrize("S,A", [(1, 2), (0, 1), (3, 0)])
def test_rejects_degenerate_sizes(S, A):
    with pytest.raises(ValueError):
        generate_garnet(S, A, seed=0)
