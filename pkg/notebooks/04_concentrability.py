# %% [markdown]
# # How well does the data cover the optimal policy?
#
# The discounted occupancy of the optimal policy against the behaviour
# distribution gives the (clipped) single-policy concentrability.

# %%
from robust_rl import (behavior_partial, behavior_uniform, concentrability, exact_value_iteration,
                       generate_garnet, occupancy_measure)

mdp = generate_garnet(15, 8, seed=0)
_, pi_star = exact_value_iteration(mdp, 1e-10)
d = occupancy_measure(mdp, pi_star)
print("occupancy sums to", d.sum())

for name, mu in [("uniform", behavior_uniform(15, 8)), ("partial", behavior_partial(pi_star, 8, eta=3))]:
    rep = concentrability(mdp, pi_star, mu)
    print(f"{name:8s} clipped={rep.clipped:.3f} unclipped={rep.unclipped:.3f} mu_min={rep.mu_min:.4f}")

# %% [markdown]
# A behaviour policy that never plays the optimal action at some state makes
# both coefficients infinite.

# %%
mu = behavior_partial(pi_star, 8, eta=3)
mu[0, pi_star[0]] = 0.0
mu /= mu.sum()
print(concentrability(mdp, pi_star, mu))
