# %% [markdown]
# # Planning from a fixed dataset
#
# Draw a Garnet MDP, collect a small offline dataset under partial coverage,
# then compare the robust planners against LCB and the plain empirical model.

# %%
import numpy as np

from robust_rl import (BERNSTEIN, HOEFFDING, EmpiricalRobustModel, LcbConfig, RadiusStyle,
                       behavior_partial, estimate_model, exact_value_iteration, generate_garnet,
                       lcb_value_iteration, nonrobust_empirical_vi, random_action,
                       robust_value_iteration, robust_value_iteration_bernstein, sample_dataset,
                       suboptimality_gap)

mdp = generate_garnet(15, 8, seed=0)
v_star, pi_star = exact_value_iteration(mdp, 1e-10)
eta = random_action(mdp.num_actions, seed=0)
mu = behavior_partial(pi_star, mdp.num_actions, eta)
data = sample_dataset(mdp, mu, 500, seed=1)
base = estimate_model(data)
print("pairs visited:", int((base.counts > 0).sum()), "of", base.counts.size)

# %%
hoeff = robust_value_iteration(EmpiricalRobustModel.build(base, RadiusStyle(HOEFFDING, 0.1), mdp.gamma))
bern = robust_value_iteration_bernstein(
    EmpiricalRobustModel.build(base, RadiusStyle(BERNSTEIN, 0.1), mdp.gamma), data)
v_emp, pi_emp = nonrobust_empirical_vi(base, mdp.gamma)
v_lcb, pi_lcb = lcb_value_iteration(base, LcbConfig(), mdp.gamma)

for name, pi in [("dro_hoeffding", hoeff.policy), ("dro_bernstein", bern.policy),
                 ("lcb", pi_lcb), ("nonrobust", pi_emp)]:
    print(f"{name:14s} gap = {suboptimality_gap(mdp, pi, v_star=v_star):.4f}")

# %% [markdown]
# Robust values sit below the empirical ones: the planner is pessimistic about
# transitions it has seen rarely.

# %%
print("max(V_hoeffding - V_empirical):", float(np.max(hoeff.value - v_emp)))
print("max(V_lcb - V_empirical):      ", float(np.max(v_lcb - v_emp)))
