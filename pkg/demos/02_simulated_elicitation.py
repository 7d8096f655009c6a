"""Full elicitation loop against a simulated noisy user on the synthetic
r=3 problem, printing the regret of the would-be recommendation as answers
accumulate.
"""

import numpy as np

from setmargin import (Hyperparameters, LoopConfig, SimulatedUser,
                       SolverConfig, UtilityDistribution, best_utility,
                       gen_synthetic, recommend, run, sample_utility,
                       utility, utility_loss)

spec = gen_synthetic(3)

truth = sample_utility(UtilityDistribution("sparse-uniform"), spec.m, seed=7)
user = SimulatedUser(truth, rng_seed=7)
best = best_utility(truth, spec)
print("hidden weights:", np.round(truth, 1))
print("best achievable utility:", round(best, 2))

solver_cfg = SolverConfig()


def report(t, sol, dataset, hp):
    if t % 5 != 0 and t != 1:
        return
    rec_hp = Hyperparameters(max(hp.alpha, 1.0), hp.beta, hp.gamma)
    _, guess = recommend(spec, dataset, rec_hp, solver_cfg)
    regret = utility_loss(truth, guess, spec, best=best)
    print(f"iteration {t:3d}  answers {len(dataset):3d}  regret {regret:7.2f}  "
          f"hyperparameters {hp.as_tuple()}")


trace = run(spec, user, LoopConfig(k=2, T=30), solver_cfg, on_iteration=report)

w_star, x_star = trace.recommendation
print("\nrecommended configuration:", x_star.key())
print("its true utility:", round(utility(truth, x_star), 2), "of", round(best, 2))
