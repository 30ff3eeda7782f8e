"""
Regret grows with the independence number
=========================================

Agents on a disjoint union of cliques, one agent active per round drawn
uniformly. Inside a clique everyone shares feedback, so the network behaves
like alpha independent learners and the regret scales like sqrt(alpha T).

The losses give action 0 a small edge, 2 sqrt(alpha / T), the size at which
each learner still has to pay for finding the better action.
"""

import numpy as np

from netregret import graph as gr
from netregret.agents import Oblivious
from netregret.config import scaled_gap
from netregret.environments import BernoulliLosses, ComposedEnvironment, SingleStochastic
from netregret.geometry import Geometry
from netregret.simulator import Experiment, monte_carlo

T = 10_000
alphas = [1, 2, 4, 8]
means = []
for a in alphas:
    g = gr.disjoint_cliques(a, 4)
    losses = BernoulliLosses.with_gap(2, scaled_gap(2.0, a, T))
    env = ComposedEnvironment(SingleStochastic.uniform(g.n), losses)
    rep = monte_carlo(Experiment(g, Geometry.simplex(2), Oblivious(), env), T, 50, master_seed=0)
    means.append(rep.mean)
    print(f"alpha={a}  N={g.n:>2}  mean regret={rep.mean:7.2f} +/- {rep.se:4.2f}  bound={rep.theory_bound:7.2f}")

###############################################################################
# The log-log slope should sit near 1/2

print("slope:", round(float(np.polyfit(np.log(alphas), np.log(means), 1)[0]), 3))
