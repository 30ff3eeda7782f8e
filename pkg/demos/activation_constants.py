"""
The multi-activation constant Q
===============================

When every agent is active independently with probability q_v, the regret
multiplier is Q = sum_v q_v c_v / Q_v, where Q_v is the chance that v is
updated and c_v = E[1 / (1 + other active agents)]. This script evaluates Q
on a few graphs and compares it with the graph-only bound (alpha+1)/(1-1/e).
"""

import numpy as np

from netregret import graph as gr
from netregret.analysis import (
    ActivationProfile,
    c_coefficient,
    c_coefficient_bruteforce,
    q_constant,
    q_graph_bound,
    q_uniform_closed_form,
    q_uniform_limit_zero,
    verify_constants,
)

###############################################################################
# c_v two ways: polynomial expansion and subset enumeration

q = np.array([0.1, 0.4, 0.8, 0.3, 0.5])
print("c_0 polynomial :", c_coefficient(q, 0))
print("c_0 enumeration:", c_coefficient_bruteforce(q, 0))

###############################################################################
# Uniform q: Q falls from sum 1/|N_v| at q -> 0 to 1 at q = 1

for g, name in [(gr.edgeless(5), "edgeless(5)"), (gr.star(10), "star(10)"), (gr.cycle(8), "cycle(8)")]:
    alpha = gr.independence_number_exact(g)
    row = "  ".join(f"{q_uniform_closed_form(g, qq):.3f}" for qq in (0.01, 0.1, 0.5, 1.0))
    print(f"{name:>12}  Q(q) at 0.01/0.1/0.5/1: {row}  limit {q_uniform_limit_zero(g):.3f}"
          f"  alpha {alpha}  bound {q_graph_bound(alpha):.2f}")

###############################################################################
# Random profiles stay under the graph bound

rng = np.random.default_rng(0)
g = gr.gnp(14, 0.3, seed=1)
alpha = gr.independence_number_exact(g)
worst = max(q_constant(ActivationProfile(g, tuple(rng.uniform(0.001, 1, 14)))) for _ in range(200))
print(f"gnp(14, 0.3): largest Q over 200 profiles {worst:.3f}, bound {q_graph_bound(alpha):.3f}")

###############################################################################
# The full randomized corpus, as run by `netregret verify`

print(verify_constants(seed=0).summary())
