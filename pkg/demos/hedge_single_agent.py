"""
Hedge on two actions
====================

A single agent on the 2-simplex with the tuned learning rate. Its regret
against the best action in hindsight grows like sqrt(T) and stays below
sqrt(2 ln 2 T) on every run.
"""

import math

import numpy as np

from netregret import graph as gr
from netregret.agents import Oblivious
from netregret.environments import BernoulliLosses, ComposedEnvironment, SingleStochastic
from netregret.geometry import Geometry
from netregret.simulator import Experiment, monte_carlo, network_regret, run_simulation

geom = Geometry.simplex(2)
env = ComposedEnvironment(SingleStochastic.uniform(1), BernoulliLosses.fair(2))

###############################################################################
# One run, looked at round by round

trace = run_simulation(gr.edgeless(1), geom, Oblivious(), env, "tuned", 2000, seed=0)
print("eta =", round(trace.eta, 5))
print("first predictions:\n", trace.predictions(0)[:4])
print("regret after 2000 rounds:", round(network_regret(trace).regret, 2))

###############################################################################
# Many runs at several horizons

ex = Experiment(gr.edgeless(1), geom, Oblivious(), env)
for T in (1_000, 4_000, 16_000):
    rep = monte_carlo(ex, T, 100, master_seed=1)
    print(f"T={T:>6}  mean={rep.mean:7.2f}  worst={rep.max:7.2f}  bound={math.sqrt(2 * math.log(2) * T):7.2f}")

# quadrupling T roughly doubles the mean regret
