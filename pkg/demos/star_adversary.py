"""
When sharing everything hurts
=============================

On a star, the center hears every leaf. An adversary can exploit that: it
shows leaves mostly the loss that favors the good action and the center
mostly the opposite, and the center's broadcasts then drag every leaf toward
the bad action. Oblivious agents suffer regret linear in T.

Restricting feedback to a clique cover (the center plus one leaf, then single
leaves) removes the channel and brings the regret back to sqrt(T).
"""

from netregret import graph as gr
from netregret.agents import CliqueCoverPolicy, Oblivious
from netregret.environments import StarAdversary
from netregret.geometry import Geometry
from netregret.simulator import Experiment, monte_carlo

g = gr.star(10)
env = StarAdversary(10, epsilon=0.5)
cover = gr.greedy_clique_cover(g)
print("cover blocks:", [sorted(b) for b in cover.blocks])
print("event probabilities:", [round(p, 4) for p in env.event_probabilities])

for name, policy in [("oblivious", Oblivious()), ("clique cover", CliqueCoverPolicy(cover))]:
    ex = Experiment(g, Geometry.simplex(2), policy, env, comparator="good_action")
    for T in (1_000, 10_000):
        rep = monte_carlo(ex, T, 100, master_seed=0)
        bound = "" if rep.theory_bound is None else f"  bound={rep.theory_bound:7.1f}"
        print(f"{name:>12}  T={T:>6}  mean regret={rep.mean:8.1f}  per round={rep.mean / T:.4f}{bound}")
