"""
The follower's problem on gr17
==============================

With the leader's choice fixed, the follower solves an orienteering
problem: one depot cycle within the distance budget, collecting as much
prize as possible from nodes that are not interdicted. Here the
branch-and-cut solver is checked against the subset DP.
"""
import numpy as np

from oig.follower import solve_follower
from oig.instance import load_bundled
from oig.oracle import op_exact
from oig.tours import tour_length

inst = load_bundled("gr17", "u")
print(inst.label(), "budget", inst.distance_budget, "of a TSP tour of", inst.tsp_optimum)

# nothing interdicted: the follower's best is Phi(0)
res = solve_follower(inst)
print("Phi(0) =", res.value, "tour", [v + 1 for v in res.tour.nodes], "length", tour_length(res.tour, inst))
print("oracle agrees:", op_exact(inst)[0] == res.value)

# interdict a few of the visited nodes and watch the follower reroute
z = np.zeros(inst.n, dtype=int)
z[list(res.tour.nodes[1:4])] = 1
res2 = solve_follower(inst, z)
print("after interdicting", [int(i) + 1 for i in np.flatnonzero(z)], "->", res2.value,
      "tour", [v + 1 for v in res2.tour.nodes])

# a batch of random interdictions
rng = np.random.default_rng(0)
mismatches = 0
for _ in range(25):
    z = (rng.random(inst.n) < 0.3).astype(int)
    mismatches += solve_follower(inst, z).value != op_exact(inst, z)[0]
print("random z mismatches:", mismatches)
