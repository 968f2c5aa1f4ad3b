"""
How interdiction reshapes the follower's tour on bayg29
=======================================================

Unit prizes, depot at node 1, distance budget half the optimal TSP
length. The leader's optimum and the follower's reply are printed for
three interdiction budgets; the prize drops from 16 to 12 to 11.
"""
from oig.follower import solve_follower
from oig.instance import load_bundled
from oig.leader import solve_oig

for q in (0, 5, 8):
    inst = load_bundled("bayg29", "u", q)
    res = solve_oig(inst, "IFHC")
    reply = solve_follower(inst, res.z)
    print(f"Q={q}: value {res.value:.0f} in {res.seconds:.1f}s")
    print("  interdicted:", [i + 1 for i in res.interdicted])
    print("  follower tour:", [v + 1 for v in reply.tour.nodes])
