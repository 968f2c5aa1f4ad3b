"""
Genetic algorithm against the exact optimum
===========================================

The GA ranks interdiction vectors by an estimate built from a pool of
follower tours, then solves the follower exactly for its final pick.
Delta is the percent excess of that exact value over the leader optimum.
"""
from oig.ga import GaParams, evolve
from oig.instance import load_bundled
from oig.leader import solve_oig

for name, scheme, q in [("gr17", "u", 5), ("gr21", "r", 8), ("fri26", "u", 8)]:
    inst = load_bundled(name, scheme, q)
    exact = solve_oig(inst, "IFHC").value
    print(inst.label(), "exact", exact)
    for seed in range(3):
        res = evolve(inst, GaParams(seed=seed))
        print(f"  seed {seed}: estimate {res.estimate}  exact value {res.value}  "
              f"delta {res.delta(exact):5.2f}%  pool {res.pool_size}  {res.seconds:.1f}s")
