"""
Five settings of the leader's branch-and-cut
============================================

Each setting adds one feature to the previous one: fractional-point
separation (F), a pool heuristic before exact separation (H), a cut
pool shared by follower solves (C) and follower preprocessing (P).
All settings must agree on the optimum. They differ in effort.
"""
from oig.instance import load_bundled
from oig.leader import SETTINGS, solve_oig

for scheme, q in [("u", 5), ("r", 5), ("r", 8)]:
    inst = load_bundled("gr17", scheme, q)
    print(inst.label())
    for setting in SETTINGS:
        res = solve_oig(inst, setting)
        print(f"  {setting:6s} value {res.value:5.0f}  t {res.seconds:6.2f}s  nodes {res.nodes:4d}  "
              f"cuts {res.int_cuts}+{res.frac_cuts}  rGap {res.root_gap:5.1f}%  z {[i + 1 for i in res.interdicted]}")
