"""How costly is selfish splitting? Price-of-anarchy bounds in action.

For any instance, the equilibrium social cost divided by a convex lower
bound on the optimal cost stays under an analytic cap driven by the worst
initial backlog and the job-to-capacity ratio. With empty starting queues
the cap collapses to 3, and in practice the measured ratio sits far below
it: selfish water-filling is nearly efficient here.
"""

import numpy as np

from lbgame import (
    Instance,
    empirical_poa,
    opt_lower_bound,
    poa_upper_bound,
    run_sequential_pass,
    social_cost,
)

rng = np.random.default_rng(7)

print(f"{'n':>3} {'m':>3} {'ratio':>8} {'cap':>9}")
worst = 0.0
for _ in range(12):
    n, m = int(rng.integers(2, 7)), int(rng.integers(2, 6))
    inst = Instance(
        rng.uniform(0.3, 2.0, n), rng.uniform(0.3, 2.5, m), rng.uniform(0.0, 4.0, m)
    )
    equilibrium, _ = run_sequential_pass(inst)
    ratio = empirical_poa(inst, equilibrium)
    worst = max(worst, ratio)
    print(f"{n:>3} {m:>3} {ratio:>8.4f} {poa_upper_bound(inst):>9.3f}")

print("\nworst measured ratio:", round(worst, 4))

# Empty queues: the cap is exactly 3, and the proportional equilibrium is
# in fact socially harmless beyond the unavoidable crowding term.
inst = Instance([1.0, 2.0, 0.5], [1.5, 2.5, 1.0])
equilibrium, _ = run_sequential_pass(inst)
print("\nempty queues:")
print("  analytic cap     :", poa_upper_bound(inst))
print("  equilibrium cost :", social_cost(inst, equilibrium))
print("  optimum bound    :", opt_lower_bound(inst))
print("  measured ratio   :", empirical_poa(inst, equilibrium))
