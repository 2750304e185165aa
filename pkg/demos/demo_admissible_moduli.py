"""Classifying decay moduli against the endpoint rate.

A decreasing modulus is admissible when sqrt(A) * omega(exp(exp(2 A log A)))
grows without bound; admissible moduli decay strictly slower than the
endpoint rate (loglog N)^(-1/2) and are therefore all covered by the same
counterexample.  Everything is evaluated on the u = loglog N scale, so the
double exponential never materializes.
"""

from spikeblocks.regimes import admissible_check, modulus_loglog, modulus_logloglog

cases = [
    ("(logloglog N)^-2 ", modulus_logloglog(2.0)),
    ("(logloglog N)^-5 ", modulus_logloglog(5.0)),
    ("(loglog N)^-1/4  ", modulus_loglog(0.25)),
    ("(loglog N)^-1/2  ", modulus_loglog(0.5)),
]

print(f"{'modulus':<20} {'admissible':<11} {'growth':>8} {'domination':>11}")
for name, omega in cases:
    rep = admissible_check(omega)
    print(f"{name:<20} {str(rep.admissible):<11} {rep.growth_ratio:>8.3f} "
          f"{rep.domination_constant:>11.4f}")

rep = admissible_check(modulus_logloglog(2.0))
print("\nquantity sqrt(A) * omega at exp(exp(2A log A)), sampled:")
for i in range(0, len(rep.A_grid), 8):
    print(f"  A = {rep.A_grid[i]:>12.0f}: {rep.quantity[i]:.4f}")
print("dips, then grows without bound: admissible.")
