"""Stationary laws of the two limit diffusions.

With unscaled patience only the slope F'(0) of the patience distribution at
zero survives scaling, giving a reflected Ornstein-Uhlenbeck process whose
stationary law is a normal truncated to [0, inf) with closed-form mean.
Hazard-rate scaling keeps the whole hazard shape h, giving a reflected
diffusion with drift theta/lambda - int_0^v h and stationary density
proportional to exp((2/sigma^2)[(theta/lambda) v - int_0^v H]).
"""

import numpy as np

from heavyq import (
    ConstantHazard,
    DiffusionSpec,
    LinearHazard,
    LinearROU,
    NonlinearHazard,
    abandonment_limit,
    mean_rou,
    stationary_density,
)

print("reflected OU mean, closed form vs quadrature")
print(f"{'theta':>6} {'sigma2':>7} {'F_p0':>5} {'closed form':>12} {'quadrature':>12}")
for theta in (-1.0, 0.0, 1.0):
    spec = DiffusionSpec(theta, 1.0, 2.0, LinearROU(1.0))
    law = stationary_density(spec)
    print(f"{theta:6.1f} {2.0:7.1f} {1.0:5.1f} {mean_rou(spec):12.8f} {law.moment(1.0):12.8f}")

print("\nA constant hazard gamma makes both limits coincide:")
rou = DiffusionSpec(0.0, 1.0, 2.0, LinearROU(1.0))
nl = DiffusionSpec(0.0, 1.0, 2.0, NonlinearHazard(ConstantHazard(1.0)))
law_rou, law_nl = stationary_density(rou), stationary_density(nl)
print("sup |density difference| =", np.max(np.abs(law_rou.density - law_nl.density)))

print("\nA linearly growing hazard h(u) = u bends the tail (density ~ exp(-v^3/6)):")
cubic = DiffusionSpec(0.0, 1.0, 2.0, NonlinearHazard(LinearHazard(1.0)))
law_cubic = stationary_density(cubic)
print(f"mean  : {law_cubic.moment(1.0):.6f}  (OU comparison: {law_rou.moment(1.0):.6f})")
print(f"var   : {law_cubic.moment(2.0) - law_cubic.moment(1.0) ** 2:.6f}")

print("\nScaled abandonment limits sqrt(n) P_a -> E[int_0^V h]:")
for name, spec, law in (
    ("exponential patience", rou, law_rou),
    ("linear hazard      ", cubic, law_cubic),
):
    print(f"  {name}: {abandonment_limit(spec, law):.6f}")

law_cubic.write_csv("law_cubic.csv")
print("\nwrote law_cubic.csv (columns x, density) for plotting")
