"""Cross-checking the stationary laws with a reflected Euler-Maruyama path.

A long projected Euler-Maruyama path of the limit diffusion should spend
time according to the stationary density: its occupation measure is an
independent route to the same law, so the KS distance between the two
quantifies both the scheme's boundary-layer bias (order sqrt(dt)) and the
quadrature density.
"""

from heavyq import (
    DiffusionSpec,
    LinearHazard,
    LinearROU,
    NonlinearHazard,
    ks_distance,
    simulate_reflected_sde,
    stationary_density,
    substream,
)

T_END, BURN = 5_000.0, 100.0

for label, spec in (
    ("linear absorption (reflected OU)", DiffusionSpec(0.0, 1.0, 2.0, LinearROU(1.0))),
    ("hazard absorption h(u) = u      ", DiffusionSpec(0.0, 1.0, 2.0, NonlinearHazard(LinearHazard(1.0)))),
):
    law = stationary_density(spec)
    print(label)
    for dt in (1e-3, 2.5e-4):
        rng = substream(99, 0)
        path = simulate_reflected_sde(spec, 0.0, T_END, dt, rng, record_stride=max(1, int(0.01 / dt)))
        occ = path.values[path.times > BURN]
        print(
            f"  dt = {dt:7.1e}: occupation mean {occ.mean():.4f} "
            f"(law {law.moment(1.0):.4f}), KS to density {ks_distance(occ, law):.4f}"
        )
    print()

print("Halving dt shrinks the KS roughly like sqrt(dt): the projection at the")
print("boundary slightly overloads the region near zero, which is the main")
print("discretization artifact of the projected scheme.")
