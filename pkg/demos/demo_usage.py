"""Which units ever fire?

With winner-take-all and rows chosen blindly on the sphere, inputs confined
to a circle only ever activate the few units whose rows happen to fall near
that circle: the used count grows like m^{1/(d-1)}, a vanishing fraction.
Calibrated thresholding instead guarantees every unit fires at its target
rate.
"""

import math

import sparsecode as sc
from sparsecode.metrics import run_usage_probe

D = 5


def main():
    man = sc.circle(D)
    print(f"circle inputs in R^{D}, winner-take-all k=1, rows uniform on the sphere")
    print(f"{'m':>6} {'used':>6} {'fraction':>9}")
    for m in [512, 2048, 8192, 32768]:
        theta = sc.build_expansion(sc.uniform_sphere(D), m, seed=101)
        profile = run_usage_probe(theta, sc.KWinners(1), man, probe_size=50_000, seed=5)
        print(f"{m:6d} {profile.ever_used_count:6d} {profile.ever_used_count / m:9.4f}")
    print(f"(expected growth: m^(1/{D - 1}) = m^{1 / (D - 1):.2f})")

    m = 4096
    k = math.ceil(3 * math.log(m))
    theta = sc.build_expansion(sc.uniform_sphere(D), m, seed=101)
    tau = sc.calibrate_thresholds(theta, man, k=k, n_cal=100 * m // k, seed=6)
    profile = run_usage_probe(theta, tau, man, probe_size=100_000, seed=7)
    print(f"\nthresholding at m={m}, target rate k/m={k}/{m}:")
    print(f"  every unit fired: {profile.per_unit_fire_count.min() >= 1} "
          f"(least active unit fired {int(profile.per_unit_fire_count.min())} times)")


if __name__ == "__main__":
    main()
