"""How fast does a hidden Markov chain forget its start?

Builds two two-state processes, one started at the stationary law and one
at a point mass, prints their uniform mixing coefficients against the
literal brute-force definition, and shows the dependence factor that
multiplies the concentration term of the certificate.
"""

import numpy as np

from mixcert import (
    EmissionSpec,
    MarkovSpec,
    ProcessSpec,
    brute_force_phi,
    mixing_profile,
    phi_coefficient,
    stationary_distribution,
)


def two_state(p_stay, initial):
    P = np.array([[p_stay, 1 - p_stay], [1 - p_stay, p_stay]])
    return ProcessSpec(
        markov=MarkovSpec(num_states=2, transition=P,
                          initial=np.asarray(initial, dtype=float)),
        emission=EmissionSpec.discrete(alphabet=np.array([[0.0], [1.0]]),
                                       table=np.eye(2)),
        label_map=(1, 2), num_classes=2, input_dim=1)


stationary_start = two_state(0.9, [0.5, 0.5])
delta_start = two_state(0.9, [1.0, 0.0])

print("stationary law:", stationary_distribution(stationary_start.markov))
print()
print("phi(k): analytic vs brute-force cylinder enumeration")
print(f"{'k':>3} {'stationary start':>18} {'point-mass start':>18} {'brute (stat)':>14}")
for k in (1, 2, 3, 4):
    a = phi_coefficient(stationary_start, k, horizon=10)
    b = phi_coefficient(delta_start, k, horizon=10)
    brute = brute_force_phi(stationary_start, k, n_max=3, future_len=3)
    print(f"{k:>3} {a:>18.12f} {b:>18.12f} {brute:>14.12f}")

# the whole profile at once, as the certificate consumes it
n = 200
prof = mixing_profile(delta_start, n)
print()
print(f"profile over a length-{n} sample (point-mass start):")
print("  phi exact:", prof.phi_exact, " mu exact:", prof.mu_exact)
print("  sum phi(k)  =", float(np.sum(prof.phi)))
print("  dependence factor 1 + 2*sum phi =", prof.delta_inf)
print("  mean marginal drift mu_bar      =", float(np.mean(prof.mu)))
print()
print("an iid kernel gives the trivial profile back:")
iid = two_state(0.5, [0.5, 0.5])
triv = mixing_profile(iid, 50)
print("  max phi =", float(np.max(triv.phi)), " max mu =", float(np.max(triv.mu)),
      " factor =", triv.delta_inf)
