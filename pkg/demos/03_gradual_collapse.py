"""Many weak measurements in a row collapse the state gradually.

For each theta the fraction of the initial entropy that the outcome record
has extracted approaches 1 exponentially; the e-folding count N* is fitted
and compared with ln2 / (2 (theta - pi/4)^2).  Writes gradual_collapse.png
next to this script when matplotlib is available.
"""

import math
from pathlib import Path

from mmsim import (
    asymptotic_nstar,
    default_theta_grid,
    extraction_curve,
    nstar_curve_length,
    nstar_sweep,
)

thetas = default_theta_grid()
fits = nstar_sweep(thetas, c0_sq=0.5)
fits_biased = nstar_sweep(thetas, c0_sq=0.1)

print(" theta    N*_fit  N*_fit(c0^2=0.1)  N*_asym  rel.err")
for theta, a, b in zip(thetas, fits, fits_biased):
    if a is None:
        continue
    print(f" {theta:.2f}  {a.n_star_fit:8.2f}  {b.n_star_fit:16.2f}  {a.n_star_asymptotic:7.2f}  {a.rel_err:.3f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit("matplotlib not installed; skipping the figure")

fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
ok = [(t, a.n_star_fit, b.n_star_fit) for t, a, b in zip(thetas, fits, fits_biased) if a and b]
left.semilogy([t for t, *_ in ok], [a for _, a, _ in ok], "o", ms=3, label="fit, c0^2 = 0.5")
left.semilogy([t for t, *_ in ok], [b for *_, b in ok], "x", ms=3, label="fit, c0^2 = 0.1")
dense = [t / 200 * math.pi / 2 for t in range(1, 200)]
for side, label in ((-1, "ln2 / 2(theta - pi/4)^2"), (1, None)):
    ts = [t for t in dense if side * (t - math.pi / 4) > 0.03]
    left.semilogy(ts, [asymptotic_nstar(t) for t in ts], "--", color="tab:green", label=label)
left.set_xlabel("theta")
left.set_ylabel("N*")
left.legend()
for theta in (0.45, 0.6, 0.7):
    curve = extraction_curve(0.5, 0.5, theta, nstar_curve_length(theta, factor=4))
    right.plot(curve.N, curve.fractions, label=f"theta = {theta}")
right.set_xlabel("N")
right.set_ylabel("extracted fraction")
right.legend()
fig.tight_layout()
out = Path(__file__).with_name("gradual_collapse.png")
fig.savefig(out, dpi=120)
print("wrote", out)
