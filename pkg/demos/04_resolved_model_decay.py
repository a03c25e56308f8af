"""The resolved model: Ricci-flat, and conical at infinity with rate -6.

The explicit potential on the crepant resolution of C^3/Z_3 gives a
complete Ricci-flat Kaehler metric. Its Ricci tensor is the complex
Hessian of log det h, evaluated here by central differences in extended
precision, and the deviation from the cone metric decays like r^-6.
"""

import numpy as np

from cyglue.analysis import kahler_ricci
from cyglue.cones import calabi_ale_o3

ale = calabi_ale_o3()
print("model:", ale.descriptor())

rng = np.random.default_rng(2)
dirs = rng.standard_normal((4, 6))
dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)

print(f"\n{'r':>6}  {'max |Ricci|':>12}")
for r in (0.1, 0.5, 1.0, 3.0, 10.0):
    ric = kahler_ricci(lambda x: ale.log_det_h(x, extended=True), r * dirs)
    print(f"{r:6.1f}  {np.abs(ric).max():12.3e}")

# dyadic ladder in the cone chart: slope of log |g - g_cone| vs log r
radii = 1.3 * 2.0 ** np.arange(6)
devs = np.array([np.abs(ale.metric_on_target(r * dirs).components
                        - np.eye(6)).max() for r in radii])
print(f"\n{'r':>7}  {'max |g - g_cone|':>16}")
for r, d in zip(radii, devs):
    print(f"{r:7.1f}  {d:16.3e}")
slope = np.polyfit(np.log(radii), np.log(devs), 1)[0]
print(f"\nfitted decay exponent: {slope:.4f}  (cone rate is -6)")
