"""Self-energy of the zero-momentum fiber on vacuum + one photon.

Run with ``python demos/self_energy.py``.
"""

# %%
import numpy as np

from enhanced_binding import field as fld
from enhanced_binding import oracles
from enhanced_binding.selfenergy import PhotonGrid, scaling_check, sigma0_truncated

cut = fld.CutoffProfile()

# %%
# The fixed point E = -alpha F(E) sits just above inf L = -alpha F(0);
# the gap is second order in alpha.
print(" alpha      Sigma0             inf L              gap")
for alpha in np.geomspace(1e-4, 1e-1, 4):
    r = sigma0_truncated(alpha, cut)
    print(f"{alpha:7.0e}  {r.energy: .12e}  {r.inf_L: .12e}  {r.gap:.3e}")

# %%
# Cross-check against a dense diagonalisation of the same truncated operator.
alpha = 1e-2
dense = oracles.sigma0_dense(alpha, cut)
print(f"dense eigensolve {dense:.12e}, fixed point {sigma0_truncated(alpha, cut).energy:.12e}")

# %%
# The photon cloud grows like sqrt(alpha).
rep = scaling_check(np.geomspace(1e-4, 1e-1, 7), PhotonGrid(cut))
for name, e in rep.exponents.items():
    print(f"{name:18s} exponent {e:.4f}")
