"""Constants that set the size of the binding shift for a square well.

Run with ``python demos/threshold_constants.py``.
"""

# %%
# The unit square well W = -1 on the unit ball binds at lambda0 = pi^2/4.
import numpy as np

from enhanced_binding import field as fld
from enhanced_binding.potential import c_w_constant, d_functional, indicator_well, squared
from enhanced_binding.schrodinger import critical_coupling
from enhanced_binding.selfenergy import eta_squared, theta_norm2

W = indicator_well()
lam0 = critical_coupling(W)
print(f"lambda0        = {lam0:.15f}   (pi^2/4 = {np.pi**2 / 4:.15f})")

# %%
# W_+ vanishes for an attractive well, so C_W only needs d of W^2.
rep = d_functional(squared(W))
print(f"d_W^2 branches : double {rep.double_integral:.10f}, radial {rep.radial:.10f}")
cw = c_w_constant(lam0, W)
print(f"C_W            = {cw:.12f}   (pi^4/32 = {np.pi**4 / 32:.12f})")

# %%
# eta^2 falls off as C_W grows; the gradient dressing theta has norm
# well below eta^2.
cut = fld.CutoffProfile()
for c in (0.0, 1.0, cw, 10.0):
    print(f"C = {c:8.4f}  eta^2 = {eta_squared(cut, c):.12f}")
print(f"||theta_i||^2  = {theta_norm2(cut, cw):.12f}")
