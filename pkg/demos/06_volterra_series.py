"""Time-convolution powers and the factorial decay of their sup norms.

Residual error kernels act by convolution in time; their iterated powers
decay like C^j t^j/(j+1)!, which makes the correction series summable.
Scalar polynomial kernels convolve exactly in rational arithmetic.
"""

import numpy as np

from acclab.heat import GridKernel, PolyKernel, t_convolve, volterra_neumann

one = PolyKernel.monomial(0)
print("exact scalar powers of K == 1 (t^(j-1)/(j-1)!):")
for j in range(1, 6):
    print(f"  j={j}:", [str(c) for c in one.power(j).coeffs])

ts = np.linspace(0, 1.0, 161)
k = GridKernel.scalar(lambda t: t ** 2, ts)
rep = volterra_neumann(k, 6)
print("\ngrid kernel K = t^2 on [0, 1]:")
print("  sup norms:", ["%.3e" % s for s in rep.sup_norms])
print("  successive ratios:", ["%.2e" % r for r in rep.ratios])
print("  all below the t/j envelope:", rep.envelope_ok)
print("  fitted growth constant:", round(rep.fitted_c, 4))

phi = np.sin(np.pi * np.linspace(0, 1, 12))
w = np.full(12, 1 / 11)
vals = phi[:, None, None] * phi[None, :, None] * ts[None, None, :] ** 2
spatial = GridKernel(vals, ts, w)
twice = t_convolve(spatial, spatial)
print("\nspatial kernel convolution keeps the separable structure:")
print("  K*K at the grid center, t=1:", float(twice.values[6, 6, -1]))
