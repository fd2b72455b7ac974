"""Periodic orbit of the delayed van der Pol oscillator, two expansions.

Computes the orbit q'' + q = mu (1 - q^2) q'(t - 1/2) order by order with
the plain series in mu and with the series in rho = mu/(1 + mu), prints
the frequency corrections and amplitudes, and shows that the equation
residual shrinks like mu^(P+1).
"""

import numpy as np

from ddefloquet import expand_pl, expand_shohat, oscillator_residual
from ddefloquet.systems import s2_model

model = s2_model()

print("order-by-order data at mu = 0.1, P = 2")
print("=" * 54)
for name, expand in (("mu series", expand_pl), ("rho series", expand_shohat)):
    exp = expand(model, 0.1, 2)
    print(f"{name}: parameter = {exp.parameter:.6f}")
    print(f"  frequency coefficients: {[f'{w:.6f}' for w in exp.freq_coeffs]}")
    print(f"  amplitudes:             {[f'{a:.6f}' for a in exp.amplitudes]}")
    print(f"  omega(mu) = {exp.omega():.10f}")
    print(f"  rms equation residual = {oscillator_residual(exp):.3e}")

print()
print("residual scaling: slope of log(residual) vs log(mu)")
print("=" * 54)
mus = [0.01, 0.02, 0.05, 0.1]
for order in (1, 2):
    res = [oscillator_residual(expand_pl(model, mu, order)) for mu in mus]
    slope = np.polyfit(np.log(mus), np.log(res), 1)[0]
    print(f"  P = {order}: residuals {['%.2e' % r for r in res]} -> slope {slope:.3f}")

print()
print("series agreement: |x_PL2 - x_Shohat2| versus 10 mu^3")
print("=" * 54)
for mu in (0.02, 0.05, 0.1):
    pl = expand_pl(model, mu, 2)
    sh = expand_shohat(model, mu, 2)
    diff = (pl.assemble() - sh.assemble()).norm()
    print(f"  mu = {mu}: difference {diff:.3e}, bound {10 * mu**3:.3e}")
