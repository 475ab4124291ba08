"""How the asymptotic error decays in time.

The leading term itself decays like t^-1/2; the error of the leading term
should decay faster, like ln t / t.  This demo fits both laws to the
measured maximum error and looks at the edge of the oscillatory sector.
"""

# %%
import numpy as np

from tzitzeica import asymptotics as asy
from tzitzeica import harness
from tzitzeica.config import default_config

# a synthetic error that follows ln t / t exactly: the log-log slope over
# t in [20, 50] is about -0.71, not -1
t = np.array([20.0, 30.0, 40.0, 50.0])
fit = harness.fit_error_decay(zip(t, 2 * np.log(t) / t))
print(f"synthetic: C = {fit.C:.3f}, slope = {fit.exponent_check:.3f}")

# %% measured
report = harness.run_comparison(default_config())
fit = report.fit
print(f"measured: C = {fit.C:.4f}, slope = {fit.exponent_check:.3f}")
print(f"log residual of ln t/t fit: {fit.rms_log_resid_lnt:.3f}")
print(f"log residual of t^-1/2 fit: {fit.rms_log_resid_sqrt:.3f}")
print("t^-1/2 rejected:", fit.sqrt_rejected)

# %% towards the cone the exponent nu(lambda0) collapses and so does the field
table = report.table
for ratio in (0.0, 0.5, 0.8, 0.85, 0.9, 0.999):
    lam0 = np.sqrt((1 - ratio) / (1 + ratio))
    p = asy.asymptotic_params(table, lam0)
    u = asy.u_asymptotic(ratio * 50.0, 50.0, table)
    print(f"x/t = {ratio:5.3f}  lambda0 = {lam0:.4f}  nu = {p.nu1:.2e}  u_asym(t=50) = {u: .2e}")
