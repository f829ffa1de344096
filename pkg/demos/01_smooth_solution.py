"""Smooth solution, uniform refinement.

u1 = sin(pi x) sin(pi y) with eps = 3e-3 and no stabilisation.  The max-norm
error drops like DOF^-1 from the start.  The estimator first follows the
faster DOF^-3/2 rate of the weighted convective error and then, once h
resolves eps, settles onto the DOF^-1 rate of the error itself.
"""
import numpy as np

from maxnorm_afem import AdaptConfig, adapt_loop
from maxnorm_afem.io import rates

config = AdaptConfig(problem="u1", eps=3e-3, refine_mode="uniform", max_dof=20_000)
records = adapt_loop(config).records

print("%8s %11s %11s %11s %8s" % ("dof", "err_max", "star", "eta_max", "ell_h"))
for r in records:
    print("%8d %11.3e %11.3e %11.3e %8.2f" % (r.dof, r.err_max, r.star, r.eta_max, r.ell_h))

dof = [r.dof for r in records]
for name in ("err_max", "star", "eta_max"):
    slopes = [s for *_, s in rates(dof, [getattr(r, name) for r in records]).pairs]
    print("%-8s" % name, " ".join("%6.2f" % s for s in slopes))

# the ratio eta / (ell_h err + star) stays within a narrow band
ratio = [r.eta_max / (r.ell_h * r.err_max + r.star + r.osc) for r in records]
print("eta / (ell err + star + osc): min %.2f  max %.2f" % (min(ratio), max(ratio)))

# same problem with eps = 1e-5: here alpha_T = 1 throughout and the estimator
# decreases like DOF^-1/2
rough = adapt_loop(AdaptConfig(problem="u1", eps=1e-5, refine_mode="uniform",
                               max_dof=5_000)).records
print("eps=1e-5 eta slopes:",
      np.round([s for *_, s in rates([r.dof for r in rough],
                                     [r.eta_max for r in rough]).pairs], 2))
