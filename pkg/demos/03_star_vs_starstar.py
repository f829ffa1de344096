"""Two measures of the convective error.

|a.grad e|_* tests a.grad e against bubbles, while |a.grad e|_** is a
weighted sup norm.  For the outflow layer with eps = 1e-4 the sup norm is
of size 1/eps early on and sits orders of magnitude above |.|_*.  The
element mean of a.grad e follows |.|_*, and the deviation from that mean
follows |.|_**.  For the milder interior layer u3 the two measures agree
within a small factor the whole time.
"""
from maxnorm_afem import AdaptConfig, StabilizationKind, adapt_loop

supg = StabilizationKind.supg()


def table(problem, eps, max_dof):
    print("%s, eps=%g" % (problem, eps))
    print("  %8s %10s %10s %10s %10s" % ("dof", "star", "starstar", "mean part", "osc part"))
    for r in adapt_loop(AdaptConfig(problem=problem, eps=eps, max_dof=max_dof, stab=supg)).records:
        print("  %8d %10.3e %10.3e %10.3e %10.3e"
              % (r.dof, r.star, r.starstar, r.proj_term, r.osc_term))


table("u2", 1e-4, 60_000)
table("u3", 1e-5, 40_000)
