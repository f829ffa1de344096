"""Outflow boundary layer: uniform versus adaptive refinement.

u2 has a layer of width eps at y = 1.  With eps = 1e-5 and SUPG, uniform
meshes never resolve it and the max-norm error stalls near 0.22.  Adaptive
refinement with the modified maximum marking pushes the mesh into the layer;
once elements get close to eps in size the error starts to fall.

The estimator is much larger than err_max + osc for a long stretch, and it
follows the convective seminorm instead.  That gap is what the seminorm is
there to capture.
"""
from maxnorm_afem import AdaptConfig, StabilizationKind, adapt_loop

supg = StabilizationKind.supg()

print("uniform")
for r in adapt_loop(AdaptConfig(problem="u2", eps=1e-5, refine_mode="uniform",
                                max_dof=20_000, stab=supg)).records:
    print("  %8d  err %.3e  eta %.3e" % (r.dof, r.err_max, r.eta_max))


def show(rec, mesh, u_h, report):
    # fraction of elements sitting in the top 1% strip
    top = (mesh.centroids[:, 1] > 0.99).mean()
    print("  %8d  err %.3e  star %.3e  eta %.3e  eta/(err+osc) %6.1f  top %.2f"
          % (rec.dof, rec.err_max, rec.star, rec.eta_max,
             rec.eta_max / (rec.err_max + rec.osc), top))


print("adaptive (K_max = 4)")
adapt_loop(AdaptConfig(problem="u2", eps=1e-5, max_dof=100_000, stab=supg), on_step=show)
