"""Spectral convergence of the degenerating families, at desk scale.

Eigenvalue curves of the eps-family accumulate exactly on the conic limit
spectrum (Bessel zeros), with multiplicities: plain spherical-harmonic
dimensions for the capped family, doubled for the two-sided neck.
"""

from acclab.geometry import WarpFamily
from acclab.spectral import SLGrid, conic_reference_spectrum, spectral_flow

SCHEDULE = [0.2, 0.1, 0.05, 0.025, 0.0125]

for profile in ("capped", "neck"):
    fam = getattr(WarpFamily, profile)(n=3, c=1.0, mode_count=7)
    flow = spectral_flow(fam, SCHEDULE, SLGrid(1024), count=3, ell_max=3)
    print(f"--- {profile} family, n=3, c=1 ---")
    ref = conic_reference_spectrum(fam, 3, ell_max=3)
    print("limit spectrum (first values):",
          [round(e["lam"], 4) for e in ref.entries[:5]])
    for cl in sorted(flow.clusters, key=lambda c: c.center)[:6]:
        print(f"  cluster {cl.center:9.4f}  mult {cl.multiplicity}  "
              f"matches {cl.matched_reference:9.4f}  gap {cl.gap:.2e}")
    v = flow.verdict
    print("  inclusions:", v["forward_inclusion"] and v["reverse_inclusion"],
          "| multiplicities:", v["multiplicities_match"])
    # a sample curve and its empirical convergence rate
    key = (0, "odd", 1) if profile == "neck" else (0, "", 1)
    print("  lambda_1 curve:", [round(l, 5) for l in flow.curves[key]],
          f"empirical rate ~ {flow.rates[key]:.2f}")
    print()

print("the capped c=1 family is the flat ball: its curves are constant in eps")
print("(a removable singularity), so the clusters above sit at machine precision")
