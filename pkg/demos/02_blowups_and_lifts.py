"""Corner spaces, blowups and defining-function lifts.

Each canonical heat space is a recorded blowup sequence; boundary defining
scalars acquire one factor of the new face function per order of vanishing
at the center (quadratic directions count twice).  The triple space's three
projections carry the composition bookkeeping.
"""

from acclab import build_space
from acclab.spaces import (heat_half_density_weight, lift_table_rows,
                           sc_triple_maps)
from acclab.corners import Monomial

for kind in ("b_heat", "conic_heat", "sc_heat"):
    sp = build_space(kind)
    print(f"{kind}: faces", [f.name for f in sp.faces])
    for var in ("x1", "t1"):
        print(f"   lift of {var}: {sp.lift(var)}")
    print(f"   heat half-density weight: {heat_half_density_weight(sp)}")
    print()

triple = build_space("sc_triple_heat")
print("triple heat space density lift of the product measure:")
print("  ", triple.density_lift(Monomial.one()))
print("   (the exponent 2n+1 at F_22200 is a calibrated override; the",
      "default codim-1 rule gives 2n)")

print("\nthe three projections and their defining-function lifts:")
for row in lift_table_rows():
    mark = "" if row.status == "mechanical" else "   <- published row differs"
    print(f"  ({row.map_name})* rho_{row.rho:<4} = {row.mechanical}{mark}")

print("\nall three derived projections are b-fibrations:")
for name, bmap in sc_triple_maps().items():
    ok, _ = bmap.is_b_fibration()
    print(f"  {name}: {ok}; interior faces {sorted(bmap.interior_faces())}")
