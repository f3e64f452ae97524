"""Heat-calculus composition: closed forms against the pushforward pipeline.

The scattering composition is computed twice: by the closed-form rule and
by lifting both factors to the triple heat space, multiplying, adding the
density corrections and pushing forward along the center projection.  The
two agree exactly, with integrability requiring negative diagonal orders.
"""

from fractions import Fraction

from acclab.calculus import (CalculusOrders, CompositionError,
                             canonical_kernel_orders, conic_compose,
                             lifted_heat_operator_table, sc_compose,
                             sc_compose_pipeline)
from acclab.indexsets import IndexSet

a = CalculusOrders("sc", -2, {"110": IndexSet.of((0, 0), (2, 1)),
                              "220": IndexSet.of(0)})
b = CalculusOrders("sc", Fraction(-5, 2), {"110": IndexSet.of(1),
                                           "220": IndexSet.of((3, 2))})
closed = sc_compose(a, b)
piped = sc_compose_pipeline(a, b)
print("closed form :", closed.k, {f: str(s) for f, s in closed.face_sets.items()})
print("pipeline    :", piped.k, {f: str(s) for f, s in piped.face_sets.items()})
assert closed.face_sets["110"].terms == piped.face_sets["110"].terms

print("\nconic preconditions are enforced by name:")
el = CalculusOrders("conic", 0, {"100": IndexSet.of(1), "010": IndexSet.of(1),
                                 "112": IndexSet.of(2)})
try:
    conic_compose(el, el)
except CompositionError as exc:
    print("  ", exc)

print("\ncanonical kernel leading orders:")
for kind in ("b_heat_kernel", "conic_heat_kernel", "sc_heat_kernel",
             "acc_heat_kernel"):
    el = canonical_kernel_orders(kind)
    print(f"  {kind}: {el.leading_orders()}")

print("\nlifted heat operator at the degenerate faces:")
for row in lifted_heat_operator_table():
    time = f", time {row.rescaled_time}" if row.rescaled_time else ""
    print(f"  F_{row.face}: prefactor {row.prefactor}, model "
          f"{row.model_operator}{time}")
