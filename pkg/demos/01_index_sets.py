"""Index-set arithmetic: the bookkeeping currency of every order table.

An index set lists the (exponent, log-power) pairs an expansion at a
boundary face may use.  Composing kernels multiplies expansions, so index
sets add; half-density normalizations shift them.
"""

from fractions import Fraction

from acclab import IndexSet, INFINITE_ORDER, N, indexset_shift, indexset_sum
from acclab.indexsets import indexset_union, leading_order

smooth = IndexSet.of(0, name="smooth")
print("a smooth coefficient has index set", smooth)

print("\nmultiplying x^1 and x^2 expansions:")
print(" ", indexset_sum(IndexSet.of(1), IndexSet.of(2)),
      "-> leading", leading_order(indexset_sum(IndexSet.of(1), IndexSet.of(2))))

print("\nlog powers add when expansions multiply:")
both = indexset_sum(IndexSet.of((1, 1)), IndexSet.of((1, 1)))
print(" ", both, "-> leading", leading_order(both))

print("\ncanonicalization drops terms reachable by integer steps:")
e = IndexSet.of(0)
print("  {(0,0)} union shift({(0,0)}, 5) =", indexset_union([e, indexset_shift(e, 5)]))

print("\nhalf-density normalization is an exponent shift:")
print("  shift({(0,0)}, -1/2) =", indexset_shift(e, Fraction(-1, 2)))
print("  shift({(1,2)}, -(n+2)/2) =", indexset_shift(IndexSet.of((1, 2)), -(N + 2) / 2),
      "which at n=3 leads with",
      leading_order(indexset_shift(IndexSet.of((1, 2)), -(N + 2) / 2)).alpha.subs(n=3))

print("\ninfinite-order vanishing absorbs everything:")
print("  infinity + {(0,0)} =", indexset_sum(INFINITE_ORDER, e))
