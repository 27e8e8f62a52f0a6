"""Integral measure discrepancies on small discrete measures.

The discrepancy compares two nonnegative measures through the largest gap
of integrals over a family of nonnegative functions.  Unlike an integral
probability metric it is asymmetric, which is exactly what makes it useful
for comparing a target against an inflated source.
"""

import numpy as np

from imdot import DiscreteMeasure, imd_bruteforce, imd_tv_closed_form
from imdot.families import indicator_family

atoms = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
family = indicator_family(atoms)

target = DiscreteMeasure(atoms, [0.5, 0.3, 0.2])
source = DiscreteMeasure(atoms, [0.8, 0.1, 0.1])

result = imd_bruteforce(target, source, family)
print("IMD(target, source) over all indicators:", result.value)
print("achieved by the indicator of atoms", np.flatnonzero(result.argmax_function))
print("closed form sum of positive parts:   ", imd_tv_closed_form(target, source))

# Asymmetry: doubling the second argument can only help it dominate.
q = DiscreteMeasure(atoms[:2], [0.25, 0.5])
fam2 = indicator_family(atoms[:2])
print("\nIMD(Q, 2Q) =", imd_bruteforce(q, q.scaled(2.0), fam2).value)
print("IMD(2Q, Q) =", imd_bruteforce(q.scaled(2.0), q, fam2).value)

# The null characterization: zero discrepancy means atomwise domination.
dominated = DiscreteMeasure(atoms, [0.5, 0.3, 0.2])
dominating = DiscreteMeasure(atoms, [0.6, 0.3, 0.4])
print("\ndominated pair gives",
      imd_bruteforce(dominated, dominating, family).value)
