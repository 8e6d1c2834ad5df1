"""Analytic zero-energy localization length across the (gamma, W) plane.

No diagonalization is needed: Lambda^-1 follows from ensemble averages of
log|hopping|. Its zeros are the delocalization points where the winding
number jumps.
"""

import numpy as np

from nhssh import critical_disorder, localization_length

gammas = np.linspace(0.0, 1.0, 6)
ws = np.linspace(0.25, 3.0, 12)
table = np.array([[localization_length(0.7, g, w) for w in ws] for g in gammas])

print("inverse localization length, t' = 0.7, rows gamma, columns W")
print("gamma\\W " + " ".join(f"{w:5.2f}" for w in ws))
for g, row in zip(gammas, table):
    print(f"{g:6.2f}  " + " ".join(f"{v:5.2f}" for v in row))

for g in (0.2, 0.6, 1.0):
    print(f"gamma = {g}: W* = {[round(w, 3) for w in critical_disorder(0.7, g)]}")
