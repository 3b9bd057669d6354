"""How much mass must sit near a dense reference set?

Given the mass p of a reference set and the probability c_beta that a
b-sample is beta-connected, R(p) is the smallest mass its l*beta-extension
can have. Higher connectivity forces more concentration.
"""
import numpy as np

from topodense import critical_mass_holds, min_extension_mass, psi

b = 8
print("psi(0.1, 0.3; b=4, l=1) =", round(psi(0.1, 0.3, 4, 1), 6))

print("\n   p    R(c=0.5) R(c=0.9) R(c=0.99)   (b=8, l=1)")
for p in np.linspace(0.05, 0.5, 10):
    rs = [min_extension_mass(p, 1, b, c) for c in (0.5, 0.9, 0.99)]
    print(f"{p:5.2f}  " + "  ".join(f"{r:7.4f}" for r in rs))

print("\nlarger l (longer bridges allowed) weakens the guarantee:")
for l in (1, 2, 3, 4):
    print(f"  l={l}: R(0.1) = {min_extension_mass(0.1, l, b, 0.9):.4f}")

# Strict concentration needs 1 - c_beta < 1 - p^b - (1-p)^b.
print("\nconcentration strict at p=0.5, c=0.5:", critical_mass_holds(0.5, b, 0.5))
print("concentration strict at p=0.001, c=0.5:", critical_mass_holds(0.001, b, 0.5))
