"""Run the brute-force oracle suite on a desk-size lattice.

Every reduced-space shortcut is checked against the unconstrained
tensor-product space: basis enumeration, Hamiltonian assembly, the Krylov
propagator, and the blocked entropy.

Run from the repository root:  python demos/self_check.py
Equivalent CLI:  z2monitor verify --L 6 --x 0.5 --gamma 0.5
"""

from z2monitor import CouplingParams, LatticeSpec, TimeGrid
from z2monitor.experiment import RunConfig, verify

config = RunConfig(
    lattice=LatticeSpec(6),
    params=CouplingParams(x=0.5, gamma=0.5, measurement="flux"),
    grid=TimeGrid(dt=0.1, total_time=10.0),
)
report = verify(config)
for line in report.lines():
    print(line)
print("\nall checks passed" if report.passed else "\nSOME CHECKS FAILED")
