"""Robin 1-form eigenvalues interpolate between Neumann and Dirichlet.

Sweeps the boundary parameter on the unit disk and prints the first
eigenvalue together with the extrapolated limit of each column.
"""

from speclab.eig import richardson
from speclab.mesh import disk
from speclab.verify import Study

study = Study(disk(1.0), 0.15, levels=3)
lam_n = richardson(*study.values("neumann", 1)).value
lam_d = richardson(*study.values("dirichlet", 1)).value
print(f"Neumann   {lam_n:.6f}")
for tau in (0.1, 0.5, 1.0, 2.0, 10.0, 1e4):
    lam = richardson(*study.values("robin", 1, tau=tau)).value
    print(f"tau={tau:<8g}{lam:.6f}")
print(f"Dirichlet {lam_d:.6f}")
