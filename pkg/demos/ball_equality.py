"""Biharmonic Steklov q1 against the boundary-to-volume ratio.

Balls and spherical caps attain the ratio; the ellipse and the square sit
strictly below it, and the torsion flux explains why: it is constant along
the boundary only on the round domains.
"""

import math

from speclab.eig import richardson
from speclab.mesh import cap, disk, ellipse, square
from speclab.verify import Study

DOMAINS = [disk(1.0), cap(math.pi / 3), cap(math.pi / 2), ellipse(1.0, 0.6), square(1.0)]

print(f"{'domain':16s} {'q1':>10s} {'ratio':>10s} {'flux score':>11s}")
for tag in DOMAINS:
    study = Study(tag, 0.15, levels=3)
    q1 = richardson(*study.values("bs", 0)).value
    ratio = richardson(*[g.ratio for g in (study.geometry(lv) for lv in range(3))]).value
    score, _ = study.harmonic_score()
    print(f"{str(tag):16s} {q1:10.5f} {ratio:10.5f} {score:11.2e}")
