"""Does refining first help a linear classifier generalize to a new site?

Textures encode the class by orientation; each synthetic site adds its own
tint and exposure. Site C is never seen in training and is also
unevenly lit. The classifier is linear on purpose so it cannot learn the
invariance itself.
Run: python3 demos/05_domain_shift.py [n_seeds]
"""

import sys

import numpy as np

from phase_refinery import RefineryConfig
from phase_refinery.domain_shift import run_seeds

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
reports = run_seeds(range(n), RefineryConfig())
print(f"{'seed':>4} {'arm':>10} {'train':>6} {'id val':>7} {'ood':>6}")
for r in reports:
    arm = "refined" if r.refined else "unrefined"
    print(f"{r.seed:>4} {arm:>10} {r.train_acc:6.3f} {r.id_val_acc:7.3f} {r.ood_acc:6.3f}")
for flag in (False, True):
    ood = np.array([r.ood_acc for r in reports if r.refined == flag])
    print(f"{'refined' if flag else 'unrefined':>10}: OOD {ood.mean():.3f} +/- {ood.std():.3f}")
