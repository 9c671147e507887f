"""Why the detected phase behaves like an intensity-normalized Laplacian.

For a weak kernel eps*phi the detected phase is eps times -G/E to first
order, with G the kernel-weighted field and E the low-passed field. A
quadratic kernel makes G proportional to the Laplacian of E.
Run: python3 demos/02_small_phase.py
"""

import numpy as np

from phase_refinery import (
    KernelFamily,
    build_frequency_grid,
    build_lowpass,
    build_quadratic_kernel,
    laplacian_reference,
    small_phase_convergence,
    small_phase_reference,
)
from phase_refinery.fixtures import smooth_blob

blob = smooth_blob(64)

for family in KernelFamily:
    print(family.value)
    results = small_phase_convergence(blob, family, (0.2, 0.1, 0.05, 0.025, 0.0125))
    prev = None
    for r in results:
        ratio = "" if prev is None else f"  ratio {r.max_abs_error / prev:.3f}"
        print(f"  eps={r.epsilon:<7} normalized error {r.max_abs_error:.3e}{ratio}")
        prev = r.max_abs_error
print("halving eps quarters the error: the residual is second order")

grid = build_frequency_grid(64, 64)
ref = small_phase_reference(blob, build_quadratic_kernel(grid, 1e-3), build_lowpass(grid, 0.15)).psi
lap = laplacian_reference(blob).values
inner = (slice(4, -4), slice(4, -4))
r = np.corrcoef(ref[inner].ravel(), lap[inner].ravel())[0, 1]
print(f"Pearson(small-phase reference, 5-point Laplacian / E) on the interior: {r:.5f}")
