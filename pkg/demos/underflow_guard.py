"""Near-degenerate contracted frusta with and without the 1e-6 guard.

Coordinates that agree to ~1e-8 make the textbook divided differences
cancel; with the guard off some features leave [-1, 1].
"""

import numpy as np

from exact_ipe.analysis import near_degenerate_frusta, scan_underflow

vertices = near_degenerate_frusta(1000, seed=0)
for guard in (False, True):
    report = scan_underflow(vertices, 8, guard=guard)
    values = np.array([abs(v[4]) for v in report.violations])
    worst = f", worst |value| {values.max():.3g}" if values.size else ""
    print(f"guard {'on ' if guard else 'off'}: {report.n_violations} components outside [-1, 1]{worst}")
