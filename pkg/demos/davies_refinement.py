"""Blurred position readout: quality squared against the kernel variance as the grid refines."""
from qmlab.scenarios import davies_refinement

print(f"{'n':>6} {'sigma^2':>20} {'rel. error':>11} {'central bias':>13}")
for row in davies_refinement((512, 1024, 2048)):
    print(f"{row['n']:6d} {row['sigma_squared']:20.16f} {row['relative_error']:11.2e} {row['central_bias']:13.2e}")
