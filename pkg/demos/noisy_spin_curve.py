"""Quality, disturbance bound and reduction gap of the noisy spin readout."""
from qmlab.scenarios import parse_eps_grid, sigma_curve

rows = sigma_curve(parse_eps_grid("0:0.45:0.05"))
print(f"{'eps':>5} {'sigma':>10} {'hp rhs':>10} {'gap':>8}  status")
for row in rows:
    print(f"{row['eps']:5.2f} {row['sigma']:10.6f} {row['hpdelta_rhs']:10.6f} "
          f"{row['reduction_gap']:8.4f}  {row['gap_status']}")
