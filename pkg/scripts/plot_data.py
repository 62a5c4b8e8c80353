"""Plot-ready CSVs (s, x1..x3, kappa, tau, angle) for the logarithmic spiral and the cone loxodrome.

    python3 scripts/figure1_data.py --outdir results/plots
"""

import argparse
from pathlib import Path

from slanthelix.cli import plot_csv
from slanthelix.curvegeo import frenet_apparatus
from slanthelix.fields import builtin_field
from slanthelix.slant import angle_function
from slanthelix.synthesis import builtin_curve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results/plots")
    ap.add_argument("--samples", type=int, default=401)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("log_spiral", "cone_loxodrome"):
        curve = builtin_curve(name, n=args.samples)
        fr = frenet_apparatus(curve)
        angle = angle_function(curve, fr, builtin_field("radial_unit", curve.metric))
        path = out / f"{name}.csv"
        path.write_text(plot_csv(fr, angle))
        print(f"{path}: order {fr.order}, angle in [{angle.min():.9f}, {angle.max():.9f}]")


if __name__ == "__main__":
    main()
