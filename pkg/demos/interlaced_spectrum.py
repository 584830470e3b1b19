"""Assemble the full-space spectrum of a concentric-shell system.

The essential spectrum is the positive half-line from the lowest 1D band
edge on.  What the map adds is the fine structure: on the 1D bands the
operator is absolutely continuous in every partial-wave channel, while
inside each 1D gap the channels drop a ladder of genuine eigenvalues that
fill the gap ever more densely as l grows.  The script prints the tiling
and, per gap, how the largest eigenvalue-free subinterval shrinks.
"""

import argparse
import math

from shellspectra import LatticeGeometry, SpectralKind, build_spectrum_map, make_interaction


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--l-max", type=int, default=12, help="highest partial wave")
    ap.add_argument("--r-max", type=float, default=40.0, help="truncation radius")
    args = ap.parse_args()

    p = make_interaction(1.0, 0.0, 1.0, 1.0)
    geom = LatticeGeometry(d=math.pi)
    smap = build_spectrum_map(p, geom, nu=3, e_cutoff=18.0,
                              l_range=(0, args.l_max), r_max=args.r_max)

    print(f"essential spectrum starts at e0 = {smap.e0:.6f}")
    print("\ninterval tiling:")
    for iv in smap.intervals:
        tag = "ac " if iv.kind is SpectralKind.ABSOLUTELY_CONTINUOUS else "pp?"
        n_inside = sum(
            1 for eigs in smap.channel_eigenvalues.values()
            for e in eigs if iv.lo < e < iv.hi
        )
        extra = f"  ({n_inside} channel eigenvalues)" if tag == "pp?" else ""
        print(f"  {tag} [{iv.lo:9.4f}, {iv.hi:9.4f}]{extra}")

    print("\nper-channel eigenvalues in the first gap:")
    lo, hi = next((iv.lo, iv.hi) for iv in smap.intervals
                  if iv.kind is SpectralKind.DENSE_POINT_CANDIDATE)
    for l, eigs in sorted(smap.channel_eigenvalues.items()):
        inside = [e for e in eigs if lo < e < hi]
        if inside:
            print(f"  l = {l:2d}: " + ", ".join(f"{e:.5f}" for e in inside))

    metric = smap.diagnostics["largest_empty_subinterval"]
    print("\nlargest empty subinterval per gap (fraction of gap width):")
    for gap, frac in metric.items():
        print(f"  gap {gap}: {frac:.1%}")


if __name__ == "__main__":
    main()
