"""Probe the boundary spectral density through the half-line m-function.

Im m(E + i*eps) read at the origin acts as an eps-smeared density of the
spectral measure.  Shrinking eps separates the two spectral types cleanly:
over a band the value settles at a positive constant (absolutely continuous
weight), over a gap it drains linearly to zero (no weight, only possibly a
distant eigenvalue spike feeding a Lorentzian tail).
"""

import math

from shellspectra import (
    ChannelSpec,
    LatticeGeometry,
    band_structure,
    m_function_estimate,
    make_interaction,
)

LADDER = (1e-1, 1e-2, 1e-3, 1e-4)


def main() -> None:
    p = make_interaction(1.0, 0.0, 1.0, 1.0)
    geom = LatticeGeometry(d=math.pi)
    ch = ChannelSpec(3, 0)
    bs = band_structure(p, geom, e_max=6.0)

    probes = [
        ("mid-band", 0.5 * sum(bs.bands[0])),
        ("mid-gap", 0.5 * sum(bs.gaps[0])),
        ("second band", 0.5 * sum(bs.bands[1])),
        ("second gap", 0.5 * sum(bs.gaps[1])),
    ]

    print(f"{'probe':>12} {'E':>9} " + " ".join(f"Im m({eps:g})".rjust(13) for eps in LADDER))
    for label, e in probes:
        ims = [m_function_estimate(ch, p, geom, e, eps, r_max=100.0).im_m
               for eps in LADDER]
        print(f"{label:>12} {e:9.4f} " + " ".join(f"{v:13.4e}" for v in ims))

    print("\nreading: constant row = band (ac weight),"
          " row shrinking 10x per step = gap (linear drain)")


if __name__ == "__main__":
    main()
