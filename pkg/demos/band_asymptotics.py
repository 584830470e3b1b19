"""Show the three high-energy regimes of the shell lattice, side by side.

One lattice per interaction family: a delta comb whose gaps settle at a
constant energy width, a trace-dominated coupling whose band/gap ratio
settles at a constant, and a derivative coupling whose bands settle while
the gaps swallow everything else.  The fitted exponent mu of the band/gap
ratio distinguishes the three (-1, 0, +1).
"""

import math

from shellspectra import LatticeGeometry, asymptotics_report, classify, make_interaction

CASES = [
    ("value coupling (alpha = 1, d = pi)", make_interaction(1.0, 0.0, 1.0, 1.0),
     LatticeGeometry(d=math.pi), "gap width", 2.0 / math.pi),
    ("trace coupling (gamma + delta = 2.5)", make_interaction(0.0, 0.0, 2.0, 0.5),
     LatticeGeometry(d=1.0), "band/gap ratio", math.asin(0.8) / math.acos(0.8)),
    ("derivative coupling (beta = 1, d = 1)", make_interaction(0.0, 1.0, 1.0, 1.0),
     LatticeGeometry(d=1.0), "band width", 8.0),
]


def main() -> None:
    for title, p, geom, quantity, predicted in CASES:
        cls = classify(p, geom)
        rep = asymptotics_report(p, geom, 30)
        print(f"\n{title}  [{cls.kind.value}, mu = {cls.mu_exponent:+d}]")
        print(f"  {'band':>4} {'E range':>22} {'width':>10} {'gap after':>10} {'ratio':>8}")
        for row in rep.rows[:30]:
            if row.index % 4 or not math.isfinite(row.gap_after_e):
                continue
            ratio = row.width_e / row.gap_after_e
            print(f"  {row.index + 1:4d} [{row.e_lower:9.2f},{row.e_upper:9.2f}]"
                  f" {row.width_e:10.4f} {row.gap_after_e:10.4f} {ratio:8.3f}")
        rel = abs(rep.measured_constant - predicted) / predicted
        print(f"  {quantity} tail average {rep.measured_constant:.5f}"
              f"  (predicted {predicted:.5f}, off by {rel:.2%})")
        print(f"  fitted ratio exponent mu = {rep.fitted_mu:+.3f}")


if __name__ == "__main__":
    main()
