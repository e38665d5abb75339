"""Verdict table for every catalog field under both differentiation backends.

    python3 scripts/classify_catalog.py --samples 100 --seed 42
"""

import argparse

from tfv import catalog, classifier

SHOWN = ("torse_forming", "concircular", "recurrent", "proper", "torqued", "anti_torqued")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    entries = [catalog.entry(id) for id in catalog.CATALOG]
    entries.append(catalog.sphere_torse(chart="south"))
    print(f"{'field':<18}{'space':<20}{'backend':<8}" + "".join(f"{k[:10]:>11}" for k in SHOWN)
          + f"{'max resid':>11}{'|V| const':>10}")
    for e in entries:
        pts = e.sample(args.samples, args.seed)
        lr = classifier.length_and_geodesic(e.space, e.field, pts)
        for backend in ("exact", "fd"):
            v = classifier.classify_region(e.space, e.field, pts, backend=backend)
            flags = "".join(f"{'yes' if v.flags[k] else '-':>11}" for k in SHOWN)
            print(f"{e.id:<18}{e.space.label:<20}{backend:<8}{flags}{v.max_residual:11.1e}"
                  f"{'yes' if lr.length_constant else '-':>10}")


if __name__ == "__main__":
    main()
