"""Cost of the Monte-Carlo pipeline versus M, with the exact pipeline for reference."""

import argparse

from protectability.bench import bench, rows_to_csv
from protectability.generate import GeneratorSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-noise", type=int, default=4, help="noise features; n = 6 + this")
    ap.add_argument("--m-list", default="50,100,150,200")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--no-exact", action="store_true")
    args = ap.parse_args()

    ds = generate(GeneratorSpec(family="overlap", seed=7, n_noise=args.n_noise))
    rows = bench(ds.table, ds.task, ds.private, [int(v) for v in args.m_list.split(",")],
                 repeats=args.repeats, include_exact=not args.no_exact)
    print(rows_to_csv(rows), end="")
    mc = {r.m_samples: r for r in rows if r.pipeline == "mc"}
    if 50 in mc and 200 in mc:
        print(f"# wall ratio M=200/M=50: {mc[200].wall_time_s / mc[50].wall_time_s:.2f}")
    exact = [r for r in rows if r.pipeline == "exact"]
    if exact and 200 in mc:
        e, m = exact[0], mc[200]
        print(f"# exact/MC(200): evaluations {e.game_evaluations / m.game_evaluations:.2f}x, "
              f"wall {e.wall_time_s / m.wall_time_s:.2f}x")


if __name__ == "__main__":
    main()
