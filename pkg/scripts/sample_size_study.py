"""How the estimated P-score moves with M, against the exact value, over several seeds."""

import argparse

import numpy as np

from protectability.core import AnalysisConfig
from protectability.generate import GeneratorSpec, generate
from protectability.metrics import ppe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m-list", default="50,100,150,200")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--sampler", default="unbiased", choices=("unbiased", "paper"))
    args = ap.parse_args()

    ds = generate(GeneratorSpec(family="overlap", seed=7, rho=args.rho))
    exact = ppe(ds.table, ds.task, ds.private, AnalysisConfig(sampler="exact")).score
    print(f"exact P-score {exact:.4f}")
    print("M,mean,std,max_abs_err")
    for m in (int(v) for v in args.m_list.split(",")):
        s = np.array([ppe(ds.table, ds.task, ds.private,
                          AnalysisConfig(m_samples=m, seed=k, sampler=args.sampler)).score
                      for k in range(args.seeds)])
        print(f"{m},{s.mean():.4f},{s.std(ddof=1):.4f},{np.abs(s - exact).max():.4f}")


if __name__ == "__main__":
    main()
