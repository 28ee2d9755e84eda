"""Measure the contraction rate of fixed-rate descent against the predicted
optimum theta = (K-1)/(K+1).

Builds a realizable two-class problem, locates the minimizer with a long
small-step run, derives the rate plan from the Hessian extremes at the
minimizer, then reports the observed per-step error ratio at eta* and the
blow-up beyond the admissible window.
"""
import argparse

import numpy as np

from smxreg import Dataset, center_columns, gradient, plan, reduce_two_class, softmax


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--features", type=int, default=3)
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--oracle-epochs", type=int, default=100000)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    x = rng.standard_normal((args.features, args.samples))
    w_true = 0.8 * rng.standard_normal((2, args.features))
    data = Dataset(x, softmax(w_true @ x))

    eta_small = 1.0 / (0.5 * np.linalg.eigvalsh(x @ x.T)[-1])
    w = np.zeros((2, args.features))
    for k in range(args.oracle_epochs):
        w -= eta_small * gradient(w, data)
        if k % 128 == 0:
            w = center_columns(w)
    w_hat = center_columns(w)
    print(f"reference minimizer: |grad| = {np.linalg.norm(gradient(w_hat, data)):.3e}")

    evals = np.linalg.eigvalsh(reduce_two_class(w_hat, data).m)
    p = plan(float(evals[0]), float(evals[-1]))
    print(f"lambda_min {p.lambda_min:.6f}  lambda_max {p.lambda_max:.6f}  "
          f"K {p.k:.3f}  theta {p.theta:.6f}  eta* {p.eta_optimal:.6f}")

    w = center_columns(0.5 * rng.standard_normal((2, args.features)))
    errs = []
    for _ in range(4000):
        errs.append(float(np.linalg.norm(center_columns(w) - w_hat)))
        w -= p.eta_optimal * gradient(w, data)
    errs = np.array(errs)
    tail = (errs > 1e-11) & (errs < 1e-5)
    ratios = errs[1:][tail[:-1]] / errs[:-1][tail[:-1]]
    print(f"observed tail ratio {np.mean(ratios):.6f} over {len(ratios)} steps "
          f"(predicted theta {p.theta:.6f})")

    eta_bad = 2.0 * p.eta_window[1]
    w = w_hat + 1e-6 * center_columns(rng.standard_normal((2, args.features)))
    e0 = float(np.linalg.norm(center_columns(w) - w_hat))
    for _ in range(300):
        w -= eta_bad * gradient(w, data)
    e1 = float(np.linalg.norm(center_columns(w) - w_hat))
    print(f"at 2x eta* the error moved from {e0:.3e} to {e1:.3e}")


if __name__ == "__main__":
    main()
