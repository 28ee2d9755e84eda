"""Train the softmax classifier on MNIST-style IDX files.

Expects the standard four uncompressed files.  A bias feature row is added;
stepping uses the second Barzilai-Borwein formula by default.
"""
import argparse

from smxreg import Dataset, TrainConfig, evaluate, train
from smxreg.data_io import add_bias_row, load_idx_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--train-images", required=True)
    ap.add_argument("--train-labels", required=True)
    ap.add_argument("--test-images", required=True)
    ap.add_argument("--test-labels", required=True)
    ap.add_argument("--classes", type=int, default=10)
    ap.add_argument("--subset", type=int, default=10000,
                    help="number of training samples used (0 = all)")
    ap.add_argument("--epochs", type=int, default=60)
    ap.add_argument("--eta", type=float, default=1e-3)
    ap.add_argument("--bb", choices=["off", "bb1", "bb2"], default="bb2")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    full = load_idx_dataset(args.train_images, args.train_labels, args.classes)
    if args.subset and args.subset < full.n:
        full = Dataset(full.x[:, :args.subset], full.t[:, :args.subset])
    train_ds = Dataset(add_bias_row(full.x), full.t)
    test_raw = load_idx_dataset(args.test_images, args.test_labels, args.classes)
    test_ds = Dataset(add_bias_row(test_raw.x), test_raw.t)
    print(f"train: D={train_ds.d} N={train_ds.n}   test: N={test_ds.n}")

    cfg = TrainConfig(eta=args.eta, epochs=args.epochs, bb_mode=args.bb,
                      center_every=10, seed=args.seed, tol_grad=1e-8,
                      log_every=5)
    w, trace = train(train_ds, cfg)
    for r in trace.records:
        print(f"epoch {r.epoch:4d}  loss {r.loss:12.4f}  "
              f"grad {r.grad_norm:.4e}  eta {r.eta_used:.4e}")
    print(f"stop: {trace.stop_reason}")

    train_loss, train_acc = evaluate(w, train_ds)
    test_loss, test_acc = evaluate(w, test_ds)
    print(f"train accuracy {train_acc:.4f}   test accuracy {test_acc:.4f}")


if __name__ == "__main__":
    main()
