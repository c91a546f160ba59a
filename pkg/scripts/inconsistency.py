"""Direction of |β̃_T| over T when H is held at H0 ± 0.2, for both kernel choices."""

import argparse

from fracsde.asymptotics import direction_fraction
from fracsde.paths import example_model
from fracsde.rng import derive_seed


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--t-values", default="5,10,20")
    args = ap.parse_args()
    t_values = [float(t) for t in args.t_values.split(",")]
    seeds = [derive_seed(args.seed, s) for s in range(args.seeds)]
    for kernel in ("candidate", "true"):
        for h_star in (0.7, 0.3):
            frac, runs = direction_fraction(example_model(), 0.7, 0.5, h_star, t_values, seeds,
                                            kernel_hurst=kernel)
            word = "increasing" if h_star > 0.5 else "decreasing"
            print(f"kernel={kernel:9s} H*={h_star}: {word} in {frac:.0%} of seeds")
            for r in runs[:3]:
                print("   " + "  ".join(f"T={x.t_max:g}: {x.beta_tilde:+.3f} (theory {x.theory_prediction:.3f})"
                                        for x in r))


if __name__ == "__main__":
    main()
