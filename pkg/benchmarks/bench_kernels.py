"""Time the compiled kernels against the pure-Python twin on identical substreams.

    python benchmarks/bench_kernels.py --trials 20000 --steps 40
"""

import argparse
import time

from afcsim import kernels
from afcsim.afc import RetryPolicy
from afcsim.channel import ChannelModel, LinearDrift
from afcsim.rng import substream


def afc_batch(mod, p, trials, seed):
    return [mod.afc_trial(substream(seed, i), *p.args, 0.0, p.max_attempts) for i in range(trials)]


def afc_one_stream(mod, p, trials, seed):
    # isolates kernel cost from per-trial generator construction
    bg = substream(seed, 0)
    return [mod.afc_trial(bg, *p.args, 0.0, p.max_attempts) for _ in range(trials)]


def purify_batch(mod, p, trials, seed, steps):
    # a target above 1 forces exactly `steps` steps
    return [
        mod.purify_trial(substream(seed, i), *p.args, 0.0, p.max_attempts, 2.0, steps, True, False)
        for i in range(trials)
    ]


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=40)
    ap.add_argument("--kappa-tau", type=float, default=0.05)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    ch = ChannelModel.from_kappa_tau(args.kappa_tau, phase_jitter=LinearDrift(args.omega))
    p = kernels.KernelParams.from_model(ch, RetryPolicy())
    cases = {
        "afc_trial": lambda m: afc_batch(m, p, args.trials, args.seed),
        "afc_1stream": lambda m: afc_one_stream(m, p, args.trials, args.seed),
        "purify_trial": lambda m: purify_batch(m, p, args.trials, args.seed, args.steps),
    }
    names = sorted(kernels.BACKENDS)
    print(f"backends: {', '.join(names)}; trials={args.trials}, steps={args.steps}")
    print(f"{'kernel':<14}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}  identical")
    for case, fn in cases.items():
        results = {n: timed(lambda: fn(kernels.BACKENDS[n]), args.repeat) for n in names}
        row = f"{case:<14}" + "".join(f"{results[n][0]:>11.3f}s" for n in names)
        if len(names) == 2:
            speed = results["python"][0] / results["cython"][0]
            same = results["python"][1] == results["cython"][1]
            row += f"{speed:>9.1f}x  {same}"
        print(row)


if __name__ == "__main__":
    main()
