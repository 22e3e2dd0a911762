"""Compiled batch kernel vs pure-Python reference path.

Runs identical configurations on both backends, checks the outputs are
bit-identical, and prints the speedup. Trial counts are scaled so the
Python side stays tolerable.

    python3 benchmarks/engine_benchmark.py [--trials 2000]
"""

import argparse
import time

import numpy as np

from homtest import engine, groups
from homtest.functions import gen_instance
from homtest.rng import stream
from homtest.testers import TesterParams


CASES = [
    ("signs k=4, Z5->Z5, null", "Z5", "Z5", "signs", TesterParams(k=4), "null", 0, "fixed_rate"),
    ("signs k=4, F2^8->F2, uniform t=2", "F2^8", "F2^1", "signs", TesterParams(k=4, t=2), "uniform", 2, "fixed_rate"),
    ("signs k=4, F2^8->F2, sum_hunter t=4 (budget)", "F2^8", "F2^1", "signs", TesterParams(k=4, t=4), "sum_hunter", 4, "budget_managing"),
    ("online-signs m=8x12, F2^8->F2, span t=4", "F2^8", "F2^1", "online-signs", TesterParams(t=4, force_m=8, force_reps=12), "span", 4, "fixed_rate"),
    ("gr-sample, F2^16->Z6, uniform t=4", "F2^16", "Z6", "gr-sample", TesterParams(t=4), "uniform", 4, "fixed_rate"),
    ("generated-subgroup, S4->Z2, null", "S4", "Z2", "generated-subgroup", TesterParams(e_of_g=4.0), "null", 0, "fixed_rate"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()

    if not engine.HAVE_EXT:
        raise SystemExit("compiled extension not available")

    print(f"{'configuration':<48} {'python':>9} {'compiled':>9} {'speedup':>8}")
    for label, gs, hs, tester, params, strat, t, schedule in CASES:
        g, h = groups.parse_spec(gs), groups.parse_spec(hs)
        inst = gen_instance("random_function", g, h, stream(1, 0, 2))
        kw = dict(
            tester=tester, params=params, strategy_name=strat,
            schedule=schedule, t=t, trials=args.trials, seed=7,
        )
        t0 = time.perf_counter()
        py = engine.run_batch(inst, backend="python", **kw)
        t_py = time.perf_counter() - t0
        t0 = time.perf_counter()
        cc = engine.run_batch(inst, backend="compiled", **kw)
        t_cc = time.perf_counter() - t0
        np.testing.assert_array_equal(py.verdicts, cc.verdicts)
        np.testing.assert_array_equal(py.queries, cc.queries)
        print(f"{label:<48} {t_py:>8.3f}s {t_cc:>8.3f}s {t_py / t_cc:>7.1f}x")


if __name__ == "__main__":
    main()
