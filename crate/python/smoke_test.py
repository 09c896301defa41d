"""Smoke test for the mirrortail extension module.

Build with `cargo build --release -p mirrortail-py`, then copy
target/release/libmirrortail.so next to this file as mirrortail.so
(or run ./python/build.sh) and run `python3 python/smoke_test.py`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import mirrortail as mt


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    assert close(mt.bregman([1.0, 0.0], [0.0, 0.0]), 0.5)
    kl = mt.bregman([0.5, 0.5], [0.25, 0.75], regularizer="entropic")
    assert close(kl, 0.5 * math.log(2) + 0.5 * math.log(2 / 3))

    x = mt.mirror_step([2.0], [1.0], 0.5)
    assert close(x[0], 1.5)
    x = mt.mirror_step([0.9], [-1.0], 1.0, domain={"kind": "l2-ball", "radius": 1.0})
    assert close(x[0], 1.0)
    y = mt.mirror_step([0.5, 0.5], [1.0, 0.0], 1.0, regularizer="entropic")
    assert close(sum(y), 1.0) and y[0] < y[1]

    tr = mt.run_smd(64, 0.5, noise="weibull:2", schedule="inverse-sqrt", seed=3)
    assert tr.horizon == 64 and len(tr.x) == 65 and len(tr.err_avg) == 65
    for rep in [tr.check_one_step([0.0]), *tr.check_d_recursion(1.0), *tr.check_last_iterate()]:
        assert rep["pass"], rep

    try:
        mt.mirror_step([0.0, 1.0], [0.0, 0.0], 1.0, regularizer="entropic")
    except ValueError:
        pass
    else:
        raise AssertionError("boundary base point accepted")

    b = mt.eval_bounds({"T": 100, "delta": 0.05}, ["weibull-constant", "crossover-weibull"])
    assert b["weibull-constant"] > 0 and isinstance(b["crossover-weibull"], int)

    assert mt.aggregate([0.7] * 5, 0.99) == (0.7, 0.7)
    assert close(mt.alpha_sum(3, 7, 10), 1 / 3 - 1 / 8)
    assert close(mt.fuk_nagaev(5.0, [1.0] * 100, 0.05), 41.25, 1e-3)

    inv = mt.check_invariants(traces=50, identity_t_max=30, rho_t_max=60)
    assert all(r["pass"] for r in inv)
    rows = mt.validate_concentration(["p1"], trials=2000)
    assert len(rows) == 3 and all(r["pass"] for r in rows)

    cfg = {"runs": 50, "t_grid": [10, 100], "t_max": 100, "noises": ["gaussian", "weibull:2"]}
    rows = mt.run_experiment(cfg, desk_scale=True)
    assert len(rows) == 8
    csv = mt.run_experiment(cfg, desk_scale=True, as_csv=True)
    assert csv.splitlines()[0].startswith("noise_class,")
    print("smoke test passed")


if __name__ == "__main__":
    main()
