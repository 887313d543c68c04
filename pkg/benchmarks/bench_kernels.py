"""Time the compiled kernels against the pure-numpy fallback.

Runs the two hot kernels on representative workloads and prints a small
table with the best-of-N wall time per backend and the speedup.  Also
cross-checks that both backends agree to near machine precision on the
same inputs, which is the property the test suite relies on when the
extension is absent.

Usage::

    python benchmarks/bench_kernels.py [--n-samples 16384] [--nb-max 60]
                                       [--n-mc 32768] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np
from scipy.special import gammaln

from blindmi._kernels import _fallback
from blindmi.constellation import build_qam
from blindmi.exact_mi import QuadratureSpec, _phase_nodes

try:
    from blindmi._kernels import _core
except ImportError:
    _core = None


def occupancy_inputs(n_samples: int, nb_max: int, rng: np.random.Generator):
    """Index stacks for a noisy 16-QAM cloud, as select_bins builds them."""
    c = build_qam(16)
    rx = c.points[rng.integers(0, 16, n_samples)]
    rx = rx + (rng.normal(size=n_samples) + 1j * rng.normal(size=n_samples)) * 0.2
    stacks = []
    for values in (rx.real, rx.imag):
        lo, hi = values.min(), values.max()
        s = (values - lo) / (hi - lo)
        out = np.empty((nb_max, n_samples), dtype=np.int32)
        for a in range(1, nb_max + 1):
            out[a - 1] = np.clip((s * a).astype(np.int64), 0, a - 1)
        stacks.append(out)
    lg = gammaln(np.arange(n_samples + 1) + 0.5)
    return stacks[0], stacks[1], lg


def mixture_inputs(n_mc: int, rng: np.random.Generator):
    """A 16-QAM phase-noise mixture density workload, as the exact-MI
    Monte-Carlo path builds it (sigma_phi^2 = 0.01, 256 phase nodes)."""
    c = build_qam(16)
    phi, coef = _phase_nodes(0.01, QuadratureSpec(n_phi=256))
    centers = c.points[:, None] * np.exp(1j * phi)[None, :]
    tx = rng.integers(0, 16, n_mc)
    n0 = 0.1
    noise = (rng.normal(size=n_mc) + 1j * rng.normal(size=n_mc)) * np.sqrt(n0 / 2)
    rx = c.points[tx] * np.exp(1j * rng.normal(0.0, 0.1, n_mc)) + noise
    return (
        np.ascontiguousarray(rx.real),
        np.ascontiguousarray(rx.imag),
        tx.astype(np.int64),
        np.ascontiguousarray(centers.real),
        np.ascontiguousarray(centers.imag),
        np.ascontiguousarray(coef),
        1.0 / n0,
    )


def best_of(fn, args, repeats: int) -> tuple[float, np.ndarray]:
    out = fn(*args)  # warm-up, also the value used for the parity check
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-samples", type=int, default=16384)
    ap.add_argument("--nb-max", type=int, default=60)
    ap.add_argument("--n-mc", type=int, default=32768)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    workloads = [
        (
            "occupancy_loggamma_table",
            f"{args.n_samples} samples, nb_max {args.nb_max}",
            "occupancy_loggamma_table",
            occupancy_inputs(args.n_samples, args.nb_max, rng),
        ),
        (
            "mixture_mi_terms",
            f"{args.n_mc} samples, 16x256 components",
            "mixture_mi_terms",
            mixture_inputs(args.n_mc, rng),
        ),
    ]

    print(f"{'kernel':<28} {'workload':<30} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, desc, attr, inputs in workloads:
        t_py, out_py = best_of(getattr(_fallback, attr), inputs, args.repeats)
        if _core is None:
            print(f"{name:<28} {desc:<30} {t_py:>9.4f}s {'n/a':>10} {'n/a':>8}")
            continue
        t_c, out_c = best_of(getattr(_core, attr), inputs, args.repeats)
        scale = np.max(np.abs(out_py)) or 1.0
        rel = np.max(np.abs(out_py - out_c)) / scale
        flag = "" if rel < 1e-12 else f"  MISMATCH rel={rel:.2e}"
        print(
            f"{name:<28} {desc:<30} {t_py:>9.4f}s {t_c:>9.4f}s "
            f"{t_py / t_c:>7.1f}x{flag}"
        )
    if _core is None:
        print("\ncompiled extension not available; only the fallback was timed")


if __name__ == "__main__":
    main()
