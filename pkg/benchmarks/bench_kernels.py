"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each row times one kernel-bound workload per backend and reports the
speedup. Results from both backends are compared so a mismatch shows up
here as well as in the test suite.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from oqho import covariance, decay, linalg
from oqho.model import OscillatorModel, build_state_space, canonical_theta


def _model(n: int, eps: float, seed: int = 0) -> OscillatorModel:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n))
    R = x @ x.T / n + 0.5 * np.eye(n)
    shape = np.eye(n) + 0.4 * rng.normal(size=(n, n))
    return OscillatorModel.from_coupling(canonical_theta(n), R, shape, eps)


def workloads():
    a8 = build_state_space(_model(8, 0.5)).A
    h8 = -2j * linalg.sqrtm_spd(_model(8, 0.5).R) @ canonical_theta(8) @ linalg.sqrtm_spd(_model(8, 0.5).R)
    weak = _model(4, 0.05, seed=1)
    ode = _model(6, 0.5, seed=2)
    return {
        "eig_general n=8": lambda: linalg.eig_general(a8).eigenvalues,
        "eig_hermitian n=8": lambda: linalg.eig_hermitian(h8).eigenvalues,
        "decoherence_time n=4 eps=0.05": lambda: decay.decoherence_time(weak).tau_star,
        "lyapunov_ode n=6 2000 steps": lambda: covariance.transient_covariance(
            ode, np.zeros((6, 6)), 20.0, 0.01
        ).final,
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = linalg.available_backends()
    if "compiled" not in backends:
        print("compiled kernels are not built; only the Python fallback is available")
    print(f"{'workload':34s}" + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>10s}")
    previous = linalg.set_backend(backends[0])
    try:
        for name, fn in workloads().items():
            times, results = [], []
            for b in backends:
                linalg.set_backend(b)
                results.append(np.asarray(fn()))
                times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
            speed = f"{times[-1] / times[0]:9.1f}x" if len(times) > 1 else ""
            row = f"{name:34s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times) + f"{speed:>10s}"
            if len(results) > 1 and not np.allclose(results[0], results[1], rtol=1e-9, atol=1e-12):
                row += "  MISMATCH"
            print(row)
    finally:
        linalg.set_backend(previous)


if __name__ == "__main__":
    main()
