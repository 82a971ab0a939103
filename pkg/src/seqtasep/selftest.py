"""Quick invariant checks run by ``seqtasep selftest``."""
from __future__ import annotations

import itertools

import numpy as np

__all__ = ["run_checks"]


def _enumeration():
    from .fredholm import KernelCache, joint_cdf
    from .model import JointQuery, ModelParams
    from .simulator import enumerate_exact, exact_distribution

    worst = 0.0
    for d in (2, 3):
        params = ModelParams(0.5, d, 3)
        dist = exact_distribution(params, 2)
        cache = KernelCache(params)
        for a1, a2 in itertools.product(range(-1, 4), range(-d - 1, 2)):
            q = JointQuery((1, 2), (a1, a2))
            ref = enumerate_exact(params, q, N=2, distribution=dist)
            worst = max(worst, abs(joint_cdf(q, params, cache=cache)[0] - ref))
    return worst < 1e-9, f"max |det - enumeration| = {worst:.2e}"


def _d2_vs_roots():
    from .kernel import KernelPoint, kernel_K, kernel_K_d2
    from .model import ModelParams

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        t = int(rng.integers(1, 40))
        params = ModelParams(float(rng.uniform(0.2, 0.8)), 2, t)
        n1, n2 = (int(v) for v in rng.integers(1, 8, 2))
        x1, x2 = (int(v) for v in rng.integers(-10, 10, 2))
        pt = KernelPoint(n1, x1, n2, x2, params)
        ref = kernel_K_d2(pt)
        worst = max(worst, abs(kernel_K(pt) - ref) / (1 + abs(ref)))
    return worst < 1e-10, f"max relative difference = {worst:.2e}"


def _shift():
    from .kernel import KernelPoint, kernel_K
    from .model import ModelParams

    params = ModelParams(0.4, 3, 9)
    base = KernelPoint(4, 1, 5, -2, params)
    ref = kernel_K(base)
    worst = max(
        abs(kernel_K(KernelPoint(4 + S, 1 - 3 * S, 5 + S, -2 - 3 * S, params)) - ref) for S in (-2, -1, 1, 2)
    )
    return worst < 1e-10, f"max change under (x,n)->(x-dS,n+S) = {worst:.2e}"


def _biorthogonality():
    from .kernel import phi_array, psi_array
    from .model import ModelParams

    worst = 0.0
    for d in (2, 3):
        params = ModelParams(0.5, d, 6)
        n = 4
        xs = np.arange(-d * (n - 1), params.t + 1)
        psis = [psi_array(n, k, xs, params) for k in range(n)]
        phis = [phi_array(n, j, xs, params) for j in range(n)]
        G = np.array([[psis[k] @ phis[j] for j in range(n)] for k in range(n)])
        worst = max(worst, np.abs(G - np.eye(n)).max())
    return worst < 1e-10, f"max |<Psi_k, Phi_j> - delta| = {worst:.2e}"


def _roots():
    from .roots import offspring_roots_batch, residual

    v = 0.1 * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
    worst = 0.0
    for d in (3, 4, 5):
        u = offspring_roots_batch(v, d)
        worst = max(worst, float(np.abs(residual(u, v[:, None], d)).max()))
    return worst < 1e-12, f"max |R(u, v)| = {worst:.2e}"


def _airy():
    from .airy1 import airy_ai, f1_point

    # Ai(0) = 3^(-2/3)/Gamma(2/3)
    ref = 0.355028053887817239
    err = abs(airy_ai(0.0) - ref)
    f0 = f1_point(0.0)
    ok = err < 1e-14 and 0.0 <= f0 <= 1.0 and f1_point(-1.0) < f0 < f1_point(1.0)
    return ok, f"|Ai(0) - ref| = {err:.1e}, P(A1 <= 0) = {f0:.10f}"


def _determinism():
    from .model import ModelParams
    from .simulator import simulate_batch

    params = ModelParams(0.6, 3, 30)
    a, _ = simulate_batch(params, 5, 600, 11, [1, 5], threads=1)
    b, _ = simulate_batch(params, 5, 600, 11, [1, 5], threads=3)
    return bool(np.array_equal(a, b)), "threads 1 vs 3 identical" if np.array_equal(a, b) else "outputs differ"


def _kraw_psi():
    from .kernel import psi_array
    from .krawtchouk import KrawtchoukContext, psi_kraw
    from .model import ModelParams

    worst = 0.0
    for d in (2, 3):
        for N in range(1, 6):
            for t in range(0, 13):
                if t + d * (N - 1) < 1:
                    continue
                ctx = KrawtchoukContext(0.4, N, d, t)
                zs = np.arange(0, ctx.T + 1)
                for k in range(N):
                    a = np.array([psi_kraw(k, int(z), ctx) for z in zs])
                    b = psi_array(N, k, zs - d * (N - 1), ModelParams(0.4, d, t))
                    worst = max(worst, float(np.abs(a - b).max()))
    return worst < 1e-8, f"max |psi_kraw - psi| = {worst:.2e}"


def _kraw_sinv():
    from .krawtchouk import KrawtchoukContext, s_inverse_d2, s_matrix_square

    worst = 0.0
    for p in (0.3, 0.5, 0.7):
        for N in range(1, 7):
            ctx = KrawtchoukContext(p, N, 2, 4)
            worst = max(worst, float(np.abs(s_matrix_square(ctx) @ s_inverse_d2(ctx) - np.eye(N)).max()))
    return worst < 1e-10, f"max |S S^-1 - I| = {worst:.2e}"


def _kraw_phi():
    from .krawtchouk import KrawtchoukContext, phi_kraw_d2, psi_kraw

    worst = 0.0
    for N in range(1, 6):
        for t in range(0, 13):
            if t + 2 * (N - 1) < 1:
                continue
            ctx = KrawtchoukContext(0.3, N, 2, t)
            zs = range(ctx.T + 1)
            G = np.array(
                [[sum(psi_kraw(k, z, ctx) * phi_kraw_d2(j, z, ctx) for z in zs) for j in range(N)] for k in range(N)]
            )
            worst = max(worst, float(np.abs(G - np.eye(N)).max()))
    return worst < 1e-8, f"max |<Psi_k, Phi_j> - delta| = {worst:.2e}"


CHECKS = [
    ("joint_cdf vs enumeration", _enumeration),
    ("d=2 formula vs root formula", _d2_vs_roots),
    ("shift invariance", _shift),
    ("biorthogonality", _biorthogonality),
    ("offspring roots", _roots),
    ("Airy function and F1", _airy),
    ("simulation determinism", _determinism),
]

KRAWTCHOUK_CHECKS = [
    ("krawtchouk: psi_kraw vs contour psi", _kraw_psi),
    ("krawtchouk: S times closed-form inverse", _kraw_sinv),
    ("krawtchouk: phi_kraw_d2 biorthogonality", _kraw_phi),
]


def run_checks(krawtchouk: bool = False):
    """Run the checks; returns a list of ``(name, passed, detail)``."""
    out = []
    for name, fn in CHECKS + (KRAWTCHOUK_CHECKS if krawtchouk else []):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is reported as a failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
