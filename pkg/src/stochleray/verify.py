"""Operator-level invariant checks run by ``stochleray verify-operators``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .noise import hs_norms_Q, hs_norms_Q_diff, make_noise_model
from .nonlinear import trilinear_form
from .spectral import (
    GridSpec,
    apply_helmholtz_filter,
    apply_stokes_power,
    invert_helmholtz,
    l4_norm4,
    norm,
    project_leray,
    random_field,
    spectral_sum,
    to_physical,
    to_spectral,
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _fields(grid, n, seed, **kw):
    rng = np.random.default_rng(seed)
    return np.stack([random_field(grid, rng, **kw) for _ in range(n)])


def check_cancellations(n=100, N=64, seed=1, tol=1e-10):
    """|<B(u,v),v>| <= tol |A^1/2 u| |A^1/2 v|^2 and |<B(u,u),Au>| <= tol |A^1/2 u|^2 |Au|."""
    g = GridSpec(N=N)
    u = _fields(g, n, seed)
    v = _fields(g, n, seed + 1)
    Vu, Vv, Au = norm(g, u, "V"), norm(g, v, "V"), norm(g, u, "DA")
    e1 = np.abs(trilinear_form(g, u, v, v)) / (Vu * Vv**2)
    e2 = np.abs(trilinear_form(g, u, u, apply_stokes_power(g, u, 1))) / (Vu**2 * Au)
    return [
        Check("energy cancellation <B(u,v),v>=0", bool(e1.max() <= tol), f"max rel {e1.max():.2e}"),
        Check("enstrophy cancellation <B(u,u),Au>=0", bool(e2.max() <= tol), f"max rel {e2.max():.2e}"),
    ]


def check_filter(n=100, N=64, seed=2, alphas=(1.0, 0.1, 0.01), tol=1e-12):
    g = GridSpec(N=N)
    w = _fields(g, n, seed)
    H = norm(g, w, "H")
    worst = dict(contraction=0.0, defect=0.0, smoothing=0.0, identity=0.0)
    for a in alphas:
        Nw = apply_helmholtz_filter(g, w, a)
        worst["contraction"] = max(worst["contraction"], float(np.max(norm(g, Nw, "H") / H)))
        worst["defect"] = max(worst["defect"], float(np.max(
            norm(g, w - Nw, "H") / (0.5 * a * norm(g, w, "V")))))
        worst["smoothing"] = max(worst["smoothing"], float(np.max(
            a * norm(g, Nw, "V") / (0.5 * H))))
        back = a**2 * apply_stokes_power(g, Nw, 1) + Nw
        worst["identity"] = max(worst["identity"], float(np.max(norm(g, back - w, "H") / H)))
    return [
        Check("filter contraction |N w| <= |w|", worst["contraction"] <= 1 + tol, f"max ratio {worst['contraction']:.15f}"),
        Check("filter defect |(I-N)w| <= a/2 |A^1/2 w|", worst["defect"] <= 1 + tol, f"max ratio {worst['defect']:.6f}"),
        Check("smoothing |a A^1/2 N w| <= |w|/2", worst["smoothing"] <= 1 + tol, f"max ratio {worst['smoothing']:.6f}"),
        Check("identity a^2 A N w + N w = w", worst["identity"] <= tol, f"max rel {worst['identity']:.2e}"),
    ]


def check_noise(n=1000, N=64, seed=3, tol=1e-12):
    g = GridSpec(N=N)
    model = make_noise_model(g)
    rng = np.random.default_rng(seed)
    # the Lipschitz ratios are tight on fields living on the multiplicative band
    u1 = np.stack([random_field(g, rng, kmax=12) for _ in range(n)])
    u2 = np.stack([random_field(g, rng, kmax=12) for _ in range(n)])
    d = u1 - u2
    hs, hsA = hs_norms_Q_diff(u1, u2, model)
    lip0 = np.sqrt(hs) / norm(g, d, "H")
    lip1 = np.sqrt(hsA) / norm(g, d, "V")
    q, qA = hs_norms_Q(u1, model)
    gr2 = np.sqrt(q) / (model.ell2 * (1 + norm(g, u1, "H")))
    gr3 = np.sqrt(qA) / (model.ell3 * (1 + norm(g, u1, "V")))
    return [
        Check("noise Lipschitz (H)", bool(lip0.max() <= model.ell0 * (1 + tol)), f"max {lip0.max():.6f} vs ell0 {model.ell0}"),
        Check("noise Lipschitz (V)", bool(lip1.max() <= model.ell1 * (1 + tol)), f"max {lip1.max():.6f} vs ell1 {model.ell1}"),
        Check("noise growth (H)", bool(gr2.max() <= 1 + tol), f"max ratio {gr2.max():.6f}"),
        Check("noise growth (V)", bool(gr3.max() <= 1 + tol), f"max ratio {gr3.max():.6f}"),
    ]


def check_transforms(n=20, N=64, seed=4):
    g = GridSpec(N=N)
    u = _fields(g, n, seed)
    H = norm(g, u, "H")
    rt = norm(g, to_spectral(g, to_physical(g, u)) - u, "H") / H
    proj = norm(g, project_leray(g, project_leray(g, u)) - project_leray(g, u), "H") / H
    phys = to_physical(g, u)
    quad = (g.L / g.N) ** 2 * np.sum(phys**2, axis=(-3, -2, -1))
    pars = np.abs(quad - spectral_sum(g, u)) / spectral_sum(g, u)
    helm = norm(g, invert_helmholtz(g, apply_helmholtz_filter(g, u, 0.3), 0.3) - u, "H") / H
    poinc = g.lambda1 * H**2 / norm(g, u, "V") ** 2
    gn = l4_norm4(g, phys) ** 0.25 / np.sqrt(H * norm(g, u, "V"))
    return [
        Check("transform round trip", bool(rt.max() <= 1e-12), f"max rel {rt.max():.2e}"),
        Check("Leray projector idempotent", bool(proj.max() <= 1e-12), f"max rel {proj.max():.2e}"),
        Check("Parseval vs quadrature", bool(pars.max() <= 1e-10), f"max rel {pars.max():.2e}"),
        Check("Helmholtz round trip", bool(helm.max() <= 1e-12), f"max rel {helm.max():.2e}"),
        Check("Poincare lambda1|w|^2 <= |A^1/2 w|^2", bool(poinc.max() <= 1 + 1e-12), f"max ratio {poinc.max():.6f}"),
        Check("L4 interpolation ratio finite", bool(np.all(np.isfinite(gn))), f"max ratio {gn.max():.4f}"),
    ]


SUITES = (check_cancellations, check_filter, check_noise, check_transforms)


def run_all() -> list:
    checks = []
    for suite in SUITES:
        t0 = time.perf_counter()
        out = suite()
        dt = (time.perf_counter() - t0) / len(out)
        checks.extend(Check(c.name, c.passed, c.detail, dt) for c in out)
    return checks
