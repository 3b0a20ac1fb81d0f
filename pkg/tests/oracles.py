"""Independent reference implementations used to check the package.

Each oracle recomputes a quantity by a different route from the code under
test: dense point sampling instead of the slab method, scalar ``math`` instead
of numpy vector code, explicit loops instead of the vectorised cluster code.
"""

from __future__ import annotations

import math

import numpy as np

SAMPLES = 10_000
BOUNDARY_TOL = 1e-3


def sampled_segment_hit(a, b, box_min, box_max, samples: int = SAMPLES):
    """Point-sampling occlusion test.

    Returns ``(hit, boundary)``.  ``boundary`` is True when the sample closest to
    the box surface lies within BOUNDARY_TOL of a face, so sampling cannot settle
    the case.  Distances use the Chebyshev signed distance: positive outside,
    negative inside.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.linspace(0.0, 1.0, samples)[:, None]
    pts = a + t * (b - a)
    lo = np.asarray(box_min, dtype=float)
    hi = np.asarray(box_max, dtype=float)
    sd = np.max(np.maximum(lo - pts, pts - hi), axis=1)
    nearest = float(sd.min())
    return nearest <= 0.0, abs(nearest) < BOUNDARY_TOL


def basic_loss(f_mhz: float) -> float:
    return 20.0 * math.log10(f_mhz) - 28.0


def nlos_loss(d: float, n: int, f_mhz: float = 2000.0, coeff: float = 25.5) -> float:
    d = max(d, 1.0)
    return basic_loss(f_mhz) + coeff * math.log10(d) + 15.0 + 4.0 * (n - 1)


def los_loss(d: float, f_mhz: float = 2000.0) -> float:
    d = max(d, 1.0)
    return 16.9 * math.log10(d) - 27.2 + 20.0 * math.log10(f_mhz)


def sic_sinr(gains, interference, noise, powers):
    """Loop-based SINR with successive interference cancellation.

    IRs are decoded weakest first (ascending g / (I + sigma), ties by index).
    Each IR cancels the signals of every weaker IR and treats the signals of
    all stronger IRs as interference.
    """
    u = len(gains)
    eq = [gains[k] / (interference[k] + noise[k]) for k in range(u)]
    order = sorted(range(u), key=lambda k: (eq[k], k))
    out = [0.0] * u
    for pos, k in enumerate(order):
        residual = 0.0
        for later in order[pos + 1:]:
            residual += powers[later]
        out[k] = gains[k] * powers[k] / (gains[k] * residual + interference[k] + noise[k])
    return out, order


def mqi(t_total, mission, outage, lam):
    return t_total - sum(t + lam * o for t, o in zip(mission, outage))


def numeric_grad(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of scalar ``f`` with respect to array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        up = f()
        x[i] = old - eps
        down = f()
        x[i] = old
        g[i] = (up - down) / (2 * eps)
    return g


def rel_error(a, b, floor: float = 1e-6) -> float:
    """Norm-wise relative error.  ``floor`` keeps gradients that are exactly zero
    (a bias feeding batch-statistics BN) from dividing finite-difference noise by ~0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    denom = max(np.linalg.norm(a) + np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / denom)
