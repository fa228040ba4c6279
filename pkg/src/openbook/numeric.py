"""Float-side machinery: compiled polynomial systems and multistart zero finding."""
from __future__ import annotations

from typing import Callable, List, Sequence

import numpy as np
from scipy.optimize import least_squares

from .algebra import CompiledPoly, RealPoly

DEFAULT_TOL = 1e-8


def rank_drop(rows: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Row-normalize and test whether the smallest singular value falls below ``tol``.

    Returns ``(dropped, sigma_min)``.  A zero row counts as a drop.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms <= 1e-300):
        return True, 0.0
    if rows.shape[0] > rows.shape[1]:
        return True, 0.0
    sv = np.linalg.svd(rows / norms[:, None], compute_uv=False)
    smin = float(sv[-1]) if len(sv) == rows.shape[0] else 0.0
    return smin <= tol, smin


class PolyBatch:
    """Several real polynomials evaluated together over a shared monomial table."""

    def __init__(self, polys: Sequence[RealPoly], m: int):
        monos = sorted({e for p in polys for e in p.terms})
        index = {e: i for i, e in enumerate(monos)}
        self.m = m
        self.exps = np.array(monos, dtype=np.int64).reshape(len(monos), m)
        self.coeffs = np.zeros((len(monos), len(polys)))
        for j, p in enumerate(polys):
            for e, c in p.terms.items():
                self.coeffs[index[e], j] = float(c)

        self.abs_coeffs = np.abs(self.coeffs)
        self._deg = int(self.exps.max()) if self.exps.size else 0
        self._cols = np.arange(m)[None, :]

    def _monomials(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        powers = np.cumprod(np.concatenate([np.ones((self.m, 1)), np.repeat(x[:, None], self._deg, axis=1)],
                                           axis=1), axis=1)
        return np.prod(powers[self._cols, self.exps], axis=1)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Values of every polynomial at the single point ``x``."""
        if not len(self.exps):
            return np.zeros(self.coeffs.shape[1])
        return self._monomials(x) @ self.coeffs

    def with_magnitudes(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values and term magnitudes ``sum_t |c_t x^t|`` at the single point ``x``."""
        if not len(self.exps):
            z = np.zeros(self.coeffs.shape[1])
            return z, z
        mono = self._monomials(x)
        return mono @ self.coeffs, np.abs(mono) @ self.abs_coeffs


class PolySystem:
    """A list of real polynomials compiled for float evaluation and Jacobians."""

    def __init__(self, polys: Sequence[RealPoly]):
        self.polys = [p for p in polys if not p.is_zero()]
        if not polys:
            raise ValueError("empty system")
        self.m = polys[0].m
        self.compiled = [CompiledPoly(p) for p in self.polys]
        self.grads = [[CompiledPoly(p.diff(j)) for j in range(self.m)] for p in self.polys]
        self.scales = np.array([max(float(p.coefficient_content()), 1e-300) for p in self.polys])
        self._values = PolyBatch(self.polys, self.m)
        self._jac = PolyBatch([g for p in self.polys for g in p.gradient()], self.m)

    def __len__(self):
        return len(self.polys)

    def values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if not self.polys:
            return np.zeros((X.shape[0], 0))
        if X.shape[0] == 1:
            return self._values(X[0])[None, :]
        return np.stack([c(X) for c in self.compiled], axis=1)

    def magnitudes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if not self.polys:
            return np.zeros((X.shape[0], 0))
        if X.shape[0] == 1:
            return self._values.with_magnitudes(X[0])[1][None, :]
        return np.stack([c.magnitude(X) for c in self.compiled], axis=1)

    def point_eval(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(values, magnitudes)`` at one point, through the shared monomial table."""
        return self._values.with_magnitudes(np.asarray(x, dtype=float).reshape(-1))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return self._jac(x).reshape(len(self.polys), self.m)

    def relative_residual(self, x: np.ndarray) -> float:
        """Largest ``|g_i(x)| / sum_t |c_t x^t|``; 0 where every term vanishes."""
        v = np.abs(self.values(x)[0])
        mag = self.magnitudes(x)[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(mag > 0, v / np.where(mag > 0, mag, 1.0), 0.0)
        return float(rel.max()) if len(rel) else 0.0

    def refine(self, x0: np.ndarray, extra: Callable | None = None, extra_jac: Callable | None = None,
               max_nfev: int = 2000, relative: bool = False) -> np.ndarray:
        """Levenberg-Marquardt polish of ``x0`` toward a common zero.

        With ``relative`` the residuals are divided by the term magnitudes at
        the current point, which keeps tiny-valued regions from looking solved.
        """

        def weights(x):
            if relative:
                return np.maximum(self.magnitudes(x)[0], 1e-300)
            return self.scales

        def fun(x):
            r = self._values(x) / weights(x)
            if extra is not None:
                r = np.concatenate([r, extra(x)])
            return r

        def jac(x):
            J = self.jacobian(x) / weights(x)[:, None]
            if extra_jac is not None:
                J = np.vstack([J, extra_jac(x)])
            return J

        n_res = len(self.polys) + (len(extra(x0)) if extra is not None else 0)
        method = "lm" if n_res >= self.m else "trf"
        try:
            sol = least_squares(fun, x0, jac=jac, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                max_nfev=max_nfev)
        except (ValueError, np.linalg.LinAlgError, FloatingPointError):
            return np.asarray(x0, dtype=float)
        return sol.x


def cluster_points(points: Sequence[np.ndarray], radius: float) -> List[np.ndarray]:
    """Greedy clustering in input order; returns one representative per cluster."""
    reps: List[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - r) <= radius for r in reps):
            reps.append(np.asarray(p))
    return reps


def multistart_zeros(system: PolySystem, starts: int, seed: int, scale: float = 2.0,
                     rtol: float = 1e-10, sampler: Callable | None = None) -> List[np.ndarray]:
    """Refine ``starts`` random points; keep those whose relative residual is below ``rtol``."""
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(starts):
        x0 = sampler(rng) if sampler is not None else rng.normal(scale=scale, size=system.m)
        x = system.refine(x0)
        if np.all(np.isfinite(x)) and _is_zero_point(system, x, rtol):
            found.append(x)
    return found


def _is_zero_point(system: PolySystem, x: np.ndarray, rtol: float) -> bool:
    v = np.abs(system.values(x)[0])
    mag = system.magnitudes(x)[0]
    return bool(np.all(v <= rtol * np.maximum(mag, 1e-300) + 1e-14 * system.scales))


def newton_distance(ps, x: np.ndarray) -> float:
    """Largest first-order distance estimate |g| / |grad g| over the generators."""
    v = np.abs(ps.values(x)[0])
    g = np.linalg.norm(ps.jacobian(x), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(v == 0, 0.0, v / np.where(g > 0, g, 1e-300))
    return float(d.max()) if len(d) else 0.0


def gauss_newton(ps, x: np.ndarray, r2: float | None, dist_tol: float, iters: int = 400) -> np.ndarray:
    """Undamped minimum-norm Newton steps, optionally projected back to the sphere |x|^2 = r2.

    LM crawls near multiple components; plain Newton still contracts there at
    rate (k-1)/k.
    """
    for _ in range(iters):
        if not np.all(np.isfinite(x)) or newton_distance(ps, x) <= dist_tol * 1e-3:
            break
        J = ps.jacobian(x)
        if r2 is not None:
            # keep the step tangent to the sphere
            n = x / max(np.linalg.norm(x), 1e-300)
            J = J - np.outer(J @ n, n)
        step, *_ = np.linalg.lstsq(J, ps._values(x), rcond=1e-12)
        x = x - step
        if r2 is not None:
            x = x * np.sqrt(r2) / max(np.linalg.norm(x), 1e-300)
        if np.linalg.norm(step) <= 1e-16 * (1 + np.linalg.norm(x)):
            break
    return x
