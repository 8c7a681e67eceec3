"""
Argument-principle machinery shared by the polynomial and zeta modules.

A contour is a closed chain of smooth pieces (arcs and segments), each
parametrized on [0, 1]. Zero counts come from adaptive phase tracking of a
function along the chain; contour integrals from adaptive quadrature per piece.
"""

import cmath
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy import integrate

from ..config import settings
from ..errors import ContourResolutionError

ComplexFunc = Callable[[np.ndarray], np.ndarray]


class Arc:
    """center + radius * exp(i angle), angle running from start to stop"""

    def __init__(self, center: complex, radius: float, start: float, stop: float):
        self.center = complex(center)
        self.radius = float(radius)
        self.start = float(start)
        self.stop = float(stop)

    def point(self, s):
        angle = self.start + (self.stop - self.start) * np.asarray(s, dtype=float)
        return self.center + self.radius * np.exp(1j * angle)

    def tangent(self, s):
        angle = self.start + (self.stop - self.start) * np.asarray(s, dtype=float)
        return 1j * (self.stop - self.start) * self.radius * np.exp(1j * angle)


class Segment:
    """Straight piece from a to b"""

    def __init__(self, a: complex, b: complex):
        self.a = complex(a)
        self.b = complex(b)

    def point(self, s):
        return self.a + (self.b - self.a) * np.asarray(s, dtype=float)

    def tangent(self, s):
        return np.full(np.shape(s), self.b - self.a, dtype=complex)


class Contour:
    """Closed, positively oriented chain of pieces"""

    def __init__(self, pieces: List):
        self.pieces = list(pieces)

    def points(self, u: np.ndarray) -> np.ndarray:
        """Map global parameters u in [0, 1] onto the chain"""
        u = np.asarray(u, dtype=float)
        count = len(self.pieces)
        scaled = u * count
        index = np.minimum(np.floor(scaled).astype(int), count - 1)
        local = scaled - index
        out = np.empty(u.shape, dtype=complex)
        for k, piece in enumerate(self.pieces):
            mask = index == k
            if np.any(mask):
                out[mask] = piece.point(local[mask])
        return out

    def encloses(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class CircleContour(Contour):
    def __init__(self, center: complex, radius: float):
        super().__init__([Arc(center, radius, 0.0, 2.0 * math.pi)])
        self.center = complex(center)
        self.radius = float(radius)

    def encloses(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius


class BoxContour(Contour):
    """Rectangle [x0, x1] x [y0, y1], counterclockwise from the lower-left corner"""

    def __init__(self, x0: float, x1: float, y0: float, y1: float):
        c1, c2, c3, c4 = complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)
        super().__init__([Segment(c1, c2), Segment(c2, c3), Segment(c3, c4), Segment(c4, c1)])
        self.bounds = (float(x0), float(x1), float(y0), float(y1))

    def encloses(self, z):
        z = np.asarray(z)
        x0, x1, y0, y1 = self.bounds
        return (z.real > x0) & (z.real < x1) & (z.imag > y0) & (z.imag < y1)


class TwiceBittenDisk(Contour):
    """
    Boundary of the disk with diameter endpoints p = exp(i alpha) and
    q = exp(-i alpha), with the radius-`bite` neighbourhoods of p and q cut
    out. The cuts run through the inside of the disk.
    """

    def __init__(self, alpha: float, bite: float):
        self.center = math.cos(alpha)
        self.radius = math.sin(alpha)
        self.bite = float(bite)
        if not 0.0 < self.bite < self.radius:
            raise ContourResolutionError(f"bite radius {bite} incompatible with disk radius {self.radius}")
        c, r = self.center, self.radius
        p = complex(c, r)
        q = complex(c, -r)
        phi_b = 2.0 * math.asin(self.bite / (2.0 * r))

        def on_circle(phi):
            return c + 1j * cmath.exp(1j * phi) * r

        # z(phi) = c + i r e^{i phi}: phi = 0 at p, phi = pi at q
        left = Arc(c, r, phi_b + math.pi / 2, math.pi - phi_b + math.pi / 2)
        bite_q = Arc(q, self.bite, cmath.phase(on_circle(math.pi - phi_b) - q),
                     cmath.phase(on_circle(math.pi + phi_b) - q))
        right = Arc(c, r, math.pi + phi_b + math.pi / 2, 2 * math.pi - phi_b + math.pi / 2)
        bite_p = Arc(p, self.bite, cmath.phase(on_circle(-phi_b) - p),
                     cmath.phase(on_circle(phi_b) - p))
        super().__init__([left, bite_q, right, bite_p])
        self.p = p
        self.q = q

    def encloses(self, z):
        z = np.asarray(z)
        return ((np.abs(z - self.center) < self.radius)
                & (np.abs(z - self.p) > self.bite)
                & (np.abs(z - self.q) > self.bite))


def winding_number(func: ComplexFunc, contour: Contour, points_per_piece: int = None,
                   max_step: float = None, hard_step: float = None,
                   max_passes: int = None) -> int:
    """
    Winding number of func around 0 along the contour.

    Segments whose phase increment exceeds max_step are bisected until every
    increment is below it or max_passes is used up; an increment above
    hard_step at that point is unresolved.
    """
    points_per_piece = points_per_piece or settings.CONTOUR_POINTS_PER_PIECE
    max_step = max_step or settings.MAX_PHASE_STEP
    hard_step = hard_step or settings.HARD_PHASE_STEP
    max_passes = max_passes or settings.CONTOUR_MAX_PASSES

    u = np.linspace(0.0, 1.0, points_per_piece * len(contour.pieces) + 1)
    w = _evaluate(func, contour, u)

    for _ in range(max_passes):
        step = np.angle(w[1:] / w[:-1])
        coarse = np.abs(step) > max_step
        if not np.any(coarse):
            break
        u_new = 0.5 * (u[:-1][coarse] + u[1:][coarse])
        w_new = _evaluate(func, contour, u_new)
        u_all = np.concatenate([u, u_new])
        order = np.argsort(u_all, kind="stable")
        u = u_all[order]
        w = np.concatenate([w, w_new])[order]

    step = np.angle(w[1:] / w[:-1])
    worst = float(np.max(np.abs(step)))
    if worst > hard_step:
        raise ContourResolutionError(f"phase step {worst:.3f} rad unresolved after {max_passes} passes")
    turns = float(np.sum(step)) / (2.0 * math.pi)
    count = int(round(turns))
    if abs(turns - count) > 0.1:
        raise ContourResolutionError(f"non-integer winding {turns:.4f}")
    return count


def _evaluate(func: ComplexFunc, contour: Contour, u: np.ndarray) -> np.ndarray:
    w = np.asarray(func(contour.points(u)), dtype=complex)
    if not np.all(np.isfinite(w)) or np.any(w == 0):
        raise ContourResolutionError("function vanishes or is singular on the contour")
    return w


def contour_integral(func: ComplexFunc, contour: Contour, limit: int = 400) -> complex:
    """Integral of func(z) dz along the chain, piece by piece"""
    total = 0j
    for piece in contour.pieces:

        def integrand(s, part):
            value = complex(np.asarray(func(piece.point(np.array([s]))))[0] * piece.tangent(np.array([s]))[0])
            return value.real if part == 0 else value.imag

        re, _ = integrate.quad(integrand, 0.0, 1.0, args=(0,), limit=limit, epsabs=1e-13, epsrel=1e-12)
        im, _ = integrate.quad(integrand, 0.0, 1.0, args=(1,), limit=limit, epsabs=1e-13, epsrel=1e-12)
        total += complex(re, im)
    return total


def muller(f: Callable[[complex], complex], x0: complex, x1: complex, x2: complex,
           max_iter: int = 100, tol: float = 1e-14) -> Tuple[complex, bool]:
    """Muller iteration from three distinct starting points; returns (root, converged)"""
    f0, f1, f2 = f(x0), f(x1), f(x2)
    for _ in range(max_iter):
        h1 = x1 - x0
        h2 = x2 - x1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            return x2, False
        d1 = (f1 - f0) / h1
        d2 = (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        root = cmath.sqrt(b * b - 4.0 * f2 * a)
        denom = b + root if abs(b + root) >= abs(b - root) else b - root
        if denom == 0:
            return x2, False
        step = -2.0 * f2 / denom
        x0, x1, x2 = x1, x2, x2 + step
        f0, f1, f2 = f1, f2, f(x2)
        if abs(step) <= tol * max(1.0, abs(x2)):
            return x2, True
    return x2, False
