"""Representation cocycles over the genus-2 surface.

A representation assigns an invertible matrix to each of the four handle
generators; a path's cocycle value is the ordered product of generator
images along the path's deck word.  The identifier is constant (the local
system is trivialized over the fundamental octagon), so values depend only
on the homotopy class and the homotopy law holds exactly for exact
representations.

All downstream consumers read log-norms through CocycleValue, never raw
matrix norms: products carry a separate log-scale accumulator that absorbs
overflow past 1e300.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hypgeo import DiscPoint, mobius_point_chart
from .diffusion import ScalarField
from .surface import DeckWord, FuchsianGroup, locate, track

__all__ = [
    "CocycleError",
    "Representation",
    "CocycleValue",
    "Specialization",
    "RegularityReport",
    "cocycle_of_word",
    "evaluate",
    "specialize",
    "convert_direction",
    "estimate_regularity",
]

_RESCALE_THRESHOLD = 1e300
_EXACTNESS_TOL = 1e-8


class CocycleError(ValueError):
    """Invalid representation or cocycle input."""


@dataclass(frozen=True)
class Representation:
    """Images of the four handle generators in GL(d, K)."""

    dim: int
    field: str                     # "real" | "complex"
    images: tuple                  # 4 arrays, rho(g_1)..rho(g_4)
    inverses: tuple = ()
    relator_residual: float = math.nan

    @staticmethod
    def from_matrices(dim: int, field: str, matrices, group: Optional[FuchsianGroup] = None):
        if field not in ("real", "complex"):
            raise CocycleError(f"field must be 'real' or 'complex', got {field!r}")
        dtype = np.float64 if field == "real" else np.complex128
        if len(matrices) != 4:
            raise CocycleError(f"need 4 generator images, got {len(matrices)}")
        images = []
        for k, m in enumerate(matrices, start=1):
            arr = np.asarray(m, dtype=dtype)
            if arr.shape != (dim, dim):
                raise CocycleError(f"image of g{k} has shape {arr.shape}, want ({dim},{dim})")
            if not np.all(np.isfinite(arr)):
                raise CocycleError(f"image of g{k} has non-finite entries")
            cond = np.linalg.cond(arr)
            if not (cond < 1e12):
                raise CocycleError(f"image of g{k} has condition number {cond:.3g} >= 1e12")
            images.append(arr)
        inverses = tuple(np.linalg.inv(m) for m in images)
        residual = _relator_residual(images, inverses, group)
        return Representation(
            dim=dim,
            field=field,
            images=tuple(images),
            inverses=inverses,
            relator_residual=residual,
        )

    def image(self, letter: int) -> np.ndarray:
        """Matrix for a signed letter: +k -> rho(g_k), -k -> rho(g_k)^{-1}."""
        if not 1 <= abs(letter) <= 4:
            raise CocycleError(f"letter {letter} outside 1..4")
        return self.images[letter - 1] if letter > 0 else self.inverses[-letter - 1]

    @property
    def exact(self) -> bool:
        """Whether the relator image is the identity; required for the
        homotopy law, hence for cocycle construction."""
        return self.relator_residual <= _EXACTNESS_TOL

    def require_exact(self):
        if not self.exact:
            raise CocycleError(
                f"representation is projective-only (relator residual "
                f"{self.relator_residual:.3g} > {_EXACTNESS_TOL}); cocycle "
                f"values would depend on the word, not the homotopy class"
            )

    def identity_value(self) -> "CocycleValue":
        dtype = np.float64 if self.field == "real" else np.complex128
        return CocycleValue(np.eye(self.dim, dtype=dtype), 0.0)


def _relator_residual(images, inverses, group: Optional[FuchsianGroup]) -> float:
    word = group.relator if group is not None else _STANDARD_RELATOR
    d = images[0].shape[0]
    m = np.eye(d, dtype=images[0].dtype)
    for letter in word.letters:
        m = m @ (images[letter - 1] if letter > 0 else inverses[-letter - 1])
    return float(np.linalg.norm(m - np.eye(d), ord="fro"))


# relator of build_genus2(); kept in sync by a construction-time test
_STANDARD_RELATOR = DeckWord((-2, 3, -4, -1, 2, -3, 4, 1))


def diagonal_representation(entries, others_identity: bool = True) -> Representation:
    """Representation with rho(g_1) = diag(entries) and the other images the
    identity; the workhorse test cocycle."""
    d = len(entries)
    g1 = np.diag(np.asarray(entries, dtype=float))
    eye = np.eye(d)
    return Representation.from_matrices(d, "real", [g1, eye, eye, eye])


def trivial_representation(dim: int, field: str = "real") -> Representation:
    eye = np.eye(dim)
    return Representation.from_matrices(dim, field, [eye, eye, eye, eye])


@dataclass(frozen=True)
class CocycleValue:
    """Matrix together with a log-scale accumulator (matrix * exp(log_scale))."""

    matrix: np.ndarray
    log_scale: float = 0.0

    def rescaled(self) -> "CocycleValue":
        norm = np.max(np.abs(self.matrix))
        if norm > _RESCALE_THRESHOLD:
            return CocycleValue(self.matrix / norm, self.log_scale + math.log(norm))
        return self

    def __matmul__(self, other: "CocycleValue") -> "CocycleValue":
        a, b = self, other
        na = float(np.max(np.abs(a.matrix)))
        nb = float(np.max(np.abs(b.matrix)))
        if not (na * nb <= _RESCALE_THRESHOLD):
            # rescale the operands first so the product itself cannot overflow
            if na > 1.0:
                a = CocycleValue(a.matrix / na, a.log_scale + math.log(na))
            if nb > 1.0:
                b = CocycleValue(b.matrix / nb, b.log_scale + math.log(nb))
        return CocycleValue(a.matrix @ b.matrix, a.log_scale + b.log_scale).rescaled()

    def log_vector_growth(self, v) -> float:
        """log(|A v| / |v|), scale-safe."""
        v = np.asarray(v)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            raise CocycleError("direction vector must be nonzero")
        return float(
            math.log(np.linalg.norm(self.matrix @ v) / nv) + self.log_scale
        )

    def log_operator_norm(self) -> float:
        return float(math.log(np.linalg.norm(self.matrix, 2)) + self.log_scale)

    def log_abs_det(self) -> float:
        sign, logdet = np.linalg.slogdet(self.matrix)
        return float(logdet + self.matrix.shape[0] * self.log_scale)

    def apply(self, v) -> np.ndarray:
        """A v without the scale factor; use log_vector_growth for sizes."""
        return self.matrix @ np.asarray(v)


def cocycle_of_word(rep: Representation, word: DeckWord) -> CocycleValue:
    """Ordered product of generator images along the word; empty -> identity."""
    rep.require_exact()
    out = rep.identity_value()
    for letter in word.letters:
        out = out @ CocycleValue(rep.image(letter))
    return out


def evaluate(rep: Representation, path, group: FuchsianGroup) -> CocycleValue:
    """Cocycle value of a discretized leafwise path."""
    return cocycle_of_word(rep, track(path, group))


@dataclass(frozen=True)
class Specialization:
    """Scalar field recording the log-growth of the cocycle applied to a
    fixed projective direction, as a function of the endpoint lift.

    f(zeta) = log |A(path base -> zeta) u| / |u|, which vanishes at the base
    and is independent of the representative chosen for u.
    """

    rep: Representation
    group: FuchsianGroup
    direction: np.ndarray          # unit representative of u
    base: DiscPoint = DiscPoint(0.0, 0.0)
    base_word: DeckWord = field(default_factory=DeckWord)

    def __call__(self, zeta) -> float:
        _, w_end = locate(zeta, self.group)
        word = w_end * self.base_word.inverse()
        value = cocycle_of_word(self.rep, word)
        return value.log_vector_growth(self.direction)

    def as_field(self) -> ScalarField:
        return ScalarField(fn=self.__call__, name="specialization")


def convert_direction(rep: Representation, u, eta, group: FuchsianGroup) -> np.ndarray:
    """[A(path 0 -> eta, 1) u]: the direction pairing with specializations
    rebased at the lift eta (the first conversion rule's v)."""
    _, word = locate(eta, group)
    v = cocycle_of_word(rep, word).apply(np.asarray(u))
    return v / np.linalg.norm(v)


def specialize(rep: Representation, u, group: FuchsianGroup, base=DiscPoint(0.0, 0.0)) -> Specialization:
    rep.require_exact()
    u = np.asarray(u, dtype=np.float64 if rep.field == "real" else np.complex128)
    nu = np.linalg.norm(u)
    if nu == 0.0 or not np.isfinite(nu):
        raise CocycleError("projective direction must be nonzero and finite")
    base_pt = base if isinstance(base, DiscPoint) else DiscPoint.from_complex(complex(base))
    _, base_word = locate(base_pt, group)
    return Specialization(
        rep=rep, group=group, direction=u / nu, base=base_pt, base_word=base_word
    )


@dataclass(frozen=True)
class RegularityReport:
    alpha_fit: float
    c_fit: float
    lipschitz_c: float
    n_pairs: int
    radius: float
    bin_centers: tuple = ()
    bin_envelope: tuple = ()

    def __str__(self):
        return (
            f"regularity: alpha={self.alpha_fit:.3f} c={self.c_fit:.4g} "
            f"lipschitz={self.lipschitz_c:.4g} (n={self.n_pairs}, radius={self.radius})"
        )


def estimate_regularity(
    spec,
    n_pairs: int,
    radius: float,
    rng,
    n_bins: int = 12,
) -> RegularityReport:
    """Probe the large-separation growth of |f(y) - f(z)|.

    Pairs are sampled with controlled separation: y area-uniform in the ball
    of the given radius, z at distance drawn uniformly in (0, radius] along
    a uniform direction from y.  The binned upper envelope is fitted against
    c * dist^alpha + c0; the Lipschitz constant is the largest envelope
    ratio at separations >= 1 (the growth classes concern large distances,
    so the small-scale jumps of locally constant fields are ignored).
    """
    if n_pairs < 100:
        raise CocycleError("estimate_regularity needs n_pairs >= 100")
    from .diffusion import RngStream

    gen = rng.generator() if isinstance(rng, RngStream) else rng
    f = spec if callable(spec) else spec.fn

    seps = np.empty(n_pairs)
    diffs = np.empty(n_pairs)
    cosh_rad = math.cosh(radius)
    for i in range(n_pairs):
        rho_y = math.acosh(1.0 + gen.random() * (cosh_rad - 1.0))
        phi_y = 2.0 * math.pi * gen.random()
        y = DiscPoint.from_complex(
            math.tanh(0.5 * rho_y) * complex(math.cos(phi_y), math.sin(phi_y))
        )
        ell = gen.random() * radius
        beta = 2.0 * math.pi * gen.random()
        z = mobius_point_chart(y)(
            DiscPoint.from_complex(
                math.tanh(0.5 * ell) * complex(math.cos(beta), math.sin(beta))
            )
        )
        seps[i] = ell
        diffs[i] = abs(f(y) - f(z))

    if np.max(diffs) == 0.0:
        return RegularityReport(0.0, 0.0, 0.0, n_pairs, radius)

    edges = np.linspace(0.0, radius, n_bins + 1)
    centers, envelope = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mask = (seps > a) & (seps <= b)
        if np.any(mask):
            centers.append(0.5 * (a + b))
            envelope.append(float(np.max(diffs[mask])))
    centers = np.asarray(centers)
    envelope = np.asarray(envelope)

    large = centers >= 1.0
    fit_x = centers[large] if np.sum(large) >= 3 else centers
    fit_y = envelope[large] if np.sum(large) >= 3 else envelope

    best = (math.inf, 0.0, 0.0)
    for alpha in np.linspace(0.0, 2.0, 81):
        basis = np.column_stack([fit_x ** alpha, np.ones_like(fit_x)])
        coef, *_ = np.linalg.lstsq(basis, fit_y, rcond=None)
        c = max(coef[0], 0.0)
        resid = float(np.sum((basis @ [c, coef[1]] - fit_y) ** 2))
        if resid < best[0]:
            best = (resid, float(alpha), c)
    _, alpha_fit, c_fit = best

    big = seps >= 1.0
    lipschitz_c = float(np.max(diffs[big] / seps[big])) if np.any(big) else float(
        np.max(diffs / np.maximum(seps, 1e-9))
    )
    return RegularityReport(
        alpha_fit=alpha_fit,
        c_fit=c_fit,
        lipschitz_c=lipschitz_c,
        n_pairs=n_pairs,
        radius=radius,
        bin_centers=tuple(centers),
        bin_envelope=tuple(envelope),
    )
