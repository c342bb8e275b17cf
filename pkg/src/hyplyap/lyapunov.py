"""Lyapunov-spectrum estimators over the genus-2 surface.

Three independent routes to the same spectrum:

* Brownian: grow the cocycle along tracked Brownian paths and average
  log-norm rates (single-vector, operator-norm, and full QR-deflation
  variants).
* Geodesic: evaluate expansion rates along unit-speed geodesic rays with
  uniformly distributed directions.
* Diffusion/expectation: extremize expected log growth over directions in
  a subspace at integer horizons.

Plus the probabilistic diagnostics that justify swapping the routes:
radial drift, geodesic shadowing, and uniformity of limiting directions.

All ensembles run vectorized across paths; the cocycle matrix of each path
accumulates letters on the right (crossing order), so the QR deflation runs
on transposed generator images, which has the same singular-value growth
and makes the limiting frame estimate the flag at the starting fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import Representation, convert_direction, specialize
from .diffusion import (
    CheckReport,
    RngStream,
    _disc_walk_endpoints,
    _time_grid,
    pairwise_sum,
    sample_polar_endpoints,
    polar_separation,
)
from .hypgeo import DiscPoint
from .surface import FuchsianGroup

__all__ = [
    "LyapunovError",
    "SpectrumReport",
    "ExpansionSample",
    "ShadowingReport",
    "UniformityReport",
    "brownian_rate",
    "brownian_norm_rate",
    "benettin_spectrum",
    "geodesic_rate",
    "geodesic_norm_rate",
    "geodesic_norm_rates",
    "geodesic_spectrum",
    "diffusion_spectrum",
    "expansion_interval",
    "expectation_functions",
    "check_exp_conversion",
    "shadowing_report",
    "direction_distribution_check",
]

_GEODESIC_SPACING = 0.05
CLUSTER_GAP = 0.02


class LyapunovError(RuntimeError):
    """Estimator failure (degenerate frame, bad parameters)."""


# ------------------------------------------------------- ensemble engine


class _GroupData:
    """Group constants laid out for vectorized reduction."""

    def __init__(self, group: FuchsianGroup):
        self.group = group
        self.q = np.array(group.neighbors)
        self.one_minus_qa = 1.0 - np.abs(self.q) ** 2
        self.letters = [group.neighbor_letter(j) for j in range(1, 9)]
        self.maps = []
        for j in range(1, 9):
            m = group.generator(-self.letters[j - 1])  # applied during reduction
            self.maps.append((m.a, m.b))


def _reduce_ensemble(data: _GroupData, z, alpha=None, on_letter=None, max_rounds=64):
    """Pull every walker into the fundamental octagon.

    Applies neighbor maps side by side (smallest violated index first per
    walker), transports the direction angles when given, and reports each
    (signed letter, walker mask) to the callback.
    """
    for _ in range(max_rounds):
        zz = np.abs(z) ** 2
        S = np.abs(z[None, :] - data.q[:, None]) ** 2 - zz[None, :] * data.one_minus_qa[:, None]
        violated = S < -1e-12
        active = violated.any(axis=0)
        if not active.any():
            return z, alpha
        first = np.argmax(violated, axis=0)
        for j in range(8):
            mask = active & (first == j)
            if not mask.any():
                continue
            a, b = data.maps[j]
            zj = z[mask]
            den = np.conj(b) * zj + np.conj(a)
            z[mask] = (a * zj + b) / den
            if alpha is not None:
                alpha[mask] -= 2.0 * np.angle(den)
            if on_letter is not None:
                on_letter(data.letters[j], mask)
    raise LyapunovError("fundamental-domain reduction did not settle")


class _MatrixAccumulator:
    """Per-path cocycle products M_p with log-scale spill."""

    def __init__(self, rep: Representation, n: int, transpose: bool = False):
        rep.require_exact()
        self.rep = rep
        dtype = np.float64 if rep.field == "real" else np.complex128
        self.m = np.broadcast_to(np.eye(rep.dim, dtype=dtype), (n, rep.dim, rep.dim)).copy()
        self.log_scale = np.zeros(n)
        self.transpose = transpose

    def apply_letter(self, letter: int, mask):
        img = self.rep.image(letter)
        if self.transpose:
            self.m[mask] = np.einsum("ij,njk->nik", img.T, self.m[mask])
        else:
            self.m[mask] = np.einsum("nij,jk->nik", self.m[mask], img)

    def rescale(self, threshold=1e100):
        big = np.max(np.abs(self.m), axis=(1, 2))
        mask = big > threshold
        if mask.any():
            self.m[mask] /= big[mask, None, None]
            self.log_scale[mask] += np.log(big[mask])

    def log_vector_growth(self, v) -> np.ndarray:
        v = np.asarray(v)
        nv = np.linalg.norm(v)
        img = self.m @ (v / nv)
        return np.log(np.linalg.norm(img, axis=1)) + self.log_scale

    def log_operator_norm(self) -> np.ndarray:
        s = np.linalg.svd(self.m, compute_uv=False)
        return np.log(s[:, 0]) + self.log_scale

    def log_abs_det(self) -> np.ndarray:
        _, logdet = np.linalg.slogdet(self.m)
        return logdet + self.rep.dim * self.log_scale


def _chunks(total: int, workers: int):
    if workers < 1:
        raise LyapunovError("workers must be >= 1")
    base, extra = divmod(total, workers)
    sizes = [base + (1 if i < extra else 0) for i in range(workers)]
    return [s for s in sizes if s > 0]


def _brownian_matrices(rep, group, t, n_paths, step, rng, workers, start=0j, transpose=False):
    """Cocycle matrices along tracked Brownian paths; returns accumulators
    per worker chunk (concatenated)."""
    data = _GroupData(group)
    if isinstance(rng, np.random.Generator):
        raise LyapunovError("pass an RngStream so worker substreams are reproducible")
    outs = []
    for c, size in enumerate(_chunks(n_paths, workers)):
        gen = rng.child(c).generator()
        acc = _MatrixAccumulator(rep, size, transpose=transpose)
        z = np.full(size, complex(start))
        z, _ = _reduce_ensemble(data, z)  # initial reduction: not part of the word
        times = _time_grid(t, step)
        for i in range(1, len(times)):
            dt = times[i] - times[i - 1]
            n1 = gen.standard_normal(size)
            n2 = gen.standard_normal(size)
            ell = np.sqrt(2.0 * dt) * np.hypot(n1, n2)
            beta = np.arctan2(n2, n1)
            xi = np.exp(1j * beta) * np.tanh(0.5 * ell)
            z = (xi + z) / (1.0 + np.conj(z) * xi)
            z, _ = _reduce_ensemble(data, z, on_letter=acc.apply_letter)
            if i % 64 == 0:
                acc.rescale()
        acc.rescale()
        outs.append(acc)
    return outs


def _geodesic_matrices(rep, group, thetas, R, spacing, transpose=False):
    """Cocycle matrices along the rays gamma_{0,theta}, tracked intrinsically
    in reduced coordinates with direction transport."""
    if spacing > _GEODESIC_SPACING + 1e-12:
        raise LyapunovError(f"geodesic tracking needs spacing <= {_GEODESIC_SPACING}")
    data = _GroupData(group)
    thetas = np.asarray(thetas, dtype=float)
    n = thetas.size
    acc = _MatrixAccumulator(rep, n, transpose=transpose)
    w = np.zeros(n, complex)
    alpha = 2.0 * np.pi * thetas
    steps = int(math.ceil(R / spacing))
    done = 0.0
    for k in range(steps):
        h = min(spacing, R - done)
        done += h
        xi = math.tanh(0.5 * h) * np.exp(1j * alpha)
        den = 1.0 + np.conj(w) * xi
        w = (xi + w) / den
        alpha = alpha - 2.0 * np.angle(den)
        w, alpha = _reduce_ensemble(data, w, alpha, on_letter=acc.apply_letter)
        if k % 64 == 0:
            acc.rescale()
    acc.rescale()
    return acc


# ----------------------------------------------------------- domain types


@dataclass(frozen=True)
class ExpansionSample:
    """Expansion rate along one geodesic ray."""

    theta: float
    R: float
    value: float
    vector: tuple = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise LyapunovError("expansion rate must be finite")


@dataclass(frozen=True)
class SpectrumReport:
    """Estimated Lyapunov spectrum with multiplicities and provenance.

    exponents/multiplicities/ci_halfwidths describe the clustered blocks;
    raw_exponents keeps the d per-index estimates the clustering was built
    from.  oseledec_basis holds the limiting deflation frame of the first
    path: trailing column spans estimate the Lyapunov filtration at the
    base fiber (only the flag is canonical at finite horizon).
    """

    exponents: tuple
    multiplicities: tuple
    ci_halfwidths: tuple
    oseledec_basis: np.ndarray
    method: str
    raw_exponents: tuple
    raw_ci: tuple
    exponent_sum: float
    exponent_sum_ci: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.multiplicities) != len(self.raw_exponents):
            raise LyapunovError("multiplicities must sum to the dimension")
        if any(b >= a for a, b in zip(self.exponents[:-1], self.exponents[1:])):
            raise LyapunovError("block exponents must decrease strictly")

    @property
    def dim(self) -> int:
        return len(self.raw_exponents)

    def top(self) -> tuple:
        return self.exponents[0], self.ci_halfwidths[0]

    def rows(self):
        """Per-block rows for CSV emission."""
        out = []
        for i, (chi, mult, ci) in enumerate(
            zip(self.exponents, self.multiplicities, self.ci_halfwidths), start=1
        ):
            out.append({"index": i, "chi": chi, "multiplicity": mult, "ci_halfwidth": ci})
        return out


@dataclass(frozen=True)
class ShadowingReport:
    t_values: tuple
    drift_median: tuple          # median of dist(omega_t, 0)/t
    shadow_quantiles: dict       # q -> tuple over t of normalized shadowing stat
    drift_quantiles: dict        # q -> tuple over t of normalized |dist - t|
    slope_shadow_95: float
    passed: bool
    workers: int = 1

    def __str__(self):
        lines = [f"shadowing over t={self.t_values} (normalization t^0.5 (log t)^1.5)"]
        for q in sorted(self.shadow_quantiles):
            vals = " ".join(f"{v:.3f}" for v in self.shadow_quantiles[q])
            lines.append(f"  shadow q{q:02d}: {vals}")
        lines.append(f"  95th-percentile log-log slope: {self.slope_shadow_95:+.3f}")
        lines.append(f"  drift medians: {['%.4f' % m for m in self.drift_median]}")
        lines.append("  pass" if self.passed else "  FAIL")
        return "\n".join(lines)


@dataclass(frozen=True)
class UniformityReport:
    n_bins: int
    n_paths: int
    statistic: float
    p_value: float
    passed: bool

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (
            f"[{status}] direction uniformity: chi2={self.statistic:.2f} "
            f"({self.n_bins} bins, {self.n_paths} paths), p={self.p_value:.4g}"
        )


# -------------------------------------------------------- Brownian rates


def brownian_rate(rep, group, v, t, n_paths, step, rng, workers=1):
    """Mean single-vector growth rate (1/t) log(|A(omega,t) v| / |v|)
    over tracked Brownian paths from the origin; returns (mean, std_error)."""
    if t < 1.0:
        raise LyapunovError("brownian_rate needs t >= 1")
    accs = _brownian_matrices(rep, group, t, n_paths, step, rng, workers)
    vals = np.concatenate([acc.log_vector_growth(v) for acc in accs]) / t
    return _mean_se(vals)


def brownian_norm_rate(rep, group, t, n_paths, step, rng, workers=1):
    """Mean operator-norm growth rate (1/t) log |A(omega,t)|."""
    if t < 1.0:
        raise LyapunovError("brownian_norm_rate needs t >= 1")
    accs = _brownian_matrices(rep, group, t, n_paths, step, rng, workers)
    vals = np.concatenate([acc.log_operator_norm() for acc in accs]) / t
    return _mean_se(vals)


def _mean_se(vals):
    n = vals.size
    mean = pairwise_sum(vals) / n
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(mean), se


# -------------------------------------------------------------- Benettin


def benettin_spectrum(
    rep,
    group,
    t_max,
    step,
    reorth_every,
    n_paths,
    rng,
    workers=1,
    method_tag="brownian",
) -> SpectrumReport:
    """Full spectrum by QR deflation along tracked Brownian paths.

    Evolves an orthonormal frame per path through the transposed generator
    images (letters arrive in crossing order, i.e. on the right of the
    product; transposing turns them into left factors with identical
    singular-value growth).  Re-orthonormalizes every `reorth_every` steps
    and averages accumulated log diagonals across paths.

    Exponents whose estimates differ by less than max(0.02, 3 combined se)
    merge into one block: strict spectral gaps are not resolvable at finite
    horizon without a threshold.
    """
    if reorth_every < 1 or reorth_every * step > 1.0 + 1e-12:
        raise LyapunovError("need reorth_every >= 1 with reorth_every * step <= 1")
    if isinstance(rng, np.random.Generator):
        raise LyapunovError("pass an RngStream so worker substreams are reproducible")
    rep.require_exact()
    data = _GroupData(group)
    d = rep.dim
    dtype = np.float64 if rep.field == "real" else np.complex128

    all_lams = []
    basis = None
    for c, size in enumerate(_chunks(n_paths, workers)):
        gen = rng.child(c).generator()
        # mutable holder: the frame array is replaced at every QR step and
        # the crossing callback must always see the current one
        frame = [np.broadcast_to(np.eye(d, dtype=dtype), (size, d, d)).copy()]
        logr = np.zeros((size, d))
        z = np.zeros(size, complex)

        def on_letter(letter, mask):
            img = rep.image(letter).T
            frame[0][mask] = np.einsum("ij,njk->nik", img, frame[0][mask])

        times = _time_grid(t_max, step)
        for i in range(1, len(times)):
            dt = times[i] - times[i - 1]
            n1 = gen.standard_normal(size)
            n2 = gen.standard_normal(size)
            ell = np.sqrt(2.0 * dt) * np.hypot(n1, n2)
            beta = np.arctan2(n2, n1)
            xi = np.exp(1j * beta) * np.tanh(0.5 * ell)
            z = (xi + z) / (1.0 + np.conj(z) * xi)
            z, _ = _reduce_ensemble(data, z, on_letter=on_letter)
            if i % reorth_every == 0 or i == len(times) - 1:
                q, r = np.linalg.qr(frame[0])
                diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
                if np.any(diag < 1e-280):
                    raise LyapunovError(
                        "frame degeneracy: QR diagonal underflow during deflation"
                    )
                signs = np.sign(np.diagonal(r.real, axis1=1, axis2=2))
                signs = np.where(signs == 0.0, 1.0, signs)
                frame[0] = q * signs[:, None, :]
                logr += np.log(diag)
        # sort per path: for products without generic alignment (commuting
        # images) the QR diagonal order is path-dependent, and the ensemble
        # average must estimate the sorted spectrum of A(omega, t)
        all_lams.append(np.sort(logr / t_max, axis=1)[:, ::-1])
        if basis is None:
            basis = frame[0][0].copy()
    lams = np.vstack(all_lams)
    return _spectrum_from_samples(
        lams,
        basis,
        method_tag,
        {
            "t_max": t_max,
            "step": step,
            "reorth_every": reorth_every,
            "n_paths": n_paths,
            "workers": workers,
            "master_seed": rng.master_seed,
            "stream_index": rng.stream_index,
        },
    )


def _cluster(raw_sorted, se_sorted):
    """Greedy merge of adjacent exponents closer than the cluster gap."""
    blocks = [[0]]
    for i in range(1, len(raw_sorted)):
        prev = blocks[-1][-1]
        gap = raw_sorted[prev] - raw_sorted[i]
        tol = max(CLUSTER_GAP, 3.0 * math.hypot(se_sorted[prev], se_sorted[i]))
        if gap < tol:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return blocks


# -------------------------------------------------------- geodesic rates


def geodesic_rate(rep, group, theta, R, v, spacing=_GEODESIC_SPACING) -> ExpansionSample:
    """Deterministic expansion rate (1/R) log(|A(gamma_theta, R) v| / |v|)."""
    if R <= 0:
        raise LyapunovError("geodesic_rate needs R > 0")
    acc = _geodesic_matrices(rep, group, [theta], R, spacing)
    val = float(acc.log_vector_growth(v)[0]) / R
    return ExpansionSample(theta=float(theta) % 1.0, R=R, value=val, vector=tuple(np.ravel(v)))


def geodesic_norm_rate(rep, group, theta, R, spacing=_GEODESIC_SPACING) -> ExpansionSample:
    """Deterministic maximal expansion rate (1/R) log |A(gamma_theta, R)|."""
    if R <= 0:
        raise LyapunovError("geodesic_norm_rate needs R > 0")
    acc = _geodesic_matrices(rep, group, [theta], R, spacing)
    val = float(acc.log_operator_norm()[0]) / R
    return ExpansionSample(theta=float(theta) % 1.0, R=R, value=val)


def geodesic_norm_rates(rep, group, R, n_dirs, spacing=_GEODESIC_SPACING):
    """Operator-norm rates over the uniform direction grid; the grid average
    estimates the top exponent by the geodesic route."""
    thetas = (np.arange(n_dirs) + 0.5) / n_dirs
    acc = _geodesic_matrices(rep, group, thetas, R, spacing)
    return thetas, acc.log_operator_norm() / R


def _spectrum_from_samples(lams, basis, method, provenance) -> SpectrumReport:
    """Build a report from per-sample sorted log singular values / t."""
    d = lams.shape[1]
    raw_sorted = np.array([pairwise_sum(lams[:, i]) / lams.shape[0] for i in range(d)])
    se_sorted = np.std(lams, axis=0, ddof=1) / math.sqrt(lams.shape[0])
    per_sum = lams.sum(axis=1)
    blocks = _cluster(raw_sorted, se_sorted)
    exponents, mults, cis = [], [], []
    for idx in blocks:
        exponents.append(float(np.mean(raw_sorted[idx])))
        mults.append(len(idx))
        cis.append(1.96 * float(np.sqrt(np.mean(se_sorted[idx] ** 2) / len(idx))))
    return SpectrumReport(
        exponents=tuple(exponents),
        multiplicities=tuple(mults),
        ci_halfwidths=tuple(cis),
        oseledec_basis=basis,
        method=method,
        raw_exponents=tuple(float(x) for x in raw_sorted),
        raw_ci=tuple(1.96 * float(s) for s in se_sorted),
        exponent_sum=float(np.mean(per_sum)),
        exponent_sum_ci=1.96 * float(np.std(per_sum, ddof=1) / math.sqrt(lams.shape[0])),
        provenance=provenance,
    )


def geodesic_spectrum(rep, group, R, n_dirs, spacing=_GEODESIC_SPACING) -> SpectrumReport:
    """Full spectrum by the geodesic route: sorted log singular values of
    the ray cocycles, averaged over the uniform direction grid."""
    if R <= 0 or n_dirs < 8:
        raise LyapunovError("geodesic_spectrum needs R > 0 and n_dirs >= 8")
    thetas = (np.arange(n_dirs) + 0.5) / n_dirs
    acc = _geodesic_matrices(rep, group, thetas, R, spacing)
    s = np.linalg.svd(acc.m, compute_uv=False)
    lams = (np.log(s) + acc.log_scale[:, None]) / R
    _, _, vh = np.linalg.svd(acc.m[0])
    basis = vh.conj().T
    return _spectrum_from_samples(
        lams, basis, "geodesic", {"R": R, "n_dirs": n_dirs, "spacing": spacing}
    )


def diffusion_spectrum(rep, group, n, n_paths, step, rng, workers=1) -> SpectrumReport:
    """Full spectrum by the expectation route: expected sorted log singular
    values of the cocycle at an integer horizon (no deflation along the
    path; the whole matrix is decomposed at the end)."""
    if n < 1:
        raise LyapunovError("diffusion_spectrum needs an integer horizon n >= 1")
    accs = _brownian_matrices(rep, group, float(int(n)), n_paths, step, rng, workers)
    mats = np.concatenate([a.m for a in accs])
    scales = np.concatenate([a.log_scale for a in accs])
    s = np.linalg.svd(mats, compute_uv=False)
    lams = (np.log(s) + scales[:, None]) / float(int(n))
    _, _, vh = np.linalg.svd(mats[0])
    basis = vh.conj().T
    return _spectrum_from_samples(
        lams,
        basis,
        "diffusion",
        {
            "n": int(n),
            "n_paths": n_paths,
            "step": step,
            "workers": workers,
            "master_seed": rng.master_seed,
            "stream_index": rng.stream_index,
        },
    )


# ---------------------------------------------- interval / expectation ops


def _sphere_sample(m_real: int, n_vectors: int):
    """Deterministic quasi-uniform sample of the unit sphere in R^m."""
    if m_real == 1:
        return np.array([[1.0]])
    if m_real == 2:
        phi = 2.0 * np.pi * (np.arange(n_vectors) + 0.5) / n_vectors
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if m_real == 3:
        # Fibonacci lattice
        i = np.arange(n_vectors) + 0.5
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        zc = 1.0 - 2.0 * i / n_vectors
        r = np.sqrt(np.maximum(1.0 - zc * zc, 0.0))
        phi = 2.0 * np.pi * i / golden
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), zc])
    # Halton points pushed through the Gaussian quantile, then normalized
    from scipy.stats import norm, qmc

    h = qmc.Halton(d=m_real, scramble=False).random(n_vectors + 1)[1:]
    g = norm.ppf(np.clip(h, 1e-12, 1.0 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _embed(vs_real, basis, complex_field):
    """Real sphere coordinates -> unit vectors in the span of basis columns."""
    if complex_field:
        m = basis.shape[1]
        coef = vs_real[:, :m] + 1j * vs_real[:, m:]
    else:
        coef = vs_real
    vecs = coef @ basis.T
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs / norms


def _optimize_rate(objective, m_real, n_vectors, refine_iters=40):
    """Min and max of a smooth projective function on the unit sphere:
    deterministic grid, then golden-section refinement in the top-scoring
    2-plane coordinates around each incumbent."""
    vs = _sphere_sample(m_real, n_vectors)
    vals = objective(vs)
    lo_i, hi_i = int(np.argmin(vals)), int(np.argmax(vals))
    lo = _refine_extremum(objective, vs, lo_i, minimize=True, iters=refine_iters)
    hi = _refine_extremum(objective, vs, hi_i, minimize=False, iters=refine_iters)
    return lo, hi


def _refine_extremum(objective, vs, idx, minimize, iters):
    v = vs[idx].copy()
    best = float(objective(v[None, :])[0])
    m = v.size
    if m == 1:
        return best
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    for axis in range(m):
        e = np.zeros(m)
        e[axis] = 1.0
        if abs(abs(np.dot(e, v)) - 1.0) < 1e-12:
            continue
        # golden-section on the rotation angle in the (v, e') plane
        e = e - np.dot(e, v) * v
        e /= np.linalg.norm(e)

        def val(ang):
            w = math.cos(ang) * v + math.sin(ang) * e
            return float(objective(w[None, :])[0])

        a, b = -0.35, 0.35
        c1 = b - gr * (b - a)
        c2 = a + gr * (b - a)
        f1, f2 = val(c1), val(c2)
        for _ in range(iters // m + 8):
            better = (f1 < f2) if minimize else (f1 > f2)
            if better:
                b, c2, f2 = c2, c1, f1
                c1 = b - gr * (b - a)
                f1 = val(c1)
            else:
                a, c1, f1 = c1, c2, f2
                c2 = a + gr * (b - a)
                f2 = val(c2)
        ang = 0.5 * (a + b)
        cand = math.cos(ang) * v + math.sin(ang) * e
        cv = val(ang)
        if (cv < best) if minimize else (cv > best):
            best = cv
            v = cand / np.linalg.norm(cand)
    return best


def _real_dim(basis, complex_field):
    m = basis.shape[1]
    return 2 * m if complex_field else m


def expansion_interval(rep, group, R, basis, n_dirs=64, n_vectors=64, spacing=_GEODESIC_SPACING):
    """Smallest interval [a, b] of direction-averaged expansion rates over
    the nonzero vectors of the subspace spanned by the basis columns."""
    basis = _as_basis(rep, basis)
    if n_dirs < 64:
        raise LyapunovError("expansion_interval needs n_dirs >= 64")
    if _real_dim(basis, rep.field == "complex") > 1 and n_vectors < 64:
        raise LyapunovError("expansion_interval needs n_vectors >= 64")
    thetas = (np.arange(n_dirs) + 0.5) / n_dirs
    acc = _geodesic_matrices(rep, group, thetas, R, spacing)
    complex_field = rep.field == "complex"

    def objective(vs_real):
        vecs = _embed(vs_real, basis, complex_field)
        img = np.einsum("tij,nj->tni", acc.m, vecs)
        logs = np.log(np.linalg.norm(img, axis=2)) + acc.log_scale[:, None]
        return logs.mean(axis=0) / R

    a, b = _optimize_rate(objective, _real_dim(basis, complex_field), n_vectors)
    return min(a, b), max(a, b)


def _as_basis(rep, basis):
    dtype = np.float64 if rep.field == "real" else np.complex128
    basis = np.asarray(basis, dtype=dtype)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.shape[0] != rep.dim or basis.shape[1] < 1:
        raise LyapunovError(f"basis must be {rep.dim} x m with m >= 1")
    qb, _ = np.linalg.qr(basis)
    return qb


def expectation_functions(
    rep, group, basis, n, n_paths, step, rng, n_vectors=64, workers=1
):
    """Endpoints [m_n, M_n] of the expected log-growth rate at integer
    horizon n, extremized over unit vectors of the subspace.

    A single path ensemble is shared by every direction, so a 1-dimensional
    subspace gives m_n = M_n exactly.
    """
    if n < 1:
        raise LyapunovError("expectation horizon n must be >= 1")
    basis = _as_basis(rep, basis)
    accs = _brownian_matrices(rep, group, float(n), n_paths, step, rng, workers)
    mats = np.concatenate([a.m for a in accs])
    scales = np.concatenate([a.log_scale for a in accs])
    complex_field = rep.field == "complex"

    def objective(vs_real):
        vecs = _embed(vs_real, basis, complex_field)
        img = np.einsum("pij,nj->pni", mats, vecs)
        logs = np.log(np.linalg.norm(img, axis=2)) + scales[:, None]
        return logs.mean(axis=0) / n

    m_real = _real_dim(basis, complex_field)
    if m_real == 1:
        val = float(objective(np.array([[1.0]]))[0])
        return val, val
    lo, hi = _optimize_rate(objective, m_real, n_vectors)
    return min(lo, hi), max(lo, hi)


# ------------------------------------------------------ conversion check


def check_exp_conversion(rep, group, u, eta, t, n_paths, step, rng) -> CheckReport:
    """Expected log growth from eta with the converted direction, against
    the diffused specialization minus its value at eta; two independent
    Monte Carlo pipelines."""
    if t < 0.5:
        raise LyapunovError("check_exp_conversion needs t >= 0.5")
    eta_pt = eta if isinstance(eta, DiscPoint) else DiscPoint.from_complex(complex(eta))
    v = convert_direction(rep, u, eta_pt, group)

    accs = _brownian_matrices(rep, group, t, n_paths, step, rng.child(101), workers=1, start=eta_pt.z)
    lhs_vals = np.concatenate([a.log_vector_growth(v) for a in accs])
    lhs, lhs_se = _mean_se(lhs_vals)

    spec = specialize(rep, u, group)
    gen = rng.child(202).generator()
    zs = _disc_walk_endpoints(n_paths, t, step, gen, z0=eta_pt.z)
    f_vals = np.array([spec(z) for z in zs])
    f_eta = spec(eta_pt)
    rhs_vals = f_vals - f_eta
    rhs, rhs_se = _mean_se(rhs_vals)

    tol = 3.0 * math.hypot(lhs_se, rhs_se)
    passed = abs(lhs - rhs) <= max(tol, 1e-12)
    return CheckReport(
        name=f"exp_conversion(t={t})",
        lhs=lhs,
        rhs=rhs,
        lhs_se=lhs_se,
        rhs_se=rhs_se,
        tolerance=max(tol, 1e-12),
        passed=passed,
        detail={"eta": (eta_pt.re, eta_pt.im), "n_paths": n_paths},
    )


# ------------------------------------------------------------ diagnostics


def shadowing_report(n_paths, t_list, step, rng, rho_exponent=1.5, workers=1) -> ShadowingReport:
    """Distance between Brownian paths and their limiting geodesic rays.

    The landing direction is approximated by the angular coordinate at the
    final sampled time; statistics are normalized by t^(1/2) (log t)^1.5
    and the check passes when the 95th percentile shows no growth trend
    (fitted log-log slope <= 0.1)."""
    t_list = sorted(t_list)
    if t_list[-1] < 20.0:
        raise LyapunovError("shadowing needs max(t_list) >= 20")
    if isinstance(rng, np.random.Generator):
        raise LyapunovError("pass an RngStream for reproducible worker substreams")
    rhos, psis = [], []
    for c, size in enumerate(_chunks(n_paths, workers)):
        r, p = sample_polar_endpoints(
            size, t_list[-1], step, rng.child(c).generator(), checkpoints=t_list
        )
        rhos.append(r)
        psis.append(p)
    rho = np.concatenate(rhos, axis=1)
    psi = np.concatenate(psis, axis=1)

    psi_final = psi[-1]
    qs = (50, 90, 95)
    shadow_q = {q: [] for q in qs}
    drift_q = {q: [] for q in qs}
    drift_median = []
    for i, t in enumerate(t_list):
        # normalizer degenerates below t ~ e; early entries report raw scale
        norm = max(math.sqrt(t) * math.log(max(t, math.e)) ** rho_exponent, 1e-9)
        d = polar_separation(rho[i], psi[i], np.full(rho.shape[1], float(t)), psi_final)
        radial = np.abs(rho[i] - t)
        for q in qs:
            shadow_q[q].append(float(np.percentile(d, q)) / norm)
            drift_q[q].append(float(np.percentile(radial, q)) / norm)
        drift_median.append(float(np.median(rho[i]) / t) if t > 0 else 0.0)

    fit_ts = [t for t in t_list if t >= 10.0]
    if len(fit_ts) < 2:
        raise LyapunovError("shadowing slope fit needs at least two horizons >= 10")
    fit_vals = [shadow_q[95][t_list.index(t)] for t in fit_ts]
    logt = np.log(np.asarray(fit_ts, dtype=float))
    log95 = np.log(np.maximum(fit_vals, 1e-12))
    slope = float(np.polyfit(logt, log95, 1)[0])
    return ShadowingReport(
        t_values=tuple(t_list),
        drift_median=tuple(drift_median),
        shadow_quantiles={q: tuple(v) for q, v in shadow_q.items()},
        drift_quantiles={q: tuple(v) for q, v in drift_q.items()},
        slope_shadow_95=slope,
        passed=slope <= 0.1,
        workers=workers,
    )


def direction_distribution_check(n_paths, t, step, n_bins, rng) -> UniformityReport:
    """Chi-square uniformity of final angular coordinates."""
    from scipy.stats import chi2

    if t < 40.0:
        raise LyapunovError("direction check needs t >= 40 (direction nearly frozen)")
    if n_bins < 1:
        raise LyapunovError("need n_bins >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    _, psis = sample_polar_endpoints(n_paths, t, step, gen)
    angles = np.mod(psis[-1], 2.0 * np.pi)
    counts, _ = np.histogram(angles, bins=n_bins, range=(0.0, 2.0 * np.pi))
    expected = n_paths / n_bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    p = float(chi2.sf(stat, df=n_bins - 1)) if n_bins > 1 else 1.0
    return UniformityReport(
        n_bins=n_bins,
        n_paths=n_paths,
        statistic=stat,
        p_value=p,
        passed=p > 0.001,
    )
