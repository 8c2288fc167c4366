"""Quantized heights: section Grams, arithmetic degrees, Chow heights,
balanced iteration and the dequantization / Hilbert-Samuel scans.

v1 supports the P^1_Z / Fubini-Study family end to end; the entry
points take family ids so further families can register providers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConventionMismatch, NonPositiveDefinite,
                     UnsupportedFamily, ValidationError)
from .geometry import SphereGeometry

VOL_OMEGA = "omega"
VOL_M_OMEGA = "m-omega"


@dataclass(frozen=True)
class SectionGram:
    m: int
    basis: tuple
    gram: np.ndarray
    volume_convention: str

    def __post_init__(self):
        g = np.asarray(self.gram, float)
        object.__setattr__(self, "gram", g)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValidationError("gram must be square")
        if len(self.basis) != g.shape[0]:
            raise ValidationError("basis size must match gram dimension")
        if not np.allclose(g, g.T, rtol=0, atol=1e-13 * max(1.0, np.abs(g).max())):
            raise ValidationError("gram must be symmetric")
        if self.volume_convention not in (VOL_OMEGA, VOL_M_OMEGA):
            raise ValidationError(
                f"unknown volume convention {self.volume_convention!r}")

    @property
    def rank(self) -> int:
        return self.gram.shape[0]


def p1_basis(m: int) -> tuple:
    return tuple(f"x^{a}*y^{m - a}" for a in range(m + 1))


def p1_fs_gram_diag(m: int, volume_convention: str) -> np.ndarray:
    """Closed-form L^2 norms of the monomial basis of H^0(O(m)) under the
    mass-1 Fubini-Study volume: Beta integrals a!(m-a)!/(m+1)!."""
    a = np.arange(m + 1)
    logs = (np.vectorize(math.lgamma)(a + 1.0)
            + np.vectorize(math.lgamma)(m - a + 1.0)
            - math.lgamma(m + 2.0))
    if volume_convention == VOL_M_OMEGA:
        logs = logs + math.log(m)   # n = 1: one factor of m^n
    return np.exp(logs)


def l2_gram(family_id: str, m: int, metric_id: str = "fs",
            volume_convention: str = VOL_OMEGA) -> SectionGram:
    if family_id not in ("p1-fs", "p1"):
        raise UnsupportedFamily(f"no closed-form Gram for {family_id!r}")
    if metric_id != "fs":
        raise UnsupportedFamily(f"unsupported metric {metric_id!r}")
    if m < 1:
        raise ValidationError("tensor power m must be >= 1")
    return SectionGram(m, p1_basis(m),
                       np.diag(p1_fs_gram_diag(m, volume_convention)),
                       volume_convention)


def p1_deg_hat(m: int, volume_convention: str = VOL_M_OMEGA) -> float:
    """-1/2 log det of the closed-form Gram, summed in log space."""
    s = 0.0
    for a in range(m + 1):
        s += math.lgamma(a + 1.0) + math.lgamma(m - a + 1.0) \
            - math.lgamma(m + 2.0)
    if volume_convention == VOL_M_OMEGA:
        s += (m + 1) * math.log(m)
    return -0.5 * s


# -- section values on the sphere grid --------------------------------

def p1_section_values(geometry: SphereGeometry, m: int) -> np.ndarray:
    """Matrix of monomial section values w_a with |w_a|^2 =
    |z|^{2a}/(1+|z|^2)^m in the affine chart |z| = tan(theta/2)."""
    lt2 = geometry.log_t2()[:, None]               # log |z|^2 per latitude
    log1p = np.logaddexp(0.0, lt2)
    a = np.arange(m + 1)[None, None, :]
    mod = np.exp(0.5 * (a * lt2[:, :, None] - m * log1p[:, :, None])
                 + np.zeros((1, geometry.n_psi, 1)))
    phase = np.exp(1j * np.arange(m + 1)[None, None, :]
                   * geometry.psi[None, :, None])
    return (mod * phase).transpose(2, 0, 1)        # (m+1, n_theta, n_psi)


def l2_gram_quadrature(geometry: SphereGeometry, m: int,
                       volume_convention: str = VOL_OMEGA) -> SectionGram:
    W = p1_section_values(geometry, m)
    dens = geometry.weights
    if volume_convention == VOL_M_OMEGA:
        dens = dens * float(m)
    flat = (W * np.sqrt(dens)[None, :, :]).reshape(m + 1, -1)
    g = flat @ flat.conj().T
    return SectionGram(m, p1_basis(m), g.real, volume_convention)


# -- arithmetic degree and Chow heights --------------------------------

def arithmetic_degree(g: SectionGram) -> float:
    sign, logdet = np.linalg.slogdet(g.gram)
    if sign <= 0 or not np.isfinite(logdet):
        raise NonPositiveDefinite("gram is not positive definite")
    return -0.5 * logdet


def chow_height(model, g: SectionGram) -> float:
    """(L_m^{n+1})/((n+1)(L_m^n)[K:Q]) - deg_hat/(rank [K:Q]), L_m = m L."""
    if g.volume_convention != VOL_M_OMEGA:
        raise ConventionMismatch(
            "Chow height requires the (m omega)^n volume convention")
    n, d = model.n, model.degree_KQ
    m = g.m
    a = model.form.pair(*([model.L()] * (n + 1))).evaluate()
    top = m ** (n + 1) * a
    return top / ((n + 1) * (m ** n * float(model.deg_Ln)) * d) \
        - arithmetic_degree(g) / (g.rank * d)


def extended_chow_height(model, g: SectionGram, bergman_samples,
                         density_samples, geometry) -> float:
    """Chow height plus (1/2) log of the averaged Bergman density.

    bergman_samples: nodal values of sum_a |s_a|^2_h for an H-orthonormal
    basis; density_samples: relative density of c1(L^m, h^m)^n w.r.t. the
    grid measure.  The 1/2 makes h~_C invariant under H -> lambda H and
    stationary at the balanced Gram (docs/normalization.md).
    """
    base = chow_height(model, g)
    mass = geometry.quad(np.asarray(bergman_samples)
                         * np.asarray(density_samples))
    vol = g.m ** model.n * float(model.deg_Ln)
    if mass <= 0:
        raise ValidationError("Bergman density mass must be positive")
    return base + 0.5 * math.log(mass / vol) / model.degree_KQ


# -- balanced iteration -------------------------------------------------

def bergman_density(geometry: SphereGeometry, m: int,
                    H: np.ndarray) -> np.ndarray:
    """Phi_H = sum_{ab} (H^{-1})_{ab} w_a bar(w_b) on the grid."""
    W = p1_section_values(geometry, m).reshape(m + 1, -1)
    try:
        c = np.linalg.cholesky(np.asarray(H, float))
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefinite("gram is not positive definite") from exc
    sol = np.linalg.solve(c, W)
    phi = np.sum(sol.real ** 2 + sol.imag ** 2, axis=0)
    return phi.reshape(geometry.shape)


def fubini_study_of(geometry: SphereGeometry, m: int, H: np.ndarray):
    """FS(H) data: Bergman log-density u and the curvature density m + ddc u."""
    u = np.log(bergman_density(geometry, m, H))
    rho = float(m) + geometry.ddc(u)
    if np.min(rho) <= 0:
        raise NonPositiveDefinite("FS(H) curvature density lost positivity")
    return u, rho


def balanced_step(g: SectionGram, geometry: SphereGeometry) -> SectionGram:
    """One T-operator step: L^2 Gram under FS(H), trace renormalized."""
    H = g.gram
    u, rho = fubini_study_of(geometry, g.m, H)
    W = p1_section_values(geometry, g.m)
    dens = geometry.weights * np.exp(-u) * rho
    flat = (W * np.sqrt(dens)[None, :, :]).reshape(g.rank, -1)
    newg = (flat @ flat.conj().T).real
    newg *= np.trace(H) / np.trace(newg)
    return SectionGram(g.m, g.basis, newg, g.volume_convention)


def balanced_iterate(g0: SectionGram, geometry: SphereGeometry,
                     tol: float = 1e-10, max_iter: int = 200,
                     model=None):
    """Iterate balanced_step to the fixed point.

    Returns (g_star, iterations, converged, trace) where trace rows are
    (iteration, distance, h~_C) -- h~_C only if a model is supplied.
    """
    g = g0
    trace = []
    for it in range(1, max_iter + 1):
        nxt = balanced_step(g, geometry)
        dist = float(np.max(np.abs(nxt.gram - g.gram)))
        h = (htilde_c_of_gram(model, nxt, geometry)
             if model is not None else float("nan"))
        trace.append((it, dist, h))
        g = nxt
        if dist < tol:
            return g, it, True, trace
    return g, max_iter, False, trace


def htilde_c_of_gram(model, g: SectionGram,
                     geometry: SphereGeometry) -> float:
    """Extended Chow height of (X, L^m, FS(H)) with lattice metric H.

    With h = FS(H) the Bergman density of the H-orthonormal basis is
    identically 1, so the log term drops and only the Bott-Chern shift
    of (L_m^2) against the reference FS^m metric remains.
    """
    m, d = g.m, model.degree_KQ
    u, rho = fubini_study_of(geometry, m, g.gram)
    a = model.form.pair(*([model.L()] * 2)).evaluate()
    top = m * m * a + 0.5 * geometry.quad(u * (m + rho))
    sign, logdet = np.linalg.slogdet(g.gram)
    if sign <= 0:
        raise NonPositiveDefinite("gram is not positive definite")
    return top / (2.0 * m * d) + 0.5 * logdet / (g.rank * d)


# -- scans ---------------------------------------------------------------

def _thread_count() -> int:
    env = os.environ.get("HEIGHTS_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


@dataclass
class ScanResult:
    fitted_constant: float
    fitted_log_slope: float
    table: list = field(default_factory=list)
    columns: tuple = ()


def _require_p1_hooks(model):
    hooks = getattr(model, "hooks", None) or {}
    if "deg_hat" not in hooks:
        raise UnsupportedFamily(
            "scan needs a family with a closed-form arithmetic degree")
    return hooks


def hilbert_samuel_residual(model, m_max: int):
    """residual(m) = deg_hat(m) - [A m^{n+1}/(n+1)! - (L^n) m^n log m/(4 (n-1)!)
    - B m^n/(2 n!)] with A = (L^{n+1}), B = (L^n.K)."""
    hooks = _require_p1_hooks(model)
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    n = model.n
    A = model.form.pair(*([model.L()] * (n + 1))).evaluate()
    B = model.form.pair(*([model.L()] * n + [model.K()])).evaluate()
    Ln = float(model.deg_Ln)
    deg_hat = hooks["deg_hat"]
    out = []
    for m in range(1, m_max + 1):
        main = (A * m ** (n + 1) / math.factorial(n + 1)
                - Ln * m ** n * math.log(m) / (4.0 * math.factorial(n - 1))
                - B * m ** n / (2.0 * math.factorial(n)))
        out.append((m, deg_hat(m, VOL_M_OMEGA) - main))
    return out


def dequantization_scan(model, m_max: int) -> ScanResult:
    """Chow heights of (X, L^m, h^m) for m = 1..m_max plus a tail fit.

    Fit model: a + s log m + (b1 + b2 log m)/m over m in [m_max/2, m_max].
    The 1/m absorber needs the log m/m companion to reach the stated
    tolerance on the constant; see docs/normalization.md.
    """
    hooks = _require_p1_hooks(model)
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    n, d = model.n, model.degree_KQ
    A = model.form.pair(*([model.L()] * (n + 1))).evaluate()
    deg_hat, rank_of = hooks["deg_hat"], hooks["rank"]

    def row(m):
        dh = deg_hat(m, VOL_M_OMEGA)
        hc = (m ** (n + 1) * A / ((n + 1) * m ** n * float(model.deg_Ln) * d)
              - dh / (rank_of(m) * d))
        return (m, dh, hc, hc - 0.25 * n * math.log(m))

    with ThreadPoolExecutor(max_workers=_thread_count()) as ex:
        table = list(ex.map(row, range(1, m_max + 1)))

    lo = max(1, m_max // 2)
    ms = np.array([r[0] for r in table if r[0] >= lo], float)
    hc = np.array([r[2] for r in table if r[0] >= lo])
    X = np.column_stack([np.ones_like(ms), np.log(ms), 1.0 / ms,
                         np.log(ms) / ms])
    coef, *_ = np.linalg.lstsq(X, hc, rcond=None)
    return ScanResult(fitted_constant=float(coef[0]),
                      fitted_log_slope=float(coef[1]),
                      table=table,
                      columns=("m", "deg_hat", "h_C", "h_C_minus_log_term"))
