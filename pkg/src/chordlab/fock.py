"""Number-basis oracle: exact finite-dimensional quantum evolution.

Everything here works with dense matrices in the harmonic oscillator
eigenbasis, scaled so that q = sqrt(hbar/2)(a + a+) and p comes with the
matching factor.  It provides the ground truth the phase-space machinery is
checked against: exact Lindblad evolution by RK4, exact chord functions via
displacement traces or position-space slices, and exact Wigner functions.

Truncation is monitored rather than hidden: populations leaking into the
top decile of the basis raise TruncationLeakError with advice to enlarge
the space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from . import diagnostics
from .dynamics import HamiltonianModel, LindbladChannel, _as_channels
from .grids import CenteredGrid, ft_axis, simpson_weights

__all__ = [
    "TruncationLeakError",
    "FockDensityMatrix",
    "lowering",
    "q_operator",
    "p_operator",
    "build_linear_lindblad",
    "hamiltonian_matrix",
    "coherent_amplitudes",
    "coherent_density_matrix",
    "cat_density_matrix",
    "fock_density_matrix",
    "pure_density",
    "purity",
    "lindblad_evolve",
    "lindblad_evolve_auto",
    "displacement_matrix",
    "chord_function_exact",
    "chord_function_grid",
    "wigner_exact",
    "hermite_functions",
    "position_density_matrix",
]

_LEAK_TOL = 1e-6
_TRACE_TOL = 1e-8


class TruncationLeakError(RuntimeError):
    """Raised when population reaches the top of the truncated basis."""

    def __init__(self, message: str, dim: int):
        super().__init__(message)
        self.dim = dim


def lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)


def q_operator(dim: int, hbar: float) -> np.ndarray:
    a = lowering(dim)
    return math.sqrt(0.5 * hbar) * (a + a.T)


def p_operator(dim: int, hbar: float) -> np.ndarray:
    a = lowering(dim)
    return 1j * math.sqrt(0.5 * hbar) * (a.T - a)


def build_linear_lindblad(channel, hbar: float, dim: int) -> np.ndarray:
    """L = (l'_p + i l''_p) p + (l'_q + i l''_q) q.

    A pure damping channel l' = (0, 1), l'' = (1, 0) gives q + i p =
    sqrt(2 hbar) a, the lowering operator.
    """
    ch = channel
    if not isinstance(ch, LindbladChannel):
        parts = tuple(ch)
        # accept the flat (l'_p, l'_q, l''_p, l''_q) form alongside pairs
        ch = LindbladChannel(parts[:2], parts[2:]) if len(parts) == 4 \
            else LindbladChannel(*parts)
    lp = ch.l_re[0] + 1j * ch.l_im[0]
    lq = ch.l_re[1] + 1j * ch.l_im[1]
    return lp * p_operator(dim, hbar) + lq * q_operator(dim, hbar)


def hamiltonian_matrix(model: HamiltonianModel, dim: int, hbar: float) -> np.ndarray:
    """Matrix of the named Hamiltonian family in the number basis.

    The transcendental pendulum potential goes through the eigenbasis of q.
    """
    q = q_operator(dim, hbar)
    pm = p_operator(dim, hbar)
    p2 = pm @ pm
    prm = model.params
    name = model.name
    if name == "zero":
        return np.zeros((dim, dim), dtype=complex)
    if name == "harmonic":
        return 0.5 * prm["omega"] * (p2 + q @ q)
    if name == "free":
        return p2 / (2.0 * prm["mass"])
    if name == "quartic":
        q2 = q @ q
        return 0.5 * p2 + 0.25 * prm["a"] * (q2 @ q2) + 0.5 * prm["b"] * q2
    if name == "pendulum":
        evals, vecs = np.linalg.eigh(q)
        cos_q = (vecs * np.cos(evals)) @ vecs.conj().T
        return 0.5 * p2 - prm["g"] * cos_q
    raise ValueError(f"no matrix builder for Hamiltonian family {name!r}")


@dataclass(frozen=True)
class FockDensityMatrix:
    """Density matrix in the number basis with its diagnostics."""

    rho: np.ndarray
    hbar: float
    warnings: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    def leak_fraction(self) -> float:
        pops = self.populations()
        top = max(1, self.dim // 10)
        return float(np.sum(pops[-top:]))

    def validate(self) -> dict:
        rho = self.rho
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        tr = abs(self.trace() - 1.0)
        min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
        return {
            "trace_error": tr,
            "hermiticity_error": herm,
            "min_eigenvalue": min_eig,
            "leak_fraction": self.leak_fraction(),
        }


def pure_density(psi: np.ndarray, hbar: float) -> FockDensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return FockDensityMatrix(np.outer(psi, psi.conj()), hbar)


def coherent_amplitudes(eta, hbar: float, dim: int, sink=None) -> np.ndarray:
    """<n|eta> for the coherent state at centre eta = (eta_p, eta_q)."""
    alpha = (eta[1] + 1j * eta[0]) / math.sqrt(2.0 * hbar)
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    tail = 1.0 - float(np.sum(np.abs(c) ** 2))
    if tail > 1e-12:
        diagnostics.report(
            sink, f"coherent amplitude tail {tail:.2e} at dim {dim}; increase dim",
            diagnostics.TruncationWarning)
    return c


def coherent_density_matrix(eta, hbar: float, dim: int) -> FockDensityMatrix:
    sink: list = []
    c = coherent_amplitudes(eta, hbar, dim, sink)
    out = pure_density(c, hbar)
    out.warnings.extend(sink)
    return out


def cat_density_matrix(eta, hbar: float, dim: int) -> FockDensityMatrix:
    """Even superposition of coherent states at +eta and -eta."""
    sink: list = []
    c = coherent_amplitudes(eta, hbar, dim, sink)
    psi = c.copy()
    psi[1::2] = 0.0
    psi[0::2] *= 2.0
    out = pure_density(psi, hbar)
    out.warnings.extend(sink)
    return out


def fock_density_matrix(n: int, hbar: float, dim: int) -> FockDensityMatrix:
    if not 0 <= n < dim:
        raise ValueError("need 0 <= n < dim")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return FockDensityMatrix(rho, hbar)


def purity(rho) -> float:
    mat = getattr(rho, "rho", rho)
    return float(np.real(np.einsum("ij,ji->", mat, mat)))


def _rhs(rho, h_mat, l_ops, hbar):
    out = (-1j / hbar) * (h_mat @ rho - rho @ h_mat)
    for lm, lmd, lmdl in l_ops:
        out += (lm @ rho @ lmd - 0.5 * (lmdl @ rho + rho @ lmdl)) / hbar
    return out


def lindblad_evolve(rho0, h_mat, l_mats, t: float, hbar: float,
                    dt: float = 1e-3, check_every: int = 25) -> FockDensityMatrix:
    """RK4 integration of the Lindblad master equation,

        drho/dt = -(i/hbar)[H, rho] + (1/hbar) sum_k (L rho L+ - {L+L, rho}/2).

    The state is re-hermitized every step.  Trace drift beyond 1e-8 reports a
    ConvergenceWarning; population reaching the top decile of the basis
    raises TruncationLeakError.
    """
    rho = np.array(getattr(rho0, "rho", rho0), dtype=complex)
    dim = rho.shape[0]
    l_ops = []
    for lm in l_mats:
        lm = np.asarray(lm, dtype=complex)
        lmd = lm.conj().T
        l_ops.append((lm, lmd, lmd @ lm))
    if t < 0:
        raise ValueError("t must be nonnegative")
    steps = max(1, int(math.ceil(t / dt)))
    h = t / steps if steps else 0.0
    notes: list = []
    top = max(1, dim // 10)

    def leak_check(mat):
        leak = float(np.sum(np.real(np.diag(mat))[-top:]))
        if leak > _LEAK_TOL:
            raise TruncationLeakError(
                f"population {leak:.2e} reached the top decile of a dim-{dim} "
                "basis; increase dim", dim)

    tr0 = float(np.real(np.trace(rho)))
    for k in range(steps):
        k1 = _rhs(rho, h_mat, l_ops, hbar)
        k2 = _rhs(rho + 0.5 * h * k1, h_mat, l_ops, hbar)
        k3 = _rhs(rho + 0.5 * h * k2, h_mat, l_ops, hbar)
        k4 = _rhs(rho + h * k3, h_mat, l_ops, hbar)
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if k % check_every == check_every - 1:
            leak_check(rho)
    leak_check(rho)
    drift = abs(float(np.real(np.trace(rho))) - tr0)
    if drift > _TRACE_TOL:
        diagnostics.report(
            notes, f"trace drifted by {drift:.2e} during evolution; reduce dt",
            diagnostics.ConvergenceWarning)
    return FockDensityMatrix(rho, float(hbar), notes)


def lindblad_evolve_auto(make_system, t: float, hbar: float, dt: float = 1e-3,
                         dim: int = 128, max_dim: int = 1024) -> FockDensityMatrix:
    """Retry lindblad_evolve with a doubled basis until the leak monitor passes.

    make_system(dim) must return (rho0, h_mat, l_mats) at that dimension.
    """
    d = dim
    while True:
        rho0, h_mat, l_mats = make_system(d)
        try:
            return lindblad_evolve(rho0, h_mat, l_mats, t, hbar, dt)
        except TruncationLeakError:
            d *= 2
            if d > max_dim:
                raise


def evolve_state(rho0: FockDensityMatrix, model: HamiltonianModel, channels,
                 t: float, dt: float = 1e-3) -> FockDensityMatrix:
    """Convenience wrapper: assemble matrices from models, then evolve."""
    dim = rho0.dim
    hb = rho0.hbar
    h_mat = hamiltonian_matrix(model, dim, hb)
    l_mats = [build_linear_lindblad(ch, hb, dim) for ch in _as_channels(channels)]
    return lindblad_evolve(rho0, h_mat, l_mats, t, hb, dt)


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """<m| D(alpha) |n> in closed form (associated Laguerre polynomials)."""
    alpha = complex(alpha)
    idx = np.arange(dim)
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    nmin = np.minimum(mm, nn)
    k = np.abs(mm - nn)
    x = abs(alpha) ** 2
    with np.errstate(over="ignore"):
        lag = eval_genlaguerre(nmin, k, x)
    log_ratio = 0.5 * (gammaln(nmin + 1.0) - gammaln(nmin + k + 1.0))
    base = (alpha ** np.where(mm >= nn, k, 0)) * ((-np.conj(alpha)) ** np.where(mm < nn, k, 0))
    return np.exp(log_ratio - 0.5 * x) * lag * base


def hermite_functions(n_max: int, x, hbar: float) -> np.ndarray:
    """Oscillator eigenfunctions psi_0..psi_n_max on x, shape (n_max+1, len(x)).

    Stable three-term recurrence; psi_0 is the round Gaussian of variance
    hbar/2 matching the coherent-state convention.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = x / math.sqrt(hbar)
    out = np.empty((n_max + 1, x.size))
    out[0] = (math.pi * hbar) ** -0.25 * np.exp(-0.5 * u**2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, n_max):
        out[n + 1] = (math.sqrt(2.0 / (n + 1)) * u * out[n]
                      - math.sqrt(n / (n + 1.0)) * out[n - 1])
    return out


def position_density_matrix(rho, q_axis, s_axis) -> np.ndarray:
    """rho(q - s/2, q + s/2) on the outer product of the two axes."""
    mat = np.asarray(getattr(rho, "rho", rho), dtype=complex)
    hb = getattr(rho, "hbar", None)
    if hb is None:
        raise ValueError("pass a FockDensityMatrix (hbar is needed for the basis)")
    dim = mat.shape[0]
    q_axis = np.asarray(q_axis, dtype=float)
    s_axis = np.asarray(s_axis, dtype=float)
    qm = (q_axis[:, None] - 0.5 * s_axis[None, :]).ravel()
    qp = (q_axis[:, None] + 0.5 * s_axis[None, :]).ravel()
    out = np.empty(qm.size, dtype=complex)
    # rho~ = sum_mn psi_m(q-) rho_mn psi_n(q+): GEMM + contraction, chunked
    # to keep the (dim, points) basis tables off the heap all at once
    block = max(1024, (1 << 22) // dim)
    for i in range(0, qm.size, block):
        sl = slice(i, i + block)
        psi_m = hermite_functions(dim - 1, qm[sl], hb)
        psi_p = hermite_functions(dim - 1, qp[sl], hb)
        out[sl] = np.einsum("mk,mk->k", psi_m, mat @ psi_p)
    return out.reshape(q_axis.size, s_axis.size)


def _q_support(rho: FockDensityMatrix) -> float:
    pops = np.maximum(rho.populations(), 0.0)
    csum = np.cumsum(pops[::-1])[::-1]
    occupied = np.nonzero(csum > 1e-12)[0]
    n_top = int(occupied[-1]) + 1 if occupied.size else 1
    return math.sqrt(2.0 * rho.hbar * (n_top + 1.0)) + 8.0 * math.sqrt(rho.hbar)


def chord_function_exact(rho: FockDensityMatrix, xi_p, xi_q,
                         method: str = "auto") -> np.ndarray:
    """chi(xi) = (2 pi hbar)^-1 tr(T(-xi) rho) at arbitrary chord points.

    method "displacement" evaluates the displacement-matrix trace point by
    point (exact, slow); "position" integrates position slices against the
    xi_p phase (same values, one GEMM).  "auto" switches on point count.
    """
    hb = rho.hbar
    xi_p = np.asarray(xi_p, dtype=float)
    xi_q = np.asarray(xi_q, dtype=float)
    shape = np.broadcast(xi_p, xi_q).shape
    xp = np.broadcast_to(xi_p, shape).ravel()
    xq = np.broadcast_to(xi_q, shape).ravel()
    if method == "auto":
        method = "displacement" if xp.size <= 256 else "position"

    if method == "displacement":
        vals = np.empty(xp.size, dtype=complex)
        rho_t = rho.rho.T.copy()
        for i in range(xp.size):
            alpha = (xq[i] + 1j * xp[i]) / math.sqrt(2.0 * hb)
            vals[i] = np.sum(displacement_matrix(-alpha, rho.dim) * rho_t)
        vals = vals.reshape(shape) / (2.0 * math.pi * hb)
        return vals[()] if shape == () else vals

    if method != "position":
        raise ValueError("method must be auto, displacement, or position")
    q_max = _q_support(rho)
    p_max = math.sqrt(2.0 * hb * rho.dim) + 4.0 * math.sqrt(hb)
    freq = (float(np.max(np.abs(xp))) + p_max) / hb
    dq = min(math.pi / (2.0 * freq), 0.25 * math.sqrt(hb))
    nq = 2 * int(math.ceil(q_max / dq)) + 1
    q_axis = np.linspace(-q_max, q_max, nq)
    s_axis, inv = np.unique(-xq, return_inverse=True)
    slices = position_density_matrix(rho, q_axis, s_axis)
    w = simpson_weights(nq, q_axis[1] - q_axis[0])
    vals = np.empty(xp.size, dtype=complex)
    block = max(1, (1 << 21) // nq)  # cap the (points, nq) phase table
    for k0 in range(0, xp.size, block):
        sel = slice(k0, min(k0 + block, xp.size))
        phase = np.exp(-1j * np.outer(xp[sel], q_axis) / hb) * w
        vals[sel] = np.einsum("kq,qk->k", phase, slices[:, inv[sel]])
    vals = vals.reshape(shape) / (2.0 * math.pi * hb)
    return vals[()] if shape == () else vals


def chord_function_grid(rho: FockDensityMatrix, grid: CenteredGrid) -> np.ndarray:
    """chi sampled on a full chord grid, via the position route."""
    if grid.hbar != rho.hbar:
        raise ValueError("grid and state disagree on hbar")
    xp, xq = grid.meshgrid()
    return chord_function_exact(rho, xp, xq, method="position")


def wigner_exact(rho: FockDensityMatrix, grid: CenteredGrid, sink=None) -> np.ndarray:
    """W on a centre grid by Fourier transforming exact position slices.

    The s integration runs over the grid conjugate to the p axis, so the
    transform lands exactly on grid.p_axis.
    """
    if grid.hbar != rho.hbar:
        raise ValueError("grid and state disagree on hbar")
    hb = rho.hbar
    conj = grid.conjugate()
    s_axis = conj.q_axis  # paired with p
    slices = position_density_matrix(rho, grid.q_axis, s_axis)
    edge = float(np.max(np.abs(slices[:, [0, -1]])))
    peak = float(np.max(np.abs(slices)))
    if peak > 0 and edge > 1e-10 * peak:
        diagnostics.report(
            sink, "position slices not decayed at the s range edge; refine the "
            "p axis (its conjugate sets the s range)",
            diagnostics.GridDomainWarning)
    w = ft_axis(slices.astype(complex), conj.dq, hb, axis=1, sign=+1) / (2.0 * math.pi * hb)
    w = w.T  # (q, p) -> (p, q)
    residue = float(np.max(np.abs(np.imag(w))) / max(np.max(np.abs(np.real(w))), 1e-300))
    if residue > 1e-8:
        diagnostics.report(
            sink, f"Wigner imaginary residue {residue:.2e} above 1e-8",
            diagnostics.TruncationWarning)
    return np.real(w)
