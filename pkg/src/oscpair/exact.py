"""Exact covariance dynamics of the full system + discretized-bath model.

The quadratic Hamiltonian H = ½ rᵀℋr (+ const) on the 2M+4 canonical
coordinates r = (x_A, p_A, x_B, p_B, x_1, p_1, …) is diagonalized once via
the Hermitian matrix 𝓜 = iΩℋ; covariances then evolve by the closed-form
conjugation Σ(t) = V E₋(t) V† Σ(0) V E₊(t) V†, so every time point is
independent (no stepping error) and a built model can serve any number of
concurrent propagation calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, PropagationError
from .gaussian import VCAL
from .moments import MomentState, Trajectory
from .params import ModelParams
from .spectral import bath_modes, bose_factor


@dataclass(frozen=True)
class FullModel:
    """Arrow-structured Hamiltonian matrix plus its symplectic diagonalization."""

    params: ModelParams
    hmat: np.ndarray          # (2M+4)² real symmetric
    omega: np.ndarray         # symplectic form, 2×2 antisymmetric blocks
    eigenvalues: np.ndarray   # spectrum of 𝓜 = iΩℋ, real, ± paired
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors of 𝓜

    def __post_init__(self):
        for name in ("hmat", "omega", "eigenvalues", "eigenvectors"):
            getattr(self, name).setflags(write=False)

    @property
    def size(self) -> int:
        return self.hmat.shape[0]


@dataclass(frozen=True)
class FullCovariance:
    """Real symmetric (2M+4)×(2M+4) covariance matrix of anticommutators."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        scale = max(1.0, np.abs(s).max())
        if np.abs(s - s.T).max() > 1e-12 * scale:
            raise ConsistencyError("covariance matrix is not symmetric")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)


def build_full_model(params: ModelParams) -> FullModel:
    """Assemble ℋ and Ω and diagonalize 𝓜 = iΩℋ.

    ℋ couples only through the first two coordinate pairs (mode A): ω0 on
    the four system diagonals, g between the A and B pairs, γ_k between A
    and bath mode k, ω_k on the bath diagonals. For this exchange-coupled
    structure 𝓜 is exactly Hermitian, so the diagonalization is an eigh and
    V is unitary by construction.
    """
    m = params.M
    n = 2 * m + 4
    omega_k, gamma_k = bath_modes(params)

    hmat = np.zeros((n, n))
    hmat[0, 0] = hmat[1, 1] = hmat[2, 2] = hmat[3, 3] = params.omega0
    hmat[0, 2] = hmat[2, 0] = hmat[1, 3] = hmat[3, 1] = params.g
    idx = 4 + 2 * np.arange(m)
    hmat[idx, idx] = omega_k
    hmat[idx + 1, idx + 1] = omega_k
    hmat[0, idx] = hmat[idx, 0] = gamma_k
    hmat[1, idx + 1] = hmat[idx + 1, 1] = gamma_k

    omega = np.zeros((n, n))
    pair = 2 * np.arange(m + 2)
    omega[pair, pair + 1] = 1.0
    omega[pair + 1, pair] = -1.0

    big_m = 1j * omega @ hmat
    herm_defect = np.abs(big_m - big_m.conj().T).max()
    if herm_defect > 1e-12 * max(1.0, np.abs(big_m).max()):
        raise ConsistencyError(f"i*Omega*H deviates from Hermitian by {herm_defect:.2e}")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(big_m)
    except np.linalg.LinAlgError as exc:
        raise PropagationError(
            f"eigendecomposition failed (size {n}, cond(H) ~ "
            f"{np.linalg.cond(hmat):.2e})") from exc
    return FullModel(params, hmat, omega, eigenvalues, eigenvectors)


def initial_covariance(params: ModelParams) -> FullCovariance:
    """Σ(0): identity blocks for the two vacuum system modes, [2N(ω_k)+1]·1₂ per bath mode."""
    omega_k, _ = bath_modes(params)
    diag = np.ones(2 * params.M + 4)
    occ = 2.0 * bose_factor(omega_k, params.beta) + 1.0
    diag[4::2] = occ
    diag[5::2] = occ
    return FullCovariance(np.diag(diag))


def propagate_exact(model: FullModel, sigma0: FullCovariance, t: float) -> FullCovariance:
    """Σ(t) = U Σ(0) U† with U = V E₋(t) V†, E∓(t) = diag(e^{∓i g_α t})."""
    phases = np.exp(-1j * model.eigenvalues * t)
    u = (model.eigenvectors * phases) @ model.eigenvectors.conj().T
    sig = u @ sigma0.sigma @ u.conj().T
    residue = np.abs(sig.imag).max()
    if residue > 1e-8 * max(1.0, np.abs(sig.real).max()):
        raise PropagationError(f"imaginary residue {residue:.2e} in exact propagation")
    out = sig.real
    return FullCovariance(0.5 * (out + out.T))


def system_moments(sigma) -> MomentState:
    """Eigenmode moments read off the upper-left 4×4 minor of Σ.

    The minor is rotated to the ladder ordering by Γ_S = 𝒱†Σ_S𝒱; then
    n± = (Γ₁₁/Γ₃₃ − 1)/2 and ⟨γ₋γ₊†⟩ = Γ₃₁/2. Entries that must vanish for
    an excitation-conserving zero-mean state are checked against roundoff.
    """
    s = sigma.sigma if isinstance(sigma, FullCovariance) else np.asarray(sigma, dtype=float)
    if s.shape[0] < 4:
        raise ConsistencyError("covariance must contain the 4x4 system minor")
    minor = s[:4, :4]
    scale = max(1.0, np.abs(minor).max())
    if np.abs(minor - minor.T).max() > 1e-9 * scale:
        raise ConsistencyError("system minor is not symmetric")
    gam = VCAL.conj().T @ minor @ VCAL
    n_plus = 0.5 * (gam[0, 0].real - 1.0)
    n_minus = 0.5 * (gam[2, 2].real - 1.0)
    cross = 0.5 * gam[2, 0]
    tol = 1e-7 * scale
    if (abs(gam[1, 1] - gam[0, 0]) > tol or abs(gam[3, 3] - gam[2, 2]) > tol
            or abs(gam[1, 3] - 2.0 * cross) > tol or abs(gam[1, 0]) > tol
            or abs(gam[3, 0]) > tol):
        raise ConsistencyError("system minor is not an excitation-conserving Gaussian state")
    return MomentState(n_plus, n_minus, complex(cross))


class EnergyComponents(NamedTuple):
    e_s0: float  # ⟨H_S,0⟩, vacuum-zeroed
    e_sg: float  # ⟨H_S,g⟩
    e_1: float   # ⟨H_1⟩
    e_e: float   # ⟨H_E⟩ as change from t = 0


def _hamiltonian_parts(params: ModelParams) -> tuple[np.ndarray, ...]:
    m = params.M
    n = 2 * m + 4
    omega_k, gamma_k = bath_modes(params)
    h_s0 = np.zeros((n, n))
    h_s0[:4, :4] = np.eye(4) * params.omega0
    h_sg = np.zeros((n, n))
    h_sg[0, 2] = h_sg[2, 0] = h_sg[1, 3] = h_sg[3, 1] = params.g
    h_1 = np.zeros((n, n))
    idx = 4 + 2 * np.arange(m)
    h_1[0, idx] = h_1[idx, 0] = gamma_k
    h_1[1, idx + 1] = h_1[idx + 1, 1] = gamma_k
    h_e = np.zeros((n, n))
    h_e[idx, idx] = omega_k
    h_e[idx + 1, idx + 1] = omega_k
    return h_s0, h_sg, h_1, h_e


def _energy_offsets(params: ModelParams) -> np.ndarray:
    # normal ordering for the number terms; bath energy referenced to t = 0
    omega_k, _ = bath_modes(params)
    occ = bose_factor(omega_k, params.beta)
    bath0 = 0.5 * np.sum(omega_k * (2.0 * occ + 1.0))
    return np.array([params.omega0, 0.0, 0.0, bath0])


def energy_components(sigma, params: ModelParams) -> EnergyComponents:
    """Expectation values of the four Hamiltonian pieces from second moments.

    Each quadratic form ½rᵀℋ_p r has ⟨·⟩ = ¼ tr(ℋ_p Σ); system terms are
    reported normal-ordered (zero on the vacuum) and the bath term relative
    to its initial thermal value, so all four components start at zero.
    """
    s = sigma.sigma if isinstance(sigma, FullCovariance) else np.asarray(sigma, dtype=float)
    parts = _hamiltonian_parts(params)
    offsets = _energy_offsets(params)
    vals = [0.25 * np.sum(h * s) - off for h, off in zip(parts, offsets)]
    return EnergyComponents(*vals)


class ExactRun(NamedTuple):
    trajectory: Trajectory
    energies: np.ndarray  # shape (len(times), 4), EnergyComponents order


def exact_trajectory(model: FullModel, times, sigma0: FullCovariance | None = None,
                     *, with_energies: bool = True) -> ExactRun:
    """System moments (and energy split) of the exact model on a time grid.

    Works in the eigenbasis: with W = V†Σ(0)V the system minor at time t
    costs two thin matrix products and each energy component one
    phase-vector contraction, so dense grids are cheap after the one-off
    diagonalization.
    """
    times = np.asarray(times, dtype=float)
    if sigma0 is None:
        sigma0 = initial_covariance(model.params)
    v = model.eigenvectors
    w = v.conj().T @ sigma0.sigma @ v
    v4 = v[:4, :]

    if with_energies:
        parts = _hamiltonian_parts(model.params)
        offsets = _energy_offsets(model.params)
        # tr(ℋ_p Σ(t)) = e₊ᵀ C_p e₋ with C_p = (V†ℋ_pV) ∘ Wᵀ
        c_parts = [(v.conj().T @ h @ v) * w.T for h in parts]

    n_t = times.size
    n_plus = np.empty(n_t)
    n_minus = np.empty(n_t)
    cross = np.empty(n_t, dtype=complex)
    energies = np.empty((n_t, 4)) if with_energies else np.empty((n_t, 0))
    for i, t in enumerate(times):
        e_minus = np.exp(-1j * model.eigenvalues * t)
        rows = (v4 * e_minus) @ w          # V₄ E₋ W
        minor = (rows * e_minus.conj()) @ v4.conj().T
        residue = np.abs(minor.imag).max()
        if residue > 1e-8 * max(1.0, np.abs(minor.real).max()):
            raise PropagationError(f"imaginary residue {residue:.2e} at t = {t}")
        state = system_moments(0.5 * (minor.real + minor.real.T))
        n_plus[i] = state.n_plus
        n_minus[i] = state.n_minus
        cross[i] = state.cross
        if with_energies:
            e_plus = e_minus.conj()
            for j, (c_p, off) in enumerate(zip(c_parts, offsets)):
                energies[i, j] = 0.25 * np.real(e_plus @ (c_p @ e_minus)) - off
    traj = Trajectory(times, n_plus, n_minus, cross, "exact")
    return ExactRun(traj, energies)


def physicality_min_eigenvalue(sigma, omega: np.ndarray) -> float:
    """min eig(Σ + iΩ); ≥ 0 up to roundoff for a physical state."""
    s = sigma.sigma if isinstance(sigma, FullCovariance) else np.asarray(sigma, dtype=float)
    return float(np.linalg.eigvalsh(s + 1j * omega).min())


def symplectic_spectrum(sigma, omega: np.ndarray) -> np.ndarray:
    """Williamson spectrum of Σ, ascending.

    Computed from the Hermitian matrix Lᵀ(iΩ)L with Σ = LLᵀ, whose
    eigenvalues are ±ν_j; conserved under the exact (symplectic) evolution.
    """
    s = sigma.sigma if isinstance(sigma, FullCovariance) else np.asarray(sigma, dtype=float)
    chol = np.linalg.cholesky(s)
    ev = np.linalg.eigvalsh(chol.T @ (1j * omega) @ chol)
    return np.sort(ev[ev > 0.0])
