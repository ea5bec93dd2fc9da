"""State and process tomography for the polarization qubit.

State tomography uses the over-complete six-projector set {H, V, D, A, R, L}
(three mutually unbiased bases).  Linear inversion recovers the Bloch
vector directly from count differences; the maximum-likelihood path
optimizes a Poissonian likelihood over the cone of physical states via a
triangular-factor parameterization, so its output is PSD by construction.

Process tomography expresses a single-qubit channel as
E(rho) = sum_mn chi_mn E_m rho E_n^dag in the fixed operator basis
(I, sigma_x, sigma_y, sigma_z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import EmptyData, NotUnitary, SingularSystem
from .qubit import (IDENTITY, PAULI_BASIS, PAULI_LABELS, SIGMA_X, SIGMA_Y, SIGMA_Z,
                    PureState, STATE_A, STATE_D, STATE_H, STATE_L, STATE_R, STATE_V)

SETTING_LABELS = ("H", "V", "D", "A", "R", "L")
_SETTING_STATES = {"H": STATE_H, "V": STATE_V, "D": STATE_D,
                   "A": STATE_A, "R": STATE_R, "L": STATE_L}
_PAIRS = (("H", "V"), ("D", "A"), ("R", "L"))

QPT_INPUT_LABELS = ("H", "V", "D", "R")
QPT_INPUT_STATES = {"H": STATE_H, "V": STATE_V, "D": STATE_D, "R": STATE_R}


@dataclass(frozen=True)
class MeasurementSetting:
    label: str
    projector: np.ndarray


def tomography_settings() -> tuple[MeasurementSetting, ...]:
    """Rank-1 projectors for the six standard polarization analyses."""
    return tuple(MeasurementSetting(lbl, _SETTING_STATES[lbl].density())
                 for lbl in SETTING_LABELS)


def setting_probabilities(rho: np.ndarray) -> dict[str, float]:
    """Born probabilities tr(P rho) for all six settings."""
    return {s.label: float(np.trace(s.projector @ rho).real)
            for s in tomography_settings()}


def _check_pairs(counts: dict[str, float]) -> None:
    missing = [l for l in SETTING_LABELS if l not in counts]
    if missing:
        raise ValueError(f"missing settings: {missing}")
    for a, b in _PAIRS:
        if counts[a] + counts[b] <= 0:
            raise EmptyData(f"basis pair ({a}, {b}) has zero total counts")


@dataclass(frozen=True)
class LinearInversionResult:
    rho: np.ndarray
    bloch: np.ndarray          # (s_x, s_y, s_z)
    physical: bool             # min eigenvalue >= -1e-10


def qst_linear(counts: dict[str, float]) -> LinearInversionResult:
    """Stokes-parameter inversion; may be non-physical under shot noise."""
    _check_pairs(counts)
    sx = (counts["D"] - counts["A"]) / (counts["D"] + counts["A"])
    sy = (counts["L"] - counts["R"]) / (counts["L"] + counts["R"])
    sz = (counts["H"] - counts["V"]) / (counts["H"] + counts["V"])
    rho = 0.5 * (IDENTITY + sx * SIGMA_X + sy * SIGMA_Y + sz * SIGMA_Z)
    physical = bool(np.linalg.eigvalsh(rho).min() >= -1e-10)
    return LinearInversionResult(rho=rho, bloch=np.array([sx, sy, sz]), physical=physical)


# dT/dx for the upper-triangular factor T = [[x0, x2 + i*x3], [0, x1]]
_T_DIRECTIONS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [0, 0]], dtype=complex),
    np.array([[0, 1j], [0, 0]], dtype=complex),
)


def _factor(x: np.ndarray) -> np.ndarray:
    return np.array([[x[0], x[2] + 1j * x[3]], [0.0, x[1]]], dtype=complex)


def _rho_from_params(x: np.ndarray) -> np.ndarray:
    t = _factor(x)
    g = t.conj().T @ t
    return g / np.trace(g).real


def mle_negative_log_likelihood(x: np.ndarray, counts: dict[str, float],
                                totals: dict[str, float],
                                projectors: dict[str, np.ndarray]) -> tuple[float, np.ndarray]:
    """Poissonian -log L and its analytic gradient in the 4 factor parameters.

    The expected count for setting j is lambda_j = N_pair(j) * tr(P_j rho)
    where N_pair(j) is the observed total of j's basis pair.
    """
    t = _factor(x)
    g = t.conj().T @ t
    tau = np.trace(g).real
    nll = 0.0
    grad = np.zeros(4)
    dtau = np.array([2.0 * np.trace(t.conj().T @ e).real for e in _T_DIRECTIONS])
    for lbl, proj in projectors.items():
        f = np.trace(proj @ g).real
        p = f / tau
        lam = totals[lbl] * p
        n = counts[lbl]
        nll += lam - (n * np.log(max(lam, 1e-300)) if n > 0 else 0.0)
        pt = proj @ t.conj().T
        df = np.array([2.0 * np.trace(pt @ e).real for e in _T_DIRECTIONS])
        dp = (df * tau - f * dtau) / tau**2
        dlam = totals[lbl] * dp
        grad += dlam * (1.0 - (n / max(lam, 1e-300) if n > 0 else 0.0))
    return nll, grad


@dataclass(frozen=True)
class MleResult:
    rho: np.ndarray
    converged: bool
    iterations: int
    log_likelihoods: tuple[float, ...] = field(repr=False)


def qst_mle(counts: dict[str, float], tol: float = 1e-10,
            max_iter: int = 500) -> MleResult:
    """Maximum-likelihood reconstruction; physical by construction.

    Quasi-Newton (L-BFGS-B) on the 4 real triangular-factor parameters,
    started from the eigenvalue-clipped linear-inversion estimate.  When
    max_iter is exhausted the best iterate is returned with converged=False.
    """
    _check_pairs(counts)
    projectors = {s.label: s.projector for s in tomography_settings()}
    totals = {}
    for a, b in _PAIRS:
        tot = counts[a] + counts[b]
        totals[a] = totals[b] = tot

    rho0 = qst_linear(counts).rho
    w, v = np.linalg.eigh(rho0)
    w = np.clip(w, 1e-9, None)
    rho0 = (v * w) @ v.conj().T
    rho0 /= np.trace(rho0).real
    low = np.linalg.cholesky(rho0)
    t0 = low.conj().T  # upper triangular, rho0 = t0^dag t0
    x0 = np.array([t0[0, 0].real, t0[1, 1].real, t0[0, 1].real, t0[0, 1].imag])

    history: list[float] = []
    fun = lambda x: mle_negative_log_likelihood(x, counts, totals, projectors)
    history.append(-fun(x0)[0])

    def callback(xk):
        history.append(-fun(xk)[0])

    res = scipy.optimize.minimize(fun, x0, jac=True, method="L-BFGS-B",
                                  callback=callback,
                                  options={"maxiter": max_iter, "ftol": 1e-15,
                                           "gtol": 1e-12})
    history.append(-fun(res.x)[0])
    converged = bool(res.success) or (len(history) >= 2
                                      and abs(history[-1] - history[-2]) < tol)
    return MleResult(rho=_rho_from_params(res.x), converged=converged,
                     iterations=int(res.nit), log_likelihoods=tuple(history))


# --- process tomography -------------------------------------------------

def chi_of_unitary(u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Rank-1 process matrix of a unitary: chi = c c^dag with u = sum_m c_m E_m."""
    u = np.asarray(u, dtype=complex)
    if np.abs(u.conj().T @ u - IDENTITY).max() > tol:
        raise NotUnitary("matrix is not unitary within tolerance")
    c = np.array([0.5 * np.trace(e.conj().T @ u) for e in PAULI_BASIS])
    return np.outer(c, c.conj())


@dataclass(frozen=True)
class ChiResult:
    chi: np.ndarray
    psd_deviation: float                  # magnitude of most negative eigenvalue
    trace_preservation_deviation: float   # max |sum chi_mn E_n^dag E_m - I|


def qpt_reconstruct(outputs: dict[str, np.ndarray]) -> ChiResult:
    """Single-qubit chi matrix from the channel outputs of the H, V, D, R inputs.

    The channel's action on the matrix units |i><j| is assembled by
    linearity (|H><V| = rho_D - i rho_R - (1-i)/2 (rho_H + rho_V)), then
    chi is solved from the 16x16 linear system relating the matrix-unit
    images to the operator-basis expansion.  The result is Hermitized;
    PSD and trace-preservation deviations are reported, not enforced.
    """
    missing = [l for l in QPT_INPUT_LABELS if l not in outputs]
    if missing:
        raise ValueError(f"missing QPT inputs: {missing}")
    oh, ov = np.asarray(outputs["H"], complex), np.asarray(outputs["V"], complex)
    od, orr = np.asarray(outputs["D"], complex), np.asarray(outputs["R"], complex)
    e_hv = od - 1j * orr - 0.5 * (1 - 1j) * (oh + ov)
    images = {(0, 0): oh, (1, 1): ov, (0, 1): e_hv, (1, 0): e_hv.conj().T}

    units = {}
    for i in range(2):
        for j in range(2):
            u = np.zeros((2, 2), dtype=complex)
            u[i, j] = 1.0
            units[(i, j)] = u

    system = np.zeros((16, 16), dtype=complex)
    target = np.zeros(16, dtype=complex)
    for k, key in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        target[4 * k:4 * k + 4] = images[key].reshape(4)
        for m in range(4):
            for n in range(4):
                col = (PAULI_BASIS[m] @ units[key] @ PAULI_BASIS[n].conj().T).reshape(4)
                system[4 * k:4 * k + 4, 4 * m + n] = col
    if np.linalg.matrix_rank(system) < 16:
        raise SingularSystem("QPT input set does not span the operator space")
    chi = np.linalg.solve(system, target).reshape(4, 4)
    chi = 0.5 * (chi + chi.conj().T)

    psd_dev = float(max(0.0, -np.linalg.eigvalsh(chi).min()))
    tp = sum(chi[m, n] * (PAULI_BASIS[n].conj().T @ PAULI_BASIS[m])
             for m in range(4) for n in range(4))
    tp_dev = float(np.abs(tp - IDENTITY).max())
    return ChiResult(chi=chi, psd_deviation=psd_dev, trace_preservation_deviation=tp_dev)


def process_fidelity(chi_exp: np.ndarray, chi_ideal: np.ndarray) -> float:
    """Tr[chi_exp chi_ideal], real part, clamped to [0, 1]."""
    f = float(np.trace(np.asarray(chi_exp) @ np.asarray(chi_ideal)).real)
    if f < 0.0 or f > 1.0:
        import warnings
        warnings.warn(f"process fidelity {f} clamped to [0, 1]", stacklevel=2)
    return min(max(f, 0.0), 1.0)


# --- serialization ------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    """Nested lists of [re, im] pairs."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def density_to_json(rho: np.ndarray) -> dict:
    return {"basis": ["H", "V"], "entries": matrix_to_json(rho)}


def chi_to_json(chi: np.ndarray) -> dict:
    return {"basis": list(PAULI_LABELS), "entries": matrix_to_json(chi)}
