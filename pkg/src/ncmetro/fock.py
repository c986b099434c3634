"""Truncated Fock-space oracle: dense matrices, exact unitary evolution,
finite-difference quantum Fisher information, and the coherently controlled
two-order (quantum SWITCH) construction.

Everything here is deliberately independent of the symbolic generator route:
states are evolved with matrix exponentials (via eigendecomposition of the
Hermitian generators) and the QFI comes from state overlaps, so this module
can certify the closed-form results computed elsewhere.

Trust model: prepared and evolved vectors must keep the population of the
top Fock level below ``LEAKAGE_THRESHOLD``; finite-difference QFI runs a
second pass at half step and Richardson-extrapolates, flagging the result
untrusted above 0.5% pass disagreement and erroring above 5%.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BoundViolationError,
    ConvergenceError,
    InternalConsistencyError,
    LeakageError,
    ValidationError,
)
from .ladder import LadderPolynomial
from .protocols import EncodingProtocol, ProbeDescriptor

#: Population allowed at the top Fock level before a result is rejected.
LEAKAGE_THRESHOLD = 1e-8

#: Default truncation dimension for desk-scale workloads.
DEFAULT_DIM = 80

#: Default finite-difference step for the QFI derivative.
DEFAULT_STEP = 1e-4

_HERMITIAN_TOL = 1e-10
_NORM_TOL = 1e-9
_UNTRUSTED_REL = 0.005
_ERROR_REL = 0.05


@dataclass(frozen=True)
class MatrixOperator:
    """Dense operator on the truncated Fock space of dimension ``dim``."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.dim, self.dim):
            raise ValidationError("matrix shape does not match dim")
        if not np.isfinite(self.matrix).all():
            raise ValidationError("matrix entries must be finite")

    def is_hermitian(self, tol: float = _HERMITIAN_TOL) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() < tol)

    def require_hermitian(self, tol: float = _HERMITIAN_TOL) -> None:
        if not self.is_hermitian(tol):
            raise ValidationError("operator is not Hermitian within tolerance")


@dataclass(frozen=True)
class FockVector:
    """Normalized state vector in the truncated Fock basis."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.dim,):
            raise ValidationError("amplitude vector shape does not match dim")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"state norm {norm!r} deviates from 1")

    @property
    def top_level_population(self) -> float:
        return float(abs(self.amplitudes[-1]) ** 2)


@dataclass(frozen=True)
class SwitchState:
    """Joint control+mode state of the two-order superposition protocol.

    ``joint`` is the 2*dim vector in control-major ordering (control 0 block
    first).  ``control`` is the two-component control state conditioned on
    the common mode state; it equals the reduced control state whenever the
    two branches differ only by a phase, which is exact for displacement
    generators.
    """

    dim: int
    joint: np.ndarray
    control: np.ndarray

    def branch(self, c: int) -> np.ndarray:
        """Mode vector attached to control basis state c, weight included."""
        return self.joint[c * self.dim : (c + 1) * self.dim]

    def reduced_control(self) -> np.ndarray:
        """Exact 2x2 reduced density matrix of the control qubit."""
        rho = np.empty((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                rho[i, j] = np.vdot(self.branch(j), self.branch(i))
        return rho


def ladder_matrix(dim: int) -> np.ndarray:
    """Annihilation operator: <n-1| a |n> = sqrt(n)."""
    if dim < 2:
        raise ValidationError("truncation dimension must be at least 2")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def matrix_of(poly: LadderPolynomial, dim: int) -> MatrixOperator:
    """Embed a normal-ordered polynomial as a dense matrix."""
    a = ladder_matrix(dim)
    ad = a.conj().T
    max_m = max((m for m, _ in poly.terms), default=0)
    max_n = max((n for _, n in poly.terms), default=0)
    pow_ad = [np.eye(dim, dtype=complex)]
    for _ in range(max_m):
        pow_ad.append(pow_ad[-1] @ ad)
    pow_a = [np.eye(dim, dtype=complex)]
    for _ in range(max_n):
        pow_a.append(pow_a[-1] @ a)
    out = np.zeros((dim, dim), dtype=complex)
    for (m, n), c in poly.terms.items():
        out += c * (pow_ad[m] @ pow_a[n])
    return MatrixOperator(dim=dim, matrix=out)


class HermitianEvolver:
    """Cached eigendecomposition of a Hermitian matrix.

    ``apply(t, vec)`` returns exp(-i t H) vec; reusing the decomposition makes
    parameter scans cheap.
    """

    def __init__(self, matrix: np.ndarray, tol: float = _HERMITIAN_TOL):
        drift = float(np.abs(matrix - matrix.conj().T).max())
        if drift > tol:
            raise ValidationError(
                f"evolution generator not Hermitian (max deviation {drift:.3e})"
            )
        self._eigvals, self._eigvecs = np.linalg.eigh(matrix)

    def apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * t * self._eigvals)
        return self._eigvecs @ (phases * (self._eigvecs.conj().T @ vec))

    def unitary(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * t * self._eigvals)
        return (self._eigvecs * phases) @ self._eigvecs.conj().T


def _check_leakage(vec: np.ndarray, context: str) -> None:
    pop = float(abs(vec[-1]) ** 2)
    if pop > LEAKAGE_THRESHOLD:
        raise LeakageError(
            f"{context}: top-level population {pop:.3e} exceeds "
            f"{LEAKAGE_THRESHOLD:g}; increase the truncation dimension"
        )


def evolve_unitary(state: FockVector, ham: MatrixOperator, t: float) -> FockVector:
    """Apply exp(-i t H) to the state; H must be Hermitian.

    Raises LeakageError when the evolved state populates the top level, and
    InternalConsistencyError if unitarity drifts beyond 1e-9.
    """
    if ham.dim != state.dim:
        raise ValidationError("state and operator dimensions differ")
    ham.require_hermitian()
    evolver = HermitianEvolver(ham.matrix)
    out = evolver.apply(t, state.amplitudes)
    norm = float(np.linalg.norm(out))
    if abs(norm - 1.0) > _NORM_TOL:
        raise InternalConsistencyError(f"evolution norm drift {abs(norm - 1.0):.3e}")
    out = out / norm
    _check_leakage(out, "evolve_unitary")
    return FockVector(dim=state.dim, amplitudes=out)


# -- probe preparation --------------------------------------------------------


def prepare_probe(probe: ProbeDescriptor, dim: int) -> FockVector:
    """Build the truncated amplitude vector for a probe descriptor."""
    if dim < 2:
        raise ValidationError("truncation dimension must be at least 2")
    amps = np.zeros(dim, dtype=complex)
    if probe.kind == "vacuum":
        amps[0] = 1.0
    elif probe.kind == "coherent":
        alpha = probe.alpha
        amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
        for n in range(1, dim):
            amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    elif probe.kind == "squeezed_vacuum":
        factor = -np.exp(2j * probe.phi) * math.tanh(probe.r)
        amps[0] = 1.0 / math.sqrt(math.cosh(probe.r))
        for k in range(1, (dim - 1) // 2 + 1):
            amps[2 * k] = amps[2 * k - 2] * factor * math.sqrt((2 * k - 1) / (2 * k))
    elif probe.kind == "fock_vector":
        given = np.asarray(probe.amplitudes, dtype=complex)
        if given.size > dim:
            raise ValidationError(
                f"probe needs {given.size} levels but truncation is {dim}"
            )
        amps[: given.size] = given
    else:  # pragma: no cover - ProbeDescriptor validates kinds
        raise ValidationError(f"unknown probe kind {probe.kind!r}")

    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ValidationError("probe amplitudes are all zero")
    if abs(norm - 1.0) > 1e-6:
        raise LeakageError(
            f"probe lost {1 - norm**2:.3e} of its weight to truncation"
        )
    amps = amps / norm
    _check_leakage(amps, "prepare_probe")
    return FockVector(dim=dim, amplitudes=amps)


# -- finite-difference QFI ----------------------------------------------------


@dataclass(frozen=True)
class QfiEstimate:
    """Richardson-extrapolated QFI with its two finite-difference passes."""

    value: float
    coarse: float
    fine: float
    rel_disagreement: float
    trusted: bool
    dim: int
    step: float


def _overlap_qfi(
    state_at: Callable[[float], np.ndarray], x0: float, step: float
) -> float:
    plus = state_at(x0 + step)
    minus = state_at(x0 - step)
    center = state_at(x0)
    dpsi = (plus - minus) / (2.0 * step)
    return 4.0 * (
        float(np.vdot(dpsi, dpsi).real) - abs(np.vdot(center, dpsi)) ** 2
    )


def _richardson_qfi(
    state_at: Callable[[float], np.ndarray], x0: float, step: float, dim: int
) -> QfiEstimate:
    coarse = _overlap_qfi(state_at, x0, step)
    fine = _overlap_qfi(state_at, x0, step / 2.0)
    value = (4.0 * fine - coarse) / 3.0
    rel = abs(fine - coarse) / max(abs(value), 1e-300)
    return QfiEstimate(
        value=value,
        coarse=coarse,
        fine=fine,
        rel_disagreement=rel,
        trusted=rel <= _UNTRUSTED_REL,
        dim=dim,
        step=step,
    )


def qfi_numeric(
    protocol: EncodingProtocol,
    dim: int = DEFAULT_DIM,
    step: float = DEFAULT_STEP,
    retries: int = 1,
) -> QfiEstimate:
    """Brute-force QFI of the protocol's output state w.r.t. lambda_bar.

    Central difference of the evolved state at +-step plus a half-step pass,
    Richardson extrapolated.  On leakage or >5% pass disagreement the
    truncation dimension is doubled up to ``retries`` times before raising.
    """
    if step <= 0:
        raise ValidationError("finite-difference step must be positive")
    last_error: Exception | None = None
    for attempt in range(retries + 1):
        d = dim * (2**attempt)
        try:
            return _qfi_numeric_once(protocol, d, step)
        except (LeakageError, ConvergenceError) as exc:
            last_error = exc
    raise last_error


def _qfi_numeric_once(
    protocol: EncodingProtocol, dim: int, step: float
) -> QfiEstimate:
    probe = prepare_probe(protocol.probe, dim)
    n = protocol.n_applications
    evolver_g = HermitianEvolver(matrix_of(protocol.h_g, dim).matrix)
    evolver_l = HermitianEvolver(matrix_of(protocol.h_lambda, dim).matrix)
    after_aux = evolver_g.apply(n * protocol.g_bar, probe.amplitudes)
    _check_leakage(after_aux, "qfi_numeric (auxiliary block)")

    def state_at(lam: float) -> np.ndarray:
        return evolver_l.apply(n * lam, after_aux)

    _check_leakage(state_at(protocol.lambda_bar + step), "qfi_numeric (scan edge)")
    _check_leakage(state_at(protocol.lambda_bar - step), "qfi_numeric (scan edge)")
    estimate = _richardson_qfi(state_at, protocol.lambda_bar, step, dim)
    if estimate.rel_disagreement > _ERROR_REL:
        raise ConvergenceError(
            f"finite-difference passes disagree by "
            f"{estimate.rel_disagreement:.2%} at dim {dim}"
        )
    return estimate


def expectation(op: MatrixOperator, state: FockVector) -> complex:
    return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))


def variance(op: MatrixOperator, state: FockVector) -> float:
    vec = op.matrix @ state.amplitudes
    mean = complex(np.vdot(state.amplitudes, vec))
    second = float(np.vdot(vec, vec).real)
    return second - abs(mean) ** 2


# -- quantum SWITCH (indefinite order of the two displacement blocks) ---------


def switch_protocol(
    n: int, x: float, p: float, probe: FockVector
) -> SwitchState:
    """Superpose the two orders of N momentum and N position displacements.

    Control 0 carries exp(-iNxP) exp(-iNpX) |psi>, control 1 the opposite
    order; by the Weyl relation the branches differ by the phase N^2 x p, so
    the control qubit picks up the product parameter.
    """
    if n < 1:
        raise ValidationError("switch protocol requires n >= 1")
    dim = probe.dim
    a = ladder_matrix(dim)
    x_mat = (a.conj().T + a) / math.sqrt(2.0)
    p_mat = 1j * (a.conj().T - a) / math.sqrt(2.0)
    u_a = HermitianEvolver(p_mat)  # exp(-i t P), t = N x
    u_b = HermitianEvolver(x_mat)  # exp(-i t X), t = N p
    branch_ab = u_a.apply(n * x, u_b.apply(n * p, probe.amplitudes))
    branch_ba = u_b.apply(n * p, u_a.apply(n * x, probe.amplitudes))
    _check_leakage(branch_ab, "switch_protocol")
    _check_leakage(branch_ba, "switch_protocol")
    joint = np.concatenate([branch_ab, branch_ba]) / math.sqrt(2.0)
    gamma = complex(np.vdot(branch_ba, branch_ab))
    control = np.array([gamma, 1.0], dtype=complex)
    control = control / np.linalg.norm(control)
    return SwitchState(dim=dim, joint=joint, control=control)


def branch_phase_overlap(n: int, x: float, p: float, probe: FockVector) -> complex:
    """<psi| (U_A U_B)^dag (U_B U_A) |psi>; equals exp(-i N^2 x p) exactly."""
    state = switch_protocol(n, x, p, probe)
    num = complex(np.vdot(state.branch(0), state.branch(1)))
    return 2.0 * num  # each branch carries weight 1/sqrt(2)


def _bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array(
        [2.0 * rho[0, 1].real, -2.0 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real]
    )


def _qubit_qfi(rho_at: Callable[[float], np.ndarray], x0: float, step: float) -> float:
    r0 = _bloch_vector(rho_at(x0))
    dr = (_bloch_vector(rho_at(x0 + step)) - _bloch_vector(rho_at(x0 - step))) / (
        2.0 * step
    )
    qfi = float(dr @ dr)
    denom = 1.0 - float(r0 @ r0)
    if denom > 1e-9:
        qfi += float(r0 @ dr) ** 2 / denom
    return qfi


SWITCH_MODES = ("control", "joint", "definite")


def switch_qfi(
    n: int,
    x: float,
    p: float,
    probe: ProbeDescriptor | None = None,
    dim: int = DEFAULT_DIM,
    step: float = DEFAULT_STEP,
    mode: str = "control",
) -> QfiEstimate:
    """Finite-difference QFI of the switch construction w.r.t. x.

    Modes:

    - ``control``: QFI of the reduced control qubit, which carries the
      relative branch phase N^2 x p; scales as N^4 p^2.
    - ``joint``: QFI of the full control+mode vector; for a vacuum probe it
      equals 2 N^2 + N^4 p^2 (the mode displacement term plus the phase).
    - ``definite``: QFI of the single fixed-order branch exp(-iNxP)
      exp(-iNpX)|psi>; the phase channel is absent, leaving 2 N^2.
    """
    if mode not in SWITCH_MODES:
        raise ValidationError(f"mode must be one of {SWITCH_MODES}")
    if step <= 0:
        raise ValidationError("finite-difference step must be positive")
    probe_vec = prepare_probe(probe or ProbeDescriptor.vacuum(), dim)

    if mode == "control":
        def rho_at(xv: float) -> np.ndarray:
            return switch_protocol(n, xv, p, probe_vec).reduced_control()

        coarse = _qubit_qfi(rho_at, x, step)
        fine = _qubit_qfi(rho_at, x, step / 2.0)
        value = (4.0 * fine - coarse) / 3.0
        rel = abs(fine - coarse) / max(abs(value), 1e-300)
        if rel > _ERROR_REL:
            raise ConvergenceError(
                f"control-QFI passes disagree by {rel:.2%} at dim {dim}"
            )
        return QfiEstimate(
            value=value,
            coarse=coarse,
            fine=fine,
            rel_disagreement=rel,
            trusted=rel <= _UNTRUSTED_REL,
            dim=dim,
            step=step,
        )

    if mode == "joint":
        def state_at(xv: float) -> np.ndarray:
            return switch_protocol(n, xv, p, probe_vec).joint
    else:
        def state_at(xv: float) -> np.ndarray:
            return switch_protocol(n, xv, p, probe_vec).branch(0) * math.sqrt(2.0)

    estimate = _richardson_qfi(state_at, x, step, dim)
    if estimate.rel_disagreement > _ERROR_REL:
        raise ConvergenceError(
            f"switch QFI passes disagree by {estimate.rel_disagreement:.2%}"
        )
    return estimate


# -- discrete-variable bound demonstration ------------------------------------


@dataclass(frozen=True)
class DvBoundRow:
    n: int
    qfi: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.qfi / self.bound


@dataclass(frozen=True)
class DvBoundReport:
    """QFI-vs-N sequence for a finite-dimensional pair, with the spectral bound.

    The conjugated generator h = N U h_lambda U^dag has the spectrum of
    N h_lambda, so 4 Var[h] <= N^2 (spread of h_lambda)^2 for every state and
    every N: finite dimension precludes any super-N^2 growth.
    """

    rows: tuple[DvBoundRow, ...]
    spectral_spread: float
    g_bar: float

    @property
    def max_ratio(self) -> float:
        return max(row.ratio for row in self.rows)


def dv_saturating_probe(h_lambda: np.ndarray) -> np.ndarray:
    """Equal superposition of the extreme eigenvectors of h_lambda."""
    _, vecs = np.linalg.eigh(h_lambda)
    probe = (vecs[:, 0] + vecs[:, -1]) / math.sqrt(2.0)
    return probe


def dv_bound_check(
    h_g: np.ndarray,
    h_lambda: np.ndarray,
    n_list: Sequence[int],
    g_bar: float,
    probe: np.ndarray,
) -> DvBoundReport:
    """Verify QFI <= N^2 (spectral spread of h_lambda)^2 for each N.

    Raises BoundViolationError if the inequality fails beyond float slack,
    which would signal an implementation bug rather than physics.
    """
    h_g = np.asarray(h_g, dtype=complex)
    h_lambda = np.asarray(h_lambda, dtype=complex)
    d = h_g.shape[0]
    if d < 2 or h_g.shape != (d, d) or h_lambda.shape != (d, d):
        raise ValidationError("generators must be square matrices of dim >= 2")
    for name, mat in (("h_g", h_g), ("h_lambda", h_lambda)):
        if np.abs(mat - mat.conj().T).max() > _HERMITIAN_TOL:
            raise ValidationError(f"{name} is not Hermitian")
    probe = np.asarray(probe, dtype=complex)
    probe = probe / np.linalg.norm(probe)

    eig_l = np.linalg.eigvalsh(h_lambda)
    spread = float(eig_l[-1] - eig_l[0])
    w_g, v_g = np.linalg.eigh(h_g)

    rows = []
    for n in n_list:
        if n < 1:
            raise ValidationError("n_list entries must be >= 1")
        u = (v_g * np.exp(1j * n * g_bar * w_g)) @ v_g.conj().T
        h = n * (u @ h_lambda @ u.conj().T)
        vec = h @ probe
        mean = float(np.vdot(probe, vec).real)
        qfi = 4.0 * (float(np.vdot(vec, vec).real) - mean**2)
        bound = n**2 * spread**2
        if qfi > bound * (1.0 + 1e-9) + 1e-9:
            raise BoundViolationError(
                f"QFI {qfi!r} exceeds spectral bound {bound!r} at N={n}"
            )
        rows.append(DvBoundRow(n=int(n), qfi=qfi, bound=bound))
    return DvBoundReport(rows=tuple(rows), spectral_spread=spread, g_bar=g_bar)
