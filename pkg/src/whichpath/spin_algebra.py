"""Dense linear algebra for the two-spin (4-level) Hilbert space.

Basis order is |b a> with index ``2*b + a``: spin b (13C, the observed
nucleus) sits in the left tensor slot and spin a (1H, the path marker) in
the right one, so the states are ordered |00>, |01>, |10>, |11>.

Operators are plain ``numpy`` arrays of dtype ``complex128``; 2x2 arrays act
on a single spin and 4x4 arrays on the pair. All functions are pure.
"""

from __future__ import annotations

import numpy as np

UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
E4 = np.eye(4, dtype=complex)

# spin-1/2 operators (I = sigma / 2)
IX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
IY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
IZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
SIGMA_X = 2 * IX
SIGMA_Y = 2 * IY
SIGMA_Z = 2 * IZ

_AXES = {
    "+x": SIGMA_X,
    "-x": -SIGMA_X,
    "+y": SIGMA_Y,
    "-y": -SIGMA_Y,
}
AXES = tuple(_AXES)


class NotUnitaryError(ValueError):
    """Raised when an operator expected to be unitary is not."""


class InvalidStateError(ValueError):
    """Raised when a matrix fails the density-matrix checks."""


class IncomparableError(ValueError):
    """Raised when a phase cannot be extracted because V^dagger U vanishes."""


def kron(left, right):
    """Tensor product with the spin-b operator in the left slot.

    ``(A x B)[2i + k, 2j + l] = A[i, j] B[k, l]``.
    """
    a = np.asarray(left, dtype=complex)
    b = np.asarray(right, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        return np.kron(a, b)
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(4, 4)


def on_b(op):
    return kron(op, I2)


def on_a(op):
    return kron(I2, op)


def rotation(axis, angle):
    """Closed-form ``exp(-i * angle * (I . n))`` for a transverse axis ``n``.

    Uses cos(angle/2) * 1 - i sin(angle/2) * sigma_n, exact for spin-1/2.
    """
    try:
        sigma = _AXES[axis]
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}") from None
    half = 0.5 * float(angle)
    return np.cos(half) * I2 - 1j * np.sin(half) * sigma


def expm_diagonal(diag_generator, t=1.0):
    """``exp(-i t H)`` for diagonal ``H`` given by its diagonal entries."""
    d = np.asarray(diag_generator, dtype=float)
    return np.diag(np.exp(-1j * t * d))


def dagger(op):
    return np.conj(np.transpose(op))


def unitarity_error(u):
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))


def is_unitary(u, tol=UNITARY_TOL):
    return unitarity_error(u) < tol


def require_unitary(u, tol=UNITARY_TOL):
    err = unitarity_error(u)
    if not err < tol:
        raise NotUnitaryError(f"operator is not unitary: max|U^dag U - E| = {err:.3e}")
    return np.asarray(u, dtype=complex)


def check_density(rho, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, eig_tol=EIGEN_TOL):
    """Raise :class:`InvalidStateError` unless ``rho`` is a valid 4x4 state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix has non-finite entries")
    herm = float(np.max(np.abs(rho - dagger(rho))))
    if herm > herm_tol:
        raise InvalidStateError(f"not Hermitian: max|rho - rho^dag| = {herm:.3e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"trace is {tr.real:.15g}, expected 1")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))))
    if lo < -eig_tol:
        raise InvalidStateError(f"not positive semidefinite: min eigenvalue {lo:.3e}")
    return rho


def is_density(rho, **tols):
    try:
        check_density(rho, **tols)
    except InvalidStateError:
        return False
    return True


def pure_density(amplitudes):
    """Projector onto a normalized state vector."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > 1e-12:
        raise InvalidStateError(f"state vector norm^2 is {norm:.15g}, expected 1")
    return np.outer(psi, np.conj(psi))


def basis_state(label):
    """Ket for a two-character label such as ``"10"`` (spin b first)."""
    if len(label) != 2 or set(label) - {"0", "1"}:
        raise ValueError(f"bad basis label {label!r}")
    psi = np.zeros(4, dtype=complex)
    psi[2 * int(label[0]) + int(label[1])] = 1.0
    return psi


def apply_unitary(u, rho):
    """Return ``U rho U^dagger``; rejects non-unitary ``U``."""
    u = require_unitary(u)
    return u @ np.asarray(rho, dtype=complex) @ dagger(u)


def distance_up_to_global_phase(u, v):
    """Max-norm distance ``|U - lambda V|`` with lambda removing the global phase.

    lambda is taken from the largest-magnitude entry of ``V^dagger U``.
    """
    u = require_unitary(u)
    v = require_unitary(v)
    m = dagger(v) @ u
    k = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    if abs(m[k]) < 1e-14:
        raise IncomparableError("V^dagger U vanishes; no phase reference")
    lam = m[k] / abs(m[k])
    return float(np.max(np.abs(u - lam * v)))


def distance_up_to_diagonal_phase(u, v):
    """Distance of ``U`` from ``D V`` for the best diagonal unit-modulus ``D``.

    Returns ``(distance, phases)`` where ``phases[i]`` is the argument of
    ``D[i, i]``. Each phase comes from the dominant entry of row ``i`` of
    ``U V^dagger``, which equals ``D`` when ``U = D V`` exactly.
    """
    u = require_unitary(u)
    v = require_unitary(v)
    m = u @ dagger(v)
    phases = np.zeros(u.shape[0])
    for i, row in enumerate(m):
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) < 1e-14:
            raise IncomparableError(f"row {i} of U V^dagger vanishes")
        phases[i] = float(np.angle(row[j]))
    d = np.diag(np.exp(1j * phases))
    return float(np.max(np.abs(u - d @ v))), phases
