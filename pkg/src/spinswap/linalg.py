"""Dense operator and Liouville-space primitives for small spin systems.

Conventions fixed here and relied on everywhere else in the package:

- |0> is spin-up: Iz|0> = +1/2 |0>.  Computational ordering for two qubits
  is |00>, |01>, |10>, |11>, with the leftmost label the lowest site index
  (site 0 is the leftmost Kronecker factor).
- Vectorization is column-stacking: vec(rho) stacks the columns of rho, so
  vec(A rho B) = (B.T kron A) vec(rho) and left multiplication by A maps to
  (identity kron A).
- Hamiltonians are in angular-frequency units (rad/s); Liouville-space
  generators are in 1/s.

Everything is dense complex128; the largest system handled is three qubits
(8-dimensional Hilbert space, 64-dimensional Liouville space), so sparsity
is deliberately not used.
"""

from __future__ import annotations

from itertools import product

import numpy as np
import scipy.linalg as _sla

HERMITICITY_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_IX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
_IY = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
_IZ = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
_IP = np.array([[0, 1], [0, 0]], dtype=complex)
_IM = np.array([[0, 0], [1, 0]], dtype=complex)


def spin_half_ops():
    """Return the spin-1/2 operators (Ix, Iy, Iz, Iplus, Iminus).

    Iz has eigenvalues +1/2 on |0> and -1/2 on |1>; I+- = Ix +- i Iy, so
    Iplus raises |1> to |0>.
    """
    return _IX.copy(), _IY.copy(), _IZ.copy(), _IP.copy(), _IM.copy()


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return max_norm(a - dagger(a)) <= tol


def kron_all(ops) -> np.ndarray:
    """Kronecker product of a sequence of operators, leftmost first."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, site: int, nsites: int) -> np.ndarray:
    """Embed a single-qubit operator at `site` in an `nsites`-qubit register.

    Returns identity (x) ... (x) op (x) ... (x) identity with op at position
    `site`; the result has dimension 2**nsites.
    """
    if not 0 <= site < nsites:
        raise ValueError(f"site {site} out of range for {nsites} sites")
    if op.shape != (2, 2):
        raise ValueError("embed expects a 2x2 single-qubit operator")
    factors = [_I2] * nsites
    factors[site] = op
    return kron_all(factors)


def basis_state(bits, nsites: int | None = None) -> np.ndarray:
    """Computational basis ket |b0 b1 ...> as a 1-d complex array."""
    bits = list(bits)
    n = nsites if nsites is not None else len(bits)
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    ket = np.zeros(2**n, dtype=complex)
    ket[idx] = 1.0
    return ket


def ket2dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, keep, dims) -> np.ndarray:
    """Reduced density operator on the subsystems listed in `keep`.

    Parameters
    ----------
    rho : array, shape (D, D) with D = prod(dims)
    keep : iterable of subsystem indices to retain (order-insensitive;
        the result is ordered by increasing site index)
    dims : sequence of subsystem dimensions
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    dim = int(np.prod(dims))
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep={keep} not a nonempty subset of 0..{n - 1}")
    r = rho.reshape(dims + dims)
    # einsum with repeated labels on traced subsystems
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    return np.einsum(r, row + col, out).reshape(
        int(np.prod([dims[k] for k in keep])), -1
    )


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError("vector length is not a perfect square")
    return v.reshape(d, d, order="F")


def left_mult(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a rho."""
    return np.kron(identity(a.shape[0]), a)


def right_mult(b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho b."""
    return np.kron(b.T, identity(b.shape[0]))


def conjugation_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> u rho u^dagger."""
    return np.kron(u.conj(), u)


def commutator_superop(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Superoperator of the coherent generator rho -> -i [h, rho].

    `h` must be Hermitian to within `tol` in max-norm.
    """
    h = np.asarray(h, dtype=complex)
    defect = max_norm(h - dagger(h))
    if defect > tol:
        raise ValueError(f"Hamiltonian not Hermitian: max-norm defect {defect:.3e}")
    return -1j * (left_mult(h) - right_mult(h))


def expm(a: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Matrix exponential of a*t via scaling-and-squaring (Pade).

    Raises on non-finite entries.  Dense 64x64 worst case lands well below
    the 1e-12 relative-accuracy target of the propagation layer.
    """
    m = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(m)) or not np.isfinite(t):
        raise ValueError("expm: non-finite entries in generator")
    return _sla.expm(m * t)


def pauli_strings(nqubits: int, traceless: bool = True) -> np.ndarray:
    """Normalized Pauli-string basis for `nqubits` qubits.

    Returns an array of shape (m, d, d) with d = 2**nqubits and
    Tr(P_i P_j) = delta_ij.  With traceless=True the all-identity string is
    omitted (m = 4**nqubits - 1), which is the basis used for Kossakowski
    extraction.
    """
    sx = 2.0 * _IX
    sy = 2.0 * _IY
    sz = 2.0 * _IZ
    singles = [_I2, sx, sy, sz]
    norm = np.sqrt(2.0) ** nqubits
    strings = []
    for combo in product(range(4), repeat=nqubits):
        if traceless and all(c == 0 for c in combo):
            continue
        strings.append(kron_all([singles[c] for c in combo]) / norm)
    return np.array(strings)


def clip_to_density(rho: np.ndarray) -> np.ndarray:
    """Project onto the density-matrix cone: floor eigenvalues at zero and
    renormalize the trace."""
    rho = 0.5 * (rho + dagger(rho))
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ dagger(v)
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("state has no positive weight left after clipping")
    return rho / tr
