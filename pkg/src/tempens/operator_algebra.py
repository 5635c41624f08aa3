"""Finite-dimensional operator checks for the canonical construction.

The canonical state of the doubled system lives on span{|i> (x) |i>}: a
diagonal density operator whose (i*n + i) entries are the Boltzmann weights.
The matching generator (energy observable for energy spectra, time observable
for time spectra) is I (x) diag(x); the state commutes with it and is
invariant under the unitaries it generates. These identities are what
`tempens verify` asserts numerically.

Dense complex matrices only, dimension capped (default 4096): this is a
verification harness, not an operator library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ensemble
from .spectra import KIND_ENERGY, KIND_TIME, Spectrum

MAX_DIM = 4096
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-12

GENERATOR_ENERGY = "s_hat"
GENERATOR_TIME = "t_hat"
_GENERATOR_KINDS = {GENERATOR_ENERGY: KIND_ENERGY, GENERATOR_TIME: KIND_TIME}


def _as_square_complex(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray) -> None:
    dev = np.abs(m - m.conj().T).max()
    if dev > HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian within {HERMITIAN_TOL}: deviation {dev:.3e}")


def _eigenvalues(m: np.ndarray) -> np.ndarray:
    # diagonal fast path: exact for the states this module assembles
    if not np.any(m[~np.eye(m.shape[0], dtype=bool)]):
        return np.real(np.diag(m))
    return np.linalg.eigvalsh(m)


@dataclass(frozen=True)
class HermitianOperator:
    """Square complex matrix, Hermitian within 1e-12."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        _check_hermitian(m)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace (1e-12), PSD (eigenvalues >= -1e-12) matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        _check_hermitian(m)
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace must be 1 within {TRACE_TOL}, got {tr!r}")
        lo = _eigenvalues(m).min()
        if lo < PSD_TOL:
            raise ValueError(f"matrix is not PSD: smallest eigenvalue {lo:.3e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def projector(index: int, dim: int) -> HermitianOperator:
    """Rank-1 projector |index><index| in dimension dim."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not 0 <= index < dim:
        raise ValueError(f"index {index} out of range for dim {dim}")
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[index, index] = 1.0
    return HermitianOperator(m)


def tensor(a: HermitianOperator, b: HermitianOperator, max_dim: int = MAX_DIM) -> HermitianOperator:
    """Kronecker product, refusing results beyond max_dim."""
    out_dim = a.dim * b.dim
    if out_dim > max_dim:
        raise ValueError(f"tensor product dimension {out_dim} exceeds cap {max_dim}")
    return HermitianOperator(np.kron(a.entries, b.entries))


def assemble_canonical_state(spectrum: Spectrum, rate: float, max_dim: int = MAX_DIM) -> DensityOperator:
    """Canonical state sum_i p_i |i><i| (x) |i><i| as an n^2-dim diagonal matrix.

    Requires unit degeneracies (each level must name a single state) and
    n^2 <= max_dim. The diagonal at position i*n + i equals the Boltzmann
    weight of level i by construction.
    """
    if np.any(spectrum.degeneracies != 1):
        raise ValueError("canonical state assembly requires unit degeneracies")
    n = spectrum.count
    if n * n > max_dim:
        raise ValueError(f"state dimension {n * n} exceeds cap {max_dim}")
    probs = ensemble.boltzmann_weights(spectrum, rate).probs
    diag = np.zeros(n * n, dtype=np.complex128)
    diag[np.arange(n) * n + np.arange(n)] = probs
    return DensityOperator(np.diag(diag))


def generator_operator(spectrum: Spectrum, which: str, max_dim: int = MAX_DIM) -> HermitianOperator:
    """The doubled-system observable I (x) diag(values).

    `which` selects the flavor: "s_hat" pairs with energy spectra, "t_hat"
    with time spectra; a mismatch is rejected. The layout matches
    assemble_canonical_state (second tensor factor carries the values).
    """
    if which not in _GENERATOR_KINDS:
        raise ValueError(f"unknown generator {which!r}; expected 's_hat' or 't_hat'")
    if _GENERATOR_KINDS[which] != spectrum.kind:
        raise ValueError(f"generator {which!r} does not act on a {spectrum.kind} spectrum")
    n = spectrum.count
    if n * n > max_dim:
        raise ValueError(f"operator dimension {n * n} exceeds cap {max_dim}")
    block = np.diag(spectrum.values.astype(np.complex128))
    return HermitianOperator(np.kron(np.eye(n, dtype=np.complex128), block))


def commutator(a, b) -> np.ndarray:
    """[A, B] = AB - BA as a plain array (generally not Hermitian)."""
    ma = a.entries if hasattr(a, "entries") else _as_square_complex(a)
    mb = b.entries if hasattr(b, "entries") else _as_square_complex(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return ma @ mb - mb @ ma


def conjugate_by_generated_unitary(rho: DensityOperator, generator: HermitianOperator, tau: float) -> DensityOperator:
    """exp(-i G tau) rho exp(+i G tau), with hbar = 1.

    For a diagonal generator the phases are applied elementwise, which keeps
    exact zero off-diagonal structure; otherwise the unitary is built from the
    eigendecomposition of the generator.
    """
    if rho.dim != generator.dim:
        raise ValueError(f"dimension mismatch: state {rho.dim}, generator {generator.dim}")
    g = generator.entries
    off = g[~np.eye(g.shape[0], dtype=bool)]
    if not np.any(off):
        phases = np.exp(-1j * np.real(np.diag(g)) * tau)
        out = rho.entries * np.outer(phases, phases.conj())
    else:
        w, vecs = np.linalg.eigh(g)
        u = (vecs * np.exp(-1j * w * tau)) @ vecs.conj().T
        out = u @ rho.entries @ u.conj().T
    return DensityOperator(out)
