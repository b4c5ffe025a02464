"""Explicit Landauer erasure of one qubit against a ladder of gapped bath qubits.

Bath qubit ``l`` (``l = 1..N``) has gap ``l * Delta`` and starts thermal.  Step
``l`` swaps ``|E_k, 0_S, 1_l> <-> |E_{k+l}, 1_S, 0_l>`` between a work-storage
ladder ``E_k = k Delta``, the system qubit S and bath qubit ``l``.  Work is
reported in units of ``k_B T ln 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

MAX_QUANTUM_DIM = 60_000
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class BathSpec:
    N: int
    beta_delta: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("bath needs at least one qubit")
        if not self.beta_delta > 0:
            raise ValueError("beta_delta must be positive")

    def excited(self, ell: int | np.ndarray) -> float | np.ndarray:
        """Thermal excited population ``e^{-l b}/(1 + e^{-l b})``."""
        return expit(-np.asarray(ell, dtype=float) * self.beta_delta)


@dataclass(frozen=True)
class LadderSpec:
    k_min: int
    k_max: int

    def __post_init__(self) -> None:
        if not self.k_min < 0 < self.k_max:
            raise ValueError("ladder window must straddle the starting level 0")

    @classmethod
    def for_bath(cls, N: int) -> "LadderSpec":
        reach = N * (N + 1) // 2
        return cls(-reach, reach)

    @property
    def size(self) -> int:
        return self.k_max - self.k_min + 1

    def level(self, k: int) -> int:
        return k - self.k_min


@dataclass
class ErasureTrace:
    mode: str
    bath: BathSpec
    p_init: float
    ells: np.ndarray
    populations: np.ndarray
    step_work: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return float(self.populations[-1]) if len(self.populations) else self.p_init

    @property
    def cumulative_work(self) -> np.ndarray:
        return np.cumsum(self.step_work)

    @property
    def total_work(self) -> float:
        return float(np.sum(self.step_work))

    def rows(self) -> list[tuple[int, int, float]]:
        """``(step, ell, p, cumulative_work)`` per applied swap."""
        cum = self.cumulative_work
        return [(i + 1, int(e), float(p), float(w)) for i, (e, p, w) in enumerate(zip(self.ells, self.populations, cum))]


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def residual_closed_form(N: int, beta_delta: float) -> float:
    return float(expit(-N * beta_delta))


# basis index of |E_k, s, b> in storage x S x (bath qubit): (level * 2 + s) * 2 + b
def build_swap_unitary(ell: int, ladder: LadderSpec) -> sp.csr_matrix:
    """``U^(l)`` on storage x S x bath qubit ``l``; identity where the partner level is outside the window."""
    if ell < 1 or ell >= ladder.size:
        raise ValueError(f"ladder window of {ladder.size} levels cannot hold a shift of {ell}")
    dim = 4 * ladder.size
    perm = np.arange(dim)
    for k in range(ladder.k_min, ladder.k_max - ell + 1):
        a = ladder.level(k) * 4 + 0 * 2 + 1
        b = ladder.level(k + ell) * 4 + 1 * 2 + 0
        perm[a], perm[b] = b, a
    return sp.csr_matrix((np.ones(dim), (perm, np.arange(dim))), shape=(dim, dim))


def local_hamiltonian(ell: int, ladder: LadderSpec) -> sp.csr_matrix:
    """Energies in units of Delta on storage x S x bath qubit ``l``."""
    ks = np.arange(ladder.k_min, ladder.k_max + 1)
    e = (ks[:, None, None] + 0 * np.arange(2)[None, :, None] + ell * np.arange(2)[None, None, :]).reshape(-1)
    return sp.diags(e.astype(float)).tocsr()


def check_swap_unitary(U: sp.spmatrix, H: sp.spmatrix, tol: float = 1e-10) -> None:
    dim = U.shape[0]
    if abs(U @ U.conj().T - sp.identity(dim)).max() > tol:
        raise ValueError("swap is not unitary")
    comm = U @ H - H @ U
    if comm.nnz and abs(comm).max() > tol:
        raise ValueError("swap does not conserve energy")


def _full_step_permutation(ell: int, N: int, ladder: LadderSpec) -> tuple[np.ndarray, np.ndarray]:
    """Image of every basis index of storage x S x bath_1..bath_N under ``U^(l)``,
    and a mask of the states whose partner falls outside the ladder."""
    L = ladder.size
    idx = np.arange(L * 2 * 2**N)
    level = idx // (2 * 2**N)
    s = (idx >> N) & 1
    shift = N - ell
    b = (idx >> shift) & 1
    k = level + ladder.k_min
    up = (s == 0) & (b == 1)
    down = (s == 1) & (b == 0)
    up_ok = up & (k + ell <= ladder.k_max)
    down_ok = down & (k - ell >= ladder.k_min)
    out = idx.copy()
    flip = (1 << N) | (1 << shift)
    out[up_ok] = idx[up_ok] + ell * 2 * 2**N
    out[up_ok] ^= flip
    out[down_ok] = idx[down_ok] - ell * 2 * 2**N
    out[down_ok] ^= flip
    truncated = (up & ~up_ok) | (down & ~down_ok)
    return out, truncated


def _thermal_bath(bath: BathSpec) -> np.ndarray:
    probs = np.ones(1)
    for ell in range(1, bath.N + 1):
        q = float(bath.excited(ell))
        probs = np.kron(probs, [1 - q, q])
    return probs


def run_quantum(
    bath: BathSpec,
    p_init: float = 0.5,
    ladder: Optional[LadderSpec] = None,
    order: Optional[Sequence[int]] = None,
) -> ErasureTrace:
    """Evolve the full joint density matrix of storage, S and the N bath qubits."""
    N = bath.N
    ladder = ladder or LadderSpec.for_bath(N)
    dim = ladder.size * 2 * 2**N
    if dim > MAX_QUANTUM_DIM:
        raise ValueError(f"joint dimension {dim} exceeds {MAX_QUANTUM_DIM}; use run_classical")
    order = list(order) if order is not None else list(range(1, N + 1))
    storage = np.zeros(ladder.size)
    storage[ladder.level(0)] = 1
    diag = np.kron(np.kron(storage, [1 - p_init, p_init]), _thermal_bath(bath))
    rho = sp.diags(diag.astype(complex)).tocsr()
    energies = np.repeat(np.arange(ladder.k_min, ladder.k_max + 1), 2 * 2**N).astype(float)

    def observe(r):
        d = np.real(r.diagonal())
        p = d.reshape(ladder.size, 2, 2**N).sum(axis=(0, 2))[1]
        return float(p), float(d @ energies), d

    p_prev, e_prev, _ = observe(rho)
    ells, pops, work = [], [], []
    for ell in order:
        perm, truncated = _full_step_permutation(ell, N, ladder)
        _, _, d = observe(rho)
        if d[truncated].sum() > BOUNDARY_TOL:
            raise ValueError(f"ladder window too narrow at step {ell}")
        P = sp.csr_matrix((np.ones(dim), (perm, np.arange(dim))), shape=(dim, dim))
        rho = (P @ rho @ P.T).tocsr()
        p, e, _ = observe(rho)
        ells.append(ell)
        pops.append(p)
        # work paid = energy drawn from the storage
        work.append(-(e - e_prev) * bath.beta_delta / math.log(2))
        e_prev = e
    return ErasureTrace("quantum", bath, p_init, np.array(ells), np.array(pops), np.array(work))


def _ladder_steps(bath: BathSpec, p_init: float, ells: np.ndarray, mode: str) -> ErasureTrace:
    q = bath.excited(ells) if len(ells) else np.zeros(0)
    prev = np.concatenate([[p_init], q[:-1]])
    work = ells * bath.beta_delta * (prev - q) / math.log(2)
    return ErasureTrace(mode, bath, p_init, ells, q, work)


def run_classical(bath: BathSpec, p_init: float = 0.5) -> ErasureTrace:
    """Population recursion ``p_l = q_l``; step ``l`` pays ``l Delta (p_{l-1} - q_l)``."""
    if not 0 <= p_init <= 1:
        raise ValueError("p_init must be a probability")
    return _ladder_steps(bath, p_init, np.arange(1, bath.N + 1), "classical")


def first_useful_step(bath: BathSpec, p_init: float) -> Optional[int]:
    """Smallest ``l`` with ``q_l <= p_init``, or None if no bath qubit is cold enough."""
    if p_init >= bath.excited(1):
        return 1
    if p_init <= 0:
        return None
    # q_l <= p  <=>  l * beta_delta >= ln((1 - p) / p)
    ell = max(1, math.ceil(math.log((1 - p_init) / p_init) / bath.beta_delta - 1e-12))
    while ell > 1 and bath.excited(ell - 1) <= p_init:
        ell -= 1
    while bath.excited(ell) > p_init:
        ell += 1
    return ell if ell <= bath.N else None


def run_truncated(bath: BathSpec, p_init: float) -> ErasureTrace:
    """Skip bath qubits hotter than the system; cost tends to ``H(p_init)``."""
    if not 0 <= p_init <= 0.5:
        raise ValueError("truncated protocol expects 0 <= p_init <= 1/2")
    start = first_useful_step(bath, p_init)
    ells = np.arange(start, bath.N + 1) if start is not None else np.zeros(0, dtype=int)
    trace = _ladder_steps(bath, p_init, ells, "truncated")
    trace.extras["first_step"] = start
    return trace


def reverse_extract(bath: BathSpec, p_init: float = 0.0) -> ErasureTrace:
    """Run the ladder from ``l = N`` down to 1 on a pure system; work tends to ``-1``."""
    return _ladder_steps(bath, p_init, np.arange(bath.N, 0, -1), "reverse")


MODES = {
    "quantum": lambda bath, p: run_quantum(bath, p),
    "classical": lambda bath, p: run_classical(bath, p),
    "truncated": lambda bath, p: run_truncated(bath, p),
    "reverse": lambda bath, p: reverse_extract(bath, p),
}


def run_mode(mode: str, bath: BathSpec, p_init: float) -> ErasureTrace:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {sorted(MODES)}")
    return MODES[mode](bath, p_init)
