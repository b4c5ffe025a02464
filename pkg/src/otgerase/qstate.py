"""Dense density matrices over named qubit registers.

Qubit ordering is register-major and big-endian: qubit 0 is the most
significant bit of the global basis index, and an integer ``g`` stored in a
register is its binary expansion across that register's qubits.  States are
treated as immutable; every operation returns a new :class:`QuantumState`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 12
ATOL = 1e-10
EIG_FLOOR = 1e-9

Targets = Union[str, Sequence[str]]


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered mapping of register name to qubit indices."""

    registers: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        seen: list[int] = []
        names = set()
        for name, qubits in self.registers:
            if name in names:
                raise StateError(f"duplicate register {name!r}")
            names.add(name)
            seen.extend(qubits)
        if sorted(seen) != list(range(len(seen))):
            raise StateError("register qubit sets must be disjoint and cover 0..n-1")

    @classmethod
    def from_sizes(cls, *sizes: tuple[str, int]) -> "RegisterLayout":
        regs, start = [], 0
        for name, k in sizes:
            regs.append((name, tuple(range(start, start + k))))
            start += k
        return cls(tuple(regs))

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.registers]

    @property
    def n_qubits(self) -> int:
        return sum(len(q) for _, q in self.registers)

    def size(self, name: str) -> int:
        return len(self.qubits(name))

    def qubits(self, targets: Targets) -> list[int]:
        if isinstance(targets, str):
            targets = [targets]
        lookup = dict(self.registers)
        out: list[int] = []
        for t in targets:
            if t not in lookup:
                raise StateError(f"unknown register {t!r}; have {self.names}")
            out.extend(lookup[t])
        return out

    def split(self, name: str, parts: Sequence[tuple[str, int]]) -> "RegisterLayout":
        """Replace register ``name`` by consecutive sub-registers."""
        qs = self.qubits(name)
        if sum(k for _, k in parts) != len(qs):
            raise StateError(f"parts {parts} do not cover register {name!r}")
        regs = []
        for reg, qubits in self.registers:
            if reg != name:
                regs.append((reg, qubits))
                continue
            start = 0
            for sub, k in parts:
                regs.append((sub, tuple(qs[start:start + k])))
                start += k
        return RegisterLayout(tuple(regs))

    def merge(self, parts: Sequence[str], name: str) -> "RegisterLayout":
        """Inverse of :meth:`split`; the merged register takes the first part's slot."""
        merged = tuple(self.qubits(parts))
        regs = []
        for reg, qubits in self.registers:
            if reg == parts[0]:
                regs.append((name, merged))
            elif reg not in parts:
                regs.append((reg, qubits))
        return RegisterLayout(tuple(regs))


@dataclass(frozen=True, eq=False)
class QuantumState:
    layout: RegisterLayout
    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        n = self.layout.n_qubits
        if n > MAX_QUBITS:
            raise StateError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        if rho.shape != (2**n, 2**n):
            raise StateError(f"matrix shape {rho.shape} does not match {n} qubits")
        if abs(np.trace(rho) - 1) > ATOL:
            raise StateError(f"trace {np.trace(rho).real:.3g} != 1")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > ATOL:
            raise StateError("density matrix is not Hermitian")

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    @classmethod
    def basis(cls, layout: RegisterLayout, **values: int) -> "QuantumState":
        """Computational basis state; registers not named are ``|0...0>``."""
        index = 0
        for name, qubits in layout.registers:
            v = values.get(name, 0)
            if not 0 <= v < 2 ** len(qubits):
                raise StateError(f"value {v} does not fit register {name!r}")
            for k, q in enumerate(qubits):
                if (v >> (len(qubits) - 1 - k)) & 1:
                    index |= 1 << (layout.n_qubits - 1 - q)
        rho = np.zeros((2**layout.n_qubits,) * 2, dtype=complex)
        rho[index, index] = 1
        return cls(layout, rho)

    @classmethod
    def zeros(cls, layout: RegisterLayout) -> "QuantumState":
        return cls.basis(layout)

    @classmethod
    def from_vector(cls, layout: RegisterLayout, psi: np.ndarray) -> "QuantumState":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, layout: RegisterLayout) -> "QuantumState":
        d = 2**layout.n_qubits
        return cls(layout, np.eye(d, dtype=complex) / d)

    def with_layout(self, layout: RegisterLayout) -> "QuantumState":
        return QuantumState(layout, self.rho)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def dump(self, precision: int = 4) -> str:
        header = " ".join(f"{n}:{len(q)}" for n, q in self.layout.registers)
        return header + "\n" + np.array2string(self.rho, precision=precision, suppress_small=True)


@dataclass(frozen=True)
class BasisPermutation:
    """Unitary ``|x> -> |perm[x]>`` on ``n_qubits`` qubits."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        perm = tuple(int(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        d = len(perm)
        if d == 0 or d & (d - 1):
            raise StateError(f"permutation length {d} is not a power of two")
        if sorted(perm) != list(range(d)):
            raise StateError("not a bijection")

    @classmethod
    def identity(cls, n_qubits: int) -> "BasisPermutation":
        return cls(tuple(range(2**n_qubits)))

    @property
    def n_qubits(self) -> int:
        return len(self.perm).bit_length() - 1

    def __call__(self, x: int) -> int:
        return self.perm[x]

    def inverse(self) -> "BasisPermutation":
        inv = [0] * len(self.perm)
        for x, y in enumerate(self.perm):
            inv[y] = x
        return BasisPermutation(tuple(inv))

    def then(self, other: "BasisPermutation") -> "BasisPermutation":
        """Apply ``self`` first, then ``other``."""
        return BasisPermutation(tuple(other.perm[p] for p in self.perm))

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.perm))

    def matrix(self) -> np.ndarray:
        d = len(self.perm)
        m = np.zeros((d, d), dtype=complex)
        m[list(self.perm), list(range(d))] = 1
        return m


def _full_permutation(perm: Sequence[int], qubits: Sequence[int], n: int) -> np.ndarray:
    """Lift a permutation on ``qubits`` to the whole ``n``-qubit basis."""
    idx = np.arange(2**n)
    k = len(qubits)
    shifts = [n - 1 - q for q in qubits]
    local = np.zeros_like(idx)
    for j, s in enumerate(shifts):
        local |= ((idx >> s) & 1) << (k - 1 - j)
    new_local = np.asarray(perm)[local]
    out = idx.copy()
    for j, s in enumerate(shifts):
        out &= ~(1 << s)
        out |= ((new_local >> (k - 1 - j)) & 1) << s
    return out


def _apply_dense(rho: np.ndarray, U: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    k = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    u = U.reshape((2,) * (2 * k))
    t = np.tensordot(u, t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    t = np.tensordot(t, u.conj(), axes=([n + q for q in qubits], list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), [n + q for q in qubits])
    return t.reshape(2**n, 2**n)


def apply_unitary(state: QuantumState, U: np.ndarray | BasisPermutation, targets: Targets) -> QuantumState:
    """``rho -> (U x 1) rho (U^dagger x 1)`` with ``U`` acting on ``targets`` in order."""
    return apply_to_qubits(state, U, state.layout.qubits(targets))


def apply_to_qubits(state: QuantumState, U: np.ndarray | BasisPermutation, qubits: Sequence[int]) -> QuantumState:
    qubits = list(qubits)
    n = state.n_qubits
    if isinstance(U, BasisPermutation):
        if U.n_qubits != len(qubits):
            raise StateError(f"permutation on {U.n_qubits} qubits applied to {len(qubits)}")
        full = _full_permutation(U.perm, qubits, n)
        rho = np.empty_like(state.rho)
        rho[np.ix_(full, full)] = state.rho
        return QuantumState(state.layout, rho)
    U = np.asarray(U, dtype=complex)
    if U.shape != (2 ** len(qubits),) * 2:
        raise StateError(f"unitary of shape {U.shape} does not act on {len(qubits)} qubits")
    if np.max(np.abs(U @ U.conj().T - np.eye(len(U)))) > ATOL:
        raise StateError("matrix is not unitary")
    return QuantumState(state.layout, _apply_dense(state.rho, U, qubits, n))


def _reduce(rho: np.ndarray, n: int, keep: Sequence[int]) -> np.ndarray:
    rest = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(list(keep) + rest + [n + q for q in keep] + [n + q for q in rest])
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    return np.einsum("ijkj->ik", t.reshape(dk, dr, dk, dr))


def partial_trace(state: QuantumState, keep: Targets) -> QuantumState:
    """Reduced state on the registers in ``keep`` (kept in the order given)."""
    if isinstance(keep, str):
        keep = [keep]
    if not keep:
        raise StateError("keep set is empty")
    qubits = state.layout.qubits(keep)
    layout = RegisterLayout.from_sizes(*[(name, state.layout.size(name)) for name in keep])
    return QuantumState(layout, _reduce(state.rho, state.n_qubits, qubits))


def permute_registers(state: QuantumState, order: Sequence[str]) -> QuantumState:
    """Reorder the tensor factors so registers appear in ``order``."""
    if sorted(order) != sorted(state.layout.names):
        raise StateError("order must name every register exactly once")
    return partial_trace(state, list(order))


def tensor(*states: QuantumState) -> QuantumState:
    sizes: list[tuple[str, int]] = []
    rho = np.ones((1, 1), dtype=complex)
    for s in states:
        sizes.extend((name, len(q)) for name, q in s.layout.registers)
        rho = np.kron(rho, permute_registers(s, s.layout.names).rho)
    return QuantumState(RegisterLayout.from_sizes(*sizes), rho)


def replace_qubits(state: QuantumState, qubits: Sequence[int], sub: np.ndarray) -> QuantumState:
    """Discard ``qubits`` and put them back in state ``sub`` (a ``2^k x 2^k`` matrix)."""
    n = state.n_qubits
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    reduced = _reduce(state.rho, n, rest)
    full = np.kron(reduced, np.asarray(sub, dtype=complex))
    t = full.reshape((2,) * (2 * n))
    src = rest + list(qubits)
    perm = [0] * (2 * n)
    for pos, q in enumerate(src):
        perm[q] = pos
        perm[n + q] = n + pos
    t = t.transpose(perm)
    return QuantumState(state.layout, t.reshape(2**n, 2**n))


def _matrix(x: QuantumState | np.ndarray) -> np.ndarray:
    return x.rho if isinstance(x, QuantumState) else np.asarray(x, dtype=complex)


def eigenvalues(state: QuantumState | np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(_matrix(state))
    if lam.min() < -EIG_FLOOR:
        raise StateError(f"negative eigenvalue {lam.min():.3g}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(state: QuantumState | np.ndarray) -> float:
    """Entropy in bits, with ``0 log 0 = 0``."""
    lam = eigenvalues(state)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam))) + 0.0


def conditional_entropy(state: QuantumState, of: Targets, given: Targets) -> float:
    """``H(of | given) = H(of, given) - H(given)`` in bits."""
    of = [of] if isinstance(of, str) else list(of)
    given = [given] if isinstance(given, str) else list(given)
    if set(of) & set(given):
        raise StateError("registers must be disjoint")
    joint = partial_trace(state, given + of)
    return von_neumann_entropy(joint) - von_neumann_entropy(partial_trace(state, given))


def measure_distribution(state: QuantumState, register: Targets) -> np.ndarray:
    """Computational-basis outcome probabilities of ``register``."""
    p = np.real(np.diag(partial_trace(state, register).rho)).copy()
    p[np.abs(p) < 1e-15] = 0.0
    if abs(p.sum() - 1) > ATOL:
        raise StateError("distribution does not sum to one")
    return p


def sample(distribution: Sequence[float], seed: int, count: int) -> list[int]:
    p = np.asarray(distribution, dtype=float)
    if np.any(p < -ATOL) or abs(p.sum() - 1) > ATOL:
        raise StateError("distribution is not normalized")
    p = np.clip(p, 0.0, None)
    rng = np.random.default_rng(seed)
    return [int(x) for x in rng.choice(len(p), size=count, p=p / p.sum())]


def trace_distance(a: QuantumState | np.ndarray, b: QuantumState | np.ndarray) -> float:
    ma, mb = _matrix(a), _matrix(b)
    if ma.shape != mb.shape:
        raise StateError(f"dimension mismatch {ma.shape} vs {mb.shape}")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(ma - mb))))


def fidelity(a: QuantumState | np.ndarray, b: QuantumState | np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))^2``."""
    ma, mb = _matrix(a), _matrix(b)
    if ma.shape != mb.shape:
        raise StateError(f"dimension mismatch {ma.shape} vs {mb.shape}")
    w, v = np.linalg.eigh(ma)
    sa = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    lam = np.clip(np.linalg.eigvalsh(sa @ mb @ sa), 0, None)
    return float(np.sum(np.sqrt(lam)) ** 2)


def pure_fidelity(state: QuantumState | np.ndarray, psi: np.ndarray) -> float:
    """``<psi| rho |psi>`` for a normalized vector ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ _matrix(state) @ psi))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = BasisPermutation((0, 1, 3, 2))
SWAP = BasisPermutation((0, 2, 1, 3))


def bell_vector(pairs: int = 1) -> np.ndarray:
    """``(1/sqrt(2^l)) sum_c |c>|c>`` with the first ``l`` qubits on one side."""
    d = 2**pairs
    psi = np.zeros(d * d, dtype=complex)
    psi[[c * d + c for c in range(d)]] = 1 / np.sqrt(d)
    return psi

