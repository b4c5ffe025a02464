"""The standard Abelian hidden-subgroup algorithm on exact density matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .groups import (
    AbelianGroup,
    GroupElement,
    Subgroup,
    character_table,
    h_perp,
    is_power_of_two,
    log2_exact,
    reconstruct_subgroup,
    span,
)
from .qstate import (
    BasisPermutation,
    QuantumState,
    RegisterLayout,
    StateError,
    apply_unitary,
    measure_distribution,
    partial_trace,
    sample,
)


class OracleValidationError(ValueError):
    """Oracle table is not constant-and-distinct on the cosets of its hidden subgroup."""


@dataclass(frozen=True, eq=False)
class OracleSpec:
    """``f: G -> S`` as a table indexed by element index.

    ``table[g.index]`` is the basis index of ``f(g)`` in an ``codomain_bits``
    qubit register.  ``hidden`` is the ground truth used for verification.
    """

    domain: AbelianGroup
    codomain_bits: int
    table: tuple[int, ...]
    hidden: Subgroup
    period: Optional[int] = None
    promise_k: Optional[Subgroup] = None
    witness: Any = None
    black_box: bool = True
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        validate_table(self.domain, self.codomain_bits, self.table, self.hidden)
        if self.promise_k is not None and not self.hidden <= self.promise_k:
            raise OracleValidationError("promised K does not contain the hidden subgroup")

    @property
    def n_qubits(self) -> int:
        return self.domain.n_qubits

    @property
    def m(self) -> int:
        return self.codomain_bits

    def __call__(self, g: GroupElement | int) -> int:
        return self.table[self.domain.element(g).index]


def validate_table(G: AbelianGroup, codomain_bits: int, table: Sequence[int], H: Subgroup) -> None:
    if codomain_bits < 0:
        raise OracleValidationError("codomain_bits must be non-negative")
    if len(table) != G.order:
        raise OracleValidationError(f"table has {len(table)} entries, group {G} has {G.order}")
    if H.parent != G:
        raise OracleValidationError("hidden subgroup lives in a different group")
    for v in table:
        if not 0 <= v < 2**codomain_bits:
            raise OracleValidationError(f"value {v} does not fit in {codomain_bits} qubits")
    values: dict[int, GroupElement] = {}
    for g in G.elements():
        v = table[g.index]
        for h in H.generators:
            if table[(g + h).index] != v:
                raise OracleValidationError(f"f is not constant on the coset of {g}")
        if v in values and (g - values[v]) not in H:
            raise OracleValidationError(f"f({g}) = f({values[v]}) but they lie in different cosets")
        values.setdefault(v, g)


@dataclass
class HspRunResult:
    group: AbelianGroup
    samples: list[GroupElement]
    recovered: Subgroup
    oracle_calls: int
    qubits_used: int
    final_distribution: np.ndarray
    ledger: Any = None
    extras: dict = field(default_factory=dict)


def qft(G: AbelianGroup) -> np.ndarray:
    """Unitary whose column ``g`` is the character state ``|chi_g>``."""
    if not is_power_of_two(G.order):
        raise StateError(f"group order {G.order} is not a power of two")
    # T is symmetric, so column g = (chi_g(h))_h
    return character_table(G) / math.sqrt(G.order)


def layout_for(f: OracleSpec) -> RegisterLayout:
    return RegisterLayout.from_sizes(("G", f.n_qubits), ("S", f.m))


def oracle_permutation(n: int, m: int, table: Sequence[int]) -> BasisPermutation:
    """``|g, s> -> |g, s XOR f(g)>`` on ``n + m`` qubits."""
    perm = [(g << m) | (s ^ table[g]) for g in range(2**n) for s in range(2**m)]
    return BasisPermutation(tuple(perm))


def apply_oracle(state: QuantumState, f: OracleSpec) -> QuantumState:
    if state.layout.size("G") != f.n_qubits or state.layout.size("S") != f.m:
        raise StateError("register sizes do not match the oracle")
    return apply_unitary(state, oracle_permutation(f.n_qubits, f.m, f.table), ["G", "S"])


def post_oracle_table_state(G: AbelianGroup, m: int, table: Sequence[int]) -> QuantumState:
    """``(1/sqrt|G|) sum_g |g, f(g)>`` without validating ``table``."""
    layout = RegisterLayout.from_sizes(("G", G.n_qubits), ("S", m))
    psi = np.zeros(2 ** (G.n_qubits + m), dtype=complex)
    for g in range(G.order):
        psi[(g << m) | int(table[g])] = 1
    return QuantumState.from_vector(layout, psi)


def post_oracle_state(f: OracleSpec) -> QuantumState:
    """Prepare ``|0,0>``, Fourier-transform G, then query the oracle."""
    state = QuantumState.zeros(layout_for(f))
    state = apply_unitary(state, qft(f.domain), "G")
    return apply_oracle(state, f)


def final_distribution(state: QuantumState, G: AbelianGroup) -> np.ndarray:
    """Trace out everything but G, Fourier-transform, return outcome probabilities."""
    reduced = partial_trace(state, "G")
    return measure_distribution(apply_unitary(reduced, qft(G), "G"), "G")


def solve(G: AbelianGroup, dist: np.ndarray, shots: int, seed: int, patience: Optional[int] = None) -> list[GroupElement]:
    """Draw up to ``shots`` samples; with ``patience`` stop once the kernel
    intersection has not changed for that many consecutive samples."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    draws = sample(dist, seed, shots)
    if patience is None:
        return [G.from_index(x) for x in draws]
    out: list[GroupElement] = []
    current, stable = None, 0
    for x in draws:
        out.append(G.from_index(x))
        nxt = reconstruct_subgroup(G, out)
        stable = stable + 1 if nxt == current else 0
        current = nxt
        if stable >= patience:
            break
    return out


def run_standard(f: OracleSpec, shots: Optional[int] = None, seed: int = 0, patience: Optional[int] = None) -> HspRunResult:
    """Run the algorithm; the default budget is ``8 log2|G|`` shots."""
    G = f.domain
    if shots is None:
        shots = 8 * max(1, G.n_qubits)
    dist = final_distribution(post_oracle_state(f), G)
    samples = solve(G, dist, shots, seed, patience)
    return HspRunResult(
        group=G,
        samples=samples,
        recovered=reconstruct_subgroup(G, samples),
        oracle_calls=len(samples),
        qubits_used=f.n_qubits + f.m,
        final_distribution=dist,
    )


def support(dist: np.ndarray, tol: float = 1e-10) -> list[int]:
    return [i for i, p in enumerate(dist) if p > tol]


def expected_support(f: OracleSpec) -> Subgroup:
    return h_perp(f.domain, f.hidden)


def make_periodic_oracle(N: int, M: int, fbar: Sequence[int], r: int, name: str = "") -> OracleSpec:
    """``f(x) = fbar[x mod r]`` on ``Z/N``; the hidden subgroup is generated by ``r``."""
    if not (is_power_of_two(N) and is_power_of_two(M)):
        raise OracleValidationError("N and M must be powers of two")
    if r < 1 or N % r:
        raise OracleValidationError(f"period {r} does not divide {N}")
    fbar = [int(v) for v in fbar]
    if len(fbar) != r:
        raise OracleValidationError(f"one period needs {r} values, got {len(fbar)}")
    if len(set(fbar)) != r:
        raise OracleValidationError("values on one period must be distinct")
    G = AbelianGroup.cyclic(N)
    table = [fbar[x % r] for x in range(N)]
    return OracleSpec(G, log2_exact(M), tuple(table), span(G, [r % N]), period=r, name=name)


def make_dlog_oracle(N: int, a: int, name: str = "") -> OracleSpec:
    """``f(i, j) = i - a j (mod N)`` on ``Z/N x Z/N``, i.e. the exponent of ``gamma^i A^-j``
    with ``A = gamma^a``.  Hidden subgroup is generated by ``(a, 1)``."""
    if not is_power_of_two(N):
        raise OracleValidationError("N must be a power of two")
    if not 0 <= a < N:
        raise OracleValidationError(f"exponent {a} out of range for order {N}")
    G = AbelianGroup((N, N))
    table = [(g.coords[0] - a * g.coords[1]) % N for g in G.elements()]
    return OracleSpec(G, log2_exact(N), tuple(table), span(G, [(a, 1)]), name=name)


def dlog_residues(f: OracleSpec, gamma: int = 2, modulus: int = 17) -> list[int]:
    """Concrete values ``gamma^f(g) mod modulus`` (2 has order 8 modulo 17)."""
    return [pow(gamma, v, modulus) for v in f.table]
