"""Erasing the auxiliary register with and without side information.

Work is tallied in units of ``k_B T ln 2``: brute-force erasure of an unknown
qubit costs ``+1``, reverse erasure of a known pure qubit gains ``-1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .groups import AbelianGroup, Subgroup, coset_decompose, coset_representatives, log2_exact, span
from .hsp import (
    HspRunResult,
    OracleSpec,
    final_distribution,
    post_oracle_state,
    reconstruct_subgroup,
    solve,
)
from .qstate import (
    CNOT,
    HADAMARD,
    SWAP,
    BasisPermutation,
    QuantumState,
    RegisterLayout,
    apply_to_qubits,
    apply_unitary,
    bell_vector,
    conditional_entropy,
    partial_trace,
    permute_registers,
    pure_fidelity,
    replace_qubits,
    tensor,
    trace_distance,
)

FIDELITY_TOL = 1e-9


class FactorizationError(RuntimeError):
    """The state does not split off the promised Bell pairs."""

    def __init__(self, message: str, fidelity: Optional[float] = None):
        super().__init__(message)
        self.fidelity = fidelity


class BatteryError(ValueError):
    pass


@dataclass(frozen=True)
class WorkLedger:
    entries: tuple[tuple[str, int | float], ...] = ()

    def add(self, label: str, amount: int | float) -> "WorkLedger":
        return WorkLedger(self.entries + ((label, amount),))

    @property
    def total(self) -> int | float:
        return sum(a for _, a in self.entries)

    def as_list(self) -> list[dict]:
        return [{"label": label, "amount": amount} for label, amount in self.entries]


@dataclass(frozen=True)
class FactorizationWitness:
    """Local basis permutations after which the last ``ell`` qubits of G and S are Bell pairs."""

    U_G: BasisPermutation
    U_S: BasisPermutation
    ell: int
    K: Optional[Subgroup] = None

    def __post_init__(self) -> None:
        if not 0 <= self.ell <= min(self.U_G.n_qubits, self.U_S.n_qubits):
            raise ValueError(f"ell={self.ell} does not fit registers of {self.U_G.n_qubits} and {self.U_S.n_qubits} qubits")

    @property
    def n(self) -> int:
        return self.U_G.n_qubits

    @property
    def m(self) -> int:
        return self.U_S.n_qubits

    def transformed_table(self, table: Sequence[int]) -> list[int]:
        """``F(x) = U_S(f(U_G^-1(x)))``."""
        inv = self.U_G.inverse()
        return [self.U_S(int(table[inv(x)])) for x in range(len(table))]


class Factorization(NamedTuple):
    rest: QuantumState
    bell_count: int
    fidelity: float
    product_distance: float


class TransformComplexity(NamedTuple):
    kind: str
    bound: str


def ell_max(G: AbelianGroup, H: Subgroup) -> int:
    return log2_exact(G.order // H.order)


def split_layout(n: int, m: int, ell: int) -> RegisterLayout:
    return RegisterLayout.from_sizes(("G1", n - ell), ("G2", ell), ("S1", m - ell), ("S2", ell))


def witness_conditions(table: Sequence[int], w: FactorizationWitness) -> dict[str, bool]:
    """Check the three table conditions that make the state factor."""
    ell = w.ell
    low = (1 << ell) - 1
    F = w.transformed_table(table)
    first_g: dict[int, int] = {}
    same_value_same_low = True
    for x, v in enumerate(F):
        if v in first_g and (first_g[v] & low) != (x & low):
            same_value_same_low = False
        first_g.setdefault(v, x)
    high_of: dict[int, int] = {}
    high_depends_on_high = True
    for x, v in enumerate(F):
        if high_of.setdefault(x >> ell, v >> ell) != v >> ell:
            high_depends_on_high = False
    low_copies = all((v & low) == (x & low) for x, v in enumerate(F))
    return {
        "equal_values_share_low_bits": same_value_same_low,
        "high_part_depends_on_high_bits": high_depends_on_high,
        "low_part_copies_input": low_copies,
    }


def validate_witness(f: OracleSpec, w: FactorizationWitness) -> None:
    if w.n != f.n_qubits or w.m != f.m:
        raise FactorizationError("witness register sizes do not match the oracle")
    bad = [k for k, ok in witness_conditions(f.table, w).items() if not ok]
    if bad:
        raise FactorizationError(f"witness violates: {', '.join(bad)}")


def _complete_permutation(partial: dict[int, int], size: int) -> BasisPermutation:
    perm = [-1] * size
    used = set(partial.values())
    for x, y in partial.items():
        perm[x] = y
    free_sources = [x for x in range(size) if perm[x] < 0]
    leftover = []
    for x in free_sources:
        if x not in used:
            perm[x] = x
            used.add(x)
        else:
            leftover.append(x)
    targets = iter(y for y in range(size) if y not in used)
    for x in leftover:
        perm[x] = next(targets)
    return BasisPermutation(tuple(perm))


def witness_from_promise_k(f: OracleSpec, K: Subgroup) -> FactorizationWitness:
    """Build ``U_G: g -> |k_g>|[g]_K>`` and the matching ``U_S`` from ``H <= K <= G``."""
    G = f.domain
    if K.parent != G:
        raise FactorizationError("K lives in a different group")
    if not f.hidden <= K:
        raise FactorizationError("hidden subgroup is not contained in K")
    ell = log2_exact(G.order // K.order)
    reps = {r: i for i, r in enumerate(coset_representatives(K))}
    coords = K.coordinates

    split = {}
    for g in G.elements():
        rep, k = coset_decompose(g, K)
        split[g.index] = (coords[k].index, reps[rep])
    U_G = BasisPermutation(tuple((a << ell) | c for a, c in (split[i] for i in range(G.order))))

    def s_map(label) -> Optional[dict[int, int]]:
        out: dict[int, int] = {}
        for g in G.elements():
            a, c = split[g.index]
            target = (label[a] << ell) | c
            if out.setdefault(f.table[g.index], target) != target:
                return None
        if len(set(out.values())) != len(out) or max(out.values()) >= 2**f.m:
            return None
        return out

    k_values = [f.table[x.index] for x in K.embedding]
    mapping = s_map([v >> ell for v in k_values])
    if mapping is None:
        rank = {v: i for i, v in enumerate(sorted(set(k_values)))}
        mapping = s_map([rank[v] for v in k_values])
    if mapping is None:
        raise FactorizationError("f is not consistent with the cosets of K")
    w = FactorizationWitness(U_G, _complete_permutation(mapping, 2**f.m), ell, K)
    validate_witness(f, w)
    return w


def _to_split(state: QuantumState, w: FactorizationWitness) -> QuantumState:
    state = apply_unitary(state, w.U_G, "G")
    state = apply_unitary(state, w.U_S, "S")
    state = permute_registers(state, ["G", "S"])
    return state.with_layout(split_layout(w.n, w.m, w.ell))


def _from_split(state: QuantumState) -> QuantumState:
    n = state.layout.size("G1") + state.layout.size("G2")
    m = state.layout.size("S1") + state.layout.size("S2")
    return state.with_layout(RegisterLayout.from_sizes(("G", n), ("S", m)))


def bell_fidelity(split_state: QuantumState, ell: int) -> float:
    if ell == 0:
        return 1.0
    return pure_fidelity(partial_trace(split_state, ["G2", "S2"]), bell_vector(ell))


def verify_factorization(state: QuantumState, w: FactorizationWitness) -> Factorization:
    """Apply ``U_G x U_S`` and confirm the state is ``rest x |chi><chi|^ell``."""
    s = _to_split(state, w)
    fid = bell_fidelity(s, w.ell)
    if fid < 1 - FIDELITY_TOL:
        raise FactorizationError(f"Bell block fidelity {fid:.6g} < 1", fid)
    rest = partial_trace(s, ["G1", "S1"]) if w.n + w.m - 2 * w.ell else None
    if w.ell == 0:
        return Factorization(rest, 0, 1.0, 0.0)
    bell = QuantumState.from_vector(RegisterLayout.from_sizes(("G2", w.ell), ("S2", w.ell)), bell_vector(w.ell))
    if rest is None:
        rebuilt, target = bell, s
    else:
        rebuilt, target = tensor(rest, bell), permute_registers(s, ["G1", "S1", "G2", "S2"])
    dist = trace_distance(rebuilt, target)
    if dist > FIDELITY_TOL:
        raise FactorizationError(f"state is not a product with the Bell block (distance {dist:.3g})", fid)
    return Factorization(rest, w.ell, fid, dist)


def erase_brute_force(state: QuantumState, ledger: WorkLedger = WorkLedger(), register: str | list[str] = "S") -> tuple[QuantumState, WorkLedger]:
    """Reset ``register`` to ``|0...0>`` blindly, paying one unit per qubit."""
    qubits = state.layout.qubits(register)
    if not qubits:
        return state, ledger.add(f"brute-force erase {register}", 0)
    zero = np.zeros((2 ** len(qubits),) * 2, dtype=complex)
    zero[0, 0] = 1
    return replace_qubits(state, qubits, zero), ledger.add(f"brute-force erase {register}", len(qubits))


def erase_side_info(state: QuantumState, w: FactorizationWitness, ledger: WorkLedger = WorkLedger()) -> tuple[QuantumState, WorkLedger]:
    """Reset S using the ``ell`` Bell pairs exposed by ``w``; net cost ``m - 2 ell``."""
    before = partial_trace(state, "G")
    s = _to_split(state, w)
    fid = bell_fidelity(s, w.ell)
    if fid < 1 - FIDELITY_TOL:
        raise FactorizationError(f"Bell block fidelity {fid:.6g} < 1", fid)
    g2, s2 = s.layout.qubits("G2"), s.layout.qubits("S2")
    for a, b in zip(g2, s2):
        s = apply_to_qubits(s, CNOT, [a, b])
        s = apply_to_qubits(s, HADAMARD, [a])
    # G2 now holds known pure |0> qubits: reverse-erase them to fully mixed
    if g2:
        s = replace_qubits(s, g2, np.eye(2 ** len(g2)) / 2 ** len(g2))
    ledger = ledger.add("reverse erasure of G2", -len(g2))
    s, ledger = erase_brute_force(s, ledger, "S1")
    out = apply_unitary(_from_split(s), w.U_G.inverse(), "G")
    dist = trace_distance(before, partial_trace(out, "G"))
    if dist > FIDELITY_TOL:
        raise FactorizationError(f"main register changed by {dist:.3g}")
    return out, ledger


def entropy_bound(state: QuantumState) -> float:
    """``H(S|G)``: the least average work to erase S while keeping G."""
    return conditional_entropy(state, "S", "G")


def recover_subgroup_from_factorizer(G: AbelianGroup, w: FactorizationWitness) -> Subgroup:
    """Read H off a factorizer with ``G -> H x G/H``: collect ``U_G^-1 |h>|[0]>``."""
    if w.n != G.n_qubits:
        raise FactorizationError("witness does not act on this group")
    ell = w.ell
    label0 = w.U_G(G.identity.index) & ((1 << ell) - 1)
    inv = w.U_G.inverse()
    found = {G.from_index(inv((h << ell) | label0)) for h in range(2 ** (w.n - ell))}
    H = span(G, found)
    if len(H) != len(found):
        raise FactorizationError("preimage of the identity coset is not a subgroup")
    return H


@dataclass(frozen=True)
class Battery:
    depleted: int
    fueled: int
    bell_pairs: int = 0

    @property
    def fueled_equivalent(self) -> int:
        """Fueled qubits plus those recoverable from stored Bell pairs (two per pair)."""
        return self.fueled + 2 * self.bell_pairs


def battery_swap(state: QuantumState, w: FactorizationWitness, battery: Battery) -> tuple[QuantumState, Battery, WorkLedger]:
    """Swap each Bell pair into the battery against one depleted and one fueled qubit.

    Pairs are processed one at a time so the working space grows by two qubits
    only.  The returned ledger credits one unit per pair: the battery ends up
    with one more fueled-equivalent qubit per pair.
    """
    if battery.depleted < w.ell or battery.fueled < w.ell:
        raise BatteryError(f"battery needs {w.ell} depleted and {w.ell} fueled qubits")
    before = partial_trace(state, "G")
    s = _to_split(state, w)
    fid = bell_fidelity(s, w.ell)
    if fid < 1 - FIDELITY_TOL:
        raise FactorizationError(f"Bell block fidelity {fid:.6g} < 1", fid)
    names = s.layout.names
    cell = QuantumState(
        RegisterLayout.from_sizes(("Bd", 1), ("Bf", 1)),
        np.kron(np.eye(2) / 2, np.diag([1, 0])),
    )
    for i in range(w.ell):
        joint = tensor(s, cell)
        joint = QuantumState(
            RegisterLayout(s.layout.registers + (("Bd", (s.n_qubits,)), ("Bf", (s.n_qubits + 1,)))),
            joint.rho,
        )
        a, b = joint.layout.qubits("G2")[i], joint.layout.qubits("S2")[i]
        joint = apply_to_qubits(joint, SWAP, [a, joint.layout.qubits("Bd")[0]])
        joint = apply_to_qubits(joint, SWAP, [b, joint.layout.qubits("Bf")[0]])
        stored = pure_fidelity(partial_trace(joint, ["Bd", "Bf"]), bell_vector(1))
        if stored < 1 - FIDELITY_TOL:
            raise FactorizationError(f"battery received a pair with fidelity {stored:.6g}", stored)
        s = partial_trace(joint, names).with_layout(s.layout)
    out = _from_split(s)
    out = apply_unitary(out, w.U_G.inverse(), "G")
    out = apply_unitary(out, w.U_S.inverse(), "S")
    dist = trace_distance(before, partial_trace(out, "G"))
    if dist > FIDELITY_TOL:
        raise FactorizationError(f"main register changed by {dist:.3g}")
    after = Battery(battery.depleted - w.ell, battery.fueled - w.ell, battery.bell_pairs + w.ell)
    return out, after, WorkLedger().add("battery swap of Bell pairs", -w.ell)


def is_wire_permutation(p: BasisPermutation) -> bool:
    n = p.n_qubits
    if p(0) != 0:
        return False
    images = [p(1 << j) for j in range(n)]
    if sorted(images) != [1 << j for j in range(n)]:
        return False
    for x in range(2**n):
        y = 0
        for j in range(n):
            if (x >> j) & 1:
                y |= images[j]
        if p(x) != y:
            return False
    return True


def classify_transform_complexity(w: FactorizationWitness) -> TransformComplexity:
    if is_wire_permutation(w.U_G) and is_wire_permutation(w.U_S):
        return TransformComplexity("qubit-swaps", "O(log|K|)")
    return TransformComplexity("general-permutation", "O(n 2^n)")


STRATEGIES = ("standard", "brute", "side-info", "battery")


def erase_with_strategy(f: OracleSpec, strategy: str, witness: Optional[FactorizationWitness] = None) -> tuple[QuantumState, WorkLedger, dict]:
    """Post-oracle state with S handled by ``strategy``; returns (state, ledger, extras)."""
    state = post_oracle_state(f)
    extras: dict = {}
    if strategy == "standard":
        return state, WorkLedger(), extras
    if strategy == "brute":
        state, ledger = erase_brute_force(state)
        return state, ledger, extras
    if witness is None:
        raise ValueError(f"strategy {strategy!r} needs a factorization witness")
    if strategy == "side-info":
        state, ledger = erase_side_info(state, witness)
        return state, ledger, extras
    if strategy == "battery":
        state, battery, ledger = battery_swap(state, witness, Battery(witness.ell, witness.ell))
        # S is back in the original basis; map it forward again so S2 is known to be |0>
        state = apply_unitary(state, witness.U_S, "S")
        split = state.with_layout(split_layout(witness.n, witness.m, witness.ell))
        split, ledger = erase_brute_force(split, ledger, "S1")
        state = _from_split(split)
        extras["battery"] = {"depleted": battery.depleted, "fueled": battery.fueled, "bell_pairs": battery.bell_pairs}
        extras["battery_qubits"] = 2 * witness.ell
        return state, ledger, extras
    raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")


def run_with_strategy(
    f: OracleSpec,
    strategy: str,
    witness: Optional[FactorizationWitness] = None,
    shots: Optional[int] = None,
    seed: int = 0,
) -> HspRunResult:
    G = f.domain
    if shots is None:
        shots = 8 * max(1, G.n_qubits)
    state, ledger, extras = erase_with_strategy(f, strategy, witness)
    dist = final_distribution(state, G)
    samples = solve(G, dist, shots, seed)
    return HspRunResult(
        group=G,
        samples=samples,
        recovered=reconstruct_subgroup(G, samples),
        oracle_calls=len(samples),
        qubits_used=f.n_qubits + f.m,
        final_distribution=dist,
        ledger=ledger,
        extras=extras,
    )
