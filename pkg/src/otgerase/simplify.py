"""Use a promised intermediate subgroup K to shrink the algorithm instead of erasing.

The reduced algorithm runs over ``K`` with ``f1``, the part of the
transformed oracle that survives once the ``ell`` Bell pairs are split off.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .erasure import (
    FactorizationError,
    FactorizationWitness,
    WorkLedger,
    ell_max,
    run_with_strategy,
    witness_from_promise_k,
)
from .groups import AbelianGroup, Subgroup, h_perp, log2_exact, reconstruct_subgroup
from .hsp import (
    HspRunResult,
    OracleSpec,
    final_distribution,
    oracle_permutation,
    post_oracle_state,
    qft,
    solve,
    support,
)
from .qstate import BasisPermutation, QuantumState, RegisterLayout, apply_unitary, measure_distribution, partial_trace

MODES = ("black-box", "open-circuit")


@dataclass(frozen=True, eq=False)
class SimplifiedOracle:
    base: OracleSpec
    witness: FactorizationWitness
    reduced: OracleSpec
    mode: str
    circuit: BasisPermutation

    @property
    def K(self) -> Subgroup:
        return self.witness.K

    @property
    def reduced_domain(self) -> AbelianGroup:
        return self.reduced.domain

    @property
    def reduced_table(self) -> tuple[int, ...]:
        return self.reduced.table

    @property
    def ell(self) -> int:
        return self.witness.ell

    @property
    def qubit_savings(self) -> int:
        return 2 * self.ell

    @property
    def variable_qubits(self) -> int:
        """Qubits whose state depends on the input."""
        return self.reduced.n_qubits + self.reduced.m

    @property
    def physical_qubits(self) -> int:
        if self.mode == "black-box":
            return self.base.n_qubits + self.base.m
        return self.variable_qubits


def black_box_circuit(f: OracleSpec, w: FactorizationWitness) -> BasisPermutation:
    """``(U_G x U_S) O_f (U_G^dagger x 1)`` on the full ``n + m`` qubits."""
    n, m = f.n_qubits, f.m
    inv_g = w.U_G.inverse()
    perm = []
    for x in range(2**n):
        g = inv_g(x)
        for s in range(2**m):
            perm.append((w.U_G(g) << m) | w.U_S(s ^ f.table[g]))
    return BasisPermutation(tuple(perm))


def build_simplified(f: OracleSpec, w: FactorizationWitness, mode: Optional[str] = None) -> SimplifiedOracle:
    """Reduced oracle over ``K`` acting on ``log2|K| + m - ell`` variable qubits."""
    if mode is None:
        mode = "black-box" if f.black_box else "open-circuit"
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    K = w.K
    if K is None:
        raise FactorizationError("witness does not come from an intermediate subgroup")
    ell, n, m = w.ell, f.n_qubits, f.m
    if ell != log2_exact(f.domain.order // K.order):
        raise FactorizationError("witness does not split off log2|G/K| pairs")
    # G1 must enumerate K in its own encoding, with the bypassed G2 qubits at |0>
    for i, k in enumerate(K.embedding):
        if w.U_G(k.index) != i << ell:
            raise FactorizationError(f"U_G does not send {k} to |{i}>|0>")
    F = w.transformed_table(f.table)
    f1 = []
    for i in range(K.order):
        v = F[i << ell]
        if v & ((1 << ell) - 1):
            raise FactorizationError("bypassed auxiliary qubits are not |0> on K")
        f1.append(v >> ell)
    for x, v in enumerate(F):
        if v >> ell != f1[x >> ell]:
            raise FactorizationError("f1 does not depend on the K component only")
    reduced = OracleSpec(
        K.abstract, m - ell, tuple(f1), K.pullback(f.hidden), name=f"{f.name}/K" if f.name else "", black_box=f.black_box
    )
    if mode == "black-box":
        circuit = black_box_circuit(f, w)
        low = (1 << ell) - 1
        for i in range(K.order):
            out = circuit((i << ell) << m)
            g2, s = out >> m, out & (2**m - 1)
            if g2 & low or s & low:
                raise FactorizationError(f"bypassed qubits left |0> for input {i}")
            if s >> ell != f1[i]:
                raise FactorizationError("black-box circuit disagrees with the reduced table")
    else:
        circuit = oracle_permutation(K.abstract.n_qubits, m - ell, f1)
    return SimplifiedOracle(f, w, reduced, mode, circuit)


def simplified_distribution(so: SimplifiedOracle) -> np.ndarray:
    """Outcome probabilities of the reduced Fourier sampling, indexed by ``K.abstract``."""
    Kg = so.reduced_domain
    if so.mode == "open-circuit":
        return final_distribution(post_oracle_state(so.reduced), Kg)
    n, m, ell = so.base.n_qubits, so.base.m, so.ell
    layout = RegisterLayout.from_sizes(("G1", n - ell), ("G2", ell), ("S", m))
    state = QuantumState.zeros(layout)
    state = apply_unitary(state, qft(Kg), "G1")
    state = apply_unitary(state, so.circuit, ["G1", "G2", "S"])
    reduced = apply_unitary(partial_trace(state, "G1"), qft(Kg), "G1")
    return measure_distribution(reduced, "G1")


def simplified_ledger(so: SimplifiedOracle) -> WorkLedger:
    ledger = WorkLedger().add("brute-force erase reduced S", so.reduced.m)
    return ledger.add("bypassed main qubits left pure", -so.ell)


def run_simplified(so: SimplifiedOracle, shots: Optional[int] = None, seed: int = 0) -> HspRunResult:
    """Run over ``K`` and map the recovered subgroup back into ``G``."""
    Kg = so.reduced_domain
    if shots is None:
        shots = 8 * max(1, so.base.n_qubits)
    dist = simplified_distribution(so)
    allowed = set(h_perp(Kg, so.reduced.hidden).indices())
    leak = sum(p for i, p in enumerate(dist) if i not in allowed)
    if leak > 1e-10:
        raise FactorizationError(f"simplified run leaks probability {leak:.3g} outside the annihilator")
    samples = solve(Kg, dist, shots, seed)
    reduced_h = reconstruct_subgroup(Kg, samples)
    return HspRunResult(
        group=Kg,
        samples=samples,
        recovered=so.K.pushforward(reduced_h),
        oracle_calls=len(samples),
        qubits_used=so.physical_qubits,
        final_distribution=dist,
        ledger=simplified_ledger(so),
        extras={
            "reduced_recovered": reduced_h,
            "variable_qubits": so.variable_qubits,
            "qubit_savings": so.qubit_savings,
            "qft_qubits": Kg.n_qubits,
            "support": support(dist),
        },
    )


def compare_strategies(
    f: OracleSpec, K: Subgroup, shots: Optional[int] = None, seed: int = 0, mode: str = "open-circuit"
) -> dict:
    """Run brute-force, side-information and simplified pipelines on one instance."""
    w = witness_from_promise_k(f, K)
    runs = {
        "brute": run_with_strategy(f, "brute", w, shots, seed),
        "side-info": run_with_strategy(f, "side-info", w, shots, seed),
        "simplified": run_simplified(build_simplified(f, w, mode), shots, seed),
    }
    expected = f.m - 2 * w.ell
    if runs["side-info"].ledger.total != expected or runs["simplified"].ledger.total != expected:
        raise FactorizationError("side-information and simplified ledgers disagree")
    report = {
        name: {
            "qubits": r.qubits_used,
            "oracle_calls": r.oracle_calls,
            "ledger": r.ledger.total,
            "recovered": r.recovered.indices(),
        }
        for name, r in runs.items()
    }
    report["ell"] = w.ell
    report["ell_max"] = ell_max(f.domain, f.hidden)
    report["all_recover_hidden"] = all(r.recovered == f.hidden for r in runs.values())
    return report
