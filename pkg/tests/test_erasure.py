import numpy as np
import pytest

from otgerase.erasure import (
    Battery,
    BatteryError,
    FactorizationError,
    FactorizationWitness,
    WorkLedger,
    battery_swap,
    classify_transform_complexity,
    ell_max,
    entropy_bound,
    erase_brute_force,
    erase_side_info,
    recover_subgroup_from_factorizer,
    run_with_strategy,
    validate_witness,
    verify_factorization,
    witness_conditions,
    witness_from_promise_k,
)
from otgerase.groups import AbelianGroup, all_subgroups, intermediate_subgroups, span, trivial_subgroup, whole_group
from otgerase.hsp import final_distribution, make_periodic_oracle, post_oracle_state, post_oracle_table_state
from otgerase.instances import builtin, coset_index_oracle, suite
from otgerase.qstate import (
    BasisPermutation,
    QuantumState,
    RegisterLayout,
    bell_vector,
    partial_trace,
    trace_distance,
)


def pfa8():
    return make_periodic_oracle(8, 8, [2, 3, 4, 5], 4)


def bell():
    return QuantumState.from_vector(RegisterLayout.from_sizes(("G", 1), ("S", 1)), bell_vector(1))


IDENTITY_BELL = FactorizationWitness(BasisPermutation.identity(1), BasisPermutation.identity(1), 1)


def scrambled(w, seed):
    """Relabel the K-part of U_G by a random permutation; the witness stays valid."""
    rng = np.random.default_rng(seed)
    high = 2 ** (w.n - w.ell)
    pi = rng.permutation(high)
    perm = [(int(pi[x >> w.ell]) << w.ell) | (x & ((1 << w.ell) - 1)) for x in range(2**w.n)]
    sigma = BasisPermutation(tuple(perm))
    return FactorizationWitness(w.U_G.then(sigma), w.U_S, w.ell)


class TestLedger:
    def test_total(self):
        led = WorkLedger().add("a", 3).add("b", -2)
        assert led.total == 1
        assert [e["amount"] for e in led.as_list()] == [3, -2]

    def test_immutable(self):
        led = WorkLedger()
        led.add("a", 1)
        assert led.total == 0


class TestEllMax:
    def test_examples(self):
        G = AbelianGroup.cyclic(8)
        assert ell_max(G, span(G, [4])) == 2
        assert ell_max(G, whole_group(G)) == 0
        G2 = AbelianGroup((8, 8))
        assert ell_max(G2, span(G2, [(3, 1)])) == 3

    @pytest.mark.parametrize("name", ["Z4", "Z8", "Z16", "Z2xZ4"])
    def test_equals_negative_conditional_entropy(self, name):
        G = AbelianGroup.parse(name)
        for H in all_subgroups(G):
            f = coset_index_oracle(G, H)
            assert -entropy_bound(post_oracle_state(f)) == pytest.approx(ell_max(G, H), abs=1e-9)


class TestWitness:
    def test_promise3_is_identity(self):
        f = pfa8()
        w = witness_from_promise_k(f, span(f.domain, [2]))
        assert w.ell == 1 and w.U_G.is_identity() and w.U_S.is_identity()

    def test_k_equals_g(self):
        f = pfa8()
        w = witness_from_promise_k(f, whole_group(f.domain))
        assert w.ell == 0
        assert all(witness_conditions(f.table, w).values())

    def test_k_equals_h(self):
        f = pfa8()
        assert witness_from_promise_k(f, f.hidden).ell == 2

    def test_chain_violation(self):
        f = pfa8()
        with pytest.raises(FactorizationError):
            witness_from_promise_k(f, trivial_subgroup(f.domain))

    @pytest.mark.parametrize("case", range(len(suite())), ids=lambda i: f"{suite()[i][0]}-K{suite()[i][2].order}")
    def test_suite_witnesses_validate(self, case):
        name, f, K = suite()[case]
        w = witness_from_promise_k(f, K)
        validate_witness(f, w)
        assert w.ell == ell_max(f.domain, K)

    def test_rejects_wrong_witness(self):
        f = pfa8()
        bad = FactorizationWitness(BasisPermutation.identity(3), BasisPermutation.identity(3), 2)
        with pytest.raises(FactorizationError):
            validate_witness(f, bad)


class TestVerifyFactorization:
    def test_bell_pair(self):
        assert verify_factorization(bell(), IDENTITY_BELL).bell_count == 1

    def test_promise3_rest_is_smaller_pfa(self):
        f = pfa8()
        w = witness_from_promise_k(f, span(f.domain, [2]))
        fz = verify_factorization(post_oracle_state(f), w)
        assert fz.bell_count == 1
        smaller = post_oracle_state(make_periodic_oracle(4, 4, [1, 2], 2))
        assert trace_distance(fz.rest, smaller) < 1e-10

    def test_k_equals_h(self):
        f = pfa8()
        assert verify_factorization(post_oracle_state(f), witness_from_promise_k(f, f.hidden)).bell_count == 2

    def test_mutated_table_fails(self):
        f = pfa8()
        w = witness_from_promise_k(f, span(f.domain, [2]))
        table = list(f.table)
        table[5] = 7
        assert not all(witness_conditions(table, w).values())
        with pytest.raises(FactorizationError) as err:
            verify_factorization(post_oracle_table_state(f.domain, f.m, table), w)
        assert err.value.fidelity is None or err.value.fidelity < 1


class TestBruteForce:
    def test_costs_m(self):
        f = pfa8()
        s = post_oracle_state(f)
        out, led = erase_brute_force(s, WorkLedger())
        assert led.total == 3
        assert trace_distance(partial_trace(out, "G"), partial_trace(s, "G")) < 1e-12
        assert partial_trace(out, "S").rho[0, 0] == pytest.approx(1)

    def test_empty_register(self):
        s = QuantumState.zeros(RegisterLayout.from_sizes(("G", 1), ("S", 0)))
        out, led = erase_brute_force(s)
        assert led.total == 0 and trace_distance(out, s) == 0


class TestSideInfo:
    def test_bell_pair_gains(self):
        out, led = erase_side_info(bell(), IDENTITY_BELL)
        assert led.total == -1
        assert partial_trace(out, "S").rho[0, 0] == pytest.approx(1)
        assert np.allclose(partial_trace(out, "G").rho, np.eye(2) / 2)

    @pytest.mark.parametrize("gens,expect", [([2], 1), ([4], -1), ([1], 3)])
    def test_pfa8(self, gens, expect):
        f = pfa8()
        s = post_oracle_state(f)
        out, led = erase_side_info(s, witness_from_promise_k(f, span(f.domain, gens)))
        assert led.total == expect
        assert trace_distance(partial_trace(out, "G"), partial_trace(s, "G")) <= 1e-9

    def test_arbitrary_witness(self):
        f = pfa8()
        w = scrambled(witness_from_promise_k(f, f.hidden), seed=1)
        validate_witness(f, w)
        _, led = erase_side_info(post_oracle_state(f), w)
        assert led.total == -1

    def test_invalid_witness_raises(self):
        f = pfa8()
        bad = FactorizationWitness(BasisPermutation.identity(3), BasisPermutation.identity(3), 2)
        with pytest.raises(FactorizationError):
            erase_side_info(post_oracle_state(f), bad)


class TestEntropyBound:
    def test_examples(self):
        assert entropy_bound(post_oracle_state(pfa8())) == pytest.approx(-2, abs=1e-9)
        L = RegisterLayout.from_sizes(("G", 1), ("S", 1))
        assert entropy_bound(QuantumState.maximally_mixed(L)) == pytest.approx(1)
        assert entropy_bound(QuantumState.zeros(L)) == pytest.approx(0)


class TestRecoverFromFactorizer:
    def test_pfa8(self):
        f = pfa8()
        assert recover_subgroup_from_factorizer(f.domain, witness_from_promise_k(f, f.hidden)).indices() == [0, 4]

    def test_trivial_h(self):
        f = make_periodic_oracle(8, 8, [3, 1, 4, 0, 5, 2, 6, 7], 8)
        assert recover_subgroup_from_factorizer(f.domain, witness_from_promise_k(f, f.hidden)).indices() == [0]

    def test_whole_group(self):
        f = make_periodic_oracle(8, 2, [1], 1)
        H = recover_subgroup_from_factorizer(f.domain, witness_from_promise_k(f, f.hidden))
        assert H == whole_group(f.domain)

    def test_scrambled_still_recovers(self):
        f = builtin("dlog8-a3")
        w = scrambled(witness_from_promise_k(f, f.hidden), seed=4)
        assert recover_subgroup_from_factorizer(f.domain, w) == f.hidden

    def test_non_factorizing(self):
        G = AbelianGroup.cyclic(8)
        w = FactorizationWitness(BasisPermutation((1, 0, 2, 3, 4, 5, 6, 7)), BasisPermutation.identity(3), 1)
        with pytest.raises(FactorizationError):
            recover_subgroup_from_factorizer(G, w)


class TestBattery:
    def test_single_pair(self):
        out, battery, led = battery_swap(bell(), IDENTITY_BELL, Battery(1, 1))
        assert battery == Battery(0, 0, 1)
        assert battery.fueled_equivalent == 2
        assert led.total == -1
        assert np.allclose(partial_trace(out, "G").rho, np.eye(2) / 2)
        assert partial_trace(out, "S").rho[0, 0] == pytest.approx(1)

    def test_no_pairs(self):
        f = pfa8()
        w = witness_from_promise_k(f, whole_group(f.domain))
        s = post_oracle_state(f)
        out, battery, led = battery_swap(s, w, Battery(0, 0))
        assert trace_distance(out, s) < 1e-12 and led.total == 0

    def test_insufficient(self):
        with pytest.raises(BatteryError):
            battery_swap(bell(), IDENTITY_BELL, Battery(1, 0))

    def test_main_register_unchanged(self):
        f = builtin("dlog8-a3")
        s = post_oracle_state(f)
        w = witness_from_promise_k(f, f.hidden)
        out, battery, _ = battery_swap(s, w, Battery(3, 3))
        assert battery.bell_pairs == 3
        assert trace_distance(partial_trace(out, "G"), partial_trace(s, "G")) <= 1e-9


class TestComplexity:
    def test_promise3(self):
        f = pfa8()
        w = witness_from_promise_k(f, span(f.domain, [2]))
        assert classify_transform_complexity(w).kind == "qubit-swaps"

    def test_identity(self):
        assert classify_transform_complexity(IDENTITY_BELL) == ("qubit-swaps", "O(log|K|)")

    def test_scrambled(self):
        f = builtin("pfa16")
        w = scrambled(witness_from_promise_k(f, span(f.domain, [2])), seed=0)
        assert classify_transform_complexity(w) == ("general-permutation", "O(n 2^n)")

    def test_wire_swap_detected(self):
        swap = BasisPermutation((0, 2, 1, 3))
        assert classify_transform_complexity(FactorizationWitness(swap, swap, 1)).kind == "qubit-swaps"


@pytest.mark.parametrize("name", ["pfa8", "pfa16", "dlog8-a3", "z2z4"])
def test_ledger_monotone_along_chains(name):
    f = builtin(name)
    Ks = intermediate_subgroups(f.hidden)
    led = {K: run_with_strategy(f, "side-info", witness_from_promise_k(f, K), shots=4).ledger.total for K in Ks}
    ell = {K: ell_max(f.domain, K) for K in Ks}
    for Kp in Ks:
        for K in Ks:
            if Kp <= K:
                assert ell[Kp] >= ell[K] and led[Kp] <= led[K]
    assert led[f.hidden] == f.m - 2 * ell_max(f.domain, f.hidden)


@pytest.mark.parametrize("strategy", ["brute", "side-info", "battery"])
def test_strategy_keeps_final_distribution(strategy):
    f = builtin("pfa16")
    base = final_distribution(post_oracle_state(f), f.domain)
    for K in intermediate_subgroups(f.hidden):
        r = run_with_strategy(f, strategy, witness_from_promise_k(f, K), seed=0)
        assert np.abs(r.final_distribution - base).max() <= 1e-9
        expected = f.m if strategy == "brute" else f.m - 2 * ell_max(f.domain, K)
        assert r.ledger.total == expected


def test_unknown_strategy():
    with pytest.raises(ValueError):
        run_with_strategy(pfa8(), "magic")
    with pytest.raises(ValueError):
        run_with_strategy(pfa8(), "side-info")
