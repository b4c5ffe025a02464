"""Independent brute-force reference computations.

Nothing here imports the package: groups are plain tuples of invariant
factors, states are numpy vectors built by explicit matrix products.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def elements(factors):
    return list(itertools.product(*[range(a) for a in factors]))


def index(factors, g):
    i = 0
    for c, a in zip(g, factors):
        i = i * a + c
    return i


def add(factors, g, h):
    return tuple((x + y) % a for x, y, a in zip(g, h, factors))


def closure(factors, gens):
    zero = tuple(0 for _ in factors)
    found = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = add(factors, x, g)
                if y not in found:
                    found.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(found)


def subgroups(factors):
    """All subgroups, each as a frozenset; rank <= 2 groups are 2-generated."""
    els = elements(factors)
    out = set()
    for a in els:
        for b in els:
            out.add(closure(factors, [a, b]))
    return out


def character(factors, g, h):
    return np.prod([np.exp(2j * np.pi * x * y / a) for x, y, a in zip(g, h, factors)])


def annihilator(factors, H):
    return frozenset(g for g in elements(factors) if all(abs(character(factors, g, h) - 1) < 1e-12 for h in H))


def qft_matrix(factors):
    els = elements(factors)
    d = len(els)
    Q = np.zeros((d, d), dtype=complex)
    for g in els:
        for h in els:
            Q[index(factors, h), index(factors, g)] = character(factors, g, h) / math.sqrt(d)
    return Q


def oracle_matrix(n_states, m, table):
    d = n_states * 2**m
    O = np.zeros((d, d))
    for g in range(n_states):
        for s in range(2**m):
            O[g * 2**m + (s ^ table[g]), g * 2**m + s] = 1
    return O


def post_oracle_vector(factors, m, table):
    """Circuit from scratch: |0,0> -> (Q x 1) -> O_f."""
    d = math.prod(factors)
    psi = np.zeros(d * 2**m, dtype=complex)
    psi[0] = 1
    psi = np.kron(qft_matrix(factors), np.eye(2**m)) @ psi
    return oracle_matrix(d, m, table) @ psi


def reduced_main(psi, d, m):
    M = psi.reshape(d, 2**m)
    return M @ M.conj().T


def entropy_bits(rho):
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log2(lam)))


def coset_sum_reduced(factors, H):
    """``(1/|G|) sum_{g - g' in H} |g><g'|``."""
    els = elements(factors)
    d = len(els)
    rho = np.zeros((d, d), dtype=complex)
    for g in els:
        for gp in els:
            diff = tuple((x - y) % a for x, y, a in zip(g, gp, factors))
            if diff in H:
                rho[index(factors, g), index(factors, gp)] = 1 / d
    return rho


def final_distribution(factors, m, table):
    d = math.prod(factors)
    rho = reduced_main(post_oracle_vector(factors, m, table), d, m)
    Q = qft_matrix(factors)
    return np.real(np.diag(Q @ rho @ Q.conj().T))


def coset_table(factors, H):
    """f(g) = position of the coset of g in order of first appearance."""
    labels = {}
    table = []
    for g in elements(factors):
        coset = frozenset(add(factors, g, h) for h in H)
        labels.setdefault(coset, len(labels))
        table.append(labels[coset])
    return table


def ladder_work(N, beta_delta, p_init, ells):
    """Population recursion written out step by step."""
    p, total = p_init, 0.0
    for ell in ells:
        q = math.exp(-ell * beta_delta) / (1 + math.exp(-ell * beta_delta))
        total += ell * beta_delta * (p - q) / math.log(2)
        p = q
    return p, total
