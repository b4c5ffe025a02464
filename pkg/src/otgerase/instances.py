"""Built-in problem instances and the JSON oracle / witness file formats."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from .erasure import FactorizationWitness
from .groups import AbelianGroup, GroupError, Subgroup, coset_representatives, coset_decompose, intermediate_subgroups, span
from .hsp import OracleSpec, OracleValidationError, make_dlog_oracle, make_periodic_oracle
from .qstate import BasisPermutation, StateError


class ConfigError(ValueError):
    """Malformed input file or unknown instance name."""


def _with_k(f: OracleSpec, gens) -> OracleSpec:
    return OracleSpec(
        f.domain, f.codomain_bits, f.table, f.hidden, period=f.period,
        promise_k=span(f.domain, gens), black_box=f.black_box, name=f.name,
    )


def coset_index_oracle(G: AbelianGroup, H: Subgroup, m: Optional[int] = None, name: str = "") -> OracleSpec:
    """``f(g)`` = rank of the canonical representative of ``g + H``."""
    reps = {r: i for i, r in enumerate(coset_representatives(H))}
    if m is None:
        m = max(1, (len(reps) - 1).bit_length())
    table = [reps[coset_decompose(g, H)[0]] for g in G.elements()]
    return OracleSpec(G, m, tuple(table), H, name=name)


def _pfa8() -> OracleSpec:
    return _with_k(make_periodic_oracle(8, 8, [2, 3, 4, 5], 4, name="pfa8"), [2])


def _pfa16() -> OracleSpec:
    return _with_k(make_periodic_oracle(16, 16, [6, 7, 2, 3], 4, name="pfa16"), [2])


def _dlog8() -> OracleSpec:
    return _with_k(make_dlog_oracle(8, 3, name="dlog8-a3"), [(3, 1), (2, 0)])


def _z2z4() -> OracleSpec:
    G = AbelianGroup((2, 4))
    f = coset_index_oracle(G, span(G, [(1, 2)]), name="z2z4")
    return _with_k(f, [(1, 0), (0, 2)])


BUILTINS: dict[str, Callable[[], OracleSpec]] = {
    "pfa8": _pfa8,
    "pfa16": _pfa16,
    "dlog8-a3": _dlog8,
    "z2z4": _z2z4,
}


def builtin(name: str) -> OracleSpec:
    if name not in BUILTINS:
        raise ConfigError(f"unknown instance {name!r}; built-ins are {sorted(BUILTINS)}")
    return BUILTINS[name]()


def suite() -> list[tuple[str, OracleSpec, Subgroup]]:
    """Every built-in paired with every subgroup between its H and G."""
    out = []
    for name in BUILTINS:
        f = builtin(name)
        for K in intermediate_subgroups(f.hidden):
            out.append((name, f, K))
    return out


def parse_element(G: AbelianGroup, value: Any):
    """Accept ``4``, ``"4"``, ``"3,1"``, ``[3, 1]``."""
    try:
        if isinstance(value, str):
            parts = [int(p) for p in value.replace("(", "").replace(")", "").split(",") if p.strip()]
            value = parts[0] if len(parts) == 1 and G.rank == 1 else parts
        if isinstance(value, list) and G.rank == 1 and len(value) == 1:
            value = value[0]
        if isinstance(value, int):
            return G.element((value,) if G.rank == 1 else value)
        return G.element(tuple(value))
    except (GroupError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {value!r} as an element of {G}: {exc}") from exc


def oracle_to_dict(f: OracleSpec) -> dict:
    ann: dict[str, Any] = {"black_box": f.black_box}
    if f.period is not None:
        ann["period"] = f.period
    if f.promise_k is not None:
        ann["k_generators"] = [list(g.coords) for g in f.promise_k.generators]
    if f.name:
        ann["name"] = f.name
    return {
        "group": str(f.domain),
        "codomain_bits": f.codomain_bits,
        "table": list(f.table),
        "hidden_generators": [list(g.coords) for g in f.hidden.generators],
        "annotations": ann,
    }


def oracle_from_dict(data: dict) -> OracleSpec:
    try:
        G = AbelianGroup.parse(data["group"])
        m = int(data["codomain_bits"])
        table = [int(v) for v in data["table"]]
        H = span(G, [parse_element(G, g) for g in data.get("hidden_generators", [])])
        ann = data.get("annotations") or {}
        K = ann.get("k_generators")
        K = span(G, [parse_element(G, g) for g in K]) if K is not None else None
    except (KeyError, TypeError, ValueError, GroupError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed oracle description: {exc}") from exc
    return OracleSpec(
        G, m, tuple(table), H, period=ann.get("period"), promise_k=K,
        black_box=bool(ann.get("black_box", True)), name=str(ann.get("name", "")),
    )


def _read_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def load_oracle(path: str | Path) -> OracleSpec:
    return oracle_from_dict(_read_json(path))


def save_oracle(f: OracleSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(oracle_to_dict(f), indent=2, sort_keys=True) + "\n")


def witness_to_dict(w: FactorizationWitness) -> dict:
    out = {"U_G": list(w.U_G.perm), "U_S": list(w.U_S.perm), "ell": w.ell}
    if w.K is not None:
        out["k_generators"] = [list(g.coords) for g in w.K.generators]
    return out


def witness_from_dict(data: dict, G: Optional[AbelianGroup] = None) -> FactorizationWitness:
    try:
        K = None
        if G is not None and data.get("k_generators") is not None:
            K = span(G, [parse_element(G, g) for g in data["k_generators"]])
        return FactorizationWitness(BasisPermutation(data["U_G"]), BasisPermutation(data["U_S"]), int(data["ell"]), K)
    except (KeyError, TypeError, ValueError, StateError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed witness description: {exc}") from exc


def load_witness(path: str | Path, G: Optional[AbelianGroup] = None) -> FactorizationWitness:
    return witness_from_dict(_read_json(path), G)


def save_witness(w: FactorizationWitness, path: str | Path) -> None:
    Path(path).write_text(json.dumps(witness_to_dict(w), indent=2, sort_keys=True) + "\n")


def subgroup_from_generators(G: AbelianGroup, gens: Iterable[Any]) -> Subgroup:
    return span(G, [parse_element(G, g) for g in gens])


__all__ = [
    "BUILTINS", "ConfigError", "OracleValidationError", "builtin", "suite", "load_oracle", "save_oracle",
    "load_witness", "save_witness", "coset_index_oracle", "parse_element", "subgroup_from_generators",
]
