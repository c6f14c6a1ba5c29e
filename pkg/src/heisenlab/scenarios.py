"""Scenario files: strict JSON schema, defaults, and the builtin library.

A scenario fully determines one comparison run: the basis, the scenario
Hamiltonian, the initial state, the sampling grid and the output names.
Parsing is strict -- any unrecognized key anywhere in the document fails
the run, so misspelled parameters cannot silently fall back to defaults.

Schema (defaults in parentheses)::

    {
      "kind": "potential" | "gravity_taylor" | "em" | "rotating"
              | "generic_hamiltonian",
      "name": str (= kind),
      "basis": {
        "n_levels": int (64),
        "n_dofs": int (implied by kind; required for generic_hamiltonian),
        "hbar": float (1.0),
        "mass": float or [float, ...] (1.0),
        "length_scale": float or [float, ...] (1.0),
        "memory_budget_mib": float (64.0)
      },
      "potential": {"coefficients": [c0, c1, ...], "expansion_point": float (0.0)},
      "gravity": {"grav_constant", "mass_large", "mass_small", "r0", "order"},
      "fields": {"charge", "magnetic_field": [bx, by, bz],
                  "electric_field": [ex, ey, ez] ([0,0,0])},
      "rotating": {"omega": float},
      "hamiltonian_text": str,            # generic_hamiltonian only
      "initial_state": {"coherent": [alpha, ...]} or {"fock": [k, ...]},
                       # alpha: number or [re, im]; one entry per dof
                       # (default: coherent, alpha=1 on dof 0)
      "time_grid": {"t_final": float (10.0), "n_samples": int (201)},
      "classical_dt": float (0.001),
      "run_checks": bool (false),
      "output": {"stem": str (= name)}
    }

Exactly the section matching ``kind`` may appear among the per-kind
sections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .basis import BasisSpec, make_basis
from .hamiltonians import (
    FieldConfig,
    PolyHamiltonian,
    build_em_hamiltonian,
    build_gravity_taylor,
    build_potential_hamiltonian,
    build_rotating_frame,
    hamiltonian_from_text,
)
from .states import QuantumState, fock_state, product_coherent_state

KINDS = ("potential", "gravity_taylor", "em", "rotating", "generic_hamiltonian")

_KIND_SECTIONS = {
    "potential": "potential",
    "gravity_taylor": "gravity",
    "em": "fields",
    "rotating": "rotating",
    "generic_hamiltonian": "hamiltonian_text",
}

_IMPLIED_DOFS = {"potential": 1, "gravity_taylor": 1, "em": 2, "rotating": 2}

BUILTIN_SCENARIOS = (
    "harmonic",
    "cubic",
    "quartic",
    "gravity_taylor",
    "uniform_b",
    "crossed_eb",
    "rotating_frame",
)


class ScenarioError(ValueError):
    """Scenario file rejected; the message names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _require_mapping(value, field: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(field, f"expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(mapping: dict, allowed: set[str], field: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioError(field, f"unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _get_number(mapping: dict, key: str, field: str, default=None, positive=False):
    if key not in mapping:
        if default is None:
            raise ScenarioError(f"{field}.{key}", "required")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{field}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if positive and not value > 0.0:
        raise ScenarioError(f"{field}.{key}", f"must be positive, got {value}")
    return value


def _get_int(mapping: dict, key: str, field: str, default=None, minimum=None):
    if key not in mapping:
        if default is None:
            raise ScenarioError(f"{field}.{key}", "required")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{field}.{key}", f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{field}.{key}", f"must be >= {minimum}, got {value}")
    return value


def _per_dof_numbers(value, n_dofs: int, field: str, positive=False) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        values = [float(value)] * n_dofs
    elif isinstance(value, list):
        if len(value) != n_dofs:
            raise ScenarioError(field, f"expected {n_dofs} entries, got {len(value)}")
        values = []
        for k, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ScenarioError(f"{field}[{k}]", f"expected a number, got {v!r}")
            values.append(float(v))
    else:
        raise ScenarioError(field, f"expected a number or list, got {value!r}")
    if positive and any(not v > 0.0 for v in values):
        raise ScenarioError(field, f"entries must be positive, got {values}")
    return values


def _parse_complex(value, field: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2:
        re, im = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(float(re), float(im))
    raise ScenarioError(field, f"expected a number or [re, im] pair, got {value!r}")


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with every default resolved.

    ``resolved`` is the canonical JSON document (defaults filled in) that
    the runner echoes into reports and hashes for reproducibility.
    """

    kind: str
    name: str
    resolved: dict

    def to_json_dict(self) -> dict:
        return json.loads(json.dumps(self.resolved))

    # -- construction helpers ------------------------------------------
    def basis(self) -> BasisSpec:
        b = self.resolved["basis"]
        return make_basis(
            b["n_levels"],
            b["n_dofs"],
            b["hbar"],
            b["mass"],
            b["length_scale"],
            memory_budget_mib=b["memory_budget_mib"],
        )

    def hamiltonian(self, basis: BasisSpec) -> PolyHamiltonian:
        kind = self.kind
        if kind == "potential":
            section = self.resolved["potential"]
            return build_potential_hamiltonian(
                basis, section["coefficients"], section["expansion_point"]
            )
        if kind == "gravity_taylor":
            g = self.resolved["gravity"]
            return build_gravity_taylor(
                basis, g["grav_constant"], g["mass_large"], g["mass_small"], g["r0"], g["order"]
            )
        if kind == "em":
            f = self.resolved["fields"]
            fields = FieldConfig(
                charge=f["charge"],
                magnetic_field=tuple(f["magnetic_field"]),
                electric_field=tuple(f["electric_field"]),
            )
            return build_em_hamiltonian(basis, fields)
        if kind == "rotating":
            return build_rotating_frame(basis, self.resolved["rotating"]["omega"])
        return hamiltonian_from_text(
            self.resolved["hamiltonian_text"], basis, {"scenario": "generic"}
        )

    def initial_state(self, basis: BasisSpec) -> QuantumState:
        section = self.resolved["initial_state"]
        if "coherent" in section:
            alphas = [complex(re, im) for re, im in section["coherent"]]
            return product_coherent_state(basis, alphas)
        return fock_state(basis, section["fock"])

    def time_grid(self):
        import numpy as np

        tg = self.resolved["time_grid"]
        return np.linspace(0.0, tg["t_final"], tg["n_samples"])


def parse_scenario_dict(raw: dict, source: str = "scenario") -> Scenario:
    """Validate a raw scenario mapping and fill defaults."""
    raw = _require_mapping(raw, source)
    top_allowed = {
        "kind",
        "name",
        "basis",
        "initial_state",
        "time_grid",
        "classical_dt",
        "run_checks",
        "output",
        *_KIND_SECTIONS.values(),
    }
    _reject_unknown(raw, top_allowed, source)

    kind = raw.get("kind")
    if kind not in KINDS:
        raise ScenarioError("kind", f"must be one of {list(KINDS)}, got {kind!r}")
    for other_kind, section in _KIND_SECTIONS.items():
        if other_kind != kind and section in raw:
            raise ScenarioError(section, f"section not allowed for kind {kind!r}")

    name = raw.get("name", kind)
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", f"expected a nonempty string, got {name!r}")

    basis_raw = _require_mapping(raw.get("basis", {}), "basis")
    _reject_unknown(
        basis_raw,
        {"n_levels", "n_dofs", "hbar", "mass", "length_scale", "memory_budget_mib"},
        "basis",
    )
    implied = _IMPLIED_DOFS.get(kind)
    n_dofs = _get_int(basis_raw, "n_dofs", "basis", default=implied, minimum=1)
    if implied is not None and n_dofs != implied:
        raise ScenarioError("basis.n_dofs", f"kind {kind!r} implies {implied} dof(s), got {n_dofs}")
    basis = {
        "n_levels": _get_int(basis_raw, "n_levels", "basis", default=64, minimum=2),
        "n_dofs": n_dofs,
        "hbar": _get_number(basis_raw, "hbar", "basis", default=1.0, positive=True),
        "mass": _per_dof_numbers(basis_raw.get("mass", 1.0), n_dofs, "basis.mass", positive=True),
        "length_scale": _per_dof_numbers(
            basis_raw.get("length_scale", 1.0), n_dofs, "basis.length_scale", positive=True
        ),
        "memory_budget_mib": _get_number(
            basis_raw, "memory_budget_mib", "basis", default=64.0, positive=True
        ),
    }

    resolved: dict = {"kind": kind, "name": name, "basis": basis}

    if kind == "potential":
        section = _require_mapping(raw.get("potential"), "potential")
        _reject_unknown(section, {"coefficients", "expansion_point"}, "potential")
        coeffs = section.get("coefficients")
        if not isinstance(coeffs, list):
            raise ScenarioError("potential.coefficients", "required list of numbers")
        for k, c in enumerate(coeffs):
            if isinstance(c, bool) or not isinstance(c, (int, float)):
                raise ScenarioError(f"potential.coefficients[{k}]", f"expected a number, got {c!r}")
        resolved["potential"] = {
            "coefficients": [float(c) for c in coeffs],
            "expansion_point": _get_number(section, "expansion_point", "potential", default=0.0),
        }
    elif kind == "gravity_taylor":
        section = _require_mapping(raw.get("gravity"), "gravity")
        _reject_unknown(
            section, {"grav_constant", "mass_large", "mass_small", "r0", "order"}, "gravity"
        )
        resolved["gravity"] = {
            "grav_constant": _get_number(section, "grav_constant", "gravity", positive=True),
            "mass_large": _get_number(section, "mass_large", "gravity", positive=True),
            "mass_small": _get_number(section, "mass_small", "gravity", positive=True),
            "r0": _get_number(section, "r0", "gravity", positive=True),
            "order": _get_int(section, "order", "gravity", minimum=1),
        }
        if abs(resolved["gravity"]["mass_small"] - basis["mass"][0]) > 1e-12:
            raise ScenarioError("gravity.mass_small", "must equal basis.mass")
    elif kind == "em":
        section = _require_mapping(raw.get("fields"), "fields")
        _reject_unknown(section, {"charge", "magnetic_field", "electric_field"}, "fields")
        b_vec = section.get("magnetic_field")
        if not (isinstance(b_vec, list) and len(b_vec) == 3):
            raise ScenarioError("fields.magnetic_field", "required 3-vector")
        e_vec = section.get("electric_field", [0.0, 0.0, 0.0])
        if not (isinstance(e_vec, list) and len(e_vec) == 3):
            raise ScenarioError("fields.electric_field", "expected a 3-vector")
        resolved["fields"] = {
            "charge": _get_number(section, "charge", "fields"),
            "magnetic_field": [float(v) for v in b_vec],
            "electric_field": [float(v) for v in e_vec],
        }
    elif kind == "rotating":
        section = _require_mapping(raw.get("rotating"), "rotating")
        _reject_unknown(section, {"omega"}, "rotating")
        resolved["rotating"] = {"omega": _get_number(section, "omega", "rotating")}
    else:
        text = raw.get("hamiltonian_text")
        if not isinstance(text, str):
            raise ScenarioError("hamiltonian_text", "required string (canonical polynomial form)")
        resolved["hamiltonian_text"] = text

    state_raw = _require_mapping(
        raw.get("initial_state", {"coherent": [1.0] + [0.0] * (n_dofs - 1)}), "initial_state"
    )
    _reject_unknown(state_raw, {"coherent", "fock"}, "initial_state")
    if ("coherent" in state_raw) == ("fock" in state_raw):
        raise ScenarioError("initial_state", "exactly one of 'coherent' or 'fock' is required")
    if "coherent" in state_raw:
        alphas = state_raw["coherent"]
        if not isinstance(alphas, list) or len(alphas) != n_dofs:
            raise ScenarioError("initial_state.coherent", f"expected {n_dofs} alpha value(s)")
        parsed = [_parse_complex(a, f"initial_state.coherent[{k}]") for k, a in enumerate(alphas)]
        resolved["initial_state"] = {"coherent": [[z.real, z.imag] for z in parsed]}
    else:
        levels = state_raw["fock"]
        if not isinstance(levels, list) or len(levels) != n_dofs:
            raise ScenarioError("initial_state.fock", f"expected {n_dofs} level(s)")
        for k, lvl in enumerate(levels):
            if isinstance(lvl, bool) or not isinstance(lvl, int) or lvl < 0:
                raise ScenarioError(f"initial_state.fock[{k}]", f"expected an integer >= 0, got {lvl!r}")
        resolved["initial_state"] = {"fock": list(levels)}

    tg_raw = _require_mapping(raw.get("time_grid", {}), "time_grid")
    _reject_unknown(tg_raw, {"t_final", "n_samples"}, "time_grid")
    resolved["time_grid"] = {
        "t_final": _get_number(tg_raw, "t_final", "time_grid", default=10.0, positive=True),
        "n_samples": _get_int(tg_raw, "n_samples", "time_grid", default=201, minimum=2),
    }

    resolved["classical_dt"] = _get_number(raw, "classical_dt", source, default=1e-3, positive=True)
    run_checks = raw.get("run_checks", False)
    if not isinstance(run_checks, bool):
        raise ScenarioError("run_checks", f"expected a boolean, got {run_checks!r}")
    resolved["run_checks"] = run_checks

    output_raw = _require_mapping(raw.get("output", {}), "output")
    _reject_unknown(output_raw, {"stem"}, "output")
    stem = output_raw.get("stem", name)
    if not isinstance(stem, str) or not stem:
        raise ScenarioError("output.stem", f"expected a nonempty string, got {stem!r}")
    resolved["output"] = {"stem": stem}

    return Scenario(kind=kind, name=name, resolved=resolved)


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    with open(path, "r") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(str(path), f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario_dict(raw, source=str(path))


def load_builtin_scenario(name: str) -> Scenario:
    """One of the scenarios shipped with the package (see BUILTIN_SCENARIOS)."""
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError("builtin", f"unknown builtin scenario {name!r}; have {list(BUILTIN_SCENARIOS)}")
    text = resources.files("heisenlab").joinpath(f"scenarios/{name}.json").read_text()
    return parse_scenario_dict(json.loads(text), source=f"builtin:{name}")
