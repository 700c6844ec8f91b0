"""Scenario, search-config, report and catalog serialization.

File convention shared by every surface: complex numbers are two-element
arrays [re, im]; matrices are row-major nested arrays of those pairs. Scenario
documents carry resolved matrices so any emitted witness re-runs standalone.
"""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from .hilbert import (
    ProjectorFamily,
    Schedule,
    State,
    Unitary,
    ValidationError,
    family_from_basis,
    make_state_mixed,
    make_state_pure,
    validate_projector_family,
)
from .histories import (
    ClassOperator,
    HistoryLabel,
    MemberPhasePerturbation,
    PhasePerturbation,
    chain_class_operator,
    fine_grained_set,
    history_set,
)
from .conditions import DEFAULT_TOLERANCE
from .diosi import Scenario
from .explorer import RegionCatalog, SampleConfig

__all__ = [
    "FORMAT_VERSION",
    "REGION_SLUGS",
    "complex_to_pair",
    "matrix_to_json",
    "json_to_matrix",
    "jsonable",
    "scenario_to_json",
    "parse_scenario",
    "load_scenario_file",
    "parse_search_config",
    "catalog_to_json",
    "validate_document",
    "write_json_atomic",
    "CHECK_NAMES",
]

FORMAT_VERSION = 1

CHECK_NAMES = ("classify", "diosi_forward", "diosi_reverse", "robustness", "records")

REGION_SLUGS = {
    "D": "D",
    "PD∩C∖D": "PD_and_C_not_D",
    "PD∖C": "PD_not_C",
    "C∖PD": "C_not_PD",
    "LP∖(PD∪C)": "LP_only",
    "none": "none",
}


def complex_to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(matrix) -> list:
    m = np.asarray(matrix, dtype=complex)
    return [[complex_to_pair(entry) for entry in row] for row in m]


def json_to_matrix(rows) -> np.ndarray:
    return np.array([[pair_to_complex(entry) for entry in row] for row in rows], dtype=complex)


def vector_to_json(vector) -> list:
    return [complex_to_pair(entry) for entry in np.asarray(vector, dtype=complex)]


def json_to_vector(entries) -> np.ndarray:
    return np.array([pair_to_complex(entry) for entry in entries], dtype=complex)


def jsonable(value):
    """Recursively convert numpy scalars/arrays and complex values to JSON types."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex_to_pair(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


# --- schema handling -------------------------------------------------------

def _load_schema(name: str) -> dict:
    text = resources.files("dechist.schemas").joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)


def validate_document(document: dict, schema_name: str):
    """Validate a parsed document against a published schema; raise on mismatch."""
    schema = _load_schema(schema_name)
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ValidationError([(f"schema violation at {path}: {err.message}", 0.0)]) from None


# --- scenario documents ----------------------------------------------------

def state_to_json(state: State) -> dict:
    if state.is_pure:
        return {"pure": vector_to_json(state.vector)}
    return {"density": matrix_to_json(state.rho)}


def _parse_state(obj, atol) -> State:
    if "pure" in obj:
        return make_state_pure(json_to_vector(obj["pure"]), atol=atol)
    return make_state_mixed(json_to_matrix(obj["density"]), atol=atol)


def _parse_family(obj, atol) -> ProjectorFamily:
    labels = obj.get("labels")
    if "matrices" in obj:
        return validate_projector_family(
            [json_to_matrix(m) for m in obj["matrices"]], labels=labels, atol=atol,
        )
    basis = json_to_matrix(obj["basis"])
    return family_from_basis(basis, obj["blocks"], labels=labels, atol=atol)


def _parse_schedule(obj, families, atol) -> Schedule:
    times = tuple(float(t) for t in obj["times"])
    if "hamiltonian" in obj:
        return Schedule.from_hamiltonian(json_to_matrix(obj["hamiltonian"]), times, families)
    unitaries = tuple(Unitary(json_to_matrix(u)) for u in obj["unitaries"])
    return Schedule(times=times, evolutions=unitaries, families=tuple(families))


def _parse_histories(obj, schedule, state):
    if obj == "fine_grained":
        return fine_grained_set(schedule, state)
    members = []
    for entry in obj["members"]:
        chains = [tuple(int(a) for a in chain) for chain in entry["chains"]]
        matrix = sum(chain_class_operator(schedule, c).matrix for c in chains)
        label = HistoryLabel(chains=tuple(chains), name=entry.get("name", "+".join(map(str, chains))))
        members.append(ClassOperator(matrix=matrix, label=label))
    return history_set(members, schedule, state)


def _parse_perturbation(obj):
    unitary = Unitary(json_to_matrix(obj["unitary"])) if "unitary" in obj else None
    if "member_phases" in obj:
        return MemberPhasePerturbation(
            phases=tuple(float(x) for x in obj["member_phases"]), unitary=unitary,
        )
    return PhasePerturbation(
        slot=int(obj["slot"]),
        phases=tuple(float(x) for x in obj["phases"]),
        unitary=unitary,
    )


def parse_scenario(document: dict, atol: float = 1e-10):
    """Build a Scenario (plus run options) from a parsed scenario document.

    Returns (scenario, checks, perturbation, tolerance, seed).
    """
    validate_document(document, "scenario.schema.json")
    dim = int(document["dimension"])
    state = _parse_state(document["state"], atol)
    families = [_parse_family(f, atol) for f in document["families"]]
    schedule = _parse_schedule(document["schedule"], families, atol)
    if schedule.dim != dim or state.dim != dim:
        raise ValidationError([("declared dimension does not match matrices", 0.0)])
    histories = _parse_histories(document["histories"], schedule, state)
    scenario = Scenario(
        name=document.get("name", "scenario"),
        schedule=schedule,
        histories=histories,
        state=state,
    )
    checks = tuple(document.get("checks", ["classify"]))
    for check in checks:
        if check not in CHECK_NAMES:
            raise ValidationError([(f"unknown check {check!r}", 0.0)])
    perturbation = _parse_perturbation(document["perturbation"]) if "perturbation" in document else None
    tolerance = float(document.get("tolerance", DEFAULT_TOLERANCE))
    seed = document.get("seed")
    return scenario, checks, perturbation, tolerance, seed


def load_scenario_file(path, atol: float = 1e-10):
    with open(path, "r", encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as err:
            raise ValidationError([
                (f"parse error at line {err.lineno} column {err.colno}: {err.msg}", 0.0),
            ]) from None
    return parse_scenario(document, atol)


def scenario_to_json(scenario: Scenario, checks=("classify",), tolerance=None,
                     perturbation=None) -> dict:
    """Serialize a scenario with fully resolved matrices."""
    schedule = scenario.schedule
    document = {
        "format_version": FORMAT_VERSION,
        "name": scenario.name,
        "dimension": schedule.dim,
        "state": state_to_json(scenario.state),
        "schedule": {
            "times": [float(t) for t in schedule.times],
            "unitaries": [matrix_to_json(u.matrix) for u in schedule.evolutions],
        },
        "families": [
            {"matrices": [matrix_to_json(p) for p in fam.members], "labels": list(fam.labels)}
            for fam in schedule.families
        ],
        "histories": {
            "members": [
                {"name": m.label.name, "chains": [list(c) for c in m.label.chains]}
                for m in scenario.histories.members
            ]
        },
        "checks": list(checks),
    }
    if tolerance is not None:
        document["tolerance"] = float(tolerance)
    if perturbation is not None:
        if isinstance(perturbation, MemberPhasePerturbation):
            pert = {"member_phases": [float(x) for x in perturbation.phases]}
        else:
            pert = {"slot": perturbation.slot, "phases": [float(x) for x in perturbation.phases]}
        if perturbation.unitary is not None:
            pert["unitary"] = matrix_to_json(perturbation.unitary.matrix)
        document["perturbation"] = pert
    return document


# --- search configs --------------------------------------------------------

def parse_search_config(document: dict):
    """Parse a search config into (mode, [SampleConfig, ...], seed)."""
    validate_document(document, "search.schema.json")
    mode = document.get("mode", "venn")
    seed = int(document["seed"])
    phases = []
    for index, phase in enumerate(document["phases"]):
        phases.append(SampleConfig(
            dim=int(phase["dim"]),
            slots=int(phase["slots"]),
            trials=int(phase["trials"]),
            seed=int(phase.get("seed", seed + index)),
            family_sizes=_parse_family_sizes(phase.get("family_sizes")),
            state_kind=phase.get("state_kind", "pure_random"),
            coarse_graining=phase.get("coarse_graining", "none"),
            tolerance=float(phase.get("tolerance", document.get("tolerance", DEFAULT_TOLERANCE))),
            name=phase.get("name", f"phase{index}"),
        ))
    return mode, phases, seed


def _parse_family_sizes(value):
    if value is None:
        return None
    if value and isinstance(value[0], int):
        return tuple(int(s) for s in value)
    return tuple(tuple(int(s) for s in per_slot) for per_slot in value)


def catalog_to_json(catalog: RegionCatalog, witness_files=None) -> dict:
    """Catalog summary; witness scenarios referenced by file when written out."""
    witness_files = witness_files or {}
    regions = {}
    for region, tally in catalog.regions.items():
        regions[region] = {
            "count": tally.count,
            "first_trial": tally.first_trial,
            "min_margin": tally.min_margin,
            "witness_file": witness_files.get(region),
        }
    return {
        "format_version": FORMAT_VERSION,
        "trials": catalog.trials,
        "regions": regions,
    }


def write_json_atomic(path, document: dict):
    """Write-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(document, handle, indent=2, ensure_ascii=False)
            handle.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
