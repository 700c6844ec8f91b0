"""Command-line front end: check, search, compose, pair.

`check` runs the checks declared inside a scenario file, `search` drives the
seeded region/superprobability searches from a config file, `compose` runs the
forward and reverse composition tests on two scenario files, and `pair` builds
and analyzes a seeded two-time matched pair.

Exit codes: 0 success (a failed condition is a result, not an error),
1 parse/validation error, 2 violated internal identity.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

from .hilbert import ValidationError
from .conditions import CONDITION_NAMES, classify, decoherence_functional
from .diosi import (
    InternalFaultError,
    compose,
    forward_diosi_check,
    reverse_diosi_check,
    robustness_check,
)
from .records import construct_records
from .explorer import superprob_search, venn_search, random_matched_pair
from . import scenario_io as io

__all__ = ["main", "run_scenario", "run_search", "Report"]


@dataclass
class Report:
    """Everything one `check` run produced, in declaration order."""

    scenario_document: dict
    tolerance: float
    checks: dict = field(default_factory=dict)
    residual_summary: dict = field(default_factory=dict)
    timing_seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "format_version": io.FORMAT_VERSION,
            "scenario": self.scenario_document,
            "tolerance": self.tolerance,
            "timing_seconds": self.timing_seconds,
            "checks": io.jsonable(self.checks),
            "residual_summary": io.jsonable(self.residual_summary),
        }


def _verdict_json(verdict) -> dict:
    return {
        "test": verdict.test,
        "condition": verdict.condition,
        "passed": verdict.passed,
        "residual": verdict.residual,
        "witness": io.jsonable(verdict.witness),
        "details": io.jsonable(verdict.details),
    }


def _functional_json(functional) -> dict:
    return {
        "matrix": io.matrix_to_json(functional.matrix),
        "probabilities": [float(p) for p in functional.probabilities],
        "quasi": [io.complex_to_pair(q) for q in functional.quasi],
        "residuals": dict(functional.residuals),
    }


def _classification_json(report) -> dict:
    return {
        "flags": dict(report.flags),
        "residuals": dict(report.residuals),
        "counts": dict(report.counts),
        "venn_region": report.venn_region,
        "tolerance": report.tolerance,
    }


def _self_composition_verdicts(scenario, tolerance, check) -> list:
    """Forward/reverse tests of a scenario against an independent copy of itself."""
    runner = forward_diosi_check if check == "diosi_forward" else reverse_diosi_check
    entries = []
    for condition in CONDITION_NAMES:
        try:
            verdict = runner(condition, scenario, scenario, tolerance)
            entries.append(_verdict_json(verdict))
        except ValidationError as err:
            entries.append({
                "test": check,
                "condition": condition,
                "passed": False,
                "skipped": True,
                "residual": err.violations[0][1] if err.violations else 0.0,
                "details": {"reason": str(err)},
            })
    return entries


def run_scenario(path, tolerance_override=None) -> Report:
    """Execute the checks a scenario file declares and assemble the report."""
    scenario, checks, perturbation, tolerance, _seed = io.load_scenario_file(path)
    if tolerance_override is not None:
        tolerance = tolerance_override
    started = time.perf_counter()
    report = Report(
        scenario_document=io.scenario_to_json(
            scenario, checks=checks, tolerance=tolerance, perturbation=perturbation,
        ),
        tolerance=tolerance,
    )

    seen = []
    for check in checks:
        if check in seen:
            continue
        seen.append(check)
        if check == "classify":
            functional = scenario.functional()
            classification = classify(functional, tolerance)
            report.checks["classify"] = {
                "functional": _functional_json(functional),
                "classification": _classification_json(classification),
            }
            report.residual_summary.update(functional.residuals)
            report.residual_summary.update(
                {f"condition_{k}": v for k, v in classification.residuals.items()}
            )
        elif check in ("diosi_forward", "diosi_reverse"):
            report.checks[check] = _self_composition_verdicts(scenario, tolerance, check)
        elif check == "robustness":
            if perturbation is None:
                raise ValidationError([("robustness check needs a perturbation entry", 0.0)])
            verdicts = robustness_check(scenario, perturbation, tolerance)
            law = verdicts[0].details["law_residual"] if verdicts else 0.0
            report.checks["robustness"] = {
                "verdicts": [_verdict_json(v) for v in verdicts],
                "law_residual": law,
            }
            report.residual_summary["transformation_law"] = law
        elif check == "records":
            records = construct_records(scenario.histories, scenario.state, tolerance)
            report.checks["records"] = {
                "projectors": [io.matrix_to_json(r) for r in records.projectors],
                "remainder": io.matrix_to_json(records.remainder),
                "mapping": list(records.mapping),
                "record_equation_residual": records.record_equation_residual,
                "probability_residual": records.probability_residual,
            }
            report.residual_summary["record_equation"] = records.record_equation_residual

    report.timing_seconds = time.perf_counter() - started
    return report


def run_search(path, seed_override=None, out_dir=None):
    """Run the search a config file describes; optionally emit witness files."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as err:
            raise ValidationError([
                (f"parse error at line {err.lineno} column {err.colno}: {err.msg}", 0.0),
            ]) from None
    if seed_override is not None:
        document = dict(document)
        document["seed"] = seed_override
        document["phases"] = [
            {k: v for k, v in phase.items() if k != "seed"} for phase in document["phases"]
        ]
    mode, phases, _seed = io.parse_search_config(document)

    if mode == "superprob":
        result = superprob_search(phases[0])
        payload = {
            "format_version": io.FORMAT_VERSION,
            "mode": "superprob",
            "found": result.found,
            "trials_run": result.trials_run,
            "nonunit_sum_trials": result.nonunit_sum_trials,
            "member_index": result.member_index,
            "probability": result.probability,
            "witness_file": None,
        }
        if result.found and out_dir:
            name = "superprob_witness.scenario.json"
            io.write_json_atomic(os.path.join(out_dir, name),
                                 io.scenario_to_json(result.scenario))
            payload["witness_file"] = name
        return payload

    catalog = venn_search(phases)
    witness_files = {}
    if out_dir:
        for region, tally in catalog.regions.items():
            if tally.witness is None:
                continue
            name = f"witness_{io.REGION_SLUGS[region]}.scenario.json"
            io.write_json_atomic(os.path.join(out_dir, name),
                                 io.scenario_to_json(tally.witness))
            witness_files[region] = name
    payload = io.catalog_to_json(catalog, witness_files)
    payload["mode"] = "venn"
    return payload


def _print_report_text(report: Report):
    doc = report.scenario_document
    print(f"scenario: {doc.get('name')}  (dimension {doc.get('dimension')}, "
          f"{len(doc['histories']['members'])} histories)")
    print(f"tolerance: {report.tolerance:g}")
    if "classify" in report.checks:
        cls = report.checks["classify"]["classification"]
        flags = "  ".join(f"{k}={'yes' if v else 'no'}" for k, v in cls["flags"].items())
        print(f"conditions: {flags}")
        print(f"venn region: {cls['venn_region']}")
        print("condition residuals: "
              + "  ".join(f"{k}={v:.3e}" for k, v in cls["residuals"].items()))
    for check in ("diosi_forward", "diosi_reverse"):
        if check in report.checks:
            print(f"{check}:")
            for entry in report.checks[check]:
                status = ("skipped" if entry.get("skipped")
                          else "pass" if entry["passed"] else "FAIL")
                print(f"  {entry['condition']:<20} {status}  residual={entry['residual']:.3e}")
    if "robustness" in report.checks:
        section = report.checks["robustness"]
        print(f"robustness (law residual {section['law_residual']:.3e}):")
        for entry in section["verdicts"]:
            status = "preserved" if entry["passed"] else "DESTROYED"
            print(f"  {entry['condition']:<20} {status}  residual={entry['residual']:.3e}")
    if "records" in report.checks:
        section = report.checks["records"]
        kept = sum(1 for m in section["mapping"] if m is not None)
        print(f"records: {kept} projectors, record-equation residual "
              f"{section['record_equation_residual']:.3e}, probability residual "
              f"{section['probability_residual']:.3e}")
    print(f"elapsed: {report.timing_seconds:.3f}s")


def _print_catalog_text(payload):
    if payload.get("mode") == "superprob":
        if payload["found"]:
            print(f"superprobability witness found after {payload['trials_run']} trials: "
                  f"history {payload['member_index']} with p = {payload['probability']:.6f}")
        else:
            print(f"no superprobability witness in {payload['trials_run']} trials")
        print(f"trials with probability sum != 1: {payload['nonunit_sum_trials']}")
        return
    print(f"venn search: {payload['trials']} trials")
    for region, entry in payload["regions"].items():
        line = f"  {region:<12} count={entry['count']}"
        if entry["count"]:
            line += f"  first_trial={entry['first_trial']}  min_margin={entry['min_margin']:.3e}"
        if entry.get("witness_file"):
            line += f"  witness={entry['witness_file']}"
        print(line)


def _cmd_check(args) -> int:
    report = run_scenario(args.scenario, tolerance_override=args.tolerance)
    if args.format == "structured":
        print(json.dumps(report.to_json(), indent=2, ensure_ascii=False))
    else:
        _print_report_text(report)
    if args.out:
        io.write_json_atomic(os.path.join(args.out, "report.json"), report.to_json())
    return 0


def _cmd_search(args) -> int:
    payload = run_search(args.config, seed_override=args.seed, out_dir=args.out)
    if args.format == "structured":
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        _print_catalog_text(payload)
    if args.out:
        io.write_json_atomic(os.path.join(args.out, "catalog.json"), payload)
    return 0


def _cmd_compose(args) -> int:
    scenario_a, _, _, tol_a, _ = io.load_scenario_file(args.scenario_a)
    scenario_b, _, _, tol_b, _ = io.load_scenario_file(args.scenario_b)
    tolerance = args.tolerance if args.tolerance is not None else max(tol_a, tol_b)
    composite = compose(scenario_a, scenario_b)
    entries = []
    for runner, test in ((forward_diosi_check, "forward_diosi"),
                         (reverse_diosi_check, "reverse_diosi")):
        for condition in CONDITION_NAMES:
            try:
                verdict = runner(condition, scenario_a, scenario_b, tolerance)
                entries.append(_verdict_json(verdict))
            except ValidationError as err:
                entries.append({
                    "test": test, "condition": condition, "passed": False,
                    "skipped": True, "residual": 0.0,
                    "details": {"reason": str(err)},
                })
    payload = {
        "format_version": io.FORMAT_VERSION,
        "composite_name": composite.name,
        "composite_dimension": composite.dim,
        "factorization_residual": composite.metadata["factorization_residual"],
        "verdicts": entries,
    }
    if args.format == "structured":
        print(json.dumps(io.jsonable(payload), indent=2, ensure_ascii=False))
    else:
        print(f"composite: {composite.name}  (dimension {composite.dim}, "
              f"factorization residual {payload['factorization_residual']:.3e})")
        for entry in entries:
            status = ("skipped" if entry.get("skipped")
                      else "pass" if entry["passed"] else "FAIL")
            print(f"  {entry['test']:<14} {entry['condition']:<20} {status}")
    if args.out:
        io.write_json_atomic(os.path.join(args.out, "compose.json"), io.jsonable(payload))
    return 0


def _cmd_pair(args) -> int:
    scenario = random_matched_pair(args.dim, args.seed, pure=not args.mixed, rank=args.rank)
    functional = decoherence_functional(scenario.histories, scenario.state)
    classification = classify(functional, args.tolerance or 1e-8)
    payload = {
        "format_version": io.FORMAT_VERSION,
        "name": scenario.name,
        "pair_identity_residual": scenario.metadata["pair_identity_residual"],
        "interference": io.complex_to_pair(functional.matrix[0, 1]),
        "classification": _classification_json(classification),
    }
    if args.format == "structured":
        print(json.dumps(io.jsonable(payload), indent=2, ensure_ascii=False))
    else:
        print(f"{scenario.name}: identity residual "
              f"{payload['pair_identity_residual']:.3e}")
        value = functional.matrix[0, 1]
        print(f"interference term: {value.real:+.6e} {value.imag:+.6e}j")
        flags = "  ".join(f"{k}={'yes' if v else 'no'}"
                          for k, v in classification.flags.items())
        print(f"conditions: {flags}")
        print(f"venn region: {classification.venn_region}")
    if args.out:
        io.write_json_atomic(
            os.path.join(args.out, f"{scenario.name}.scenario.json"),
            io.scenario_to_json(scenario),
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dechist",
        description="Analyze history sets: conditions, composition tests, "
                    "robustness, records and seeded searches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tolerance=True, seed=False, out=True):
        if tolerance:
            p.add_argument("--tolerance", type=float, default=None,
                           help="classification tolerance override")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--format", choices=("text", "structured"), default="text")
        if out:
            p.add_argument("--out", default=None, help="directory for emitted files")

    p_check = sub.add_parser("check", help="run the checks a scenario file declares")
    p_check.add_argument("scenario")
    common(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_search = sub.add_parser("search", help="run a seeded region or superprobability search")
    p_search.add_argument("config")
    common(p_search, tolerance=False, seed=True)
    p_search.set_defaults(func=_cmd_search)

    p_compose = sub.add_parser("compose", help="composition tests for two scenario files")
    p_compose.add_argument("scenario_a")
    p_compose.add_argument("scenario_b")
    common(p_compose)
    p_compose.set_defaults(func=_cmd_compose)

    p_pair = sub.add_parser("pair", help="build and analyze a seeded two-time matched pair")
    p_pair.add_argument("--dim", type=int, default=2)
    p_pair.add_argument("--seed", type=int, required=True)
    p_pair.add_argument("--rank", type=int, default=None)
    p_pair.add_argument("--mixed", action="store_true", help="use a random mixed state")
    common(p_pair, seed=False)
    p_pair.set_defaults(func=_cmd_pair)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except InternalFaultError as err:
        print(f"internal fault: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
