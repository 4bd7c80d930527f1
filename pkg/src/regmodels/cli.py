"""Batch front end: parse a job specification, run the pipeline, emit a
canonical JSON report.

Exit codes: 0 success, 2 parse error, 3 precision exhausted, 4 unsupported
geometry / shape, 5 budget exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from typing import Dict, List

from .certify import (HyperellipticJob, PerturbationReport, perturb,
                      pipeline_summary, precision_certificate, run_harness,
                      smallest_passing_level)
from .errors import (BudgetExhausted, ParseError, PrecisionExhausted,
                     RegModelsError, UnsupportedGeometry)
from .model.resolve import resolve
from .model.serialize import closed_point_to_json

ALL_TASKS = ("resolve", "invariants", "fudge", "certify", "perturb")


def parse_job(data: Dict) -> Dict:
    if not isinstance(data, dict):
        raise ParseError("job specification must be a JSON object")
    try:
        p = int(data["p"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("missing or malformed prime p")
    if p < 2:
        raise ParseError("p must be a prime >= 2")
    if p == 2:
        raise UnsupportedGeometry(
            "residue characteristic 2 is rejected (hyperelliptic inputs need "
            "invertible 2)")
    curve = data.get("curve", data)
    kind = curve.get("kind", "hyperelliptic")
    if kind != "hyperelliptic":
        raise UnsupportedGeometry(
            "only hyperelliptic Weierstrass inputs drive the automated pipeline")
    raw = curve.get("f")
    if not isinstance(raw, list) or len(raw) < 4:
        raise ParseError("curve.f must be the coefficient list of f, degree >= 3")
    coeffs = []
    for c in raw:
        if isinstance(c, int):
            coeffs.append(Fraction(c))
        elif isinstance(c, str):
            try:
                coeffs.append(Fraction(c))
            except ValueError:
                raise ParseError(f"bad coefficient {c!r}")
        elif isinstance(c, list) and len(c) == 2:
            coeffs.append(Fraction(c[0], c[1]))
        else:
            raise ParseError(f"bad coefficient {c!r}")
    if coeffs[-1] == 0:
        raise ParseError("leading coefficient of f vanishes")
    M = int(data.get("precision", 12))
    if M < 4:
        raise ParseError("precision cap must be at least 4")
    intcoeffs = _p_integral_ints(coeffs, p, M)
    from sympy import Poly, Symbol, discriminant
    xs = Symbol("x")
    disc = discriminant(Poly([Fraction(c) for c in coeffs[::-1]], xs))
    if disc == 0:
        raise ParseError("f is not separable (zero discriminant)")
    tasks = data.get("tasks", list(ALL_TASKS))
    if not isinstance(tasks, list) or any(t not in ALL_TASKS for t in tasks):
        raise ParseError(f"tasks must be a subset of {ALL_TASKS}")
    return {
        "p": p, "precision": M, "f": intcoeffs,
        "genus": (len(intcoeffs) - 2) // 2,
        "tasks": tasks,
        "degree_bound": int(data.get("degree_bound", 4)),
        "max_blowups": int(data.get("max_blowups", 12)),
        "trials": int(data.get("trials", 8)),
        "seed": int(data.get("seed", 1)),
        "N": data.get("N"),
        "echo": data,
    }


def _p_integral_ints(coeffs: List[Fraction], p: int, M: int) -> List[int]:
    out = []
    mod = p**M
    for c in coeffs:
        if c.denominator % p == 0:
            raise ParseError("coefficient is not p-integral")
        out.append(c.numerator * pow(c.denominator, -1, mod) % mod)
    return out


def run(job: Dict) -> Dict:
    """Deterministic report for a validated job."""
    report: Dict = {
        "schema": "regmodels/report/1",
        "input": {"p": job["p"], "precision": job["precision"],
                  "f": job["f"], "genus": job["genus"],
                  "tasks": job["tasks"]},
    }
    blob = json.dumps(report["input"], sort_keys=True).encode()
    report["input"]["hash"] = hashlib.sha256(blob).hexdigest()[:16]

    hj = HyperellipticJob(job["p"], job["precision"], job["f"],
                          job["genus"]).build()
    summary = None
    if any(t in job["tasks"] for t in ("resolve", "invariants", "fudge",
                                       "certify", "perturb")):
        summary = pipeline_summary(hj, max_steps=job["max_blowups"])
    if "resolve" in job["tasks"]:
        trace = summary["trace"]
        report["resolution"] = {
            "blowups": trace.blowup_count,
            "atlas_complete": trace.surface.atlas_complete,
            "centres": [closed_point_to_json(c) if hasattr(c, "min_poly")
                        else {"curve_on_chart": c.chart_id}
                        for c in trace.centres],
        }
    if "invariants" in job["tasks"]:
        fib = summary["fibre"]
        report["invariants"] = {
            "components": [{"d": c.multiplicity, "e": c.constant_degree,
                            "equation_hash": hashlib.sha256(
                                str(c.key()).encode()).hexdigest()[:12]}
                           for c in fib.components],
            "intersection_matrix": fib.intersection_matrix,
            "group_factors": summary["group"],
            "tamagawa": summary["tamagawa"],
            "index": summary["index"],
            "deficient": summary["deficient"],
            "locally_soluble": summary["soluble"],
            "point_counts": {str(q): n for q, n in summary["counts"].items()},
        }
    if "fudge" in job["tasks"]:
        report["fudge"] = {
            "lattice_basis": summary["lattice"],
            "valuation": summary["fudge_valuation"],
        }
    certificate = None
    if "certify" in job["tasks"] or "perturb" in job["tasks"]:
        certificate = precision_certificate(hj, summary["trace"])
        report["certificate"] = certificate.as_dict()
    if "perturb" in job["tasks"]:
        N = job["N"] if job["N"] is not None else certificate.a
        seeds = [job["seed"] + k for k in range(job["trials"])]
        reports = run_harness(hj, int(N), seeds, max_steps=job["max_blowups"])
        report["harness"] = {
            "N": int(N),
            "seeds": seeds,
            "reports": [r.as_dict() for r in reports],
            "all_pass": all(r.verdict == "pass" for r in reports),
        }
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="regmodels",
        description="regular models of hyperelliptic curves: resolution, "
                    "reduction-type invariants, fudge factors, and the "
                    "local-constancy perturbation harness")
    parser.add_argument("jobfile", nargs="?", help="JSON job file (default stdin)")
    parser.add_argument("--precision", type=int, help="override precision cap")
    parser.add_argument("--degree-bound", type=int, help="residue degree bound")
    parser.add_argument("--max-blowups", type=int, help="resolution step budget")
    parser.add_argument("--trials", type=int, help="number of perturbation seeds")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--tasks", type=str,
                        help="comma-separated subset of " + ",".join(ALL_TASKS))
    parser.add_argument("--output", type=str, help="write the report here")
    args = parser.parse_args(argv)
    try:
        if args.jobfile:
            with open(args.jobfile) as fh:
                data = json.load(fh)
        else:
            data = json.load(sys.stdin)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    for key in ("precision", "degree_bound", "max_blowups", "trials", "seed"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.tasks:
        data["tasks"] = args.tasks.split(",")
    try:
        job = parse_job(data)
        report = run(job)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except UnsupportedGeometry as exc:
        print(f"unsupported geometry: {exc}", file=sys.stderr)
        return 4
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 5
    except RegModelsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 1)
    payload = json.dumps(report, sort_keys=True, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
