"""Precision certificates and the local-constancy perturbation harness.

The certificate records, per initial chart, the exponent f0 of the Bezout
witness, then d = 2 max(f0) + 2 and a = d + n + 2 with n the blowup count
of the resolution trace.  The harness perturbs the defining polynomial by
pi^N times a seeded random polynomial, reruns the pipeline on both models
(the perturbed one resolved by replaying the same centres), and compares
every invariant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .algebra.resultant import bezout_pi_certificate, jacobian_minors
from .differentials import fudge_factor, regular_lattice
from .errors import RegModelsError, ResampleBudgetExhausted
from .invariants.arith import (count_points, index_and_deficiency,
                               locally_soluble, tamagawa)
from .invariants.compgroup import component_group
from .invariants.fibre import special_fibre
from .model.chart import Surface, hyperelliptic_surface
from .model.regularity import singular_points
from .model.resolve import ResolutionTrace, replay, resolve


@dataclass
class PrecisionCertificate:
    chart_exponents: List[int]
    d: int
    blowup_count: int
    a: int
    working_precision: int

    def as_dict(self):
        return {"chart_exponents": self.chart_exponents, "d": self.d,
                "blowup_count": self.blowup_count, "a": self.a,
                "working_precision": self.working_precision}


def certificate_thresholds(f0: int, n: int) -> Dict[str, int]:
    """The tabulated formulas d = 2 f0 + 2 and a = d + n + 2."""
    d = 2 * f0 + 2
    return {"d": d, "a": d + n + 2}


@dataclass
class HyperellipticJob:
    """An exact hyperelliptic input y^2 = f(x) with its pipeline products."""
    p: int
    precision: int
    f_coeffs: List[int]
    genus: int
    surface: Surface = None
    trace: ResolutionTrace = None

    def build(self):
        self.surface = hyperelliptic_surface(self.f_coeffs, self.p,
                                             self.precision, genus=self.genus)
        return self


def precision_certificate(job: HyperellipticJob,
                          trace: ResolutionTrace) -> PrecisionCertificate:
    """f0 per initial chart from the Bezout certificate; d = 2 max f0 + 2;
    a = d + n + 2 with n the number of blowups in the trace."""
    p, M = job.p, job.precision
    exponents = []
    for chart in (job.surface.charts[0], job.surface.charts[1]):
        gen = chart.generator
        names = sorted(chart.variables)
        minors = jacobian_minors([gen], names)
        coeffs = _exact_chart_coeffs(job, chart.chart_id)
        xname = names[0] if chart.root_id == 0 else names[0]
        cert = bezout_pi_certificate([gen], minors, M,
                                     exact_data=(coeffs, xname))
        exponents.append(cert.f0)
    d = 2 * max(exponents) + 2
    n = trace.blowup_count
    return PrecisionCertificate(exponents, d, n, d + n + 2, M)


def _exact_chart_coeffs(job: HyperellipticJob, chart_id: int) -> List[int]:
    if chart_id == 0:
        return list(job.f_coeffs)
    g = job.genus
    out = [0] * (2 * g + 3)
    for i, c in enumerate(job.f_coeffs):
        out[2 * g + 2 - i] = c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def perturb(job: HyperellipticJob, N: int, seed: int,
            max_retries: int = 32) -> HyperellipticJob:
    """f~ = f + pi^N (seeded random polynomial of degree <= deg f), with the
    same-degree and separability preconditions re-sampled on failure."""
    from sympy import Poly, Symbol, discriminant
    p, M = job.p, job.precision
    rng = random.Random((seed, N, p, tuple(job.f_coeffs)).__hash__() & 0x7FFFFFFF)
    cap = max(1, p**(max(1, M - N)))
    xs = Symbol("x")
    for _ in range(max_retries):
        bump = [rng.randrange(cap) for _ in range(len(job.f_coeffs))]
        newf = [c + p**N * b for c, b in zip(job.f_coeffs, bump)]
        if newf[-1] == 0:
            continue
        poly = Poly(newf[::-1], xs)
        if discriminant(poly) == 0:
            continue
        return HyperellipticJob(p, M, newf, job.genus).build()
    raise ResampleBudgetExhausted(
        f"no admissible perturbation found after {max_retries} draws")


# ---------------------------------------------------------------------------
# invariant comparison
# ---------------------------------------------------------------------------


@dataclass
class PerturbationReport:
    seed: int
    N: int
    comparisons: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, object] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.errors:
            return "inconclusive"
        return "pass" if all(self.comparisons.values()) else "fail"

    def as_dict(self):
        return {"seed": self.seed, "N": self.N, "verdict": self.verdict,
                "comparisons": dict(self.comparisons),
                "details": {k: v for k, v in self.details.items()},
                "errors": list(self.errors)}


def pipeline_summary(job: HyperellipticJob, trace: Optional[ResolutionTrace] = None,
                     point_count_qs=(1, 2), max_steps: int = 12) -> Dict[str, object]:
    """Resolve (or replay) and extract every compared invariant."""
    if job.surface is None:
        job.build()
    if trace is None:
        trace = resolve(job.surface, max_steps=max_steps)
        surface = trace.surface
    else:
        surface = replay(job.surface, trace)
        leftover = singular_points(surface)
        if leftover:
            raise RegModelsError(
                "replayed centres do not resolve the perturbed model")
        trace = ResolutionTrace(list(trace.centres), surface)
    fib = special_fibre(surface)
    grp = component_group(fib)
    tam = tamagawa(fib, grp)
    idx, deficient = index_and_deficiency(fib, job.genus)
    soluble = locally_soluble(fib)
    counts = {}
    for e in point_count_qs:
        q = job.p**e
        counts[q] = count_points(fib, q)
    W = regular_lattice(surface, fib, job.genus)
    fudge = fudge_factor(W, job.p, job.p)
    return {
        "trace": trace,
        "surface": surface,
        "fibre": fib,
        "graph": _fibre_graph_key(fib),
        "multiplicities": sorted(fib.multiplicities),
        "constant_degrees": sorted(fib.constant_degrees),
        "group": component_group(fib).factors,
        "tamagawa": tam.as_dict(),
        "index": idx,
        "deficient": deficient,
        "soluble": soluble,
        "counts": counts,
        "lattice": [[str(x) for x in col] for col in W.basis],
        "fudge_valuation": fudge.valuation,
    }


def _fibre_graph_key(fib) -> tuple:
    """Canonical form of the decorated dual graph: vertices carry
    (multiplicity, constant degree), edges the intersection numbers; the
    minimum over all vertex relabelings (components are few)."""
    from itertools import permutations
    n = len(fib.components)
    decor = [(c.multiplicity, c.constant_degree) for c in fib.components]
    M = fib.intersection_matrix
    best = None
    if n > 8:
        order = sorted(range(n), key=lambda i: decor[i])
        perms = [tuple(order)]
    else:
        perms = permutations(range(n))
    for perm in perms:
        key = (tuple(decor[i] for i in perm),
               tuple(tuple(M[i][j] for j in perm) for i in perm))
        if best is None or key < best:
            best = key
    return best


COMPARED_KEYS = ["graph", "multiplicities", "constant_degrees", "group",
                 "tamagawa", "index", "deficient", "soluble", "counts",
                 "fudge_valuation", "lattice"]


def comparable(summary: Dict[str, object]) -> Dict[str, object]:
    """The plain-data subset of a pipeline summary used for comparisons."""
    return {k: summary[k] for k in COMPARED_KEYS}


def compare_invariants(job: HyperellipticJob, perturbed: HyperellipticJob,
                       N: int, seed: int = 0,
                       base_summary: Optional[Dict[str, object]] = None,
                       max_steps: int = 12) -> PerturbationReport:
    """Run the pipeline on both models (the perturbed one through the same
    centres) and compare every invariant of the spec's report."""
    report = PerturbationReport(seed=seed, N=N)
    try:
        if base_summary is None:
            base_summary = pipeline_summary(job, max_steps=max_steps)
        trace = base_summary["trace"]
        try:
            pert_summary = pipeline_summary(perturbed, trace=trace,
                                            max_steps=max_steps)
        except RegModelsError:
            pert_summary = pipeline_summary(perturbed, max_steps=max_steps)
    except RegModelsError as exc:
        report.errors.append(f"{type(exc).__name__}: {exc}")
        return report
    for key in COMPARED_KEYS:
        report.comparisons[key] = base_summary[key] == pert_summary[key]
        if not report.comparisons[key]:
            report.details[key] = {"base": _plain(base_summary[key]),
                                   "perturbed": _plain(pert_summary[key])}
    return report


def _trial_worker(args):
    """One perturbation trial in a worker process: returns the comparable
    summary of the perturbed model (or the error string)."""
    p, M, coeffs, genus, N, seed, centres, max_steps = args
    job = HyperellipticJob(p, M, coeffs, genus)
    try:
        pert = perturb(job, N, seed)
        trace = ResolutionTrace(list(centres), None)
        try:
            summary = pipeline_summary(pert, trace=trace, max_steps=max_steps)
        except RegModelsError:
            summary = pipeline_summary(pert, max_steps=max_steps)
        return seed, comparable(summary), None
    except RegModelsError as exc:
        return seed, None, f"{type(exc).__name__}: {exc}"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def run_harness(job: HyperellipticJob, N: int, seeds: List[int],
                max_steps: int = 12, workers: int = 0,
                base_summary: Optional[Dict[str, object]] = None
                ) -> List[PerturbationReport]:
    """Seeded perturbation trials at level N.

    Trials are independent; with workers > 1 they run in a process pool and
    the reports are aggregated in seed order, so the output is deterministic
    either way."""
    if job.surface is None:
        job.build()
    if base_summary is None:
        base_summary = pipeline_summary(job, max_steps=max_steps)
    base_cmp = comparable(base_summary)
    centres = list(base_summary["trace"].centres)
    tasks = [(job.p, job.precision, list(job.f_coeffs), job.genus, N, seed,
              centres, max_steps) for seed in seeds]
    results = {}
    if workers and workers > 1 and len(seeds) > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, summary, err in pool.map(_trial_worker, tasks):
                results[seed] = (summary, err)
    else:
        for task in tasks:
            seed, summary, err = _trial_worker(task)
            results[seed] = (summary, err)
    out = []
    for seed in seeds:
        summary, err = results[seed]
        report = PerturbationReport(seed=seed, N=N)
        if err is not None:
            report.errors.append(err)
        else:
            for key in COMPARED_KEYS:
                report.comparisons[key] = base_cmp[key] == summary[key]
                if not report.comparisons[key]:
                    report.details[key] = {"base": _plain(base_cmp[key]),
                                           "perturbed": _plain(summary[key])}
        out.append(report)
    return out


def smallest_passing_level(job: HyperellipticJob, a: int, seeds: List[int],
                           floor: int = 1, max_steps: int = 12):
    """Observational bisection: the smallest N <= a at which all seeds still
    pass (reported as empirical, never as a theorem)."""
    if job.surface is None:
        job.build()
    base_summary = pipeline_summary(job, max_steps=max_steps)

    def passes(N):
        for seed in seeds:
            try:
                pert = perturb(job, N, seed)
                rep = compare_invariants(job, pert, N, seed=seed,
                                         base_summary=base_summary,
                                         max_steps=max_steps)
            except RegModelsError:
                return False
            if rep.verdict != "pass":
                return False
        return True

    known_pass = a
    lo, hi = floor, a
    while lo < hi:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
            known_pass = mid
        else:
            lo = mid + 1
    return known_pass
