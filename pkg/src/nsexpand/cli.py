"""Command-line driver: scenario in, deterministic file tree out.

    nse-expand expand   --scenario s.json [--out DIR]
    nse-expand simulate --scenario s.json [--out DIR]
    nse-expand verify   --scenario s.json [--out DIR]
    nse-expand certify  --scenario s.json [--out DIR]
    nse-expand spectrum [--nmax N]

Outputs land under <out>/<scenario-name>/: expansion/ (per-level polynomial
documents), trajectory.csv (+ mode manifest), norms/ (series CSVs and
plot-ready TSVs), reports/ (verify and certify summaries). verify and certify
reuse files already present in the tree (an existing trajectory or expansion
is loaded, not recomputed), so the subcommands compose into a pipeline.

Exit codes: 0 all checks passed, 1 input or runtime error, 2 at least one
check failed, 3 nothing failed but at least one check was inconclusive.

NSE_EXPAND_THREADS caps the worker threads used for independent per-level,
per-norm measurements (default 1; results are merged in fixed order, so the
output bytes do not depend on the thread count).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, serialize
from .analysis import (
    FitError,
    fit_rate,
    fit_resonant_constant,
    norm_series,
    rate_claim_passes,
    remainder_series,
)
from .expansion import (
    build_expansion,
    expansion_residual,
    level_source,
    solve_level,
)
from .fieldpoly import ExpansionTerm
from .galerkin import BlowupError, integrate
from .scenario import Scenario, ScenarioError, load_scenario
from .serialize import (
    expansion_term_from_doc,
    expansion_term_to_doc,
    format_float,
    read_trajectory,
    write_fit_tsv,
    write_json,
    write_norm_csv,
    write_trajectory,
)
from .spectral import SpectralField, eigenvalues_up_to, norm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2
EXIT_INCONCLUSIVE = 3

SNAP_FACTOR = 1e-8


def worker_count() -> int:
    raw = os.environ.get("NSE_EXPAND_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError("NSE_EXPAND_THREADS", f"expected an integer, got {raw!r}") from None
    if n < 1:
        raise ScenarioError("NSE_EXPAND_THREADS", f"must be >= 1, got {n}")
    return n


def run_dir_for(scenario: Scenario, out: str | None) -> Path:
    base = Path(out) if out else Path(scenario.output_dir or "out")
    d = base / scenario.name
    for sub in ("expansion", "norms", "reports"):
        (d / sub).mkdir(parents=True, exist_ok=True)
    return d


def _norm_tag(spec) -> str:
    return f"alpha{spec.alpha:g}_sigma{spec.sigma:g}"


# -- trajectory / expansion reuse ----------------------------------------------


def ensure_trajectory(scenario: Scenario, run_dir: Path):
    csv = run_dir / "trajectory.csv"
    manifest = run_dir / "trajectory_modes.json"
    if csv.exists() and manifest.exists():
        return read_trajectory(csv, manifest), False
    traj = integrate(scenario.initial, scenario.force, scenario.solver)
    write_trajectory(csv, manifest, traj)
    return traj, True


def load_expansion_terms(run_dir: Path):
    docs = sorted((run_dir / "expansion").glob("level_*.json"))
    if not docs:
        return None
    return [
        expansion_term_from_doc(serialize.load_json(p), str(p)) for p in docs
    ]


def write_expansion_terms(run_dir: Path, terms, hits: set[int]):
    for term in terms:
        write_json(
            run_dir / "expansion" / f"level_{term.n:02d}.json",
            expansion_term_to_doc(term, term.n in hits),
        )


def build_terms_with_fitting(scenario: Scenario, traj, run_dir: Path):
    """Construct levels 1..N_max, estimating any unsupplied free constant from the trajectory."""
    req = scenario.expansion
    spectrum = set(eigenvalues_up_to(req.n_max))
    traj_scale = max((norm(s) for s in traj.states), default=0.0)
    terms: list[ExpansionTerm] = []
    hits: set[int] = set()
    fit_log: dict[int, dict] = {}
    for n in range(1, req.n_max + 1):
        p = level_source(terms, scenario.force, n)
        xi = req.resonant.get(n)
        if xi is None and n in spectrum:
            fit = fit_resonant_constant(
                traj, terms, scenario.force, n, window=req.resonant_fit_window
            )
            xi = fit.constant
            snapped = norm(xi) <= SNAP_FACTOR * traj_scale
            if snapped:
                xi = SpectralField.zero()
            fit_log[n] = {
                "stddev": fit.stddev,
                "drift": fit.drift,
                "contaminated": fit.contaminated,
                "window": list(fit.window),
                "n_samples": fit.n_samples,
                "snapped_to_zero": snapped,
            }
        q, hit = solve_level(p, n, xi)
        if hit:
            hits.add(n)
        terms.append(ExpansionTerm(n, q))
    residuals = {n: expansion_residual(terms, scenario.force, n) for n in range(1, req.n_max + 1)}
    write_expansion_terms(run_dir, terms, hits)
    write_json(
        run_dir / "expansion" / "residuals.json",
        {
            "levels": req.n_max,
            "residuals": {str(n): residuals[n] for n in sorted(residuals)},
            "resonance_log": [[n, n] for n in sorted(hits)],
            "max_residual": max(residuals.values(), default=0.0),
        },
    )
    if fit_log:
        write_json(
            run_dir / "expansion" / "resonant_fits.json",
            {str(n): fit_log[n] for n in sorted(fit_log)},
        )
    return terms


# -- subcommands -----------------------------------------------------------------


def run_expand(scenario: Scenario, out: str | None) -> int:
    run_dir = run_dir_for(scenario, out)
    try:
        result = build_expansion(
            scenario.force, scenario.expansion.n_max, scenario.expansion.resonant
        )
    except RuntimeError as exc:
        print(f"expand: {exc}", file=sys.stderr)
        return EXIT_FAILED
    hits = {n for n, _ in result.resonance_log}
    write_expansion_terms(run_dir, result.terms, hits)
    write_json(
        run_dir / "expansion" / "residuals.json",
        {
            "levels": scenario.expansion.n_max,
            "residuals": {str(n): result.residuals[n] for n in sorted(result.residuals)},
            "resonance_log": [list(x) for x in result.resonance_log],
            "max_residual": result.max_residual(),
        },
    )
    for term in result.terms:
        marker = " (resonant)" if term.n in hits else ""
        print(
            f"level {term.n}: degree {term.poly.degree}, "
            f"residual {format_float(result.residuals[term.n])}{marker}"
        )
    print(f"expansion written to {run_dir / 'expansion'}")
    return EXIT_OK


def run_simulate(scenario: Scenario, out: str | None) -> int:
    run_dir = run_dir_for(scenario, out)
    traj = integrate(scenario.initial, scenario.force, scenario.solver)
    write_trajectory(run_dir / "trajectory.csv", run_dir / "trajectory_modes.json", traj)
    for spec in scenario.expansion.norm_specs:
        series = norm_series(traj, spec, label=f"norm_{_norm_tag(spec)}")
        write_norm_csv(run_dir / "norms" / f"norm_{_norm_tag(spec)}.csv", series)
    print(
        f"simulated {len(traj)} samples to t = {format_float(traj.t_end)} "
        f"(cutoff {scenario.solver.mode_cutoff}, step {scenario.solver.step:g}); "
        f"final norm {format_float(norm(traj.states[-1]))}"
    )
    print(f"trajectory written to {run_dir / 'trajectory.csv'}")
    return EXIT_OK


def _verify_row(traj, terms, N, spec, eps, window):
    terms_N = tuple(t for t in terms if t.n <= N)
    series = remainder_series(traj, terms_N, spec, label=f"remainder_N{N}_{_norm_tag(spec)}")
    target = N + eps
    row = {
        "level": N,
        "alpha": spec.alpha,
        "sigma": spec.sigma,
        "target_rate": target,
        "peak": series.peak(),
    }
    fit = None
    try:
        fit = fit_rate(series, window)
    except FitError as exc:
        row.update(verdict="inconclusive", annotation=f"unusable window: {exc}")
        return row, series, fit
    if fit.floor_dominated:
        row.update(
            slope=None,
            verdict="inconclusive",
            annotation="series at numerical floor: remainder matches to solver precision",
        )
        return row, series, fit
    ok = rate_claim_passes(fit, target)
    row.update(
        slope=fit.slope,
        intercept=fit.intercept,
        rms=fit.rms_residual,
        window=list(fit.window),
        n_samples=fit.n_samples,
        verdict="pass" if ok else "fail",
        annotation=(
            ""
            if ok
            else f"needs slope <= {-target + analysis.RATE_SLACK:g}"
            + (f" and rms <= {analysis.RMS_MAX:g}" if fit.rms_residual > analysis.RMS_MAX else "")
        ),
    )
    return row, series, fit


def run_verify(scenario: Scenario, out: str | None) -> int:
    run_dir = run_dir_for(scenario, out)
    traj, fresh = ensure_trajectory(scenario, run_dir)
    terms = load_expansion_terms(run_dir)
    if terms is None:
        terms = build_terms_with_fitting(scenario, traj, run_dir)
    else:
        terms = [t for t in terms if t.n <= scenario.expansion.n_max]
        print(f"loaded expansion levels {[t.n for t in terms]} from {run_dir / 'expansion'}")
    req = scenario.expansion
    rungs = sorted(t.n for t in terms)
    jobs = [(N, spec) for N in rungs for spec in req.norm_specs]
    window = req.fit_window

    def job(arg):
        N, spec = arg
        return _verify_row(traj, terms, N, spec, req.target_epsilon, window)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(j) for j in jobs]

    rows = []
    for (N, spec), (row, series, fit) in zip(jobs, results):
        stem = f"remainder_N{N}_{_norm_tag(spec)}"
        write_norm_csv(run_dir / "norms" / f"{stem}.csv", series)
        write_fit_tsv(run_dir / "norms" / f"{stem}.tsv", series, fit, row["verdict"])
        rows.append(row)

    verdicts = [r["verdict"] for r in rows]
    if "fail" in verdicts:
        code = EXIT_FAILED
    elif "inconclusive" in verdicts:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    report = {
        "scenario": scenario.name,
        "target_epsilon": req.target_epsilon,
        "trajectory_recomputed": fresh,
        "rows": rows,
        "exit_code": code,
    }
    write_json(run_dir / "reports" / "verify.json", report)
    lines = [
        f"scenario {scenario.name}: remainder decay vs target N + {req.target_epsilon:g}",
        f"{'level':>5} {'alpha':>6} {'sigma':>6} {'slope':>10} {'rms':>8} {'target':>8} {'verdict':>13}",
    ]
    for r in rows:
        slope = format(r["slope"], ".4f") if r.get("slope") is not None else "at-floor"
        rms = format(r["rms"], ".4f") if "rms" in r else "-"
        note = f"  [{r['annotation']}]" if r.get("annotation") else ""
        lines.append(
            f"{r['level']:>5} {r['alpha']:>6g} {r['sigma']:>6g} {slope:>10} {rms:>8} "
            f"{-r['target_rate']:>8g} {r['verdict']:>13}{note}"
        )
    text = "\n".join(lines) + "\n"
    (run_dir / "reports" / "verify.txt").write_text(text)
    print(text, end="")
    return code


def run_certify(scenario: Scenario, out: str | None) -> int:
    run_dir = run_dir_for(scenario, out)
    traj, _ = ensure_trajectory(scenario, run_dir)
    if not scenario.certificates:
        write_json(run_dir / "reports" / "certify.json", {"scenario": scenario.name, "rows": []})
        print("no certificates configured")
        return EXIT_OK

    def job(cert):
        return analysis.certificate_check(traj, cert, scenario.force)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, scenario.certificates))
    else:
        reports = [job(c) for c in scenario.certificates]

    rows = []
    for cert, rep in zip(scenario.certificates, reports):
        rows.append(
            {
                "alpha": cert.alpha,
                "delta": cert.delta,
                "lambda": cert.lam,
                "sigma": cert.sigma,
                "K": cert.K,
                "C0": cert.C0,
                "C1": cert.C1,
                "t_star": cert.t_star,
                "verdict": rep.verdict,
                "hypothesis_failures": list(rep.hypothesis_failures),
                "min_margin": rep.min_margin() if len(rep.pointwise_margins) else None,
                "pointwise": {
                    "times": list(rep.pointwise_times),
                    "margins": list(rep.pointwise_margins),
                },
                "integral": {
                    "times": list(rep.integral_times),
                    "margins": list(rep.integral_margins),
                },
            }
        )
    verdicts = [r["verdict"] for r in rows]
    if "violated" in verdicts:
        code = EXIT_FAILED
    elif "inapplicable" in verdicts:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    write_json(
        run_dir / "reports" / "certify.json",
        {"scenario": scenario.name, "rows": rows, "exit_code": code},
    )
    lines = [f"scenario {scenario.name}: decay certificates"]
    for r in rows:
        mm = format_float(r["min_margin"]) if r["min_margin"] is not None else "-"
        lines.append(
            f"alpha={r['alpha']:g} delta={r['delta']:g} lambda={r['lambda']:g} "
            f"sigma={r['sigma']:g} K={r['K']:g}: {r['verdict']} (min margin {mm})"
        )
        for msg in r["hypothesis_failures"]:
            lines.append(f"  hypothesis not met: {msg}")
    text = "\n".join(lines) + "\n"
    (run_dir / "reports" / "certify.txt").write_text(text)
    print(text, end="")
    return code


def run_spectrum(nmax: int) -> int:
    for n in eigenvalues_up_to(nmax):
        print(n)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nse-expand",
        description="Slow-decay expansions, Galerkin simulation and decay verification "
        "for forced periodic flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("expand", "construct expansion levels and write per-level documents"),
        ("simulate", "integrate the truncated system and write the trajectory"),
        ("verify", "check remainder decay rates against the target ladder"),
        ("certify", "evaluate decay certificates on the trajectory"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", required=True, help="path to scenario JSON")
        p.add_argument("--out", default=None, help="output root (default: scenario output_dir or ./out)")
    p = sub.add_parser("spectrum", help="print the Stokes eigenvalues up to a bound")
    p.add_argument("--nmax", type=int, default=100, help="largest eigenvalue to include")

    args = parser.parse_args(argv)
    try:
        if args.command == "spectrum":
            return run_spectrum(args.nmax)
        scenario = load_scenario(args.scenario)
        if args.command == "expand":
            return run_expand(scenario, args.out)
        if args.command == "simulate":
            return run_simulate(scenario, args.out)
        if args.command == "verify":
            return run_verify(scenario, args.out)
        if args.command == "certify":
            return run_certify(scenario, args.out)
        raise AssertionError(args.command)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BlowupError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
