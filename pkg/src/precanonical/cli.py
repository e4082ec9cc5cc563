"""Command-line driver: ``precanonical {brackets,dw-check,quantum,wkb,vacuum}``.

Exit codes: 0 pass, 1 verification failure, 2 config error, 3 data error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import vacuum as vac
from .clifford import Metric
from .config import ConfigError, RunConfig, load_config
from .dwmech import (
    ScalarModel,
    dw_equations_residual,
    dwhj_residual,
    load_solution_csv,
    reference_hj_solution,
)
from .errors import (
    ConvergenceFailure,
    DecompositionFailure,
    InvalidParameter,
    InvalidSolutionData,
    PrecanonicalError,
    SingularHJNorm,
)
from .formtext import FormSyntaxError, parse_poly
from .gradedforms import (
    HorizontalForm,
    PhaseContext,
    canonical_bracket_table,
    equation_of_motion_residual,
    graded_antisymmetry_check,
    random_hamiltonian_form,
    well_defined_degree_pairs,
)

SCHEMA = "precanonical.report/1"
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("precanonical")


class Report:
    def __init__(self, command: str, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.lines: list[str] = []
        self.results: dict = {}
        self.warnings: list[str] = []
        self.tables: dict[str, tuple[list[str], list[list]]] = {}
        self.passed = True

    def line(self, text: str) -> None:
        self.lines.append(text)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.passed &= bool(ok)
        self.line(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        return bool(ok)

    def table(self, name: str, header: list[str], rows: list[list]) -> None:
        self.tables[name] = (header, rows)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "status": "pass" if self.passed else "fail",
            "seed": self.cfg.run.seed,
            "config": self.cfg.to_dict(),
            "results": self.results,
            "warnings": self.warnings,
            "tables": {k: {"columns": h, "rows": r} for k, (h, r) in self.tables.items()},
        }


def _metric(cfg: RunConfig) -> Metric:
    return Metric(cfg.model.n, cfg.model.signs)


def _quantum_model(cfg: RunConfig):
    from .quantum import QuantumModel

    pot = None
    if cfg.model.potential:
        try:
            pot = parse_poly(cfg.model.potential, n=cfg.model.n, m=1)
        except FormSyntaxError as exc:
            raise ConfigError(f"model.potential: {exc}") from None
    return QuantumModel(_metric(cfg), cfg.model.mass, cfg.model.hbar, cfg.model.kappa, pot)


def _scalar_model(cfg: RunConfig) -> ScalarModel:
    if cfg.model.potential:
        try:
            pot = parse_poly(cfg.model.potential, n=cfg.model.n, m=cfg.model.fields)
        except FormSyntaxError as exc:
            raise ConfigError(f"model.potential: {exc}") from None
        return ScalarModel(_metric(cfg), cfg.model.fields, pot)
    return ScalarModel.free(_metric(cfg), [cfg.model.mass] * cfg.model.fields)


# -- subcommands ------------------------------------------------------------------
def cmd_brackets(cfg: RunConfig) -> Report:
    rep = Report("brackets", cfg)
    ctx = PhaseContext(cfg.model.n, cfg.model.fields)
    rows = []
    for ident in canonical_bracket_table(ctx):
        ok = ident.holds
        rep.check(f"{ident.label} = {ident.expected}", ok, f"got {ident.lhs}")
        rows.append([ident.label, str(ident.expected), str(ident.lhs), ok])
    rep.table("canonical_brackets", ["bracket", "expected", "computed", "pass"], rows)
    rng = np.random.default_rng(cfg.run.seed)
    failures = 0
    total = 0
    for r, s in well_defined_degree_pairs(ctx):
        for _ in range(cfg.brackets.samples):
            F1 = random_hamiltonian_form(ctx, r, rng, cfg.brackets.max_degree)
            F2 = random_hamiltonian_form(ctx, s, rng, cfg.brackets.max_degree)
            total += 1
            failures += not graded_antisymmetry_check(F1, F2)
    rep.check(f"graded antisymmetry on {total} random pairs", failures == 0, f"{failures} failures")
    rep.results = {"identities": len(rows), "identities_passed": sum(r[3] for r in rows), "antisymmetry_pairs": total, "antisymmetry_failures": failures}
    return rep


def cmd_dw_check(cfg: RunConfig) -> Report:
    rep = Report("dw-check", cfg)
    model = _scalar_model(cfg)
    path = cfg.solution_path
    sol = load_solution_csv(path, model)
    pts = sol.points
    tol = cfg.dw.tolerance
    res = dw_equations_residual(model, sol, pts)
    rep.check("canonical equations: divergence family", res.max_divergence < tol, f"{res.max_divergence:.3e}")
    rep.check("canonical equations: gradient family", res.max_gradient < tol, f"{res.max_gradient:.3e}")
    ctx = model.context
    bracket_res = {}
    for a in range(model.m):
        forms = {
            f"y[{a}]": HorizontalForm.scalar(ctx, ctx.y(a)),
        }
        if model.n > 1:
            forms[f"p[.,{a}] w[.]"] = HorizontalForm.from_omega(ctx, {i: ctx.p(i, a) for i in range(model.n)})
        for name, F in forms.items():
            r = float(np.max(equation_of_motion_residual(F, sol, model, pts), initial=0.0))
            bracket_res[name] = r
            rep.check(f"bracket equation of motion for {name}", r < tol, f"{r:.3e}")
    hj = {}
    try:
        S = reference_hj_solution(model)
        rng = np.random.default_rng(cfg.run.seed)
        hj_pts = [(rng.uniform(-0.5, 0.5, model.n), rng.uniform(-1, 1, model.m)) for _ in range(16)]
        r = float(np.max(dwhj_residual(model, S, hj_pts)))
        hj = {"reference_solution": r}
        rep.check("HJ equation on the reference solution", r < tol, f"{r:.3e}")
    except InvalidParameter as exc:
        rep.warnings.append(f"HJ check skipped: {exc}")
    rep.results = {
        "solution": str(path),
        "points": len(pts),
        "canonical": {"divergence": res.max_divergence, "gradient": res.max_gradient},
        "bracket_form": bracket_res,
        "hamilton_jacobi": hj,
    }
    return rep


def cmd_quantum(cfg: RunConfig) -> Report:
    from .quantum import (
        ModeSuperposition,
        assemble_mode,
        conservation_residual,
        eigensolve,
        fd_eigensolve,
        gamma_form_agreement,
        oscillator_spectrum,
        schrodinger_residual,
        second_order_residual,
    )

    rep = Report("quantum", cfg)
    q = cfg.quantum
    model = _quantum_model(cfg)
    spectral = eigensolve(model, q.n_max, tol=q.tolerance)
    fd = fd_eigensolve(model, q.n_max, points=q.fd_points)
    closed = oscillator_spectrum(model, q.n_max) if model.oscillator_parameters() else [math.nan] * (q.n_max + 1)
    rows = []
    for N, (s, f, c) in enumerate(zip(spectral, fd, closed)):
        rel = abs(s.chi - f.chi) / abs(s.chi)
        rows.append([N, s.chi, f.chi, c, s.residual, rel])
    rep.table("spectrum", ["N", "chi_spectral", "chi_fd", "chi_closed_form", "certificate", "fd_relative"], rows)
    worst_cert = max(r[4] for r in rows)
    worst_fd = max(r[5] for r in rows)
    rep.check("spectral eigen-residual certificate", worst_cert < q.tolerance, f"{worst_cert:.3e}")
    rep.check("finite-difference oracle agreement", worst_fd < q.fd_tolerance, f"{worst_fd:.3e}")
    if model.is_free:
        dev = max(abs(r[1] / (model.kappa * model.m) - (r[0] + 0.5)) for r in rows)
        rep.check("chi_N = kappa m (N + 1/2)", dev < q.tolerance, f"{dev:.3e}")
    rng = np.random.default_rng(cfg.run.seed)
    g = cfg.quantum_grid
    pts = rng.uniform(g.lows, g.highs, size=(32, model.n + 1))
    ks = [np.zeros(model.n - 1)] if model.n > 1 and not q.k else []
    for kv in q.k:
        k = np.zeros(model.n - 1)
        if model.n > 1:
            k[0] = kv
        ks.append(k)
    if model.n == 1:
        ks = [np.zeros(0)]
    mode_rows = []
    modes = []
    for N in range(q.n_max + 1):
        for k in ks:
            mode = assemble_mode(model, N, k)
            W = ModeSuperposition.single(mode)
            modes.append(mode)
            sr = schrodinger_residual(model, W, pts).max()
            so = float(np.max(second_order_residual(model, W, pts)))
            ga = gamma_form_agreement(model, W, pts[:4])
            mode_rows.append([N, list(map(float, k)), mode.omega, mode.dispersion_defect(), sr, so, max(ga.values())])
    rep.table("modes", ["N", "k", "omega", "dispersion_defect", "schrodinger", "second_order", "gamma_form"], mode_rows)
    worst = max(max(r[4], r[5]) for r in mode_rows)
    rep.check("mode residuals (component system and second order)", worst < q.tolerance, f"{worst:.3e}")
    worst_g = max(r[6] for r in mode_rows)
    rep.check("Clifford form agrees with the components", worst_g < q.tolerance, f"{worst_g:.3e}")
    disp = max(abs(r[3]) for r in mode_rows)
    rep.check("dispersion relation", disp < 1e-12 * max(1.0, max(r[2] for r in mode_rows) ** 2), f"{disp:.3e}")
    # conservation needs a superposition: a single mode carries an x-independent current
    other_k = -0.5 * ks[0]
    if model.n > 1:
        other_k[0] += 0.3
    # same branch, different N: the cross terms make the current vary in x and y
    other = assemble_mode(model, 1, other_k)
    mix = ModeSuperposition.single(modes[0]) + ModeSuperposition.single(other, 0.7j)
    study = conservation_residual(model, mix, g.lows, g.highs, g.base_points, g.levels)
    rep.table("conservation", ["h", "residual", "order"], [[r["grid"], r["residual"], r["order"]] for r in study.to_json()])
    if max(study.residuals) < 1e-12:
        rep.warnings.append("conservation residual is at roundoff on every level; no order to estimate")
        ok = True
    else:
        ok = all(abs(o - 2.0) <= g.order_tolerance for o in study.orders)
    rep.check("conservation law converges at order 2", ok, "orders " + ", ".join(f"{o:.3f}" for o in study.orders))
    rep.results = {
        "spectrum": [{"N": r[0], "chi": r[1], "chi_fd": r[2], "certificate": r[4]} for r in rows],
        "max_mode_residual": worst,
        "conservation": study.to_json(),
    }
    return rep


def cmd_wkb(cfg: RunConfig) -> Report:
    from .quantum import WKBData, extract_wkb, ground_state_wkb, hbar_kappa_sweep, standing_ground_state, wkb_residual

    rep = Report("wkb", cfg)
    model = _quantum_model(cfg)
    rng = np.random.default_rng(cfg.run.seed)
    w = ground_state_wkb(model)
    omega0 = model.m / (2 * model.hbar)
    n = model.n
    P = np.empty((cfg.wkb.points, n + 1))
    P[:, 0] = rng.uniform(0.0, math.pi / omega0, cfg.wkb.points)
    P[0, 0] = 0.0  # |S| vanishes at t = 0: exercised as a flagged row
    P[:, 1:n] = rng.uniform(-1, 1, (cfg.wkb.points, n - 1))
    P[:, n] = rng.uniform(-1.5, 1.5, cfg.wkb.points)
    rows = []
    for p in P:
        main = float(wkb_residual(model, w, p[None, :], side_conditions=False).main[0])
        try:
            r = wkb_residual(model, w, p[None, :])
            rows.append([*map(float, p), main, float(r.side1[0]), float(r.side2[0]), ""])
        except SingularHJNorm as exc:
            rep.warnings.append(str(exc))
            rows.append([*map(float, p), main, None, None, "singular |S|"])
    rep.table("ground_state", [*(f"x{i}" for i in range(n)), "y", "main", "side1", "side2", "flag"], rows)
    worst = max(r[n + 1] for r in rows)
    rep.check("ground state solves the quasiclassical HJ equation", worst < 1e-10, f"{worst:.3e}")
    const = WKBData(S=w.S, R=lambda x, y: 1.0, dS_dx=w.dS_dx, dS_dy=w.dS_dy, R_yy=lambda x, y: 0.0)
    rc = wkb_residual(model, const, P[1:], side_conditions=False)
    diff = float(np.max(np.abs(rc.main - np.abs(rc.classical))))
    rep.check("constant R: main residual equals the classical HJ residual", diff == 0.0, f"{diff:.3e}")
    sweep = hbar_kappa_sweep(model, w, P[1:], cfg.wkb.kappas)
    rep.table(
        "hbar_kappa_sweep",
        ["hbar_kappa", "main", "classical", "quantum_term"],
        [list(map(float, r)) for r in zip(sweep.hbar_kappa, sweep.main, sweep.classical, sweep.quantum)],
    )
    rep.check("quantum term scales as (hbar kappa)^2", abs(sweep.exponent - 2) <= cfg.wkb.exponent_tolerance, f"exponent {sweep.exponent:.4f}")
    Psi = standing_ground_state(model)
    inside = P[(P[:, 0] > 0) & (P[:, 0] < math.pi / omega0)]
    try:
        ex = extract_wkb(model, Psi, inside)
        err = ex.round_trip_error(Psi)
        rep.check("extraction round trip on the standing ground state", err < 1e-8, f"{err:.3e}")
    except DecompositionFailure as exc:
        rep.check("extraction round trip on the standing ground state", False, str(exc))
        err = None
    rep.results = {"main_max": worst, "constant_R_difference": diff, "exponent": sweep.exponent, "round_trip": err}
    return rep


def cmd_vacuum(cfg: RunConfig) -> Report:
    rep = Report("vacuum", cfg)
    v = cfg.vacuum
    cc = vac.CutoffConfig(Q=v.Q, Vbox=v.vbox, n=cfg.model.n, hbar=cfg.model.hbar, m=cfg.model.mass)
    kappa_id = vac.kappa_from_cutoff(cc)
    kappa = 2 * kappa_id if v.counterfactual else None
    k_max = v.band * cc.m / cc.hbar
    ks = np.linspace(0.0, k_max, v.k_points) if v.k_points > 1 else np.array([0.0])
    rows = vac.compare(cc, ks, kappa)
    rep.table("modes", ["k", "functional_coeff", "composed_coeff", "ratio"], [[r.k, r.functional_coeff, r.composed_coeff, r.ratio] for r in rows])
    expected0 = 0.5 if v.counterfactual else 1.0
    rep.check(f"ratio at k = 0 equals {expected0}", rows[0].ratio == expected0, f"{rows[0].ratio!r}")
    scale = 1.0 / expected0
    closed = max(abs(scale * r.ratio - (cc.m / cc.hbar) / math.hypot(cc.m / cc.hbar, r.k)) for r in rows)
    rep.check("ratio matches (m / hbar) / omega_k", closed < 1e-12, f"{closed:.3e}")
    dev = max(abs(scale * r.ratio - 1) for r in rows)
    bound = v.band**2 / 2 * (1 + 0.02)
    rep.line(f"max |ratio - 1| over hbar|k|/m <= {v.band:g}: {dev:.4e} (leading order {v.band**2 / 2:.4e})")
    rep.check("long-wave deviation within hbar^2 k^2 / 2 m^2", dev <= bound, f"{dev:.3e} <= {bound:.3e}")
    rep.results = {"kappa": kappa or kappa_id, "kappa_identified": kappa_id, "max_deviation": dev, "ratio_at_zero": rows[0].ratio}
    return rep


COMMANDS = {
    "brackets": cmd_brackets,
    "dw-check": cmd_dw_check,
    "quantum": cmd_quantum,
    "wkb": cmd_wkb,
    "vacuum": cmd_vacuum,
}


# -- output -------------------------------------------------------------------------
def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serialisable: {type(x)}")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_outputs(rep: Report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    stem = rep.command.replace("-", "_")
    (out / f"{stem}.json").write_text(json.dumps(_clean(rep.to_json()), indent=2, default=_jsonable))
    for name, (header, rows) in rep.tables.items():
        with open(out / f"{stem}_{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="precanonical", description="Verification suites for precanonical field theory.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="INI file with dotted sections")
        p.add_argument("--out", type=Path, default=None, help="directory for JSON and CSV output")
        p.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
        p.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        rep = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameter) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidSolutionData as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PrecanonicalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    rep.results["elapsed_s"] = time.perf_counter() - start
    for wmsg in rep.warnings:
        log.warning(wmsg)
    if args.out is not None:
        write_outputs(rep, args.out)
    if args.json:
        print(json.dumps(_clean(rep.to_json()), indent=2, default=_jsonable))
    else:
        for line in rep.lines:
            print(line)
        print(f"{rep.command}: {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
