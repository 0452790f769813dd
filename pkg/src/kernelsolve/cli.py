"""Command line entry point.

    kernelsolve <command> --config run.json [--set section.key=value ...]

Exit codes: 0 completed, 2 config error, 3 oracle self-test failure,
4 numerical abort.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisFamily, condition_check
from .config import ConfigError, growth_cap, load_config
from .export import dump_json, read_field, write_field, write_matrix
from .hamiltonian import Potential, generator_matrix
from .harness import (
    NumericalAbort,
    OracleFailure,
    check_condition_i,
    check_condition_ii,
    check_eq1,
    check_eq4_residual,
    check_eq4_vs_reference,
    check_lemma_expansion,
    compare,
    digest_of,
    oracle_self_tests,
)
from .kernel import KernelSetup, h_symbols, kernel_coeffs, propagation_symbol
from .numerics import ComplexField, FrequencyGrid, QuadratureRule, SpatialGrid, l2_norm
from .propagator import PropagationRequest, evolve
from .reference import PRESETS, EvolutionParams, analytic_oracle, crank_nicolson, split_step

log = logging.getLogger("kernelsolve")

COMMANDS = ("basis-check", "hmatrix", "kernel", "propagate", "reference", "verify", "compare")
EXIT_OK, EXIT_CONFIG, EXIT_ORACLE, EXIT_NUMERIC = 0, 2, 3, 4


class Run:
    """Objects built from a validated config plus the artifact bookkeeping."""

    def __init__(self, cfg: dict, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg["output"])
        self.artifacts: list[str] = []
        g = cfg["grids"]
        self.sg = SpatialGrid(float(g["x_min"]), float(g["x_max"]), int(g["n"]))
        self.fg = FrequencyGrid(float(g["gamma_max"]), int(g["m"]))
        b = cfg["basis"]
        self.family = BasisFamily(b["kind"], int(b["N"]), float(b["a"]), float(b["w"]))
        self.V = self._potential()
        q = cfg["quadrature"]
        self.quad = (QuadratureRule("gauss-hermite", order=int(q["order"]))
                     if q["kind"] == "gauss-hermite" else QuadratureRule("trapezoid", self.sg))
        self.eps = float(cfg["kernel"]["eps"])
        self.cap = growth_cap(cfg)
        # the output location does not change what is computed
        self.digest = digest_of({k: v for k, v in cfg.items() if k != "output"})

    def _potential(self) -> Potential:
        p = self.cfg["potential"]
        if p["kind"] == "finite-well":
            return Potential.finite_well(float(p["depth"]), float(p["half_width"]))
        if p["kind"] == "tabulated":
            return Potential("tabulated", samples=np.array(p["samples"], float), grid=self.sg)
        return Potential(p["kind"])

    def presets(self) -> list[tuple[str, complex, complex]]:
        ev = self.cfg["evolution"]
        if ev["alpha"] is not None:
            return [("custom", complex(*ev["alpha"]), complex(*ev["beta"]))]
        names = ev["preset"] if isinstance(ev["preset"], list) else [ev["preset"]]
        return [(n, *PRESETS[n]) for n in names]

    def params(self, name, alpha, beta, t=None) -> EvolutionParams:
        ev = self.cfg["evolution"]
        t = float(ev["t"] if t is None else t)
        return EvolutionParams.for_time(alpha, beta, max(t, ev["dt"]), float(ev["dt"]), name)

    def initial(self) -> ComplexField:
        ini = self.cfg["initial"]
        x = self.sg.points
        if ini["kind"] == "hermite":
            n = int(ini["n"])
            return ComplexField(BasisFamily("hermite", n + 1).table(x)[n], self.sg)
        x0, k0 = float(ini["x0"]), float(ini["k0"])
        return ComplexField(np.exp(-0.5 * (x - x0) ** 2 + 1j * k0 * x), self.sg)

    def oracle(self, alpha, beta, t) -> ComplexField | None:
        ini = self.cfg["initial"]
        if self.V.kind == "zero" and ini["kind"] == "gaussian":
            return analytic_oracle("free-phase", alpha, beta, t, self.sg,
                                   x0=float(ini["x0"]), k0=float(ini["k0"]))
        if self.V.kind == "zero" and ini["kind"] == "hermite" and ini["n"] == 0:
            return ComplexField(np.pi ** -0.25 * analytic_oracle(
                "free-gaussian-heat", alpha, beta, t, self.sg).samples, self.sg)
        if self.V.kind == "harmonic" and ini["kind"] == "hermite" and abs(alpha + beta) < 1e-14:
            return analytic_oracle("harmonic-eigenstate", alpha, beta, t, self.sg, n=int(ini["n"]))
        return None

    def setup(self, alpha, beta, label) -> KernelSetup:
        R = generator_matrix(self.family, self.V, alpha, beta, self.quad)
        return KernelSetup(self.family, R, self.fg, self.eps,
                           meta={"potential": self.V.describe(), "preset": label})

    def label(self, preset) -> str:
        return f"{self.family.kind} N={self.family.order} {preset}"

    def field(self, name, f: ComplexField) -> str:
        write_field(self.out / name, f)
        self.artifacts.append(name)
        return name

    def matrix(self, name, M) -> str:
        write_matrix(self.out / name, M)
        self.artifacts.append(name)
        return name

    def finish(self, records=(), results=None, selftests=None) -> dict:
        doc = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": self.command,
            "package": {"name": "kernelsolve", "version": __version__},
            "config": self.cfg,
            "config_digest": self.digest,
            "oracle_selftests": selftests or [],
            "records": [r.to_dict() for r in records],
            "results": _clean(results or {}),
            "artifacts": sorted(set(self.artifacts) | {"findings.json"}),
        }
        dump_json(self.out / "findings.json", doc)
        return doc


def _clean(obj):
    """Make results JSON-safe: complex -> [re, im], non-finite floats rejected."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "inf" if obj > 0 else "-inf" if obj < 0 else "nan"
        return float(obj)
    return obj


def cmd_basis_check(run: Run):
    rep = condition_check(run.family, run.sg, run.fg, run.eps)
    rec = check_condition_i(run.family, run.sg, run.fg, run.eps, {"label": run.label("-"),
                                                                    "config_digest": run.digest})
    run.matrix("gram.csv", rep.gram)
    return [rec], {"condition": rep.to_dict()}


def cmd_hmatrix(run: Run):
    results = {}
    for name, a, b in run.presets():
        R = generator_matrix(run.family, run.V, a, b, run.quad)
        run.matrix(f"hmatrix_{name}.csv", R.entries)
        results[name] = {"asymmetry": R.asymmetry(), "by_parts_discrepancy": R.by_parts_discrepancy}
    return [], results


def cmd_kernel(run: Run):
    results = {}
    for name, a, b in run.presets():
        st = run.setup(a, b, name)
        co = kernel_coeffs(st)
        sym = propagation_symbol(st, co, run.cfg["kernel"]["literal_eq4"])
        run.matrix(f"K_{name}.csv", co.K)
        run.matrix(f"mu_{name}.csv", co.mu)
        run.matrix(f"h_symbols_{name}.csv", h_symbols(st, co))
        run.field(f"symbol_{name}.csv", sym.field)
        results[name] = {"discarded_mass": list(co.discarded_mass),
                         "symbol_cross_check": sym.meta["cross_check"],
                         "symbol_max_real": float(np.max(sym.samples.real))}
    return [], results


def cmd_propagate(run: Run):
    ev = run.cfg["evolution"]
    times = ev["times"] if ev["times"] is not None else [ev["t"]]
    f = run.initial()
    results = {}
    for name, a, b in run.presets():
        st = run.setup(a, b, name)
        co = kernel_coeffs(st)
        sym = propagation_symbol(st, co, run.cfg["kernel"]["literal_eq4"])
        run.field(f"symbol_{name}.csv", sym.field)
        per = []
        for i, t in enumerate(times):
            u, rep = evolve(PropagationRequest(f, sym, float(t), None, run.cap))
            path = run.field(f"u_{name}_t{i}.csv", u)
            per.append({"t": float(t), "file": path, "norm": l2_norm(u), **rep.to_dict()})
        results[name] = {"times": per, "discarded_mass": list(co.discarded_mass)}
    return [], results


def cmd_reference(run: Run):
    f = run.initial()
    results = {}
    for name, a, b in run.presets():
        p = run.params(name, a, b)
        if run.cfg["evolution"]["solver"] == "split_step":
            u = split_step(f, run.V, p, run.cap)
        else:
            u = crank_nicolson(f, run.V, p)
        path = run.field(f"reference_{name}.csv", u)
        entry = {"file": path, "t": p.t, "dt": p.dt, "nsteps": p.nsteps,
                 "flags": {k: v for k, v in u.flags.items() if k != "solver"},
                 "solver": u.flags["solver"]}
        oracle = run.oracle(a, b, p.t)
        if oracle is not None:
            m = compare(u, oracle)
            entry["vs_oracle"] = {"rel_l2": m.rel_l2, "max_abs": m.max_abs}
        results[name] = entry
    return [], results


def cmd_verify(run: Run):
    tests = oracle_self_tests()
    if not all(t["passed"] for t in tests):
        failed = [t["name"] for t in tests if not t["passed"]]
        run.finish(selftests=tests)
        raise OracleFailure(f"oracle self-tests failed: {failed}")
    h = run.cfg["harness"]
    f = run.initial()
    common = {"config_digest": run.digest}
    records = [check_condition_i(run.family, run.sg, run.fg, run.eps,
                                 {"label": run.label("-"), **common})]
    for name, a, b in run.presets():
        tag = {"label": run.label(name), **common}
        p = run.params(name, a, b)
        st = run.setup(a, b, name)
        co = kernel_coeffs(st)
        sym = propagation_symbol(st, co, run.cfg["kernel"]["literal_eq4"])
        records.append(check_eq1(f, st, tag, probe=float(h["eq1_probe"])))
        records.append(check_lemma_expansion(st, int(h["trials"]), int(run.cfg["seeds"]["trials"]),
                                             run.sg, tag))
        t_res = max(p.t, float(h["fd_dt"]))
        records.append(check_eq4_residual(f, st, sym, run.V, p, t_res, run.cap,
                                          float(h["fd_dt"]), tag))
        u, _ = evolve(PropagationRequest(f, sym, p.t, None, run.cap))
        rec, refs = check_eq4_vs_reference(u, f, run.V, p, run.cap,
                                           run.oracle(a, b, p.t), tag)
        rec.artifacts.append(run.field(f"eq4_{name}.csv", u))
        for ref_name, ref in refs.items():
            rec.artifacts.append(run.field(f"{ref_name}_{name}.csv", ref))
        records.append(rec)
        rec2, drift = check_condition_ii(run.family, run.V, a, b, run.fg, run.eps,
                                         int(h["stability_extra"]), run.quad, tag)
        rec2.artifacts.append(run.matrix(f"K_drift_{name}.csv", drift))
        records.append(rec2)
        rec.artifacts.append(run.field(f"symbol_{name}.csv", sym.field))
    return records, {}, tests


def cmd_compare(run: Run):
    cmp = run.cfg["compare"]
    if not cmp["a"] or not cmp["b"]:
        raise ConfigError("config field compare.a/compare.b: both paths are required")
    try:
        a = read_field(cmp["a"])
        b = read_field(cmp["b"], a.grid)
    except (OSError, ValueError) as err:
        raise ConfigError(f"compare: {err}") from None
    m = compare(a, b)
    return [], {"rel_l2": m.rel_l2, "max_abs": m.max_abs, "overlap": m.overlap}


HANDLERS = {
    "basis-check": cmd_basis_check,
    "hmatrix": cmd_hmatrix,
    "kernel": cmd_kernel,
    "propagate": cmd_propagate,
    "reference": cmd_reference,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelsolve", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted override, e.g. basis.N=12")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides)
        run = Run(cfg, args.command)
    except (ConfigError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = HANDLERS[args.command](run)
        records, results = out[0], out[1]
        selftests = out[2] if len(out) > 2 else None
        run.finish(records, results, selftests)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleFailure as err:
        print(f"oracle failure: {err}", file=sys.stderr)
        return EXIT_ORACLE
    except (NumericalAbort, FloatingPointError) as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    for rec in records:
        print(rec.summary())
    if not records:
        print(f"{args.command}: wrote {len(run.artifacts)} artifact(s) to {run.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
