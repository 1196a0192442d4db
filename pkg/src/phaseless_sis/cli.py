"""Command-line entry point: ``phaseless-sis <command> --config FILE``.

Exit codes: 0 success, 1 input error, 2 inconclusive certificate,
3 reconstruction failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .generators import build_system, check_ghc, from_spec
from .harness import (TrialConfig, align_complex, error_complex, error_real, run_trials,
                      snr_sweep, sweep_table, trial_rng)
from .io import (read_coeffs_csv, read_samples_csv, write_json, write_report, write_result,
                 write_samples_csv, write_table_csv)
from .pdcr import ReconOptions, reconstruct_complex, reconstruct_real
from .sampling import SamplePlan, add_noise, draw_design, measure
from .signals import CausalSignal, ambiguous_pair, theta_grid_residual

log = logging.getLogger("phaseless_sis")

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_FAILED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def load_config(path) -> tuple[dict, Path]:
    """The parsed JSON object and the directory relative paths resolve against."""
    if path is None:
        return {}, Path.cwd()
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return data, p.resolve().parent


def _check_keys(cfg: dict, allowed: set[str], command: str) -> None:
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown {command} config keys: {sorted(extra)}")


def _resolve(base: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else base / p


def _precision(value, noiseless: bool):
    if value == "auto":
        return 160 if noiseless else None
    return value


# check-ghc

GHC_KEYS = {"generator", "system", "num_tuples", "tol", "seed"}


def cmd_check_ghc(cfg: dict, base: Path, args) -> int:
    _check_keys(cfg, GHC_KEYS, "check-ghc")
    if "generator" not in cfg or "system" not in cfg:
        raise ConfigError("check-ghc needs 'generator' and 'system'")
    system = build_system(from_spec(cfg["generator"]), cfg["system"])
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    report = check_ghc(system, int(cfg.get("num_tuples", 100)), seed, float(cfg.get("tol", 1e-10)))
    out = args.out / "ghc_report.json"
    write_json(out, {"system": cfg["system"], "generator": cfg["generator"], "seed": seed, **report.to_dict()})
    log.info("%s: %s (max |det| %.3g over %d tuples)", cfg["system"], report.verdict,
             report.max_abs_determinant, report.tuples_tested)
    return EXIT_OK if report.verdict == "plausible" else EXIT_INCONCLUSIVE


# reconstruct

RECON_KEYS = {"generator", "mode", "truth_csv", "samples_csv", "local", "snr_db", "precision",
              "tie_ratio", "anchor", "initial_phase", "seed"}


def cmd_reconstruct(cfg: dict, base: Path, args) -> int:
    _check_keys(cfg, RECON_KEYS, "reconstruct")
    if "generator" not in cfg:
        raise ConfigError("reconstruct needs 'generator'")
    if ("truth_csv" in cfg) == ("samples_csv" in cfg):
        raise ConfigError("reconstruct needs exactly one of 'truth_csv' and 'samples_csv'")
    gen = from_spec(cfg["generator"])
    mode = cfg.get("mode", "complex" if gen.is_complex else "real")
    if mode not in ("complex", "real"):
        raise ConfigError(f"mode must be 'complex' or 'real', got {mode!r}")
    density = 3 if mode == "complex" else 2
    snr = cfg.get("snr_db")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    truth = None
    if "truth_csv" in cfg:
        truth = read_coeffs_csv(_resolve(base, cfg["truth_csv"]))
        f = CausalSignal(truth, gen)
        truth = f.coeffs
        bits = _precision(cfg.get("precision", "auto"), snr is None)
        n_max = len(truth) - 1 if cfg.get("local", False) else len(truth) + gen.support - 2
        rng = trial_rng(seed, 0)
        design = draw_design(f, SamplePlan(density, n_max), rng)
        samples = measure(f, design, bits if snr is None else None)
        if snr is not None:
            samples = add_noise(samples, float(snr), rng)
        args.out.mkdir(parents=True, exist_ok=True)
        write_samples_csv(args.out / "samples.csv", samples)
    else:
        if snr is not None:
            raise ConfigError("'snr_db' only applies when synthesizing from 'truth_csv'")
        bits = cfg.get("precision", None)
        if bits == "auto":
            raise ConfigError("give 'precision' as bits or null when reading samples")
        samples = read_samples_csv(_resolve(base, cfg["samples_csv"]), bits)
    opts = ReconOptions(
        initial_phase=float(cfg.get("initial_phase", 0.0)),
        anchor=cfg.get("anchor", "max_phi"),
        tie_ratio=float(cfg.get("tie_ratio", 0.5)),
        precision=bits,
    )
    result = (reconstruct_complex if mode == "complex" else reconstruct_real)(samples, gen, opts)
    extra = {"mode": mode, "seed": seed, "precision": bits}
    if truth is not None and result.ok:
        score = error_complex if mode == "complex" else error_real
        extra["error"] = score(truth, result.leading(len(truth)))
        log.info("alignment error %.2f", extra["error"])
    write_result(args.out, result, extra)
    if not result.ok:
        log.error("reconstruction failed at step %s: %s", result.failed_step, result.message)
        return EXIT_FAILED
    return EXIT_OK


# montecarlo

MC_KEYS = {f.name for f in dataclasses.fields(TrialConfig)} - {"coeffs"} | {"coeffs_csv", "snr_list", "a_values"}


def trial_config(cfg: dict, base: Path, seed: int) -> TrialConfig:
    kwargs = {k: v for k, v in cfg.items() if k not in ("coeffs_csv", "snr_list", "a_values")}
    kwargs["seed"] = seed
    if "coeffs_csv" in cfg:
        kwargs["coeffs"] = tuple(read_coeffs_csv(_resolve(base, cfg["coeffs_csv"])))
    if "generator" not in kwargs:
        raise ConfigError("montecarlo needs 'generator'")
    return TrialConfig(**kwargs)


def cmd_montecarlo(cfg: dict, base: Path, args) -> int:
    _check_keys(cfg, MC_KEYS, "montecarlo")
    if args.seed is None:
        raise ConfigError("montecarlo requires --seed")
    tc = trial_config(cfg, base, args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if "snr_list" not in cfg:
        if "a_values" in cfg:
            raise ConfigError("'a_values' needs 'snr_list'")
        report = run_trials(tc, args.jobs)
        write_report(out, report)
        log.info("success rate %.4f at threshold %g", report.success_rate, tc.threshold)
        return EXIT_OK
    a_values = cfg.get("a_values", [tc.generator.get("a")])
    rows, runs = {}, []
    for a in a_values:
        gen_spec = dict(tc.generator, a=a) if a is not None else tc.generator
        sweep = snr_sweep(dataclasses.replace(tc, generator=gen_spec), cfg["snr_list"], args.jobs)
        rows[f"{a:g}" if a is not None else "signal"] = sweep
        runs.extend((a, snr, rep) for snr, rep in sweep)
    header, table = sweep_table(rows)
    write_table_csv(out / "table.csv", header, table)
    write_json(out / "report.json", {
        "config": {**tc.to_dict(), "snr_list": header, "a_values": a_values},
        "table": table,
        "runs": [{"a": a, "snr_db": snr, "success_rate": r.success_rate, "failures": r.failures()}
                 for a, snr, r in runs],
    })
    write_json(out / "timing.json", {"wall_clock_s": sum(r.wall_clock for _, _, r in runs)})
    with open(out / "errors.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "snr_db", "trial", "error", "status"])
        for a, snr, r in runs:
            for t, (e, s) in enumerate(zip(r.errors, r.statuses)):
                w.writerow([a, snr, t, repr(float(e)), s])
    with open(out / "cdf.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "snr_db", "x", "cdf"])
        for a, snr, r in runs:
            for x, p in r.cdf:
                w.writerow([a, snr, repr(float(x)), repr(float(p))])
    return EXIT_OK


# ambiguity-demo

DEMO_KEYS = {"alpha", "beta", "N", "free", "varphi", "grid_points", "tie_ratio", "seed"}


def cmd_ambiguity_demo(cfg: dict, base: Path, args) -> int:
    _check_keys(cfg, DEMO_KEYS, "ambiguity-demo")
    alpha, beta = float(cfg.get("alpha", 1.0)), float(cfg.get("beta", 0.0))
    n = int(cfg.get("N", 2))
    varphi = from_spec(cfg.get("varphi", {"kind": "cubic_bspline"}))
    f, g = ambiguous_pair(varphi, alpha, beta, n, complex(cfg.get("free", 1.0)))
    s = f.support
    grid = np.linspace(0.0, n + s, int(cfg.get("grid_points", 10_000)))
    mf, mg = np.abs(f(grid)), np.abs(g(grid))
    gap = float(np.max(np.abs(mf - mg)))
    residual = theta_grid_residual(f.coeffs, g.coeffs)

    # Reconstruct both from one design: equal magnitudes force equal outputs.
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    design = draw_design(f, SamplePlan(3, n + s - 1), trial_rng(seed, 0))
    opts = ReconOptions(tie_ratio=float(cfg.get("tie_ratio", 1.0)), precision=160)
    runs = {}
    for name, sig in (("f", f), ("f_tilde", g)):
        res = reconstruct_complex(measure(sig, design, 160), sig.generator, opts)
        rec = res.leading(len(sig))
        runs[name] = {
            "status": res.status,
            "coeffs": rec,
            "error_vs_f": error_complex(f.coeffs, rec) if res.ok else None,
            "error_vs_f_tilde": error_complex(g.coeffs, rec) if res.ok else None,
        }
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "magnitudes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "abs_f", "abs_f_tilde"])
        w.writerows([repr(float(x)), repr(float(a)), repr(float(b))] for x, a, b in zip(grid, mf, mg))
    write_json(args.out / "demo.json", {
        "alpha": alpha, "beta": beta, "N": n,
        "c": f.coeffs, "c_tilde": g.coeffs,
        "c_tilde_1_expected": complex(np.exp(1j * (2 * alpha - beta))),
        "max_magnitude_gap": gap,
        "theta_grid_residual": residual,
        "best_phase_alignment": align_complex(f.coeffs, g.coeffs),
        "reconstructions": runs,
    })
    log.info("max |f| - |f~| gap %.3g, alignment residual %.3f", gap, residual)
    return EXIT_OK


COMMANDS = {
    "check-ghc": cmd_check_ghc,
    "reconstruct": cmd_reconstruct,
    "montecarlo": cmd_montecarlo,
    "ambiguity-demo": cmd_ambiguity_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseless-sis",
                                     description="Phaseless sampling and reconstruction in shift-invariant spaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "ambiguity-demo")
        p.add_argument("--seed", type=int, help="master seed, overrides the config file")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        cfg, base = load_config(args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, base, args)
    except (ConfigError, ValueError, TypeError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
