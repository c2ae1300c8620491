"""Command-line front end.

Eight subcommands: four batch experiments (``phase-rank``, ``phase-channels``,
``stability``, ``arch-compare``), the array eigenvalue demo, the invariant
suite, and a single-shot ``sample`` / ``recover`` pair that round-trips a
measurement archive.

Precedence for every tunable: explicit flag > config-file key > scale preset
> built-in default.  Exit codes: 0 success, 1 failed checks (invariant or
non-converged recovery), 2 bad usage or config.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .harness import (
    ARRAY_HEADER,
    EXPERIMENT_HEADER,
    ExperimentSpec,
    gen_spike,
    run_arch_compare,
    run_array_demo,
    run_invariant_suite,
    run_phase_transition,
    run_stability,
)
from .operators import add_noise, make_operator, measure, sigma_for_snr
from .recovery import SolverConfig, relative_error, solve_nuclear_equality, solve_nuclear_noisy
from .seeding import seed_to_int
from .signal_model import gen_correlated_bandlimited, gen_lowrank_gaussian
from .diversify import gen_mixer
from .textio import (
    emit_plot_script,
    format_value,
    load_config,
    read_measurement_archive,
    write_csv,
    write_measurement_archive,
)

__all__ = ["main"]

_SCALES = {
    "desk": {"M": 32, "W": 128, "trials": 20, "target": 0.9},
    "paper": {"M": 100, "W": 1024, "trials": 100, "target": 0.99},
}

_RUNNERS = {
    "phase_rank": run_phase_transition,
    "phase_channels": run_phase_transition,
    "stability": run_stability,
    "arch_compare": run_arch_compare,
}


def _parse_grid(text: str) -> tuple:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        v = float(tok)
        vals.append(int(v) if v.is_integer() and not math.isinf(v) else v)
    if not vals:
        raise ValueError(f"empty grid: {text!r}")
    return tuple(vals)


class _Resolver:
    """flag > config key > scale preset > default, with casting from text."""

    def __init__(self, args, scale_keys=("M", "W", "trials", "target")):
        self.args = args
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}
        name = self.pick("scale", str, "desk")
        if name not in _SCALES:
            raise ValueError(f"unknown scale {name!r} (choose from {sorted(_SCALES)})")
        self.scale = {k: v for k, v in _SCALES[name].items() if k in scale_keys}

    def pick(self, key, cast, default):
        v = getattr(self.args, key, None)
        if v is not None:
            return cast(v) if isinstance(v, str) else v
        if key in self.cfg:
            try:
                return cast(self.cfg[key])
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from None
        if key in getattr(self, "scale", {}):
            return self.scale[key]
        return default

    def solver(self, rho=10.0, max_iters=20000, tol=1e-8) -> SolverConfig:
        tol = self.pick("tol", float, tol)
        return SolverConfig(
            max_iters=self.pick("max_iters", int, max_iters),
            admm_rho=self.pick("rho", float, rho),
            tol_primal=tol,
            tol_dual=tol,
        )


def _emit(rows, header, out: Path, kind: str) -> None:
    write_csv(out, header, rows)
    script = emit_plot_script(out, kind)
    print(f"wrote {out} ({len(rows)} rows) and {script}")


def _print_rows(rows, cols, header) -> None:
    idx = [header.index(c) for c in cols]
    print("  ".join(cols))
    for row in rows:
        print("  ".join(format_value(row[i]) for i in idx))


def _cmd_experiment(args, kind: str) -> int:
    r = _Resolver(args)
    defaults = {
        "phase_rank": {"grid": "1,2,3,4", "R": 2, "eta": 3.5},
        "phase_channels": {"grid": "8,16,32", "R": 2, "eta": 3.5},
        "stability": {"grid": "20,30,40,inf", "R": 4, "eta": 3.5},
        "arch_compare": {"grid": "", "R": 3, "eta": 4.0},
    }[kind]
    grid = r.pick("grid", _parse_grid, None)
    if grid is None:
        grid = _parse_grid(defaults["grid"]) if defaults["grid"] else ()
    omega = r.pick("omega", int, 0) or None
    spec = ExperimentSpec(
        kind=kind,
        M=r.pick("M", int, 32),
        W=r.pick("W", int, 128),
        R=r.pick("R", int, defaults["R"]),
        grid=grid,
        trials=r.pick("trials", int, 20),
        success_threshold=r.pick("threshold", float, 1e-2),
        target=r.pick("target", float, 0.9),
        seed=r.pick("seed", int, 0),
        variant=r.pick("variant", str, "demodulator"),
        solver=r.solver(),
        eta=r.pick("eta", float, defaults["eta"]),
        omega=omega,
        stability_axis=r.pick("axis", str, "snr"),
        snr_fixed=r.pick("snr_fixed", float, 40.0),
        spike_support=r.pick("support", int, 4),
        threads=r.pick("threads", int, 1),
    )
    t0 = time.perf_counter()
    rows = _RUNNERS[kind](spec)
    print(f"[{kind}] total {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    out = Path(r.pick("out", str, f"{kind}.csv"))
    _emit(rows, EXPERIMENT_HEADER, out, kind)
    show = {
        "phase_rank": ["R", "omega", "eta", "success_fraction", "feasible"],
        "phase_channels": ["M", "omega", "eta", "success_fraction", "feasible"],
        "stability": ["snr_db", "omega", "median_rel_error_db", "success_fraction"],
        "arch_compare": ["variant", "ensemble", "preprocessed", "omega",
                         "success_fraction"],
    }[kind]
    _print_rows(rows, show, EXPERIMENT_HEADER)
    return 0


def _cmd_array_demo(args) -> int:
    r = _Resolver(args, scale_keys=())
    spec = ExperimentSpec(
        kind="array_demo",
        seed=r.pick("seed", int, 0),
        theta=r.pick("theta", float, math.pi / 4),
        f_c=r.pick("fc", float, 5e9),
        bandwidth=r.pick("bandwidth", float, 100e6),
        array_M=r.pick("channels", int, 101),
        quad_points=r.pick("quad_points", int, 512),
        ratio=r.pick("ratio", float, 1e4),
    )
    rows = run_array_demo(spec)
    out = Path(r.pick("out", str, "array_demo.csv"))
    _emit(rows, ARRAY_HEADER, out, "array_demo")
    eff = rows[0][4]
    print(f"effective rank at 1:{spec.ratio:g} -> {eff}")
    _print_rows(rows[: max(eff + 2, 5)],
                ["index", "normalized", "log10_normalized"], ARRAY_HEADER)
    return 0


def _cmd_invariants(args) -> int:
    r = _Resolver(args, scale_keys=())
    seed = r.pick("seed", int, 0)
    checks = run_invariant_suite(seed, inject_fault=args.inject_fault)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
             for name, ok, detail in checks]
    report = "\n".join(lines) + "\n"
    print(report, end="")
    out = r.pick("out", str, "")
    if out:
        Path(out).write_text(report, encoding="utf-8")
        print(f"wrote {out}")
    n_bad = sum(not ok for _, ok, _ in checks)
    print(f"{len(checks) - n_bad}/{len(checks)} invariant checks passed")
    return 0 if n_bad == 0 else 1


def _make_truth_ensemble(kind: str, M: int, W: int, R: int, support: int,
                         seed: int) -> tuple[np.ndarray, dict]:
    if kind == "lowrank-gaussian":
        return gen_lowrank_gaussian(M, W, R, seed), {
            "kind": kind, "R": R, "seed": seed}
    if kind == "spike":
        return gen_spike(M, W, support, seed), {
            "kind": kind, "support": support, "seed": seed}
    if kind == "bandlimited":
        if W % 2 == 0:
            raise ValueError("bandlimited ensembles need an odd window length")
        mixing = gen_mixer(M, seed_to_int(seed, "mixing")).A[:, :R]
        X, _ = gen_correlated_bandlimited(mixing, R, (W - 1) // 2,
                                          seed_to_int(seed, "coeffs"))
        return X, {"kind": kind, "R": R, "seed": seed}
    raise ValueError(f"unknown ensemble {kind!r}")


def _truth_matrix(rec) -> np.ndarray | None:
    if not rec.truth:
        return None
    t = {k: v for k, v in rec.truth.items()}
    X, _ = _make_truth_ensemble(
        str(t["kind"]), rec.M, rec.W, int(t.get("R", 0) or 0),
        int(t.get("support", 0) or 0), int(t["seed"]))
    return X


def _cmd_sample(args) -> int:
    r = _Resolver(args, scale_keys=())
    M = r.pick("M", int, 8)
    W = r.pick("W", int, 32)
    R = r.pick("R", int, 2)
    omega = r.pick("omega", int, 8)
    variant = r.pick("variant", str, "demodulator")
    ensemble = r.pick("ensemble", str, "lowrank-gaussian")
    support = r.pick("support", int, 4)
    snr = r.pick("snr", float, math.inf)
    seed = r.pick("seed", int, 0)
    X0, truth = _make_truth_ensemble(ensemble, M, W, R, support,
                                     seed_to_int(seed, "sample", "ensemble"))
    op = make_operator(variant, M, W, omega, seed_to_int(seed, "sample", "operator"))
    rec = measure(op, X0, truth=truth)
    if math.isfinite(snr):
        sigma = sigma_for_snr(rec.y, snr)
        rec = add_noise(rec, sigma, seed_to_int(seed, "sample", "noise"))
    out = Path(r.pick("out", str, "measurement.txt"))
    write_measurement_archive(out, rec)
    print(f"wrote {out}: {variant} M={M} W={W} omega={omega} L={rec.L} "
          f"snr={format_value(snr)}")
    return 0


def _cmd_recover(args) -> int:
    r = _Resolver(args, scale_keys=())
    rec = read_measurement_archive(args.archive)
    op = make_operator(rec.variant, rec.M, rec.W, rec.omega, rec.op_seed)
    X_true = _truth_matrix(rec)
    if rec.delta > 0:
        cfg = replace(r.solver(rho=5.0), delta=rec.delta)
        res = solve_nuclear_noisy(op, rec.y, cfg, X_true=X_true)
        mode = f"ball-constrained (delta={rec.delta:.6g})"
    else:
        res = solve_nuclear_equality(op, rec.y, r.solver(), X_true=X_true)
        mode = "equality-constrained"
    print(f"{mode}: iters={res.iters} converged={res.converged} "
          f"nuclear_norm={res.objective:.6g}")
    if res.rel_error is not None:
        print(f"relative error vs archived truth: {res.rel_error:.3e}")
    out = r.pick("out", str, "")
    if out:
        header = [f"x{j}" for j in range(rec.W)]
        write_csv(Path(out), header, [list(map(float, row)) for row in res.X_hat])
        print(f"wrote {out}")
    if X_true is not None and rec.delta == 0:
        ok = relative_error(res.X_hat, X_true) <= r.pick("threshold", float, 1e-2)
        return 0 if (res.converged and ok) else 1
    return 0 if res.converged else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="output path")
    p.add_argument("--threads", type=int, help="worker threads per point")
    p.add_argument("--scale", choices=sorted(_SCALES),
                   help="size preset: desk (default) or paper")
    p.add_argument("--trials", type=int, help="trials per grid point")
    p.add_argument("--target", type=float, help="required success fraction")
    p.add_argument("--threshold", type=float,
                   help="relative-error cutoff counted as success")
    p.add_argument("--rho", type=float, help="ADMM penalty parameter")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", type=float, help="ADMM stopping tolerance")
    p.add_argument("--channels", "-M", dest="M", type=int, help="channel count")
    p.add_argument("--window", "-W", dest="W", type=int, help="window length")
    p.add_argument("--rank", "-R", dest="R", type=int, help="ensemble rank")
    p.add_argument("--omega", type=int, help="per-channel sampling rate")
    p.add_argument("--eta", type=float, help="oversampling factor target")
    p.add_argument("--variant", choices=("mask", "demodulator",
                                         "universal-mask",
                                         "universal-demodulator"))
    p.add_argument("--grid", help="comma-separated grid points")
    p.add_argument("--support", type=int, help="spike burst length")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensamp",
        description="compressive sampling experiments for correlated "
                    "low-rank multichannel ensembles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, kind in (("phase-rank", "phase_rank"),
                       ("phase-channels", "phase_channels")):
        p = sub.add_parser(name, help=f"minimal sampling rate vs "
                           f"{'rank' if kind == 'phase_rank' else 'channel count'}")
        _add_common(p)
        p.set_defaults(func=lambda a, k=kind: _cmd_experiment(a, k))

    p = sub.add_parser("stability", help="recovery error vs noise level")
    _add_common(p)
    p.add_argument("--axis", choices=("snr", "eta"),
                   help="sweep SNR at fixed eta (default) or eta at fixed SNR")
    p.add_argument("--snr-fixed", dest="snr_fixed", type=float)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "stability"))

    p = sub.add_parser("arch-compare",
                       help="mask vs demodulator on incoherent and spike inputs")
    _add_common(p)
    p.set_defaults(func=lambda a: _cmd_experiment(a, "arch_compare"))

    p = sub.add_parser("array-demo",
                       help="eigenvalues of the band-integrated steering covariance")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path")
    p.add_argument("--theta", type=float, help="arrival angle (radians)")
    p.add_argument("--fc", type=float, help="carrier frequency (Hz)")
    p.add_argument("--bandwidth", type=float, help="signal bandwidth (Hz)")
    p.add_argument("--channels", "-M", dest="channels", type=int)
    p.add_argument("--quad-points", dest="quad_points", type=int)
    p.add_argument("--ratio", type=float, help="eigenvalue cutoff ratio")
    p.set_defaults(func=_cmd_array_demo)

    p = sub.add_parser("invariants", help="run the self-check suite")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="also write the report to this path")
    p.add_argument("--inject-fault", choices=("adjoint-sign",),
                   help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_invariants)

    p = sub.add_parser("sample", help="acquire one ensemble into an archive")
    _add_common(p)
    p.add_argument("--ensemble", choices=("lowrank-gaussian", "spike",
                                          "bandlimited"))
    p.add_argument("--snr", type=float, help="measurement SNR in dB (default: clean)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("recover", help="solve the recovery program for an archive")
    p.add_argument("archive", help="measurement archive written by `ensamp sample`")
    _add_common(p)
    p.set_defaults(func=_cmd_recover)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
