"""Command-line interface: one binary, five subcommands.

    brine inspect        evaluate Xi, theta*, p_pm and the functionals
    brine phase-diagram  trace h_pm(c), emit CSV + SVG
    brine minimize       solve the variational problem, emit JSON
    brine simulate       run Monte Carlo chains, emit SampleStats JSON
    brine validate       exact-enumeration cross-checks, exit 0 iff all pass

Config precedence: command-line flags > --config JSON file > defaults.
Every command with an --out target writes a run manifest alongside its
outputs.  Exit codes: 0 success, 2 validation error, 3 degenerate
(non-unique) solution, 4 infeasible concentration.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__, _backend
from .magnetization import (MeanFieldModel, Onsager2DModel, TabulatedModel,
                            onsager_spontaneous_m)
from .lattice import (ChainConfig, exact_enumerate, run_chain, merge_stats,
                      tv_distance)
from .params import BoundaryCondition, InvalidParamsError, ModelParams
from .salt import InfeasibleConcentrationError, optimal_theta, xi
from .svgplot import phase_diagram_svg
from .variational import (DegenerateMinimizerError, NoCoexistenceError,
                          big_g, minimize_g, phase_boundaries, script_g)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_INFEASIBLE = 4


def _fmt(x):
    if isinstance(x, float):
        return float(f"{x:.17g}")
    return x


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_fmt)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(command: str, config: dict, outputs: list[str],
                   seeds=None) -> str:
    """Record what was run and what it produced, next to the outputs."""
    manifest = {
        "command": command,
        "version": __version__,
        "backend": _backend.BACKEND,
        "config": config,
        "seeds": seeds or [],
        "outputs": {os.path.basename(p): _sha256(p) for p in outputs},
    }
    path = outputs[0] + ".manifest.json" if outputs else f"{command}.manifest.json"
    with open(path, "w") as f:
        f.write(_json_dump(manifest) + "\n")
    return path


def build_model(name: str, J: float, d: int):
    if name == "mean-field":
        return MeanFieldModel(J, d)
    if name == "onsager":
        if d != 2:
            raise InvalidParamsError("onsager model requires d=2")
        return Onsager2DModel(J)
    if name.startswith("tabulated:"):
        return TabulatedModel.from_csv(name.split(":", 1)[1], J=J)
    raise InvalidParamsError(
        f"unknown model {name!r}; use mean-field, onsager or tabulated:<csv>")


_REQUIRED = object()


def _resolve(args, config_keys):
    """Merge CLI flags over a JSON config file over parser defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            file_cfg = json.load(f)
    resolved = {}
    for key, default in config_keys.items():
        cli_val = getattr(args, key.replace("-", "_"), None)
        if cli_val is not None:
            resolved[key] = cli_val
        elif key in file_cfg:
            resolved[key] = file_cfg[key]
        else:
            resolved[key] = default
    missing = [k for k, v in resolved.items() if v is _REQUIRED]
    if missing:
        raise InvalidParamsError(f"missing required parameter(s): {missing}")
    return {k: (None if v is _REQUIRED else v) for k, v in resolved.items()}


def _emit(args, command, payload: dict, config: dict, seeds=None) -> None:
    text = _json_dump(payload) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as f:
            f.write(text)
        write_manifest(command, config, [args.out], seeds)
    else:
        sys.stdout.write(text)


def cmd_inspect(args) -> int:
    cfg = _resolve(args, {"J": _REQUIRED, "h": _REQUIRED, "kappa": _REQUIRED,
                          "c": _REQUIRED, "m": _REQUIRED, "d": 2,
                          "model": "mean-field"})
    params = ModelParams.from_dict({**cfg, "bc": "plus"})
    model = build_model(cfg["model"], params.J, params.d)
    m = float(cfg["m"])
    if params.c > 0.0:
        split = optimal_theta(m, params.c, params.kappa)
        theta, p_plus, p_minus = split.theta, split.p_plus, split.p_minus
    else:
        theta, p_plus, p_minus = 0.5 * (1.0 + m), 0.0, 0.0
    payload = {
        "m": m, "xi": xi(m, theta, params.c), "theta_star": theta,
        "p_plus": p_plus, "p_minus": p_minus,
        "script_g": script_g(m, theta, params, model),
        "big_g": big_g(m, params, model),
        "free_energy": model.free_energy(m),
        "m_star": model.spontaneous_m,
    }
    _emit(args, "inspect", payload, cfg)
    return EXIT_OK


def cmd_phase_diagram(args) -> int:
    cfg = _resolve(args, {"J": _REQUIRED, "kappa": _REQUIRED, "d": 2,
                          "c-min": 0.0, "c-max": 0.25, "c-steps": 26,
                          "model": "onsager", "out": None})
    model = build_model(cfg["model"], float(cfg["J"]), int(cfg["d"]))
    c_grid = np.linspace(float(cfg["c-min"]), float(cfg["c-max"]),
                         int(cfg["c-steps"]))
    boundary = phase_boundaries(c_grid, float(cfg["J"]), float(cfg["kappa"]),
                                model)
    out = cfg["out"]
    csv_path, svg_path = out + ".csv", out + ".svg"
    with open(csv_path, "w", newline="") as f:
        csv.writer(f).writerows(boundary.to_csv_rows())
    phase_diagram_svg(boundary.rows, svg_path)
    write_manifest("phase-diagram", cfg, [csv_path, svg_path])
    print(f"wrote {csv_path}, {svg_path}")
    return EXIT_OK


def cmd_minimize(args) -> int:
    cfg = _resolve(args, {"J": _REQUIRED, "h": _REQUIRED, "kappa": _REQUIRED,
                          "c": _REQUIRED, "d": 2, "bc": "plus",
                          "model": "mean-field"})
    params = ModelParams.from_dict(cfg)
    model = build_model(cfg["model"], params.J, params.d)
    solution = minimize_g(params, model)
    _emit(args, "minimize", solution.to_dict(), cfg)
    return EXIT_OK


def _chain_job(job):
    config, index, bias = job
    return run_chain(config, accept_bias=bias, chain_index=index)


def cmd_simulate(args) -> int:
    cfg = _resolve(args, {"J": _REQUIRED, "h": _REQUIRED, "kappa": _REQUIRED,
                          "c": _REQUIRED, "d": 2, "bc": "plus",
                          "L": _REQUIRED, "seed": 0,
                          "sweeps": 10000, "burn-in": None, "thin": 10,
                          "chains": 1})
    params = ModelParams.from_dict(
        {k: cfg[k] for k in ("J", "h", "kappa", "c", "d", "bc")})
    config = ChainConfig(params, L=int(cfg["L"]), seed=int(cfg["seed"]),
                         sweeps=int(cfg["sweeps"]),
                         burn_in=None if cfg["burn-in"] is None
                         else int(cfg["burn-in"]),
                         thinning=int(cfg["thin"]))
    n_chains = int(cfg["chains"])
    keep = bool(getattr(args, "samples_csv", None))
    if n_chains == 1:
        stats = [run_chain(config, keep_samples=keep)]
    else:
        threads = int(os.environ.get("BRINE_THREADS", n_chains) or n_chains)
        jobs = [(config, i, 0.0) for i in range(n_chains)]
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=min(threads, n_chains)) as pool:
            stats = list(pool.map(_chain_job, jobs))
    merged = merge_stats(stats)
    if keep and stats[0].samples_m is not None:
        with open(args.samples_csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["sweep", "M", "Q"])
            burn, thin = config.resolved_burn_in, config.thinning
            for i, (m, q) in enumerate(zip(stats[0].samples_m,
                                           stats[0].samples_q)):
                w.writerow([burn + i * thin, int(m), int(q)])
    seeds = [f"{cfg['seed']}+jump{i}" for i in range(n_chains)]
    _emit(args, "simulate", merged.to_dict(), cfg, seeds=seeds)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _resolve(args, {"L": 3, "seed": 2024, "sweeps": 200000,
                          "perturb-acceptance": 0.0})
    L, seed = int(cfg["L"]), int(cfg["seed"])
    sweeps = int(cfg["sweeps"])
    bias = float(cfg["perturb-acceptance"])
    n = L ** 2
    params = ModelParams(J=0.4, h=-0.05, kappa=1.0, c=2 / n, d=2)
    checks = []

    def record(name, ok, detail):
        checks.append((name, ok))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    exact = exact_enumerate(params, L)
    chain = ChainConfig(params, L=L, seed=seed, sweeps=sweeps,
                        burn_in=sweeps // 10, thinning=1)
    stats = run_chain(chain, accept_bias=bias)
    emp = {k: v / stats.n_samples for k, v in stats.joint_mq.items()}
    tv = tv_distance(emp, exact.joint_mq)
    record("sampler-vs-exact TV", tv <= 0.01, f"TV={tv:.5f} (<= 0.01)")

    worst = 0.0
    rng = np.random.default_rng(0)
    for idx in rng.integers(0, exact.sigma.shape[0], size=8):
        probs = exact.salt_conditional(int(idx))
        plus = (1 + exact.sigma[idx].astype(np.int64)) // 2
        q_vals = exact.salt_combos.astype(np.int64) @ plus
        for q in np.unique(q_vals):
            worst = max(worst, float(np.ptp(probs[q_vals == q])))
    record("equal-weight salt configs", worst <= 1e-14,
           f"max spread={worst:.2e} (exact)")

    worst = 0.0
    for M in sorted({int(m) for m in exact.M}):
        full = exact.conditional_spin_given_M(M)
        pure = exact.ising_conditional_given_M(M)
        worst = max(worst, max(abs(full[k] - pure[k]) for k in full))
    record("conditional-given-M equals Ising", worst <= 1e-12,
           f"max diff={worst:.2e}")

    null = run_chain(ChainConfig(params.replace(kappa=0.0), L=L, seed=seed,
                                 sweeps=sweeps // 2, burn_in=sweeps // 20,
                                 thinning=1))
    gap = abs(null.occ_plus - null.occ_minus)
    tol = 3.0 * math.hypot(null.stderr_occ_plus, null.stderr_occ_minus)
    record("kappa=0 null coupling", gap <= tol,
           f"|occ+ - occ-|={gap:.5f} (<= {tol:.5f})")

    from .variational import mole_fractions
    worst = 0.0
    for m, c, kappa in [(0.0, 0.2, 1.0), (0.5, 0.1, 2.0), (-0.7, 0.05, 0.5)]:
        split = optimal_theta(m, c, kappa)
        q = mole_fractions(m, c, kappa)
        worst = max(worst, abs(split.p_plus - q.q_plus),
                    abs(split.p_minus - q.q_minus))
    record("theta-solver equals mole fractions", worst <= 1e-10,
           f"max diff={worst:.2e}")

    ok = all(flag for _, flag in checks)
    print("validate:", "all checks passed" if ok else "CHECKS FAILED")
    return EXIT_OK if ok else 1


def _add_common_params(sp, keys):
    for key in keys:
        if key in ("d", "L", "seed", "sweeps", "chains", "c-steps"):
            sp.add_argument(f"--{key}", type=int)
        elif key in ("bc", "model"):
            sp.add_argument(f"--{key}", type=str)
        else:
            sp.add_argument(f"--{key}", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brine",
        description="Equilibrium theory and Monte Carlo validation of a "
                    "brine lattice model")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("inspect", help="evaluate Xi, theta*, p_pm, G at (m,h,c,kappa)")
    _add_common_params(sp, ["J", "h", "kappa", "c", "m", "d", "model"])
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_inspect)

    sp = sub.add_parser("phase-diagram", help="trace h_pm(c); CSV + SVG")
    _add_common_params(sp, ["J", "kappa", "d", "c-min", "c-max", "c-steps",
                            "model"])
    sp.add_argument("--config")
    sp.add_argument("--out", required=True, help="output path prefix")
    sp.set_defaults(func=cmd_phase_diagram)

    sp = sub.add_parser("minimize", help="solve the variational problem")
    _add_common_params(sp, ["J", "h", "kappa", "c", "d", "bc", "model"])
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("simulate", help="run Monte Carlo chains")
    _add_common_params(sp, ["J", "h", "kappa", "c", "d", "bc", "L", "seed",
                            "sweeps", "chains"])
    sp.add_argument("--burn-in", type=int)
    sp.add_argument("--thin", type=int)
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.add_argument("--samples-csv", help="also write per-sample sweep,M,Q")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="exact-enumeration cross-checks")
    sp.add_argument("--L", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sweeps", type=int)
    sp.add_argument("--perturb-acceptance", type=float,
                    help="negative-control bias on the log acceptance ratio")
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateMinimizerError as exc:
        print(_json_dump({"error": "degenerate", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_DEGENERATE
    except InfeasibleConcentrationError as exc:
        print(_json_dump({"error": "infeasible", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidParamsError, NoCoexistenceError, ValueError,
            OSError) as exc:
        print(_json_dump({"error": "invalid", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
