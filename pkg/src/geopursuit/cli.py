"""Command-line front end.

Subcommands: gen-signal, decompose, reconstruct, geometry, curve, nae,
image. Every run writes a JSON manifest recording the resolved
configuration, inputs, outputs, and wall time; rerunning the same command
reproduces data outputs byte-identically (wall time lives only in the
manifest). Numeric CSV output uses 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .affine1d import Affine1DDictionary, TauAdicGrid
from .aniso2d import Aniso2DDictionary, Grid2DSpec
from .core import SignalBuffer, load_signal, save_signal
from .experiments import (BurstSignalSpec, beta_surrogate, convergence_curve,
                          image_harness, make_test_image, nae)
from .geometry import (christoffel, condition_bound, density_radius, metric,
                       weakness_factors)
from .pursuit import Decomposition, PursuitConfig, reconstruct, run


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _load_grid(path):
    spec = json.loads(Path(path).read_text())
    if "b0" in spec:
        return TauAdicGrid.from_json(json.dumps(spec))
    if "Nx" in spec:
        return Grid2DSpec.from_json(json.dumps(spec))
    raise ValueError(f"{path}: unrecognized grid spec (expected tau-adic or 2-D keys)")


def _dictionary_for(grid):
    if isinstance(grid, TauAdicGrid):
        return Affine1DDictionary(grid.n)
    return Aniso2DDictionary((grid.nx, grid.ny))


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("GEOPURSUIT_THREADS")
    return int(env) if env else 1


def _write_manifest(args, command: str, config: dict, inputs: list, outputs: list,
                    wall_time: float) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "threads": _resolve_threads(args),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "wall_time_s": wall_time,
    }
    path = args.manifest
    if path is None:
        path = (str(outputs[0]) + ".manifest.json") if outputs else "run-manifest.json"
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def _add_common(sub):
    sub.add_argument("--threads", type=int, default=None,
                     help="worker threads (results are independent of this; "
                          "falls back to GEOPURSUIT_THREADS)")
    sub.add_argument("--manifest", default=None, help="manifest output path")


def _pursuit_config(args) -> PursuitConfig:
    return PursuitConfig(mode=args.mode, alpha=args.alpha, kappa=args.kappa,
                         chi=args.chi, max_iterations=args.max_iters,
                         optimize_scope=args.scope)


def _add_pursuit_flags(sub, default_iters=100):
    sub.add_argument("--mode", choices=("dmp", "gmp"), default="dmp")
    sub.add_argument("--alpha", type=float, default=1.0)
    sub.add_argument("--kappa", type=int, default=10)
    sub.add_argument("--chi", type=float, default=0.1)
    sub.add_argument("--max-iters", type=int, default=default_iters)
    sub.add_argument("--scope", choices=("best_only", "all_atoms"),
                     default="best_only")


def cmd_gen_signal(args) -> tuple[dict, list, list]:
    spec = BurstSignalSpec(n=args.n, n_bursts=args.bursts, kind=args.signal_class)
    buf = spec.sample(args.seed)
    save_signal(buf, args.out)
    config = {"class": args.signal_class, "n": args.n, "bursts": args.bursts}
    return config, [], [args.out]


def cmd_decompose(args) -> tuple[dict, list, list]:
    grid = _load_grid(args.grid)
    dictionary = _dictionary_for(grid)
    signal = load_signal(args.infile)
    config = _pursuit_config(args)
    decomposition = run(signal, dictionary, grid, config)
    decomposition.to_jsonl(args.out)
    outputs = [args.out]
    if args.csv:
        decomposition.to_csv(args.csv)
        outputs.append(args.csv)
    if args.residual_out:
        save_signal(decomposition.final_residual, args.residual_out)
        outputs.append(args.residual_out)
    cfg = {"mode": config.mode, "alpha": config.alpha, "kappa": config.kappa,
           "chi": config.chi, "max_iterations": config.max_iterations,
           "optimize_scope": config.optimize_scope, "grid": json.loads(grid.to_json())}
    return cfg, [args.grid, args.infile], outputs


def cmd_reconstruct(args) -> tuple[dict, list, list]:
    grid = _load_grid(args.grid)
    dictionary = _dictionary_for(grid)
    shape = (grid.n,) if isinstance(grid, TauAdicGrid) else (grid.nx, grid.ny)
    decomposition = Decomposition.from_jsonl(args.steps, shape=shape)
    approx = reconstruct(decomposition, dictionary, shape)
    save_signal(approx, args.out)
    inputs = [args.grid, args.steps]
    if args.infile and args.residual:
        original = load_signal(args.infile)
        residual = load_signal(args.residual)
        gap = original.data - approx.data - residual.data
        rel = float(np.linalg.norm(gap)) / max(original.norm(), 1e-300)
        print(f"reconstruction_gap_rel={_fmt(rel)}")
        inputs += [args.infile, args.residual]
    return {"atoms": len(decomposition)}, inputs, [args.out]


def cmd_geometry(args) -> tuple[dict, list, list]:
    grid = _load_grid(args.grid)
    inferred = "affine1d" if isinstance(grid, TauAdicGrid) else "aniso2d"
    if args.dict_name and args.dict_name != inferred:
        raise ValueError(f"--dict {args.dict_name} does not match the "
                         f"{inferred} grid in {args.grid}")
    dictionary = _dictionary_for(grid)
    rng = np.random.default_rng(args.seed)
    if isinstance(grid, TauAdicGrid):
        a_lo, a_hi = grid.scale_span()
        n = grid.n
        if args.at:
            coords = [float(v) for v in args.at.split(",")]
            lam0 = dictionary.point(*coords)
        else:
            lam0 = dictionary.point(n / 2, math.sqrt(a_lo * a_hi))
        samples = [dictionary.point(rng.uniform(0.3 * n, 0.7 * n),
                                    math.exp(rng.uniform(math.log(a_lo * 1.05),
                                                         math.log(a_hi * 0.95))))
                   for _ in range(args.samples)]
        probes = [dictionary.point(rng.uniform(0, n - 1),
                                   math.exp(rng.uniform(math.log(a_lo * 1.05),
                                                        math.log(a_hi * 0.95))))
                  for _ in range(args.probes)]
        corpus = [BurstSignalSpec(n=n, kind="gaussian",
                                  envelope=min(256.0, n / 4)).sample(s)
                  for s in np.random.SeedSequence(args.seed).spawn(args.beta_corpus)]
    else:
        nx, ny = grid.nx, grid.ny
        scales = grid.scales()
        a_lo, a_hi = float(scales[0]), float(scales[-1])
        if args.at:
            coords = [float(v) for v in args.at.split(",")]
            lam0 = dictionary.point(*coords)
        else:
            lam0 = dictionary.point(nx / 2, ny / 2, 0.0, math.sqrt(a_lo * a_hi),
                                    math.sqrt(a_lo * a_hi))

        def _rand_point():
            return dictionary.point(
                rng.uniform(0.3 * nx, 0.7 * nx), rng.uniform(0.3 * ny, 0.7 * ny),
                rng.uniform(0, math.pi),
                math.exp(rng.uniform(math.log(a_lo * 1.05), math.log(a_hi * 0.95))),
                math.exp(rng.uniform(math.log(a_lo * 1.05), math.log(a_hi * 0.95))))

        samples = [_rand_point() for _ in range(args.samples)]
        probes = [_rand_point() for _ in range(args.probes)]
        corpus = [make_test_image(nx, ny, seed=int(s.generate_state(1)[0]))
                  for s in np.random.SeedSequence(args.seed).spawn(args.beta_corpus)]
    g = metric(dictionary, lam0)
    gamma = christoffel(dictionary, lam0)
    k_hat = condition_bound(dictionary, samples)
    rho = density_radius(dictionary, grid, probes, segments=args.segments)
    beta = args.beta if args.beta is not None else beta_surrogate(dictionary, grid, corpus)
    report = weakness_factors(args.alpha, beta, k_hat, rho)
    payload = {
        "at": [float(v) for v in lam0.coords],
        "metric": g.matrix.tolist(),
        "metric_inverse": g.inverse.tolist(),
        "christoffel": gamma.tolist(),
        "condition_bound": k_hat,
        "density_radius": rho,
        "weakness": {
            "alpha": report.alpha,
            "beta": report.beta,
            "curvature": report.curvature,
            "rho_d": report.rho_d,
            "alpha_prime": report.alpha_prime,
            "alpha_dprime": report.alpha_dprime,
            "density_ok": report.density_ok,
        },
    }
    text = json.dumps(payload, indent=2) + "\n"
    outputs = []
    if args.out:
        Path(args.out).write_text(text)
        outputs.append(args.out)
    else:
        sys.stdout.write(text)
    cfg = {"alpha": args.alpha, "beta": args.beta, "samples": args.samples,
           "probes": args.probes, "grid": json.loads(grid.to_json())}
    return cfg, [args.grid], outputs


def cmd_curve(args) -> tuple[dict, list, list]:
    grid = _load_grid(args.grid)
    if not isinstance(grid, TauAdicGrid):
        raise ValueError("curve runs on 1-D tau-adic grids")
    dictionary = _dictionary_for(grid)
    spec = BurstSignalSpec(n=grid.n, n_bursts=args.bursts, kind=args.signal_class)
    config = _pursuit_config(args)
    result = convergence_curve(spec.sample, dictionary, grid, config,
                               trials=args.trials, m_max=args.m_max,
                               master_seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write(f"# grid={grid.to_json()} mode={config.mode} kappa={config.kappa} "
                 f"class={args.signal_class} trials={args.trials} seed={args.seed}\n")
        fh.write("m,mean_residual_energy\n")
        for m, e in zip(result.iterations, result.mean_energy):
            fh.write(f"{m},{_fmt(e)}\n")
    cfg = {"class": args.signal_class, "trials": args.trials, "m_max": args.m_max,
           "mode": config.mode, "kappa": config.kappa,
           "grid": json.loads(grid.to_json())}
    return cfg, [args.grid], [args.out]


def cmd_nae(args) -> tuple[dict, list, list]:
    grid = _load_grid(args.grid)
    if not isinstance(grid, TauAdicGrid):
        raise ValueError("nae runs on 1-D tau-adic grids")
    dictionary = _dictionary_for(grid)
    spec = BurstSignalSpec(n=grid.n, n_bursts=args.bursts, kind=args.signal_class)
    config = _pursuit_config(args)
    result = nae(spec.sample, dictionary, grid, config, trials=args.trials,
                 at_iteration=args.at_iteration, master_seed=args.seed)
    with open(args.out, "w") as fh:
        fh.write("b0,a0,tau,jmin,jmax,N,mode,at_iteration,trials,mean_nae,stderr\n")
        fh.write(",".join([_fmt(grid.b0), _fmt(grid.a0), _fmt(grid.tau),
                           str(grid.j_min), str(grid.j_max), str(grid.n),
                           config.mode, str(args.at_iteration), str(args.trials),
                           _fmt(result.mean), _fmt(result.stderr)]) + "\n")
    cfg = {"class": args.signal_class, "trials": args.trials,
           "at_iteration": args.at_iteration, "mode": config.mode,
           "grid": json.loads(grid.to_json())}
    return cfg, [args.grid], [args.out]


def cmd_image(args) -> tuple[dict, list, list]:
    inputs = []
    if args.image:
        image = load_signal(args.image)
        inputs.append(args.image)
    else:
        image = make_test_image(args.nx, args.ny, seed=args.seed)
    grid = Grid2DSpec(nx=image.shape[0], ny=image.shape[1],
                      j_scales=args.j, k_orients=args.k)
    modes = args.modes.split(",")
    configs = [PursuitConfig(mode=m, kappa=args.kappa) for m in modes]
    rows = image_harness(image, grid, configs, n_atoms=args.atoms)
    with open(args.out, "w") as fh:
        fh.write(f"# grid={grid.to_json()} atoms={args.atoms} kappa={args.kappa}\n")
        fh.write("label,mode,kappa,atoms,psnr_db\n")
        for row in rows:
            fh.write(",".join([row["label"], row["mode"], str(row["kappa"]),
                               str(row["atoms"]), _fmt(row["psnr_db"])]) + "\n")
    cfg = {"J": args.j, "K": args.k, "atoms": args.atoms, "kappa": args.kappa,
           "modes": modes,
           "timings_s": [row["wall_time_s"] for row in rows]}
    return cfg, inputs, [args.out]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geopursuit",
        description="Matching pursuit over parametrized dictionaries with "
                    "geometric refinement and discretization diagnostics.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen-signal", help="generate a random burst signal")
    p.add_argument("--class", dest="signal_class",
                   choices=("gaussian", "rectangular"), default="gaussian")
    p.add_argument("--n", type=int, default=2 ** 12)
    p.add_argument("--bursts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen_signal)

    p = subs.add_parser("decompose", help="run a pursuit decomposition")
    p.add_argument("--grid", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="steps as JSON-lines")
    p.add_argument("--csv", default=None, help="also write steps as CSV")
    p.add_argument("--residual-out", default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_pursuit_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = subs.add_parser("reconstruct", help="sum the atoms of a decomposition")
    p.add_argument("--grid", required=True)
    p.add_argument("--steps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--in", dest="infile", default=None,
                   help="original signal, for the consistency check")
    p.add_argument("--residual", default=None,
                   help="final residual, for the consistency check")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = subs.add_parser("geometry", help="geometry diagnostics for a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--dict", dest="dict_name", choices=("affine1d", "aniso2d"),
                   default=None, help="dictionary family (inferred from the grid)")
    p.add_argument("--at", default=None, help="comma-separated evaluation point")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=None,
                   help="greedy-factor value; estimated from a corpus if omitted")
    p.add_argument("--beta-corpus", type=int, default=8)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--segments", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_geometry)

    p = subs.add_parser("curve", help="residual-energy decay curve")
    p.add_argument("--class", dest="signal_class",
                   choices=("gaussian", "rectangular"), default="gaussian")
    p.add_argument("--bursts", type=int, default=100)
    p.add_argument("--grid", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--m-max", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_pursuit_flags(p, default_iters=12)
    _add_common(p)
    p.set_defaults(func=cmd_curve)

    p = subs.add_parser("nae", help="normalized atom energy of a signal class")
    p.add_argument("--class", dest="signal_class",
                   choices=("gaussian", "rectangular"), default="gaussian")
    p.add_argument("--bursts", type=int, default=100)
    p.add_argument("--grid", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--at-iteration", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_pursuit_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_nae)

    p = subs.add_parser("image", help="image PSNR harness")
    p.add_argument("--image", default=None, help="grayscale input (PGM or raw)")
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--atoms", type=int, default=100)
    p.add_argument("--kappa", type=int, default=10)
    p.add_argument("--modes", default="dmp,gmp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_image)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config, inputs, outputs = args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_manifest(args, args.command, config, inputs, outputs,
                    time.perf_counter() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
