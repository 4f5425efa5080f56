"""Command-line front end: dataset synthesis, problem build, solve, score,
and batch benchmark.

Exit codes: 0 success, 1 usage error, 2 solver returned without converging,
3 runtime error (I/O, parsing, infeasible inputs).
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from mapfit import assembly, formats, grid, pdbio, quality, solvers
from mapfit.config import apply_overrides, load_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_ERROR = 3


class UsageError(Exception):
    """Bad invocation detected after argument parsing (missing inputs)."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _require(value, what):
    if value is None:
        raise UsageError(f"{what} is required (flag or config key)")
    return value


def _merged_config(args, **overrides):
    cfg = load_config(args.config)
    common = {"seed": args.seed, "out_dir": args.out_dir}
    common.update(overrides)
    return apply_overrides(cfg, **common)


def _load_structure(path):
    groups, chain_ids = pdbio.parse_pdb(path)
    atoms = [atom for group in groups for atom in group]
    return groups, chain_ids, atoms


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def cmd_generate_map(args):
    cfg = _merged_config(args, structure=args.structure,
                         voxel_size=args.voxel_size,
                         resolution=args.resolution)
    structure = _require(cfg.structure, "structure path")
    _, _, atoms = _load_structure(structure)
    density_map = grid.synthesize_map(atoms, cfg.voxel_size,
                                      grid.Resolution(cfg.resolution))
    out = args.out or str(Path(cfg.out_dir) / (Path(structure).stem + ".dmap"))
    formats.write_dmap(density_map, out)
    nx, ny, nz = density_map.dims
    print(f"dims={nx}x{ny}x{nz} mass={density_map.total_mass()!r} path={out}")
    return EXIT_OK


def cmd_build(args):
    cfg = _merged_config(args, structure=args.structure,
                         map_path=args.map, voxel_size=args.voxel_size,
                         resolution=args.resolution, n_positions=args.n,
                         max_rotation=args.max_rotation,
                         max_translation=args.max_translation,
                         scores=(args.score,) if args.score else None)
    structure = _require(cfg.structure, "structure path")
    kind = assembly.ScoreKind.from_name(cfg.scores[0])
    resolution = grid.Resolution(cfg.resolution)
    native, _, atoms = _load_structure(structure)
    if cfg.map_path is not None:
        complex_map = formats.read_dmap(cfg.map_path)
    else:
        complex_map = grid.synthesize_map(atoms, cfg.voxel_size, resolution)
    placements = assembly.generate_placements(
        native, cfg.n_positions, cfg.max_rotation, cfg.max_translation,
        cfg.seed)
    placements = assembly.synthesize_placement_maps(
        placements, cfg.voxel_size, resolution)
    problem = assembly.build_problem(placements, complex_map, kind)
    out = args.out or str(Path(cfg.out_dir) / (Path(structure).stem + ".prob"))
    formats.write_prob(out, problem.m, problem.N, kind.value, problem.Q,
                       problem.b)
    if args.placements_out:
        formats.write_plac(args.placements_out, problem.placements,
                           problem.m, problem.N, cfg.voxel_size)
    lambda_min = float(np.linalg.eigvalsh(problem.Q)[0])
    print(f"n={problem.n} lambda_min={lambda_min!r} path={out}")
    return EXIT_OK


def _problem_from_file(path):
    m, N, kind_tag, Q, b = formats.read_prob(path)
    return assembly.AssemblyProblem(
        m=m, N=N, Q=Q, b=b, A=assembly.build_constraint_matrix(m, N),
        score_kind=assembly.ScoreKind(kind_tag))


def cmd_solve(args):
    cfg = _merged_config(args, sa_t0=args.t0,
                         sa_penalty_weight=args.penalty_weight,
                         sa_cooling=args.cooling, sa_iters=args.iters)
    problem = _problem_from_file(_require(args.problem, "problem path"))
    report = solvers.solve(problem, args.method, sa_params=cfg.sa_params())
    text = report.to_kv_text()
    csv_text = solvers.CSV_HEADER + "\n" + report.csv_row() + "\n"
    sys.stdout.write(text)
    sys.stdout.write(csv_text)
    if args.report:
        _write_text(args.report, text)
    if args.csv:
        _write_text(args.csv, csv_text)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _parse_assignment(text, m, N):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != m:
        raise UsageError(f"assignment needs {m} comma-separated position "
                         f"ids, got {len(parts)}")
    try:
        chosen = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"assignment entries must be integers: {text!r}") \
            from None
    for k in chosen:
        if not 1 <= k <= N:
            raise UsageError(f"position id {k} outside 1..{N}")
    return chosen


def cmd_score(args):
    cfg = _merged_config(args, placements=args.placements,
                         map_path=args.map, resolution=args.resolution,
                         threshold=args.threshold)
    table, m, N, _ = formats.read_plac(_require(cfg.placements,
                                                "placements path"))
    target = formats.read_dmap(_require(cfg.map_path, "map path"))
    chosen = _parse_assignment(_require(args.assignment, "assignment"), m, N)
    resolution = grid.Resolution(cfg.resolution)

    chosen_atoms = [table[(i + 1, chosen[i])] for i in range(m)]
    native_atoms = [table[(i + 1, 1)] for i in range(m)]
    rmsd_values = np.array([
        quality.rmsd(quality.heavy_atoms(chosen_atoms[i]),
                     quality.heavy_atoms(native_atoms[i]))
        for i in range(m)
    ])
    flags = rmsd_values <= cfg.threshold

    metric = args.metric
    if metric == "auto":
        metric = quality.select_metric(resolution)
    mi_value = None
    lap_value = None
    if metric in ("lap", "both"):
        probe = quality.probe_map_from_atoms(
            [a for group in chosen_atoms for a in group], resolution, target)
        lap_value = quality.lap_score(probe, target)
    if metric in ("mi", "both"):
        probe = quality.probe_map_from_atoms(
            [a for group in chosen_atoms for a in group], resolution, target)
        mi_value = quality.mutual_information(
            grid.regrid_onto(probe, target), target)

    fit = quality.FitQuality(
        per_protein_rmsd=rmsd_values,
        correct_flags=flags,
        beta=flags.sum() / m,
        threshold=cfg.threshold,
        mi=mi_value,
        lap_score=lap_value,
    )
    text = fit.to_csv()
    sys.stdout.write(text)
    if args.out:
        _write_text(args.out, text)
    return EXIT_OK


def _sanitize(message):
    return str(message).replace(",", ";").replace("\n", " ")


def _run_benchmark_cell(native, problem, solver_name, cfg):
    if solver_name == "sa":
        report = solvers.solve(problem, "sa", sa_params=cfg.sa_params())
    else:
        report = solvers.solve(problem, solver_name)
    fit = quality.evaluate_fit(report.assignment, problem, native,
                               threshold=cfg.threshold)
    return report, fit


def cmd_benchmark(args):
    cfg = _merged_config(args)
    if not cfg.complexes:
        raise UsageError("benchmark needs a config with a non-empty "
                         "'complexes' list")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolution = grid.Resolution(cfg.resolution)
    kinds = [assembly.ScoreKind.from_name(s) for s in cfg.scores]

    run_rows = []
    betas = {name: [] for name in cfg.solvers}
    tables = {}
    for complex_path in cfg.complexes:
        stem = Path(complex_path).stem
        table = {}
        for kind in kinds:
            try:
                native, _, atoms = _load_structure(complex_path)
                complex_map = grid.synthesize_map(atoms, cfg.voxel_size,
                                                  resolution)
                placements = assembly.synthesize_placement_maps(
                    assembly.generate_placements(
                        native, cfg.n_positions, cfg.max_rotation,
                        cfg.max_translation, cfg.seed),
                    cfg.voxel_size, resolution)
                problem = assembly.build_problem(placements, complex_map,
                                                 kind)
            except Exception as exc:
                for solver_name in cfg.solvers:
                    run_rows.append(f"{stem},{kind.label},{solver_name},"
                                    f",,,,error({_sanitize(exc)})")
                    table[(kind.label, solver_name)] = ""
                continue
            for solver_name in cfg.solvers:
                try:
                    report, fit = _run_benchmark_cell(native, problem,
                                                      solver_name, cfg)
                except Exception as exc:
                    run_rows.append(f"{stem},{kind.label},{solver_name},"
                                    f",,,,error({_sanitize(exc)})")
                    table[(kind.label, solver_name)] = ""
                    continue
                run_rows.append(
                    f"{stem},{kind.label},{solver_name},"
                    f"{report.continuous_objective!r},"
                    f"{report.binary_objective!r},{fit.beta!r},"
                    f"{str(report.converged).lower()},ok"
                )
                betas[solver_name].append(fit.beta)
                table[(kind.label, solver_name)] = repr(fit.beta)
        tables[stem] = table

    runs_text = ("complex,score,method,continuous_obj,binary_obj,beta,"
                 "converged,status\n" + "\n".join(run_rows) + "\n")
    _write_text(out_dir / "runs.csv", runs_text)

    for stem, table in tables.items():
        lines = ["score," + ",".join(cfg.solvers)]
        for kind in kinds:
            cells = [table.get((kind.label, s), "") for s in cfg.solvers]
            lines.append(kind.label + "," + ",".join(cells))
        _write_text(out_dir / f"{stem}_table.csv", "\n".join(lines) + "\n")

    summary_lines = ["method,mean_beta"]
    for name in cfg.solvers:
        values = betas[name]
        mean_text = repr(float(np.mean(values))) if values else ""
        summary_lines.append(f"{name},{mean_text}")
    summary_text = "\n".join(summary_lines) + "\n"
    _write_text(out_dir / "summary.csv", summary_text)
    sys.stdout.write(summary_text)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="global random seed")
    common.add_argument("--out-dir", default=None,
                        help="directory for generated files")
    common.add_argument("--config", default=None,
                        help="key=value config file")

    parser = _Parser(prog="mapfit",
                     description="Fit protein assemblies into density maps "
                                 "by one-hot quadratic assignment.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("generate-map", parents=[common],
                       help="synthesize a density map from a structure")
    p.add_argument("--structure", help="PDB file of the full complex")
    p.add_argument("--voxel-size", type=float, default=None)
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--out", help="output DMAP path")
    p.set_defaults(func=cmd_generate_map)

    p = sub.add_parser("build", parents=[common],
                       help="generate candidate placements and write the "
                            "assignment problem")
    p.add_argument("--structure", help="PDB file; chains become proteins")
    p.add_argument("--map", help="target DMAP (default: synthesized)")
    p.add_argument("--voxel-size", type=float, default=None)
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--n", type=int, default=None,
                   help="candidate positions per protein")
    p.add_argument("--max-rotation", type=float, default=None,
                   help="decoy rotation bound, degrees")
    p.add_argument("--max-translation", type=float, default=None,
                   help="decoy translation bound, Å")
    p.add_argument("--score",
                   choices=["ccf", "contact", "skin-core", "core-skin"],
                   default=None)
    p.add_argument("--out", help="output PROB path")
    p.add_argument("--placements-out", help="also write a PLAC file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", parents=[common],
                       help="run one solver on a problem file")
    p.add_argument("--problem", help="PROB file")
    p.add_argument("--method", required=True, choices=solvers.METHODS)
    p.add_argument("--t0", type=float, default=None,
                   help="SA initial temperature")
    p.add_argument("--penalty-weight", type=float, default=None,
                   help="SA constraint penalty weight")
    p.add_argument("--cooling", type=float, default=None,
                   help="SA cooling factor")
    p.add_argument("--iters", type=int, default=None,
                   help="SA iteration count")
    p.add_argument("--report", help="write the key=value report here")
    p.add_argument("--csv", help="write the CSV row here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("score", parents=[common],
                       help="score an assignment against native poses "
                            "and the target map")
    p.add_argument("--placements", help="PLAC file (position 1 = native)")
    p.add_argument("--map", help="target DMAP file")
    p.add_argument("--assignment",
                   help="comma-separated 1-based position per protein")
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None,
                   help="RMSD correctness threshold, Å")
    p.add_argument("--metric", choices=["auto", "lap", "mi", "both", "none"],
                   default="auto")
    p.add_argument("--out", help="write the CSV report here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("benchmark", parents=[common],
                       help="run the full complex x score x solver grid")
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mapfit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"mapfit: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
