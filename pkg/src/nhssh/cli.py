"""Command-line entry point: ``nhssh {sweep,point,spectrum,states,loclen,validate}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .ensemble import derive_seed, run_point, run_sweep
from .io import (
    ConfigError,
    RunConfig,
    critical_csv,
    emit_results,
    loclen_csv,
    parse_config,
    parse_override,
    records_csv,
    write_csv,
)
from .lattice import ModelError, build_hamiltonian, clean_realization, sample_disorder, working_frame
from .spectral import SpectralError, decompose
from .validate import run_checks

log = logging.getLogger("nhssh")

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", help="output directory (output.dir)")
    common.add_argument("--threads", type=int, help="worker processes (output.threads)")
    common.add_argument("--seed", type=int, help="master seed (ensemble.master_seed)")
    common.add_argument("--resume", action="store_true", help="continue from the checkpoint in the output directory")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value; VALUE is parsed as JSON")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nhssh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="disorder-averaged phase diagram over the config grid")
    sub.add_parser("point", parents=[common], help="full record for the model section parameters")
    sub.add_parser("spectrum", parents=[common], help="averaged mid-spectrum energies across the grid")
    states = sub.add_parser("states", parents=[common], help="eigenstate densities of one realization")
    states.add_argument("--state", default="mid",
                        help="0-based canonical state index, 'mid' (L/2 - 1) or 'all'")
    states.add_argument("--realization", type=int, default=0, help="realization index used to derive the seed")
    sub.add_parser("loclen", parents=[common], help="analytic inverse localization length over the grid")
    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    return parser


def _load(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
    overrides = dict(parse_override(item) for item in args.set)
    if args.out is not None:
        overrides["output.dir"] = args.out
    if args.threads is not None:
        overrides["output.threads"] = args.threads
    if args.seed is not None:
        overrides["ensemble.master_seed"] = args.seed
    if args.resume:
        overrides["output.resume"] = True
    return parse_config(text, overrides)


def _cmd_sweep(rc: RunConfig, out: Path) -> int:
    checkpoint = out / "checkpoint.jsonl" if rc.output.checkpoint else None
    result = run_sweep(rc.grid, rc.ensemble, rc.winding, threads=rc.output.threads,
                       checkpoint=checkpoint, resume=rc.output.resume)
    paths = emit_results(result, out, rc.output.formats, loclen=rc.output.loclen)
    failed = sum(r.failed for r in result.records)
    for p in paths:
        print(p)
    if failed:
        log.warning("%d of %d grid points failed", failed, len(result.records))
    return EXIT_OK


def _cmd_point(rc: RunConfig, out: Path) -> int:
    rec = run_point(rc.model, rc.ensemble, rc.winding, collect_density=True)
    out.mkdir(parents=True, exist_ok=True)
    body = rec.to_dict()
    body["spec"] = rc.model.to_dict()
    (out / "point.json").write_text(json.dumps(body, indent=1, allow_nan=False), encoding="utf-8")
    (out / "point.csv").write_text(records_csv([rec]), encoding="utf-8")
    print(f"nu = {rec.nu_mean!r} +/- {rec.nu_stderr!r}  gap = {rec.gap_mean!r}  rejects = {rec.rejects}")
    return EXIT_RUN if rec.failed else EXIT_OK


def _cmd_spectrum(rc: RunConfig, out: Path) -> int:
    cfg = dataclasses.replace(rc.ensemble, periodic=False)
    result = run_sweep(rc.grid, cfg, rc.winding, threads=rc.output.threads)
    header = ["axis1", "axis2"] + [f"e_mid_re_{k}" for k in range(1, 5)] + [f"e_mid_im_{k}" for k in range(1, 5)]
    header += ["gap_mean", "max_abs_imag", "failed"]
    rows = [
        [r.axis1, r.axis2, *(z.real for z in r.e_mid), *(z.imag for z in r.e_mid), r.gap_mean, r.max_abs_imag,
         int(r.failed)]
        for r in result.records
    ]
    print(write_csv(out / "spectrum.csv", header, rows))
    return EXIT_OK


def _cmd_states(rc: RunConfig, out: Path, state: str, realization: int) -> int:
    spec = rc.model
    if spec.is_clean:
        real = clean_realization(spec)
    else:
        real = sample_disorder(spec, derive_seed(rc.ensemble.master_seed, 0, realization, 0))
    frame = working_frame(spec, build_hamiltonian(spec, real))
    d = decompose(frame.hamiltonian, rc.ensemble.tolerance).in_frame(frame.to_sites)
    n = spec.n_sites
    if state == "all":
        picks = list(range(n))
    else:
        try:
            picks = [n // 2 - 1 if state == "mid" else int(state)]
        except ValueError:
            raise ConfigError(f"--state must be an integer, 'mid' or 'all', got {state!r}") from None
        if not 0 <= picks[0] < n:
            raise ConfigError(f"--state {picks[0]} out of range for {n} sites")
    dens = np.abs(d.right_vectors[:, picks]) ** 2
    header = ["site"] + [f"state_{k}" for k in picks]
    rows = [[x, *map(float, dens[x])] for x in range(n)]
    print(write_csv(out / "states.csv", header, rows))
    energies = [["state", "re", "im"]] + [[k, float(d.eigenvalues[k].real), float(d.eigenvalues[k].imag)] for k in picks]
    write_csv(out / "states_energies.csv", energies[0], energies[1:])
    return EXIT_OK


def _cmd_loclen(rc: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "loclen.csv"
    path.write_text(loclen_csv(rc.grid), encoding="utf-8")
    print(path)
    crit = critical_csv(rc.grid)
    if crit is not None:
        cpath = out / "critical.csv"
        cpath.write_text(crit, encoding="utf-8")
        print(cpath)
    return EXIT_OK


def _cmd_validate() -> int:
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUN


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return _cmd_validate()
        rc = _load(args)
        out = Path(rc.output.dir)
        if args.command == "sweep":
            return _cmd_sweep(rc, out)
        if args.command == "point":
            return _cmd_point(rc, out)
        if args.command == "spectrum":
            return _cmd_spectrum(rc, out)
        if args.command == "states":
            return _cmd_states(rc, out, args.state, args.realization)
        if args.command == "loclen":
            return _cmd_loclen(rc, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpectralError, ModelError, OSError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
