"""``qspectra`` command-line front end.

Exit status: 0 on success, 1 on domain errors, 2 on I/O or parse errors.
Results are canonical JSON (stdout unless ``-o`` is given); ``--csv`` adds
plot data next to the JSON output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import analysis as an
from . import calculus as sc
from . import shift as sl
from .errors import InvalidArgument, NotIsolated, ParseError, QSpectraError
from .io import _fmt_float, dumps, load_matrix, spectrum_csv
from .qlinalg import QMatrix, SpectrumResult, s_spectrum
from .quaternion import ImaginaryUnit, Sphere
from .verify import format_table, run_suite

COMMANDS = ("spectrum", "riesz", "decompose", "funcalc", "power", "shift", "verify")
SEED_ENV = "QSPECTRA_SEED"


@dataclass
class RunConfig:
    command: str
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    slice_unit: Optional[Tuple[float, float, float]] = None
    nodes: int = sc.DEFAULT_NODES
    tol: float = 1e-8
    seed: int = 0
    spheres: List[Sphere] = field(default_factory=list)
    power: int = 2
    poly: List[float] = field(default_factory=list)
    csv: bool = False
    side: str = "left"
    gap: Optional[float] = None  # isolation threshold; defaults to tol
    size: int = 16
    rank: int = 1
    trials: int = 10

    @property
    def unit(self) -> Optional[ImaginaryUnit]:
        return None if self.slice_unit is None else ImaginaryUnit.from_vector(self.slice_unit)

    @property
    def isolation(self) -> float:
        return self.tol if self.gap is None else self.gap


def _floats(text: str, count: Optional[int] = None) -> List[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _sphere_arg(text: str) -> Sphere:
    re, rho = _floats(text, 2)
    if rho < 0:
        raise argparse.ArgumentTypeError(f"rho must be >= 0 in {text!r}")
    return Sphere(re, rho)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qspectra", description="S-spectra and Riesz projections of quaternionic matrices.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("-i", "--input", type=Path, help="QMatrix JSON file")
    p.add_argument("-o", "--output", type=Path, help="result file (default: stdout)")
    p.add_argument("--sphere", type=_sphere_arg, action="append", default=[], metavar="RE,RHO")
    p.add_argument("--nodes", type=int, default=sc.DEFAULT_NODES, help="quadrature nodes per circle")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--gap", type=float, help="isolation threshold for riesz/decompose (default: --tol)")
    p.add_argument("--slice", type=lambda t: tuple(_floats(t, 3)), metavar="X,Y,Z", help="slice unit, normalised on input")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--power", type=int, default=2)
    p.add_argument("--poly", type=_floats, default=[], metavar="C0,C1,...", help="real coefficients, ascending")
    p.add_argument("--csv", action="store_true", help="also write spectra as re,rho,mult rows")
    p.add_argument("--seed", type=int, help=f"random seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--size", type=int, default=16, help="shift truncation size N")
    p.add_argument("--rank", type=int, default=1, help="perturbation rank for shift")
    p.add_argument("--trials", type=int, default=10)
    return p


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    seed = ns.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise ParseError(f"{SEED_ENV}={env!r} is not an integer")
    return RunConfig(
        command=ns.command,
        input_path=ns.input,
        output_path=ns.output,
        slice_unit=ns.slice,
        nodes=ns.nodes,
        tol=ns.tol,
        seed=seed,
        spheres=ns.sphere,
        power=ns.power,
        poly=ns.poly,
        csv=ns.csv,
        side=ns.side,
        gap=ns.gap,
        size=ns.size,
        rank=ns.rank,
        trials=ns.trials,
    )


def _matrix(cfg: RunConfig) -> QMatrix:
    if cfg.input_path is None:
        raise ParseError(f"'{cfg.command}' needs -i/--input")
    return load_matrix(cfg.input_path)


def _labelled_csv(rows: List[Tuple[str, SpectrumResult]], label: str) -> str:
    lines = [f"{label},re,rho,mult"]
    for tag, spec in rows:
        lines += [f"{tag},{_fmt_float(s.re)},{_fmt_float(s.rho)},{m}" for s, m in spec.spheres]
    return "\n".join(lines) + "\n"


def _cmd_spectrum(cfg):
    spec = s_spectrum(_matrix(cfg), cfg.tol)
    return spec.to_json(), spectrum_csv(spec)


def _cmd_riesz(cfg):
    a = _matrix(cfg)
    if not cfg.spheres:
        raise InvalidArgument("riesz needs at least one --sphere")
    spec = s_spectrum(a, cfg.tol)
    res = sc.riesz_projection(a, cfg.spheres, cfg.unit, cfg.nodes, cfg.side, spec, cfg.isolation)
    return res.to_json(), spectrum_csv(spec)


def _cmd_decompose(cfg):
    a = _matrix(cfg)
    spec = s_spectrum(a, cfg.tol)
    if cfg.spheres:
        part = an.part_of(spec, cfg.spheres)
    else:
        parts = an.isolated_parts(spec, cfg.isolation)
        if len(parts) < 2:
            raise NotIsolated(f"spectrum has no isolated proper part at gap {cfg.isolation:.3e}")
        part = parts[0]
    rep = an.riesz_decompose(a, part, spec, cfg.nodes, cfg.unit, cfg.isolation)
    return rep.to_json(), _labelled_csv([("1", rep.spectra1), ("2", rep.spectra2)], "part")


def _cmd_funcalc(cfg):
    a = _matrix(cfg)
    if not cfg.poly:
        raise InvalidArgument("funcalc needs --poly c0,c1,...")
    spec = s_spectrum(a, cfg.tol)
    f_a = sc.poly_calculus(a, cfg.poly, cfg.unit, cfg.nodes, spec)
    direct = sc.poly_direct(a, cfg.poly)
    out = {"coefficients": cfg.poly, "f_A": f_a.to_json(), "direct": direct.to_json(), "residual": (f_a - direct).maxabs()}
    return out, spectrum_csv(spec)


def _cmd_power(cfg):
    if cfg.power < 1:
        raise InvalidArgument("--power must be >= 1")
    lhs, rhs, dist = an.spectral_mapping_power(_matrix(cfg), cfg.power, cfg.tol)
    out = {"n": cfg.power, "lhs": lhs.to_json(), "rhs": rhs.to_json(), "hausdorff": dist}
    return out, _labelled_csv([("lhs", lhs), ("rhs", rhs)], "set")


def _cmd_shift(cfg):
    rep = sl.perturbation_experiment(cfg.size, cfg.rank, cfg.trials, cfg.seed)
    return rep.to_json(), _labelled_csv([(str(k), t) for k, t in enumerate(rep.trials)], "trial")


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "riesz": _cmd_riesz,
    "decompose": _cmd_decompose,
    "funcalc": _cmd_funcalc,
    "power": _cmd_power,
    "shift": _cmd_shift,
}


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def run(cfg: RunConfig) -> int:
    if cfg.command == "verify":
        records = run_suite(cfg.seed)
        print(format_table(records))
        failed = [r.name for r in records if not r.passed]
        print(f"{len(records) - len(failed)}/{len(records)} checks passed (seed {cfg.seed})")
        if cfg.output_path is not None:
            cfg.output_path.write_text(dumps({"seed": cfg.seed, "checks": [r.to_json() for r in records]}) + "\n")
        return 1 if failed else 0
    payload, csv_text = HANDLERS[cfg.command](cfg)
    _emit(dumps(payload) + "\n", cfg.output_path)
    if cfg.csv:
        _emit(csv_text, None if cfg.output_path is None else cfg.output_path.with_suffix(".csv"))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors already print their message
        return int(exc.code or 0)
    except ParseError as exc:
        print(f"error: ParseError: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ParseError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except QSpectraError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
