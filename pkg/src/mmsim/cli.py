"""Command-line harness.

Subcommands::

    mmsim mms-demo        one generalised measurement, branch table
    mmsim collapse-sweep  CSV theta,N,S_total,S_binom,S0,fraction
    mmsim nstar           CSV theta,n_star_fit,n_star_asymptotic,rel_err
    mmsim history-run     history matrix, branches and conditionals for a spec file

Exit codes: 0 ok, 2 parse/usage error, 3 numeric-domain error, 4 I/O error.
Numbers are written with 12 significant digits; identical arguments give
byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import collapse, history, mms
from .errors import MMSError, SpecError
from .gates import RotationParams
from .qstate import A, S, StateVector, shannon_entropy, tensor, von_neumann_entropy
from .specfile import parse_history_spec

DEFAULT_SEED = 20240611
EXIT_OK, EXIT_PARSE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SWEEP_COLUMNS = ("theta", "N", "S_total", "S_binom", "S0", "fraction")
NSTAR_COLUMNS = ("theta", "n_star_fit", "n_star_asymptotic", "rel_err")


def fmt(x: float | int) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".12g")


@dataclass
class RunConfig:
    subcommand: str
    theta_min: float = 0.02
    theta_max: float = math.pi / 2 - 0.02
    theta_step: float = 0.02
    thetas: list[float] = field(default_factory=list)
    exclude: float = 0.05
    n_max: int = 200
    c0_sq: float = 0.5
    c0: complex = 1 / math.sqrt(2)
    c1: complex = 1 / math.sqrt(2)
    theta: float = math.pi / 8
    phi: float = 0.0
    seed: int = DEFAULT_SEED
    mode: str = "explicit-x"
    factor: float = 10.0
    input: str | None = None
    output: str | None = None

    def __post_init__(self):
        if self.theta_step <= 0:
            raise MMSError(f"theta step must be positive, got {self.theta_step}")
        if self.theta_min > self.theta_max:
            raise MMSError(f"empty theta range [{self.theta_min}, {self.theta_max}]")
        if self.n_max < 1:
            raise MMSError(f"N_max must be >= 1, got {self.n_max}")

    def grid(self, exclude: float = 0.0) -> list[float]:
        if self.thetas:
            return list(self.thetas)
        n = int(math.floor((self.theta_max - self.theta_min) / self.theta_step + 1e-9)) + 1
        grid = [self.theta_min + i * self.theta_step for i in range(n)]
        return [t for t in grid if abs(t - math.pi / 4) >= exclude]


def _write_rows(out: io.StringIO, header: Sequence[str], rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _mms_demo(cfg: RunConfig, out: io.StringIO) -> None:
    psi = StateVector.from_amplitudes([S(0)], [cfg.c0, cfg.c1])
    p = RotationParams(cfg.theta, cfg.phi)
    state = mms.premeasure(tensor(psi, StateVector.zero([A(0)])), S(0), A(0))
    result = mms.mms_measure(state, A(0), p, mode=cfg.mode)
    k = mms.kraus_ops(p)
    out.write(f"# theta={fmt(cfg.theta)} phi={fmt(cfg.phi)} mode={cfg.mode} seed={cfg.seed}\n")
    out.write(f"# kraus_completeness_residual={fmt(k.completeness_residual())}\n")
    _write_rows(
        out,
        ("r", "p_r", "post_re_0", "post_im_0", "post_re_1", "post_im_1"),
        [
            (b.r, b.probability, *np.column_stack([b.post_state.amplitudes.real, b.post_state.amplitudes.imag]).ravel())
            for b in result.branches
        ],
    )
    s_vn = von_neumann_entropy(result.rho_sa)
    s_sh = shannon_entropy([b.probability for b in result.branches])
    drawn = mms.sample_outcome(result.branches, cfg.seed)
    out.write(f"# S_vonNeumann={fmt(s_vn)} S_Shannon={fmt(s_sh)} dropped={list(result.dropped)}\n")
    out.write(f"# sampled_r={drawn.r}\n")


def _collapse_sweep(cfg: RunConfig, out: io.StringIO) -> None:
    rows = []
    s0 = shannon_entropy([cfg.c0_sq, 1 - cfg.c0_sq])
    for theta in cfg.grid():
        curve = collapse.extraction_curve(cfg.c0_sq, 1 - cfg.c0_sq, theta, cfg.n_max)
        rows += [(theta, pt.N, pt.S_total, pt.S_binom, s0, pt.fraction) for pt in curve.points]
    _write_rows(out, SWEEP_COLUMNS, rows)


def _nstar(cfg: RunConfig, out: io.StringIO) -> None:
    thetas = cfg.grid(exclude=cfg.exclude)
    rows = []
    for theta, est in zip(thetas, collapse.nstar_sweep(thetas, cfg.c0_sq, cfg.factor)):
        if est is None:
            rows.append((theta, math.nan, collapse.asymptotic_nstar(theta), math.nan))
        else:
            rows.append((theta, est.n_star_fit, est.n_star_asymptotic, est.rel_err))
    _write_rows(out, NSTAR_COLUMNS, rows)


def _bits(bits: Sequence[int]) -> str:
    return "".join(map(str, bits)) or "-"


def _history_run(cfg: RunConfig, out: io.StringIO) -> None:
    if cfg.input is None:
        raise MMSError("history-run needs a spec file")
    with open(cfg.input, encoding="utf-8") as fh:
        text = fh.read()
    spec = parse_history_spec(text)
    D = history.history_density_matrix(spec)
    tree = history.apply_mms_to_history(spec)
    w = csv.writer(out, lineterminator="\n")
    out.write(f"# events={' '.join(spec.labels)}\n")
    out.write(f"# measured={' '.join(tree.measured)} unmeasured={' '.join(tree.unmeasured)}\n")
    n = spec.n
    w.writerow(("alpha", "alpha_prime", "re", "im"))
    for a in range(1 << n):
        for b in range(1 << n):
            z = D.entries[a, b]
            w.writerow((format(a, f"0{n}b") if n else "-", format(b, f"0{n}b") if n else "-", fmt(z.real), fmt(z.imag)))
    u = len(tree.unmeasured)
    for beta, br in tree.branches.items():
        w.writerow(("beta", "p_beta"))
        w.writerow((_bits(beta), fmt(br.probability)))
        w.writerow(("gamma", "gamma_prime", "re", "im"))
        for g in range(1 << u):
            for h in range(1 << u):
                z = br.residual[g, h]
                gs = format(g, f"0{u}b") if u else "-"
                hs = format(h, f"0{u}b") if u else "-"
                w.writerow((gs, hs, fmt(z.real), fmt(z.imag)))
    w.writerow(("beta", "gamma", "p_gamma_given_beta"))
    for beta in tree.branches:
        table = history.conditional_table(tree, beta)
        for g in range(1 << u):
            w.writerow((_bits(beta), format(g, f"0{u}b") if u else "-", fmt(table[g])))


HANDLERS = {
    "mms-demo": _mms_demo,
    "collapse-sweep": _collapse_sweep,
    "nstar": _nstar,
    "history-run": _history_run,
}


def run(subcommand: str, config: RunConfig) -> int:
    """Execute one subcommand; returns the process exit code."""
    buf = io.StringIO()
    try:
        HANDLERS[subcommand](config, buf)
    except SpecError as exc:
        print(f"mmsim: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"mmsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MMSError as exc:
        print(f"mmsim: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        if config.output is None or config.output == "-":
            sys.stdout.write(buf.getvalue())
        else:
            with open(config.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        print(f"mmsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsim", description="Minimalistic measurement scheme simulator")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    def grid(p):
        p.add_argument("--theta-min", type=float, default=0.02)
        p.add_argument("--theta-max", type=float, default=math.pi / 2 - 0.02)
        p.add_argument("--theta-step", type=float, default=0.02)
        p.add_argument("--theta", dest="thetas", type=float, action="append", default=[],
                       help="explicit theta value (repeatable); overrides the grid")
        p.add_argument("--c0-sq", type=float, default=0.5)

    p = sub.add_parser("mms-demo", help="branch table for one generalised measurement")
    common(p)
    p.add_argument("--c0", type=_complex, default=complex(1 / math.sqrt(2)))
    p.add_argument("--c1", type=_complex, default=complex(1 / math.sqrt(2)))
    p.add_argument("--theta", type=float, default=math.pi / 8)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--mode", choices=("explicit-x", "dephase"), default="explicit-x")

    p = sub.add_parser("collapse-sweep", help="extraction curves over a theta grid")
    common(p)
    grid(p)
    p.add_argument("--n-max", type=int, default=200)

    p = sub.add_parser("nstar", help="fitted vs asymptotic N* over a theta grid")
    common(p)
    grid(p)
    p.add_argument("--exclude", type=float, default=0.05, help="skip |theta - pi/4| below this")
    p.add_argument("--factor", type=float, default=10.0, help="curve length in units of asymptotic N*")

    p = sub.add_parser("history-run", help="history matrix and branching for a spec file")
    common(p)
    p.add_argument("input", help="history-spec file")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    try:
        cfg = RunConfig(**fields)
    except MMSError as exc:
        print(f"mmsim: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
