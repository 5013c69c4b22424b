"""``fockent`` command line: reproducible reports for states, measures and experiments.

Exit codes: 0 on success, 2 on a usage error, 1 when the request is
well-formed but the physics refuses it (destroyed state, invalid density
matrix, wrong statistics and so on).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import dynamics, entropy, fock, measures, omar, overlap, teleport
from .errors import FockentError

FORMATS = ("human", "structured", "csv-series")


def tolerance_set() -> dict[str, float]:
    return {
        "prune": fock.PRUNE_TOL,
        "norm": fock.NORM_TOL,
        "hermitian": entropy.HERMITIAN_TOL,
        "trace": entropy.TRACE_TOL,
        "eigenvalue_clamp": entropy.EIG_CLAMP,
        "slater_rank": measures.RANK_TOL,
        "w_normalization": measures.W_NORM_TOL,
        "destroyed_norm": overlap.DESTROYED_NORM,
        "coherent_tail": teleport.TAIL_TOL,
    }


@dataclass
class RunConfiguration:
    subcommand: str
    state_path: str | None = None
    eps_grid: list[float] = field(default_factory=lambda: list(dynamics.DEFAULT_EPS[::-1]))
    alpha_sq_grid: list[float] = field(default_factory=lambda: [1.0, 4.0, 25.0, 100.0])
    s_grid: list[float] = field(default_factory=lambda: list(np.linspace(0.0, 0.95, 20)))
    p_grid: list[float] = field(default_factory=lambda: list(np.linspace(0.0, 1.0, 41)))
    tolerances: dict[str, float] = field(default_factory=tolerance_set)
    output_format: str = "human"

    def validate(self) -> RunConfiguration:
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")
        for name, tol in self.tolerances.items():
            if not tol > 0:
                raise ValueError(f"tolerance {name} must be positive")
        for name in ("eps_grid", "alpha_sq_grid", "s_grid", "p_grid"):
            g = getattr(self, name)
            if not g:
                raise ValueError(f"{name} is empty")
            if any(b < a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} must be sorted")
        return self


def parse_grid(text: str) -> list[float]:
    """``start:end:count`` (linear), ``start:end:count:log`` (geometric) or a comma list."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(x) for x in text.split(",") if x.strip()]
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise ValueError(f"bad grid {text!r}; expected start:end:count[:log]")
    start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("grid count must be positive")
    if len(parts) == 4:
        if start <= 0 or end <= 0:
            raise ValueError("log grids need positive endpoints")
        return [float(x) for x in np.geomspace(start, end, count)]
    return [float(x) for x in np.linspace(start, end, count)]


# -- presets and state loading ---------------------------------------------------

def _preset(name: str) -> fock.QuantumState:
    if name == "molecular":
        return teleport.channel_state("fermion")
    if name == "molecular-boson":
        return teleport.channel_state("boson")
    if name.startswith("bell-"):
        return overlap.bell_state_nonorthogonal(name[5:], 0.0).state
    if name == "omar-input":
        return omar.build_input_state().state
    if name == "omar-output":
        return omar.run_apparatus().state
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("molecular", "molecular-boson", "bell-psi-plus", "bell-psi-minus", "bell-phi-plus",
           "bell-phi-minus", "omar-input", "omar-output")


def _load(args) -> tuple[fock.QuantumState, float, str]:
    if args.state:
        try:
            st, norm = fock.load_state(args.state)
        except OSError as exc:
            raise FockentError(f"cannot read state file: {exc}") from exc
        return st, norm, args.state
    st = _preset(args.preset or "molecular")
    return st, st.norm(), f"preset:{args.preset or 'molecular'}"


def _keep(args, state):
    if args.keep:
        if "," in args.keep:
            return [fock.parse_mode(m) for m in args.keep.split(",")]
        if "/" in args.keep and "_" not in args.keep:
            site, arm = args.keep.split("/")
            return (site, arm)
        return args.keep
    sites = sorted({m.site for m in state.modes})
    return "B" if "B" in sites else sites[-1]


# -- subcommands ----------------------------------------------------------------
# each returns (document, series rows or None, human lines)

def _cmd_state_info(args, cfg):
    st, norm, origin = _load(args)
    if args.write:
        fock.save_state(st, args.write)
    doc = {
        "source": origin,
        "statistics": st.statistics.value,
        "modes": [str(m) for m in st.modes],
        "dimension": st.space.dim,
        "original_norm": norm,
        "number_distribution": {str(k): v for k, v in fock.number_distribution(st).items()},
        "terms": [{"occupations": st.space.pattern_label(p), "re": a.real, "im": a.imag}
                  for p, a in sorted(st.amplitudes.items())],
    }
    rows = [{"occupations": t["occupations"], "re": t["re"], "im": t["im"]} for t in doc["terms"]]
    lines = [f"state {origin}: {doc['statistics']}, modes {' '.join(doc['modes'])}, dimension {doc['dimension']}",
             f"original norm {_f(norm)}"]
    lines += [f"  |{t['occupations']}>  {_c(complex(t['re'], t['im']))}" for t in doc["terms"]]
    return doc, rows, lines


def _eta_fields(st):
    if len(st.modes) != 4 or not st.space.is_fermionic:
        return None, None
    try:
        return measures.schliemann_eta(st), measures.slater_rank(st)
    except FockentError:
        return None, None


def _cmd_measure(args, cfg):
    st, norm, origin = _load(args)
    keep = _keep(args, st)
    report = measures.site_entropy_measure(st, keep, args.sector_key)
    eta, rank = _eta_fields(st)
    doc = {"source": origin, "keep": str(keep), "site_entropy": report.total_entropy,
           "schliemann_eta": eta, "slater_rank": rank, "sectors": report.to_dict()}
    rows = [{"sector": str(k), "eigenvalues": " ".join(_f(x) for x in v),
             "entropy": report.sector_entropy_contributions[k]}
            for k, v in report.sector_eigenvalues.items()]
    lines = [f"state {origin}, kept {keep}",
             f"site entropy {_f(report.total_entropy)}",
             f"schliemann eta {'n/a' if eta is None else _f(eta)}",
             f"slater rank {'n/a' if rank is None else rank}"]
    for k, v in report.sector_eigenvalues.items():
        lines.append(f"  sector {k}: eigenvalues {[_f(x) for x in v]} entropy {_f(report.sector_entropy_contributions[k])}")
    lines.append(f"off-block norm {_f(report.off_block_norm)}")
    return doc, rows, lines


def _cmd_perturb(args, cfg):
    st, _, origin = _load(args)
    if args.hamiltonian == "hubbard":
        H = dynamics.hubbard_onsite(st.space, args.strength, args.site)
    else:
        H = dynamics.spinflip_hopping(st.space, args.strength)
    fit = dynamics.response_order(args.measure, H, st, cfg.eps_grid, args.propagator, keep=_keep(args, st))
    doc = {"source": origin, "hamiltonian": args.hamiltonian, "strength": args.strength, "measure": args.measure,
           **fit.to_dict()}
    rows = doc["table"]
    lines = [f"{args.measure} under {args.hamiltonian} ({args.propagator} propagator), state {origin}"]
    lines += [f"  eps {e:.1e}  value {_f(v)}  delta {d:.4e}" for e, v, d in zip(fit.eps, fit.values, fit.deltas)]
    lines.append(f"order {fit.order if fit.order is not None else 'none (no response above noise floor)'}")
    if fit.order is not None:
        lines.append(f"coefficient {_f(fit.coefficient)}  slope {_f(fit.slope)}")
    lines += [f"note: {n}" for n in fit.notes]
    return doc, rows, lines


def _cmd_bell_curve(args, cfg):
    pts = overlap.eta_vs_overlap_curve(args.kind, cfg.s_grid, args.statistics, args.scheme, args.min_norm)
    rows = [{"S": p.overlap, "eta": "" if p.eta is None else p.eta, "prenorm": p.prenormalization_norm,
             "destroyed": int(p.destroyed)} for p in pts]
    doc = {"kind": args.kind, "statistics": args.statistics, "scheme": args.scheme, "min_norm": args.min_norm,
           "points": [{"S": p.overlap, "eta": p.eta, "prenorm": p.prenormalization_norm, "destroyed": p.destroyed}
                      for p in pts]}
    lines = [f"{args.kind} ({args.statistics}, {args.scheme} orthogonalization)"]
    for p in pts:
        eta = "destroyed" if p.destroyed else ("n/a" if p.eta is None else _f(p.eta))
        lines.append(f"  S {_f(p.overlap)}  eta {eta}  prenorm {_f(p.prenormalization_norm)}")
    return doc, rows, lines


def _cmd_omar(args, cfg):
    r = omar.omar_experiment((args.phase1, args.phase2), cfg.p_grid)
    doc = r.to_dict()
    ch = r.channel
    rows = [{"p": p, **{v: ch.grid_residuals[v][i] for v in ch.grid_residuals}} for i, p in enumerate(ch.grid)]
    lines = [
        f"S(side 1, input)  {_f(r.input_side_entropy)}",
        f"S(side 1, output) {_f(r.output_side_entropy)}",
        f"S(1L, input)  {_f(r.input_arm_entropy)}",
        f"S(1L, output) {_f(r.output_arm_entropy)}",
        "output sectors (side 1):",
    ]
    rep = r.output_sectors
    for k, v in rep.sector_eigenvalues.items():
        if any(x > 0 for x in v) or k in ("2+0", "1+1"):
            lines.append(f"  {k}: eigenvalues {[_f(x) for x in v]} entropy {_f(rep.sector_entropy_contributions[k])}")
    lines.append("channel fits:")
    for f in ch.fits:
        lines.append(f"  {f.variant.value}: p {_f(f.p)} residual {f.residual:.2e}")
    lines.append(f"best channel {ch.best.variant.value} p = {_f(ch.best.p)}")
    return doc, rows, lines


def _parse_source(text: str) -> np.ndarray:
    amps = np.array([complex(x.replace(" ", "")) for x in text.split(",")], dtype=np.complex128)
    if amps.shape != (4,):
        raise ValueError("source needs four comma-separated amplitudes")
    n = np.linalg.norm(amps)
    if n == 0:
        raise ValueError("source amplitudes are all zero")
    return amps / n


def _cmd_teleport(args, cfg):
    src = _parse_source(args.source)
    iso = teleport.Isomorphism(not args.occupied_down, not args.down_first)
    if args.mode == "ideal":
        run = teleport.run_protocol(src, "ideal", args.statistics, iso=iso)
        doc = {"source": [[a.real, a.imag] for a in src], **run.to_dict()}
        rows = [{"bits": "".join(str(int(x)) for x in b.bits), "probability": b.probability, "fidelity": b.fidelity}
                for b in run.branches]
        lines = [f"ideal teleportation ({args.statistics})"]
        lines += [f"  bits {r['bits']}  p {_f(r['probability'])}  fidelity {_f(r['fidelity'])}" for r in rows]
        lines.append(f"average fidelity {_f(run.average_fidelity)}")
        return doc, rows, lines
    runs = [teleport.run_protocol(src, "coherent", args.statistics, math.sqrt(mu), iso=iso) for mu in cfg.alpha_sq_grid]
    doc = {"source": [[a.real, a.imag] for a in src], "mode": "coherent",
           "sweep": [{"alpha_sq": mu, **r.to_dict()} for mu, r in zip(cfg.alpha_sq_grid, runs)]}
    rows = [{"alpha_sq": mu, "cutoff": r.cutoff, "average_fidelity": r.average_fidelity}
            for mu, r in zip(cfg.alpha_sq_grid, runs)]
    lines = [f"coherent-reservoir teleportation ({args.statistics})"]
    lines += [f"  |alpha|^2 {_f(r['alpha_sq'])}  cutoff {r['cutoff']}  average fidelity {_f(r['average_fidelity'])}"
              for r in rows]
    return doc, rows, lines


# -- formatting ---------------------------------------------------------------------

def _f(x: float) -> str:
    return f"{x:.4f}"


def _c(z: complex) -> str:
    return _f(z.real) if abs(z.imag) < 5e-5 else f"{z.real:.4f}{z.imag:+.4f}j"


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _emit(out, cfg: RunConfiguration, doc, rows, lines):
    if cfg.output_format == "structured":
        full = {"command": cfg.subcommand, "tolerances": cfg.tolerances, "report": doc}
        out.write(json.dumps(_jsonable(full), sort_keys=True, indent=2) + "\n")
    elif cfg.output_format == "csv-series":
        if not rows:
            raise ValueError(f"{cfg.subcommand} has no series to write")
        out.write("# tolerances " + " ".join(f"{k}={v:g}" for k, v in sorted(cfg.tolerances.items())) + "\n")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(_jsonable(rows))
        out.write(buf.getvalue())
    else:
        out.write("tolerances: " + ", ".join(f"{k}={v:g}" for k, v in sorted(cfg.tolerances.items())) + "\n")
        out.write("\n".join(lines) + "\n")


# -- argument grammar ----------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fockent", description="Entanglement of identical particles in occupation-number bases.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, state=True, default_format="human"):
        sp.add_argument("--format", choices=FORMATS, default=default_format)
        if state:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--state", help="state file (JSON)")
            g.add_argument("--preset", choices=PRESETS)

    sp = sub.add_parser("state-info", help="describe a state, optionally writing it to a file")
    common(sp)
    sp.add_argument("--write", metavar="PATH")

    sp = sub.add_parser("measure", help="site entropy, sector split, Schliemann eta, Slater rank")
    common(sp)
    sp.add_argument("--keep", help="site name, side/arm group or comma-separated modes (default: B)")
    sp.add_argument("--sector-key", choices=("total", "group"), default="total")

    sp = sub.add_parser("perturb", help="order of response of a measure to a small perturbation")
    common(sp)
    sp.add_argument("--hamiltonian", choices=("hubbard", "hopping"), default="hubbard")
    sp.add_argument("--strength", type=float, default=1.0)
    sp.add_argument("--site", default="A")
    sp.add_argument("--measure", choices=("site_entropy", "eta", "rho_norm"), default="eta")
    sp.add_argument("--propagator", choices=tuple(dynamics.PROPAGATORS), default="exact")
    sp.add_argument("--eps-grid", default="1e-4,1e-3,1e-2")
    sp.add_argument("--keep")

    sp = sub.add_parser("bell-curve", help="eta against orbital overlap")
    common(sp, state=False, default_format="csv-series")
    sp.add_argument("--kind", choices=[k.value for k in overlap.BellKind], default="psi-minus")
    sp.add_argument("--grid", default="0:0.95:20")
    sp.add_argument("--statistics", choices=("fermion", "boson"), default="fermion")
    sp.add_argument("--scheme", choices=("symmetric", "sequential"), default="symmetric")
    sp.add_argument("--min-norm", type=float, default=overlap.DESTROYED_NORM)

    sp = sub.add_parser("omar", help="two-pair beam-splitter experiment and channel fit")
    common(sp, state=False)
    sp.add_argument("--p-grid", default="0:1:41")
    sp.add_argument("--phase1", type=float, default=0.0)
    sp.add_argument("--phase2", type=float, default=0.0)

    sp = sub.add_parser("teleport", help="two-qubit teleportation through the molecular-orbital state")
    common(sp, state=False)
    sp.add_argument("--source", default="0.5,0.5,0.5,0.5", help="four amplitudes for |uu>,|ud>,|du>,|dd>")
    sp.add_argument("--mode", choices=("ideal", "coherent"), default="ideal")
    sp.add_argument("--statistics", choices=("fermion", "boson"), default=None)
    sp.add_argument("--alpha-sq-grid", default="1,4,25,100")
    sp.add_argument("--occupied-down", action="store_true", help="read an occupied mode as qubit down")
    sp.add_argument("--down-first", action="store_true", help="spin-down mode carries the first virtual qubit")
    return p


_COMMANDS = {
    "state-info": _cmd_state_info,
    "measure": _cmd_measure,
    "perturb": _cmd_perturb,
    "bell-curve": _cmd_bell_curve,
    "omar": _cmd_omar,
    "teleport": _cmd_teleport,
}


def _configure(args) -> RunConfiguration:
    cfg = RunConfiguration(args.command, getattr(args, "state", None), output_format=args.format)
    if args.command == "perturb":
        cfg.eps_grid = sorted(parse_grid(args.eps_grid))
    if args.command == "bell-curve":
        cfg.s_grid = parse_grid(args.grid)
    if args.command == "omar":
        cfg.p_grid = parse_grid(args.p_grid)
    if args.command == "teleport":
        cfg.alpha_sq_grid = parse_grid(args.alpha_sq_grid)
        if args.statistics is None:
            args.statistics = "boson" if args.mode == "coherent" else "fermion"
    return cfg.validate()


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _configure(args)
    except _UsageError as exc:
        err.write(parser.format_usage() + str(exc) + "\n")
        return 2
    except ValueError as exc:
        err.write(f"fockent: usage error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        doc, rows, lines = _COMMANDS[args.command](args, cfg)
    except FockentError as exc:
        err.write(f"fockent: {type(exc).__name__}: {exc}\n")
        return 1
    except ValueError as exc:
        err.write(f"fockent: usage error: {exc}\n")
        return 2
    try:
        _emit(out, cfg, doc, rows, lines)
    except ValueError as exc:
        err.write(f"fockent: usage error: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run_cli())
