"""Command-line entry point: ``exvib SUBCOMMAND [options]``.

Every artifact embeds the effective configuration (as a leading ``# config:``
comment in CSV, as a ``config`` key in JSON).  With ``--output`` a sidecar
``<output>.meta.json`` records the creation time, so artifact bodies stay
byte-identical across runs.

Exit codes: 0 ok, 1 usage, 2 config, 3 resource cap, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .band import (
    SPECIES,
    build_grid,
    default_eta,
    exciton_dispersion,
    golden_rule_rate,
    vertex_Fk,
)
from .config import bundle_to_mapping, load_bundle
from .couplings import classify_regime, compute_couplings, theta_sweep_rows
from .errors import (
    DegenerateInputError,
    DomainError,
    ExvibError,
    ModelError,
    NumericalError,
    ResourceError,
    ShapeError,
    UnsupportedBoundaryError,
    ValidationError,
)
from .fock import assemble_hamiltonian, basis_vector, diagonalize, enumerate_basis, evolve, vacuum_state
from .polaron import dressed_transfer_check, shift_check
from .relaxation import build_rate_matrix, evolve_populations, heating_report

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class Artifact:
    """Output of a subcommand: optional table plus scalar payload."""

    payload: dict = field(default_factory=dict)
    columns: Optional[List[str]] = None
    rows: Optional[list] = None
    default_format: str = "csv"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render(artifact: Artifact, config: dict, form: Optional[str]) -> str:
    form = form or artifact.default_format
    if form == "json":
        body = {"config": config, **artifact.payload}
        if artifact.columns is not None:
            body["columns"] = artifact.columns
            body["rows"] = artifact.rows
        return json.dumps(_jsonable(body), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    if artifact.columns is not None:
        buf.write(",".join(artifact.columns) + "\n")
        for row in artifact.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
    else:
        buf.write("key,value\n")
        for key, value in _flat_items(artifact.payload):
            buf.write(f"{key},{fmt(value)}\n")
    return buf.getvalue()


def _flat_items(payload, prefix=""):
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flat_items(value, prefix=f"{name}.")
        elif isinstance(value, (list, tuple, np.ndarray)):
            for i, v in enumerate(value):
                yield f"{name}.{i}", v
        else:
            yield name, value


# ---------------------------------------------------------------- subcommands

def cmd_couplings(bundle, args) -> Artifact:
    cs = compute_couplings(bundle)
    payload = {"couplings": cs.as_dict(), "ratio_F_over_J": cs.F_g / cs.J if cs.J else None}
    try:
        payload["regime"] = classify_regime(cs, tuple(args.thresholds)).as_dict()
    except DegenerateInputError:
        payload["regime"] = None
    return Artifact(payload, default_format="json")


def cmd_sweep_theta(bundle, args) -> Artifact:
    if args.steps < 2:
        raise DomainError("--steps must be >= 2")
    thetas = np.linspace(args.theta_from, args.theta_to, args.steps)
    rows = theta_sweep_rows(bundle, thetas)
    return Artifact(columns=["theta_deg", "hJ_ev", "hF_g_ev", "hF_e_ev"], rows=rows)


def _band(bundle):
    cs = compute_couplings(bundle)
    grid = build_grid(bundle.lattice)
    return cs, grid, exciton_dispersion(grid, cs.omega_a, cs.J)


def cmd_band(bundle, args) -> Artifact:
    _, grid, band = _band(bundle)
    rows = [(int(n), float(k), float(w)) for n, k, w in zip(grid.labels, grid.k, band.energies)]
    payload = {"bandwidth_ev": band.bandwidth}
    return Artifact(payload, columns=["n", "k_inv_angstrom", "homega_ev"], rows=rows)


def _eta(args, band):
    eta = args.eta_ev if args.eta_ev is not None else default_eta(band)
    if not eta > 0:
        raise DomainError("broadening is zero; pass --eta-ev")
    return eta


def cmd_rates(bundle, args) -> Artifact:
    cs, grid, band = _band(bundle)
    eta = _eta(args, band)
    R = build_rate_matrix(band, cs, eta, args.temp_ev)
    F = {"g": cs.F_g, "e": cs.F_e}
    rows = []
    for idx, k in enumerate(grid.k):
        for species in SPECIES:
            bare = golden_rule_rate(vertex_Fk(grid, F[species]))[idx]
            rows.append((float(k), species, "golden_rule", float(bare)))
            for channel in ("emission", "absorption"):
                out = R.parts[(species, channel)][:, idx].sum()
                rows.append((float(k), species, channel, float(out)))
    return Artifact({"eta_ev": eta, "temperature_ev": args.temp_ev},
                    columns=["k", "species", "channel", "w"], rows=rows)


def _ed_setup(bundle, args):
    cs = compute_couplings(bundle)
    basis = enumerate_basis(bundle.lattice.n, bundle.vib.n_max, bundle.vib.q_max,
                            size_cap=args.size_cap)
    H = assemble_hamiltonian(basis, cs, terms=args.terms, boundary=bundle.lattice.boundary)
    return cs, basis, H


def cmd_ed(bundle, args) -> Artifact:
    _, basis, H = _ed_setup(bundle, args)
    spec = diagonalize(H, args.eigs, vectors=False)
    payload = {
        "dimension": H.dim,
        "terms": sorted(H.terms),
        "hermitian": H.hermitian,
        **spec.as_dict(),
    }
    rows = [(i, float(v)) for i, v in enumerate(spec.eigenvalues)]
    return Artifact(payload, columns=["index", "eigenvalue_ev"], rows=rows, default_format="json")


def cmd_evolve(bundle, args) -> Artifact:
    _, basis, H = _ed_setup(bundle, args)
    if not 0 <= args.initial < basis.n_sites:
        raise DomainError(f"--initial must be a site index in [0, {basis.n_sites})")
    psi0 = basis_vector(basis, vacuum_state(basis, args.initial))
    ev = evolve(H, psi0, args.t, args.steps, site_basis=basis)
    cols = ["t", "norm", "energy_above_omega_a_ev"] + [f"P_site{i}" for i in range(basis.n_sites)]
    rows = [
        (float(t), float(nm), float(en), *map(float, pops))
        for t, nm, en, pops in zip(ev.times, ev.norms, ev.energies, ev.populations)
    ]
    return Artifact({"dimension": H.dim}, columns=cols, rows=rows)


def cmd_polaron(bundle, args) -> Artifact:
    cs = compute_couplings(bundle)
    check = shift_check(cs, args.n_max)
    payload = {
        "delta_ev": check["delta_ev"],
        "omega0_ev": check["omega0_ev"],
        "unitarity_residual": check["unitarity_residual"],
        "shift_residual": check["shift_residual"],
        "delta_rel_error": check["delta_rel_error"],
        "spectrum_residual": check["spectrum_residual"],
    }
    if args.transfer:
        payload["dressed_transfer"] = dressed_transfer_check(cs, n_max=min(args.n_max, 3))
    return Artifact(payload, default_format="json")


def cmd_relax(bundle, args) -> Artifact:
    cs, grid, band = _band(bundle)
    eta = _eta(args, band)
    R = build_rate_matrix(band, cs, eta, args.temp_ev)
    n = len(grid)
    start = int(np.argmax(band.energies)) if args.initial_k is None else args.initial_k
    if not 0 <= start < n:
        raise DomainError(f"--initial-k must lie in [0, {n})")
    P0 = np.zeros(n)
    P0[start] = 1.0
    traj = evolve_populations(R, P0, args.t_max, args.steps)
    report = heating_report(traj, band, R.omega_v, eta)
    cols = ["t", "mean_energy_ev"] + [f"P_k{i}" for i in range(n)]
    rows = [(float(t), float(e), *map(float, p))
            for t, e, p in zip(traj.times, report.mean_energy, traj.populations)]
    summary = {"eta_ev": eta, "temperature_ev": args.temp_ev, "initial_k_index": start,
               **report.as_dict()}
    return Artifact({"heating": summary}, columns=cols, rows=rows)


COMMANDS = {
    "couplings": cmd_couplings,
    "sweep-theta": cmd_sweep_theta,
    "band": cmd_band,
    "rates": cmd_rates,
    "ed": cmd_ed,
    "evolve": cmd_evolve,
    "polaron": cmd_polaron,
    "relax": cmd_relax,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _kv(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON or TOML config file")
    common.add_argument("--set", dest="overrides", action="append", type=_kv, default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    common.add_argument("--output", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = _Parser(prog="exvib", description="Exciton-vibration coupling in a 1D optical lattice.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("couplings", parents=[common], help="coupling constants as JSON")
    p.add_argument("--thresholds", nargs=2, type=float, default=(0.1, 10.0), metavar=("LOW", "HIGH"))

    p = sub.add_parser("sweep-theta", parents=[common], help="J and F versus dipole angle")
    p.add_argument("--from", dest="theta_from", type=float, default=0.0)
    p.add_argument("--to", dest="theta_to", type=float, default=90.0)
    p.add_argument("--steps", type=int, default=181)

    sub.add_parser("band", parents=[common], help="exciton dispersion on the k grid")

    p = sub.add_parser("rates", parents=[common], help="golden-rule rates per mode")
    p.add_argument("--eta-ev", type=float, default=None)
    p.add_argument("--temp-ev", type=float, default=0.0)

    def ed_flags(p):
        p.add_argument("--terms", default="ex,vib,onsite,transfer")
        p.add_argument("--size-cap", type=int, default=100_000)

    p = sub.add_parser("ed", parents=[common], help="exact-diagonalisation spectrum")
    ed_flags(p)
    p.add_argument("--eigs", type=int, default=6)

    p = sub.add_parser("evolve", parents=[common], help="time evolution of site populations")
    ed_flags(p)
    p.add_argument("--t", type=float, required=True, help="final time in hbar/eV")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--initial", type=int, default=0, help="initially excited site")

    p = sub.add_parser("polaron", parents=[common], help="polaron shift checks")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--transfer", action="store_true", help="also report dressed transfer vertices")

    p = sub.add_parser("relax", parents=[common], help="rate-equation relaxation over k")
    p.add_argument("--t-max", type=float, required=True, help="final time in hbar/eV")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--temp-ev", type=float, default=0.0)
    p.add_argument("--eta-ev", type=float, default=None)
    p.add_argument("--initial-k", type=int, default=None, help="initial mode index (default: band top)")
    p.add_argument("--summary", help="heating summary JSON path (default: <output>.summary.json)")
    return parser


def _fail(kind, code, message):
    sys.stderr.write(json.dumps({"error": kind, "exit_code": code, "message": str(message)}) + "\n")
    return code


def run_scenario(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", EXIT_USAGE, exc)
    try:
        bundle = load_bundle(args.config, dict(args.overrides))
        config = bundle_to_mapping(bundle)
        artifact = COMMANDS[args.command](bundle, args)
        text = render(artifact, config, args.format)
    except (ValidationError, DomainError, ModelError, DegenerateInputError,
            UnsupportedBoundaryError, ShapeError) as exc:
        return _fail("config", EXIT_CONFIG, exc)
    except ResourceError as exc:
        return _fail("resource", EXIT_RESOURCE, exc)
    except NumericalError as exc:
        return _fail("numerical", EXIT_NUMERICAL, exc)
    except ExvibError as exc:
        return _fail("config", EXIT_CONFIG, exc)

    if args.output:
        out = Path(args.output)
        out.write_text(text)
        meta = {"created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "argv": list(argv if argv is not None else sys.argv[1:]), "version": __version__}
        Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    if args.command == "relax" and (args.summary or args.output):
        path = Path(args.summary or f"{args.output}.summary.json")
        path.write_text(json.dumps(_jsonable({"config": config, **artifact.payload}), indent=2) + "\n")
    return EXIT_OK


def main():
    sys.exit(run_scenario())


if __name__ == "__main__":
    main()
