"""Command-line front door: model catalogue, studies, CSV/SVG emission.

Exit codes: 0 success, 1 criteria verdict false, 2 configuration error,
3 numeric failure.  All file writes are atomic (temp file then rename).
Angles accept a ``pi`` suffix ("0.5pi"); times are in inverse base-hopping
units.  The ``CHIRALFLOW_THREADS`` environment variable caps worker threads
in the studies.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

from . import criteria as criteria_mod
from . import dynamics, experiments, floquet, hilbert, models, oracles
from .errors import ChiralFlowError, ConfigError

log = logging.getLogger(__name__)

MODELS = ("sgf", "asgf", "chiral", "ladder", "spin-sgf", "spin-asgf")


def parse_angle(text: str) -> float:
    """Parse an angle in radians, with an optional 'pi' suffix multiplier."""
    text = str(text).strip().lower()
    try:
        if text.endswith("pi"):
            head = text[:-2].strip()
            factor = 1.0 if head in ("", "+") else (-1.0 if head == "-" else float(head))
            return factor * math.pi
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse angle {text!r}") from exc


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    text = str(text)
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


@dataclass
class RunConfig:
    """Validated description of one simulate/spectrum/criteria run."""

    model: str = "sgf"
    n: int = 3
    flux: str = "0.5pi"
    beta: float = 2.0
    nn_phase: str = "0.5pi"
    profile: str = "2"
    init: str = "1"
    tmax: str = "2pi"
    grid: int = 2001
    seed: int = 0
    out: str | None = None
    svg: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.n < 3 and self.model not in ("ladder",):
            raise ConfigError("need at least 3 ring nodes")
        if self.model == "ladder" and self.n < 1:
            raise ConfigError("ladder needs at least one cell")
        if self.grid < 2:
            raise ConfigError("grid needs at least 2 points")
        parse_angle(self.flux)
        parse_angle(self.nn_phase)
        parse_angle(self.tmax)
        parse_float_list(self.profile)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(data)


def build_spec(cfg: RunConfig) -> models.NetworkSpec:
    statistics = hilbert.Statistics.spin() if cfg.model.startswith("spin-") else hilbert.Statistics.boson()
    kind = cfg.model.removeprefix("spin-")
    if kind == "sgf":
        return models.sgf_ring(cfg.n, parse_angle(cfg.flux), statistics=statistics)
    if kind == "asgf":
        return models.asgf(cfg.n, cfg.beta, parse_angle(cfg.nn_phase), statistics=statistics)
    if kind == "chiral":
        return models.chiral_n_node(cfg.n, statistics=statistics)
    if kind == "ladder":
        return models.ladder(cfg.n, parse_float_list(cfg.profile), statistics=statistics)
    raise ConfigError(f"unknown model {cfg.model!r}")


def initial_state(cfg: RunConfig, spec: models.NetworkSpec):
    """Initial occupation vector from a node label or a bit pattern.

    A string of 0s and 1s whose length equals the site count is an
    occupation pattern; anything else is a 1-based node label.
    """
    text = cfg.init.strip()
    n = spec.n_sites
    if set(text) <= {"0", "1"} and len(text) == n and n > 1:
        occupation = tuple(int(c) for c in text)
    else:
        try:
            node = int(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse initial state {text!r}") from exc
        if not 1 <= node <= n:
            raise ConfigError(f"initial node {node} outside 1..{n}")
        occupation = tuple(1 if j == node else 0 for j in range(1, n + 1))
    return occupation


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".chiralflow-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def svg_line_chart(x, series, labels, title: str, width: int = 800, height: int = 480) -> str:
    """Self-contained SVG line chart of population traces."""
    x = np.asarray(x, dtype=float)
    series = [np.asarray(s, dtype=float) for s in series]
    left, right, top, bottom = 60, 150, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    x_min, x_max = float(x[0]), float(x[-1]) if x[-1] > x[0] else float(x[0]) + 1.0
    y_min, y_max = 0.0, max(1.0, max(float(np.max(s)) for s in series))

    def sx(v):
        return left + (v - x_min) / (x_max - x_min) * plot_w

    def sy(v):
        return top + (y_max - v) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + plot_w / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x_min + i * (x_max - x_min) / 4
        yv = y_min + i * (y_max - y_min) / 4
        parts.append(f'<line x1="{sx(xv):.1f}" y1="{top + plot_h}" x2="{sx(xv):.1f}" '
                     f'y2="{top + plot_h + 4}" stroke="black"/>')
        parts.append(f'<text x="{sx(xv):.1f}" y="{top + plot_h + 18}" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<line x1="{left - 4}" y1="{sy(yv):.1f}" x2="{left}" '
                     f'y2="{sy(yv):.1f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{sy(yv) + 4:.1f}" '
                     f'text-anchor="end">{yv:.2g}</text>')
    parts.append(f'<text x="{left + plot_w / 2}" y="{height - 12}" '
                 f'text-anchor="middle">time (1/J0)</text>')
    parts.append(f'<text x="18" y="{top + plot_h / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {top + plot_h / 2})">population</text>')
    stride = max(1, x.size // 600)
    for idx, (s, label) in enumerate(zip(series, labels)):
        color = _SVG_COLORS[idx % len(_SVG_COLORS)]
        pts = " ".join(f"{sx(x[i]):.1f},{sy(s[i]):.1f}" for i in range(0, x.size, stride))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = top + 16 * idx
        parts.append(f'<line x1="{width - right + 10}" y1="{ly}" x2="{width - right + 34}" '
                     f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - right + 40}" y="{ly + 4}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run_trajectory(cfg: RunConfig):
    spec = build_spec(cfg)
    occupation = initial_state(cfg, spec)
    n_exc = sum(occupation)
    basis = hilbert.enumerate_basis(spec.n_sites, n_exc, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis)
    psi0 = np.zeros(len(basis), dtype=complex)
    psi0[basis.state_index(occupation)] = 1.0
    times = np.linspace(0.0, parse_angle(cfg.tmax), cfg.grid)
    return spec, dynamics.evolve(h, psi0, times, basis=basis, labels=spec.labels)


def cmd_simulate(cfg: RunConfig) -> int:
    spec, traj = run_trajectory(cfg)
    csv_text = dynamics.trajectory_to_csv(traj)
    if cfg.out:
        write_atomic(cfg.out, csv_text)
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(csv_text)
    if cfg.svg:
        series = [traj.populations[:, i] for i in range(traj.populations.shape[1])]
        chart = svg_line_chart(traj.times, series, traj.labels,
                               title=f"{cfg.model} populations")
        write_atomic(cfg.svg, chart)
        print(f"wrote {cfg.svg}")
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    basis = hilbert.enumerate_basis(spec.n_sites, 1, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis)
    values = dynamics.eigendecompose(h).eigenvalues
    lines = ["index,eigenvalue"] + [f"{i},{v:.12g}" for i, v in enumerate(values)]
    text = "\n".join(lines) + "\n"
    if cfg.out:
        write_atomic(cfg.out, text)
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_criteria(cfg: RunConfig) -> int:
    spec = build_spec(cfg)
    basis = hilbert.enumerate_basis(spec.n_sites, 1, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis)
    report = criteria_mod.check_criteria(h, spec.ring_nodes)
    print(report.summary())
    return 0 if report.verdict else 1


def _csv(rows, header: str) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_study_disorder(args) -> int:
    base = models.asgf(4, 2.0, math.pi / 2)
    amplitudes = parse_float_list(args.amplitudes)
    rows = []
    for kind in (args.kind,) if args.kind else experiments.DISORDER_KINDS:
        cfg = experiments.DisorderConfig(kind, max(amplitudes), args.samples, args.seed)
        for point in experiments.disorder_sweep(base, cfg, amplitudes=amplitudes):
            rows.append((kind, point.amplitude, point.mean_fidelity,
                         point.stderr, point.samples, args.seed))
    text = _csv(rows, "kind,amplitude,mean_fidelity,stderr,samples,seed")
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_study_ladder(args) -> int:
    sizes = parse_int_list(args.nrange)
    rows = []
    for point in experiments.ladder_fidelity_curve(sizes):
        rows.append((point.n_copies, point.fidelity, point.period,
                     ";".join(f"{b:.6g}" for b in point.profile)))
    text = _csv(rows, "n_copies,fidelity,period,profile")
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_study_optimize(args) -> int:
    result = experiments.optimize_ladder(args.ncopies, budget=args.budget, seed=args.seed)
    rows = [(args.ncopies, result.fidelity, result.period, result.iterations,
             str(result.monotone).lower(), str(result.budget_exhausted).lower(),
             ";".join(f"{b:.6g}" for b in result.beta_profile))]
    text = _csv(rows, "n_copies,fidelity,period,evaluations,monotone,budget_exhausted,profile")
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_study_bell(args) -> int:
    spec = models.sgf_ring(3, 3 * math.pi / 2, statistics=hilbert.Statistics.spin())
    initial = experiments.PSI_PLUS if args.initial == "psi" else experiments.PHI_PLUS
    result = experiments.bell_transport(spec, initial)
    rows = []
    for i, t in enumerate(result.times):
        rows.append((t, *result.psi_populations[:, i], *result.phi_populations[:, i],
                     *result.concurrence[:, i]))
    header = ("t,p_psi_12,p_psi_23,p_psi_31,p_phi_12,p_phi_23,p_phi_31,"
              "c_12,c_23,c_31")
    text = _csv(rows, header)
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_study_floquet(args) -> int:
    ratios = parse_float_list(args.ratios)
    rows = floquet.rwa_deviation_scan(ratios)
    text = _csv(rows, "ratio,max_deviation")
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle_check(_args) -> int:
    checks = []
    t = np.linspace(0.0, 12.0, 1200)

    spec = models.sgf_ring(3, math.pi / 2)
    traj = _evolve_spec(spec, t)
    err = max(float(np.max(np.abs(traj.node_population(j) - oracles.three_node_sgf_population(j, t))))
              for j in (1, 2, 3))
    checks.append(("three_node_ring", err))

    for theta in (math.pi / 4, math.pi / 2, 3 * math.pi / 8):
        traj = _evolve_spec(models.sgf_ring(4, 4 * theta), t)
        oracle = oracles.four_node_sgf_populations(theta, t)
        err = float(np.max(np.abs(traj.populations.T - oracle)))
        checks.append((f"four_node_ring_theta={theta:.3f}", err))

    for beta in (1.0, 2.0, 3.0):
        traj = _evolve_spec(models.asgf(4, beta, math.pi / 2), t)
        err = max(float(np.max(np.abs(traj.node_population(j)
                                      - np.asarray(oracles.four_node_asgf_amplitude(j, beta, t)) ** 2)))
                  for j in (1, 2, 3, 4))
        checks.append((f"four_node_centre_beta={beta:g}", err))

    traj = _evolve_spec(models.asgf(6, math.sqrt(2.0), math.pi / 2), t)
    oracle = oracles.six_node_asgf_populations(math.sqrt(2.0), t)
    checks.append(("six_node_centre", float(np.max(np.abs(traj.populations[:, :6].T - oracle)))))

    for n in range(3, 9):
        traj = _evolve_spec(models.sgf_ring(n, n * math.pi / 2), t)
        err = max(float(np.max(np.abs(traj.node_population(j)
                                      - np.abs(oracles.n_node_sgf_solution(n, j, t)) ** 2)))
                  for j in range(1, n + 1))
        checks.append((f"ring_plane_waves_n={n}", err))

    traj = _evolve_spec(models.ladder(3, [2.0]), t)
    rec = oracles.ladder_return_population(3, t)
    checks.append(("ladder_resolvent", float(np.max(np.abs(traj.node_population(1) - rec)))))

    worst = 0.0
    for name, err in checks:
        status = "OK" if err <= 1e-9 else "FAIL"
        print(f"{name}: max_err={err:.3e} {status}")
        worst = max(worst, err)
    return 0 if worst <= 1e-9 else 3


def _evolve_spec(spec, times):
    basis = hilbert.enumerate_basis(spec.n_sites, 1, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis)
    return dynamics.evolve(h, dynamics.basis_state(spec.n_sites, 0), times, labels=spec.labels)


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.from_file(args.config)
    else:
        cfg = RunConfig()
    overrides = {}
    for name in RunConfig.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    data = cfg.to_dict()
    data.update(overrides)
    return RunConfig.from_dict(data)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--model", choices=MODELS)
    parser.add_argument("--n", type=int, help="ring nodes (or ladder cells)")
    parser.add_argument("--flux", help="ring flux, e.g. 0.5pi")
    parser.add_argument("--beta", type=float, help="centre coupling strength")
    parser.add_argument("--nn-phase", dest="nn_phase", help="per-link phase, e.g. 0.5pi")
    parser.add_argument("--profile", help="ladder coupling profile, e.g. 2,2.5")
    parser.add_argument("--init", help="initial node label or bit pattern")
    parser.add_argument("--tmax", help="time window length, e.g. 2pi")
    parser.add_argument("--grid", type=int, help="number of grid points")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--svg", help="SVG output path")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralflow",
                                     description="chiral excitation flow simulator")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("simulate", "spectrum", "criteria"):
        p = sub.add_parser(name)
        _add_model_flags(p)

    study = sub.add_parser("study")
    study_sub = study.add_subparsers(dest="study", required=True)

    p = study_sub.add_parser("disorder")
    p.add_argument("--kind", choices=experiments.DISORDER_KINDS)
    p.add_argument("--amplitudes", default="0,0.1,0.2,0.3")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = study_sub.add_parser("ladder")
    p.add_argument("--nrange", default="1:8")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = study_sub.add_parser("optimize")
    p.add_argument("--ncopies", type=int, required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = study_sub.add_parser("bell")
    p.add_argument("--initial", choices=("psi", "phi"), default="psi")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = study_sub.add_parser("floquet")
    p.add_argument("--ratios", default="10,20,40")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    sub.add_parser("oracle-check")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("simulate", "spectrum", "criteria"):
            cfg = _config_from_args(args)
            handler = {"simulate": cmd_simulate, "spectrum": cmd_spectrum,
                       "criteria": cmd_criteria}[args.command]
            return handler(cfg)
        if args.command == "study":
            handler = {"disorder": cmd_study_disorder, "ladder": cmd_study_ladder,
                       "optimize": cmd_study_optimize, "bell": cmd_study_bell,
                       "floquet": cmd_study_floquet}[args.study]
            return handler(args)
        if args.command == "oracle-check":
            return cmd_oracle_check(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ChiralFlowError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
