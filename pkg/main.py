import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import argparse
import logging
import math
from pathlib import Path
from typing import List, Optional

from artifacts import cf_format
from artifacts.cache import load_or_build
from artifacts.manifest import RunManifest, verify_manifest
from artifacts.writers import (CORRELATION_COLUMNS, correlation_rows, read_correlation_csv,
                               write_csv, write_json)
from common.config import ExperimentConfig, load_config_file
from common.errors import DegenerateFit, InsufficientTail, WorkbenchError
from common.table import TableKind
from engine.confrac import (PartialQuotients, build_liouville_alpha, convergents, delta,
                            expand_real, golden_ratio)
from engine.correlation import (davenport_sum, decay_fit, furstenberg_S, phi_coefficient_bound,
                                phi_fourier_coeffs, sup_davenport)
from engine.flows import (FurstenbergCocycle, SkewProductMap, cocycle_sum_naive,
                          cocycle_sum_telescoped, skew_orbit)
from engine.sieve import mertens

logger = logging.getLogger("workbench")

COMMANDS = ("sieve", "alpha", "cf", "orbit", "cocycle", "correlate", "davenport", "phi",
            "fit", "verify")

# flag -> ExperimentConfig field
FLAGS = {
    "--n-max": "n_max", "--grid": "N_grid", "--precision-bits": "precision_bits",
    "--q-cap": "q_cap", "--coeff-rule": "coefficient_rule", "--c-bound": "C",
    "--threads": "threads", "--seed": "seed", "--cache-dir": "cache_dir",
    "--out": "output_path", "--format": "format", "--segment-size": "segment_size",
    "--memory-budget": "memory_budget", "--kind": "kind", "--length": "length",
    "--x": "x", "--steps": "steps", "--mode": "mode", "--a": "a", "--c": "c", "--d": "d",
    "--x0": "x0", "--y0": "y0", "--n": "n", "--K": "K", "--theta": "theta",
    "--grid-count": "grid_count", "--c1": "c1", "--l-max": "l_max",
    "--quad-nodes": "quad_nodes", "--coeff-file": "coeff_file", "--input": "input_path",
    "--manifest": "manifest_path",
}
SWITCHES = {"--rebuild": "rebuild", "--golden": "golden"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file, overridden by flags")
    common.add_argument("--verbose", "-v", action="store_true")
    for flag, dest in FLAGS.items():
        common.add_argument(flag, dest=dest, default=None)
    for flag, dest in SWITCHES.items():
        common.add_argument(flag, dest=dest, action="store_const", const=True, default=None)

    parser = argparse.ArgumentParser(
        description="Moebius disjointness workbench for skew products over rotations")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {dest: getattr(args, dest) for dest in list(FLAGS.values()) + list(SWITCHES.values())}
    return ExperimentConfig.from_sources(file_values, overrides)


class ExperimentRunner:
    """Runs one subcommand for a validated config and records it in a manifest."""

    def __init__(self, command: str, config: ExperimentConfig):
        self.command = command
        self.config = config
        self.manifest = RunManifest(config={"command": command, **config.as_dict()})

    def run(self) -> int:
        if self.command == "verify":
            return self.verify()
        with self.manifest.stage(self.command):
            written = getattr(self, f"cmd_{self.command}")()
        for path in written:
            self.manifest.add_file(path)
        if written:
            self.manifest.write(self.manifest_path(written[0]))
        return 0

    # -- helpers --------------------------------------------------------------

    def out(self, extension: str) -> Path:
        if self.config.output_path:
            return Path(self.config.output_path)
        return Path(f"{self.command}.{extension}")

    @staticmethod
    def manifest_path(out: Path) -> Path:
        return Path(f"{out}.manifest.json")

    def table(self, kind: Optional[str] = None):
        cfg = self.config
        kind = TableKind(kind or cfg.kind)
        with self.manifest.stage("sieve"):
            table, hit = load_or_build(kind, cfg.n_max, cfg.cache_dir, rebuild=cfg.rebuild,
                                       segment_size=cfg.segment_size, threads=cfg.threads,
                                       memory_budget=cfg.memory_budget)
        if hit:
            self.manifest.cache_hits.append(f"{kind.value}-{cfg.n_max}")
        return table

    def alpha(self) -> PartialQuotients:
        if self.config.golden:
            return golden_ratio(self.config.length)
        return build_liouville_alpha(self.config.q_cap)

    def cocycle(self, alpha: PartialQuotients) -> FurstenbergCocycle:
        cfg = self.config
        if cfg.coefficient_rule == "furstenberg":
            return FurstenbergCocycle.furstenberg(alpha, cfg.precision_bits)
        if cfg.coefficient_rule == "constant":
            return FurstenbergCocycle.constant(alpha, cfg.c1, cfg.precision_bits)
        return FurstenbergCocycle.from_file(alpha, cfg.coeff_file, cfg.C, cfg.precision_bits)

    # -- subcommands ----------------------------------------------------------

    def cmd_sieve(self) -> List[Path]:
        table = self.table()
        points = sorted(set(self.config.N_grid) | {table.n_max})
        series = mertens(table, points)
        self.manifest.precision_report["M(n_max)"] = series[table.n_max]
        path = write_csv(self.out("csv"), ("N", "M"), series.checkpoints)
        print(f"{table.kind.value} table to {table.n_max}: M({table.n_max}) = {series[table.n_max]}")
        return [path]

    def cmd_alpha(self) -> List[Path]:
        pq = self.alpha()
        path = cf_format.write(pq, self.out("cf"))
        print(f"alpha = [{pq.a[0]}; {', '.join(map(str, pq.a[1:]))}] ({pq.source.value})")
        return [path]

    def cmd_cf(self) -> List[Path]:
        cfg = self.config
        pq = expand_real(cfg.x, cfg.length, cfg.precision_bits)
        out = self.out("cf")
        written = [cf_format.write(pq, out)]
        rows = []
        for conv in convergents(pq, pq.J):
            try:
                d = float(delta(pq, conv.k, cfg.precision_bits).mantissa)
            except InsufficientTail:
                d = math.nan
            rows.append((conv.k, pq.a[conv.k], conv.l, conv.q, d))
        if cfg.format == "csv":
            written.append(write_csv(f"{out}.csv", ("k", "a", "l", "q", "delta"),
                                     [(k, str(a), str(l), str(q), d) for k, a, l, q, d in rows]))
        else:
            written.append(write_json(f"{out}.json", {
                "x": cfg.x, "source": pq.source.value, "exact": pq.exact,
                "convergents": [{"k": k, "a": str(a), "l": str(l), "q": str(q), "delta": d}
                                for k, a, l, q, d in rows]}))
        self.manifest.precision_report["certified_quotients"] = len(pq)
        print(f"{cfg.x}: {len(pq)} quotients certified at {cfg.precision_bits} bits")
        return written

    def cmd_orbit(self) -> List[Path]:
        cfg = self.config
        alpha = self.alpha()
        T = SkewProductMap(cfg.a, cfg.c, cfg.d, alpha, self.cocycle(alpha))
        orbit = skew_orbit(T, (cfg.x0, cfg.y0), cfg.steps, cfg.mode, cfg.precision_bits)
        rows = [(n, x, y) for n, (x, y) in enumerate(orbit.tolist())]
        path = write_csv(self.out("csv"), ("n", "x", "y"), rows)
        print(f"{cfg.steps} steps of the skew product in {cfg.mode} precision")
        return [path]

    def cmd_cocycle(self) -> List[Path]:
        cfg = self.config
        cocycle = self.cocycle(self.alpha())
        K = cocycle.check_K(cfg.K)
        naive = cocycle_sum_naive(cocycle, cfg.n, K, threads=cfg.threads)
        telescoped = cocycle_sum_telescoped(cocycle, cfg.n, K)
        diff = abs(naive - telescoped)
        self.manifest.precision_report["cocycle_abs_diff"] = diff
        path = write_csv(self.out("csv"), ("n", "K", "naive", "telescoped", "abs_diff"),
                         [(cfg.n, K, naive, telescoped, diff)])
        print(f"n={cfg.n}, K={K}: naive {naive:.15g}, telescoped {telescoped:.15g}, diff {diff:.3e}")
        return [path]

    def cmd_correlate(self) -> List[Path]:
        cfg = self.config
        table = self.table()
        cocycle = self.cocycle(self.alpha())
        series = furstenberg_S(cocycle, table, cfg.N_grid, threads=cfg.threads)
        out = self.out("csv")
        written = [write_csv(out, CORRELATION_COLUMNS, correlation_rows(series))]
        self.manifest.precision_report["K"] = series.meta["K"]
        try:
            fit = decay_fit(series)
        except DegenerateFit as e:
            logger.warning(f"No decay fit: {e}")
        else:
            written.append(write_json(f"{out}.fit.json", fit.to_json_dict()))
            print(f"A_hat = {fit.A_hat:.4f} (residual rms {fit.residual_rms:.2e})")
        for N, value in series.entries:
            print(f"N={N}: |S(N)|/N = {abs(value) / N:.6e}")
        return written

    def cmd_davenport(self) -> List[Path]:
        cfg = self.config
        table = self.table()
        rows = []
        for N in cfg.N_grid:
            value = davenport_sum(table, cfg.theta, N, threads=cfg.threads)
            rows.append((N, value.real, value.imag, abs(value), abs(value) / N))
        out = self.out("csv")
        written = [write_csv(out, CORRELATION_COLUMNS, rows)]
        if cfg.grid_count:
            sup_rows = []
            for N in cfg.N_grid:
                theta_star, value = sup_davenport(table, N, cfg.grid_count)
                sup_rows.append((N, theta_star, abs(value), abs(value) / N))
            written.append(write_csv(f"{out}.sup.csv",
                                     ("N", "theta_star", "abs_S", "abs_S_over_N"), sup_rows))
        print(f"Davenport sums at theta={cfg.theta} for {len(rows)} grid points")
        return written

    def cmd_phi(self) -> List[Path]:
        cfg = self.config
        coefficients = phi_fourier_coeffs(cfg.c1, cfg.l_max, cfg.quad_nodes)
        C = max(1.0, abs(cfg.c1))
        rows, ratio = [], 0.0
        for a in coefficients:
            bound = phi_coefficient_bound(cfg.c1, a.l) if a.l else math.nan
            if a.l:
                ratio = max(ratio, abs(a.value) * a.l * a.l / (C * C))
            rows.append((a.l, a.value.real, a.value.imag, abs(a.value), a.quad_error,
                         a.oracle_abs_err, bound))
        self.manifest.precision_report["max_l2_ratio"] = ratio
        path = write_csv(self.out("csv"),
                         ("l", "re_a", "im_a", "abs_a", "quad_error", "oracle_abs_err", "bound"),
                         rows)
        print(f"c1={cfg.c1}: max |a_l| l^2 / C^2 = {ratio:.4f}")
        return [path]

    def cmd_fit(self) -> List[Path]:
        if not self.config.input_path:
            raise WorkbenchError("fit needs --input")
        fit = decay_fit(read_correlation_csv(self.config.input_path))
        path = write_json(self.out("json"), fit.to_json_dict())
        print(f"A_hat = {fit.A_hat:.6f}, scale = {fit.scale:.6g}, residual rms {fit.residual_rms:.2e}")
        return [path]

    def verify(self) -> int:
        if not self.config.manifest_path:
            raise WorkbenchError("verify needs --manifest")
        results = verify_manifest(self.config.manifest_path)
        print(f"All {len(results)} files match {self.config.manifest_path}")
        return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        return ExperimentRunner(args.command, config).run()
    except WorkbenchError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except ValueError as e:
        logger.error(f"{e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
