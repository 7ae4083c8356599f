#!/usr/bin/env python3
"""
spinham
Main CLI Entry Point

Command-line front end for the effective spin Hamiltonian toolkit. Reads and
writes the JSON matrix files of src/matrix_io.py and prints rich reports, or
machine-readable JSON with --json.

Exit codes: 0 ok, 2 input error, 3 contract violation, 4 model violation.
"""

import argparse
import json
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import (
    APP_NAME,
    APP_VERSION,
    EXIT_CONTRACT_VIOLATION,
    EXIT_OK,
    SCHEMA_VERSION,
    TOLERANCES,
    resolve_speed_of_light,
    set_tolerance_overrides,
    tolerance,
)
from src import ui
from src.alt_diag import alt_diagonalize, cross_validate
from src.errors import ModelViolationError, SpinHamError, ValidationError
from src.gtensor_core import (
    build_zeeman,
    effective_g,
    extract_g_doublet,
    extract_g_general,
    principal_axes,
    rotate_field_frame,
    splittings_closed_form,
    tr_residual,
    zeeman_eigensystem,
)
from src.matrix_io import (
    MatrixFile,
    encode_array,
    from_g,
    from_spin,
    from_zeeman,
    load_matrix_file,
    write_matrix_file,
)
from src.modelgen import FixtureSpec, make_fixture, random_g
from src.rng import spawn_seeds
from src.spin_algebra import SpinQuantum, spin_matrices
from src.time_reversal import kramers_rep, random_antiunitary, random_tr_odd_hermitian, verify_theorems


def parse_tolerances(items: Sequence[str]) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for item in items:
        name, sep, raw = item.partition("=")
        name = name.strip()
        if not sep:
            raise ValidationError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in TOLERANCES:
            raise ValidationError(f"unknown tolerance {name!r}; known: {', '.join(sorted(TOLERANCES))}")
        try:
            value = float(raw)
        except ValueError:
            raise ValidationError(f"tolerance {name} must be a number, got {raw!r}")
        if not value > 0:
            raise ValidationError(f"tolerance {name} must be positive")
        out[name] = value
    return out


class SpinHamCLI:
    # commands whose stdout is a matrix file unless --table / --output is given
    DATA_COMMANDS = ("spin-matrices", "extract", "generate")

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.json_mode = bool(getattr(args, "json", False))
        self._c_flag = getattr(args, "c", None)
        self.tol: Dict[str, float] = {}
        writes_data = (
            args.command in self.DATA_COMMANDS
            and not getattr(args, "table", False)
            and getattr(args, "output", None) in (None, "-")
        )
        ui.route_status_to_stderr(self.json_mode or writes_data)

    def speed_of_light(self, mf: Optional[MatrixFile] = None) -> float:
        """--c flag, then the file's own c, then SPINHAM_C, then the default."""
        if self._c_flag is not None:
            return resolve_speed_of_light(self._c_flag)
        if mf is not None and mf.c is not None:
            return mf.c
        return resolve_speed_of_light()

    def emit(self, result: dict):
        doc = {"schema_version": SCHEMA_VERSION, "command": self.args.command, "result": result}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        sys.stdout.flush()

    def report_error(self, error: SpinHamError):
        ui.print_error(error.message)
        if self.json_mode:
            doc = {"schema_version": SCHEMA_VERSION, "command": self.args.command, "error": error.to_dict()}
            sys.stdout.write(json.dumps(doc, indent=2) + "\n")

    def run(self) -> int:
        handlers = {
            "spin-matrices": self.cmd_spin_matrices,
            "principal-axes": self.cmd_principal_axes,
            "extract": self.cmd_extract,
            "splittings": self.cmd_splittings,
            "alt-diag": self.cmd_alt_diag,
            "cross-validate": self.cmd_cross_validate,
            "verify": self.cmd_verify,
            "generate": self.cmd_generate,
        }
        try:
            self.tol = parse_tolerances(getattr(self.args, "tol", None) or [])
            set_tolerance_overrides(self.tol)
            return handlers[self.args.command]()
        except SpinHamError as e:
            self.report_error(e)
            return e.exit_code
        finally:
            set_tolerance_overrides()

    def check_trials(self):
        if self.args.trials < 1:
            raise ValidationError(f"--trials must be at least 1, got {self.args.trials}")
        if not 0 <= self.args.seed < 2 ** 64:
            raise ValidationError(f"--seed must be in [0, 2^64), got {self.args.seed}")

    def cmd_spin_matrices(self) -> int:
        sm = spin_matrices(SpinQuantum(self.args.two_s))
        residual = sm.commutator_residual()
        if self.args.table:
            ui.print_spin_matrices(sm, residual)
        else:
            write_matrix_file(from_spin(sm))
            ui.print_info(f"commutator residual {residual:.3e}")
        return EXIT_OK

    def cmd_principal_axes(self) -> int:
        mf = load_matrix_file(self.args.input)
        pd = principal_axes(mf.to_g(), self.tol)
        limit = tolerance("diag_residual", self.tol)
        if self.json_mode:
            result = pd.to_dict()
            result["g_eigs"] = [float(x) for x in pd.g_eigs]
            self.emit(result)
        else:
            ui.print_decomposition(pd)
            ui.print_residual("diagonal residual", pd.g_diag_residual, limit)
        return EXIT_OK if pd.g_diag_residual <= limit else EXIT_CONTRACT_VIOLATION

    def cmd_extract(self) -> int:
        mf = load_matrix_file(self.args.input)
        zt = mf.to_zeeman()
        c = self.speed_of_light(mf)
        sm = spin_matrices(zt.s)
        g, span = extract_g_general(zt, sm, c)
        if span > tolerance("span", self.tol):
            raise ModelViolationError(
                f"Zeeman triple is not linear in S (residual {span:.3e} outside span{{S_v}})"
            )
        if self.args.doublet:
            g = extract_g_doublet(zt, c, self.tol)
        ui.print_info(f"residual outside span{{S_v}}: {span:.3e}")
        ui.print_info(f"time-reversal residual under the Kramers representation: {tr_residual(zt):.3e}")
        if self.args.table:
            ui.print_g_tensor(g.g, "extracted g-tensor", span)
        else:
            write_matrix_file(from_g(g, zt.s.two_s, mf.c), self.args.output)
            if self.args.output not in (None, "-"):
                ui.print_success(f"g-tensor written to {self.args.output}")
        return EXIT_OK

    def cmd_splittings(self) -> int:
        mf = load_matrix_file(self.args.input)
        g = mf.to_g()
        c = self.speed_of_light(mf)
        sm = spin_matrices(mf.spin)
        field = np.asarray(self.args.field, dtype=float)
        levels, vecs = splittings_closed_form(g, field, sm, c, self.tol)
        numeric, _ = zeeman_eigensystem(np.zeros(sm.s.m), build_zeeman(g, sm, c), field)
        residual = float(np.max(np.abs(numeric - levels)))
        g_eff = effective_g(g, field) if np.linalg.norm(field) > 0 else None
        m_ascending = sm.s.m_values[::-1]
        limit = tolerance("diag_residual", self.tol)
        if self.json_mode:
            self.emit({
                "field": [float(x) for x in field],
                "m_values": [float(x) for x in m_ascending],
                "levels": [float(x) for x in levels],
                "eigvecs": encode_array(vecs),
                "g_eff": g_eff,
                "numeric_residual": residual,
            })
        else:
            ui.print_splittings(levels, m_ascending, field, g_eff)
            ui.print_residual("closed form vs numeric diagonalization", residual, limit)
        return EXIT_OK if residual <= limit else EXIT_CONTRACT_VIOLATION

    def cmd_alt_diag(self) -> int:
        mf = load_matrix_file(self.args.input)
        zt = mf.to_zeeman()
        c = self.speed_of_light(mf)
        sm = spin_matrices(zt.s)
        if self.args.principal_frame:
            g_in, _ = extract_g_general(zt, sm, c)
            zt = rotate_field_frame(zt, principal_axes(g_in, self.tol).o_r)
        result = alt_diagonalize(zt, sm, c, self.tol)
        if self.json_mode:
            self.emit(result.to_dict())
        else:
            ui.print_alt_result(result)
        return EXIT_OK

    def cmd_cross_validate(self) -> int:
        rows: List[dict] = []
        if self.args.input:
            mf = load_matrix_file(self.args.input)
            report = cross_validate(mf.to_g(), spin_matrices(mf.spin), self.speed_of_light(mf), self.tol)
            rows.append(self._cross_row(None, report))
        else:
            self.check_trials()
            s = SpinQuantum(self.args.two_s)
            sm = spin_matrices(s)
            c = self.speed_of_light()
            seeds = spawn_seeds(self.args.seed, self.args.trials)
            with ui.create_progress_bar("cross-validating") as progress:
                task = progress.add_task("cross-validating", total=len(seeds))
                for seed in seeds:
                    report = cross_validate(random_g(FixtureSpec(seed, s)), sm, c, self.tol)
                    rows.append(self._cross_row(seed, report))
                    progress.advance(task)
        max_dev = max(row["deviation"] for row in rows)
        if self.json_mode:
            self.emit({"trials": len(rows), "max_deviation": max_dev, "results": rows})
        else:
            ui.print_cross_validation(rows, max_dev)
            ui.print_success(f"{len(rows)} case(s) agree within {tolerance('cross_validate', self.tol):.1e}")
        return EXIT_OK

    @staticmethod
    def _cross_row(seed: Optional[int], report) -> dict:
        return {
            "seed": seed,
            "principal": [float(x) for x in report.principal.g_values],
            "alternative": [float(x) for x in report.alternative.g_values],
            "det_sign": int(report.principal.det_sign),
            "deviation": float(report.max_deviation),
        }

    def cmd_verify(self) -> int:
        self.check_trials()
        s = SpinQuantum(self.args.two_s)
        k = random_antiunitary(s.two_s, self.args.seed) if self.args.random_rep else kramers_rep(s)
        op = random_tr_odd_hermitian(k, self.args.seed)
        report = verify_theorems(k, op, self.args.trials, self.args.seed, self.tol)
        limit = tolerance("theorem", self.tol)
        if self.json_mode:
            result = report.to_dict()
            result["passed"] = report.passed(limit)
            self.emit(result)
        else:
            ui.print_theorem_report(report)
            ui.print_residual("max theorem residual", report.max_residual, limit)
        return EXIT_OK if report.passed(limit) else EXIT_CONTRACT_VIOLATION

    def cmd_generate(self) -> int:
        spec = FixtureSpec(
            seed=self.args.seed,
            s=SpinQuantum(self.args.two_s),
            det_sign=self.args.det_sign,
            singular_rows=self.args.singular_rows,
        )
        c = self.speed_of_light()
        if self.args.kind == "g_tensor":
            mf = from_g(random_g(spec), spec.s.two_s, c)
        else:
            _, zt = make_fixture(spec, c, scrambled=not self.args.unscrambled)
            mf = from_zeeman(zt, c)
        write_matrix_file(mf, self.args.output)
        if self.args.output not in (None, "-"):
            ui.print_success(f"{mf.kind} fixture written to {self.args.output}")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Machine-readable JSON output")
    common.add_argument("--c", type=float, default=None, help="Speed of light in atomic units")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="Override a tolerance")

    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="EPR effective spin Hamiltonians: g-tensors, principal axes and time reversal",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spin-matrices", parents=[common], help="Write the spin matrices S_x, S_y, S_z")
    p.add_argument("--two-s", type=int, required=True, help="2S")
    p.add_argument("--table", action="store_true", help="Print tables instead of a matrix file")

    p = sub.add_parser("principal-axes", parents=[common], help="Diagonalize a g-tensor")
    p.add_argument("--input", required=True, help="g_tensor file ('-' for stdin)")
    p.add_argument("--table", action="store_true", help="Human-readable report (default)")

    p = sub.add_parser("extract", parents=[common], help="Extract g from a Zeeman triple")
    p.add_argument("--input", required=True, help="zeeman_triple file ('-' for stdin)")
    p.add_argument("--output", help="Write the g_tensor file here (default stdout)")
    p.add_argument("--doublet", action="store_true", help="Use the Kramers-doublet formulas")
    p.add_argument("--table", action="store_true", help="Print a table instead of a matrix file")

    p = sub.add_parser("splittings", parents=[common], help="Zeeman levels for a field")
    p.add_argument("--input", required=True, help="g_tensor file")
    p.add_argument("--field", type=float, nargs=3, required=True, metavar=("BX", "BY", "BZ"),
                   help="Field in atomic units")

    p = sub.add_parser("alt-diag", parents=[common], help="Alternative diagonalization of a Zeeman triple")
    p.add_argument("--input", required=True, help="zeeman_triple file")
    p.add_argument("--principal-frame", action="store_true",
                   help="Rotate the field frame to the G eigenframe first")

    p = sub.add_parser("cross-validate", parents=[common], help="Compare both diagonalization procedures")
    p.add_argument("--input", help="g_tensor file; without it random fixtures are used")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--two-s", type=int, default=1)

    p = sub.add_parser("verify", parents=[common], help="Check the time-reversal theorems numerically")
    p.add_argument("--two-s", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-rep", action="store_true", help="Use a random antiunitary representation")

    p = sub.add_parser("generate", parents=[common], help="Write a seeded synthetic fixture")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--two-s", type=int, required=True)
    p.add_argument("--det-sign", type=int, choices=[-1, 1], default=None)
    p.add_argument("--singular-rows", type=int, choices=[0, 1, 2], default=0)
    p.add_argument("--kind", choices=["g_tensor", "zeeman_triple"], default="zeeman_triple")
    p.add_argument("--unscrambled", action="store_true", help="Skip the random frame and basis scramble")
    p.add_argument("--output", help="Output path (default stdout)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return SpinHamCLI(args).run()


if __name__ == "__main__":
    sys.exit(main())
