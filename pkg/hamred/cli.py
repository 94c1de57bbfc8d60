import argparse
import sys

import logmuse

from hamred._version import __version__
from hamred.const import (
    CLOCK_LEGAL,
    CLOCK_MODES,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_SLACK,
    DIM_CAP_ENV,
    EXIT_USAGE,
    MODE_BASIC,
    QIRR_MODES,
    REDUCTION_KINDS,
)
from hamred.utils import _safe_echo


class _HamredParser(argparse.ArgumentParser):
    """Usage errors exit with the dedicated usage code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    common = _HamredParser(add_help=False)
    common.add_argument(
        "-o",
        "--output",
        default=None,
        help="Optional: Path of the artifact to write. [Default: null]",
    )
    common.add_argument(
        "--report",
        default=None,
        help="Optional: Path of the JSON run report. Logged when not given. [Default: null]",
    )
    common.add_argument(
        "--dim-cap",
        dest="dim_cap",
        type=int,
        default=None,
        help="Optional: Largest dense dimension to diagonalize "
        "[Default: $" + DIM_CAP_ENV + ":" + (_safe_echo(DIM_CAP_ENV) or "8192") + "]",
    )
    common.add_argument(
        "--disable-progressbar",
        action="store_true",
        help="Optional: Disable progressbar",
    )
    common.add_argument(
        "--csv",
        default=None,
        help="Optional: Write tabular output (spectra, subset tables) to this CSV file.",
    )
    common.add_argument(
        "--slack",
        type=float,
        default=DEFAULT_SLACK,
        help=f"Optional: Slack for threshold comparisons. [Default: {DEFAULT_SLACK}]",
    )
    logmuse.add_logging_options(common)
    return common


def _parse_cmdl(cmdl):
    """
    parser
    """
    parser = _HamredParser(
        description="Compile verifier circuits to local Hamiltonians and run "
        "disperser-based hardness reductions on small instances",
        usage="""hamred [-V] <command> [<args>]

Compile a verifier to its Kitaev Hamiltonian:
    hamred compile verifier.json --clock legal -o hamiltonian.json

Chain the reductions on a toy monotone verifier:
    hamred reduce qmw verifier.json --g 1 --g-prime 2 -o qmw.json
    hamred reduce qssc qmw.json -o qssc.json
    hamred reduce qirr qssc.json --mode improved -o qirr.json

Build a QMW instance from an encoding tree (too large for reduce qssc; check it with verify):
    hamred reduce qmw verifier.json --tree tree.json -o qmw.json
    hamred verify qmw.json

Check a candidate cover:
    hamred verify qssc.json --subset 0,3,4

""",
    )
    parser.add_argument(
        "-V", "--version", action="version", version=f"%(prog)s {__version__}"
    )
    common = _common_options()
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    subparsers.required = True

    compile_parser = subparsers.add_parser(
        "compile", parents=[common], help="Compile a verifier circuit to H_in + H_out + H_prop + H_stab"
    )
    compile_parser.add_argument("inputs", nargs=1, help="required: circuit artifact")
    compile_parser.add_argument(
        "--clock",
        choices=CLOCK_MODES,
        default=CLOCK_LEGAL,
        help=f"Optional: Clock encoding. [Default: {CLOCK_LEGAL}]",
    )

    reduce_parser = subparsers.add_parser(
        "reduce", parents=[common], help="Run one reduction and write the instance"
    )
    reduce_parser.add_argument("kind", choices=REDUCTION_KINDS, help="required: reduction to run")
    reduce_parser.add_argument(
        "inputs",
        nargs="+",
        help="required: source artifact (circuit for qmw, qmsa and lh; qmw for qssc "
        "and lh-hw; qssc for qirr)",
    )
    reduce_parser.add_argument(
        "--tree", default=None, help="Optional: encoding tree artifact for qmw and qmsa."
    )
    reduce_parser.add_argument(
        "--delta",
        type=float,
        default=None,
        help="Optional: Penalty weight Delta for qssc. [Default: automatic]",
    )
    reduce_parser.add_argument(
        "--mode",
        choices=QIRR_MODES,
        default=MODE_BASIC,
        help=f"Optional: qirr parameter regime. [Default: {MODE_BASIC}]",
    )
    reduce_parser.add_argument(
        "--g",
        type=int,
        default=None,
        help="Optional: Weight threshold g when a monotone circuit is wrapped as qmw without a tree.",
    )
    reduce_parser.add_argument(
        "--g-prime",
        dest="g_prime",
        type=int,
        default=None,
        help="Optional: Weight threshold g' when a monotone circuit is wrapped as qmw without a tree.",
    )
    reduce_parser.add_argument(
        "--epsilon",
        type=float,
        default=0.0,
        help="Optional: Verifier error epsilon. [Default: 0]",
    )
    reduce_parser.add_argument(
        "--clock",
        choices=CLOCK_MODES,
        default=CLOCK_LEGAL,
        help=f"Optional: Clock encoding for compiled Hamiltonians. [Default: {CLOCK_LEGAL}]",
    )
    reduce_parser.add_argument(
        "--seed", type=int, default=0, help="Optional: Seed recorded in the report. [Default: 0]"
    )

    verify_parser = subparsers.add_parser(
        "verify", parents=[common], help="Check an instance or a candidate subset"
    )
    verify_parser.add_argument("inputs", nargs=1, help="required: instance artifact")
    verify_parser.add_argument(
        "--subset",
        default=None,
        help="Optional: Comma-separated 0-based term positions of a candidate subset.",
    )
    verify_parser.add_argument(
        "--brute-force",
        dest="brute_force",
        action="store_true",
        help="Optional: Enumerate every subset up to the size threshold.",
    )
    verify_parser.add_argument(
        "--max-size",
        dest="max_size",
        type=int,
        default=None,
        help="Optional: Largest subset enumerated by --brute-force. [Default: g']",
    )

    spectrum_parser = subparsers.add_parser(
        "spectrum", parents=[common], help="List the lowest eigenvalues of a Hamiltonian"
    )
    spectrum_parser.add_argument(
        "inputs", nargs=1, help="required: operator_sum, circuit, qssc or cq_lh artifact"
    )
    spectrum_parser.add_argument(
        "--k", type=int, default=None, help="Optional: Number of eigenvalues. [Default: all]"
    )
    spectrum_parser.add_argument(
        "--clock",
        choices=CLOCK_MODES,
        default=CLOCK_LEGAL,
        help=f"Optional: Clock encoding when the input is a circuit. [Default: {CLOCK_LEGAL}]",
    )

    disperser_parser = subparsers.add_parser(
        "disperser", parents=[common], help="Search for or check a desk-scale disperser"
    )
    disperser_parser.add_argument("action", choices=["find", "verify"], help="required: action")
    disperser_parser.add_argument(
        "inputs", nargs="*", help="Optional: disperser or encoding_tree artifact for verify."
    )
    disperser_parser.add_argument("--left", type=int, default=None, help="Optional: Left size.")
    disperser_parser.add_argument("--right", type=int, default=None, help="Optional: Right size.")
    disperser_parser.add_argument(
        "--depth",
        type=int,
        default=None,
        help="Optional: Tree depth; sets the left size to 2^(depth+1)-1 and writes an encoding tree.",
    )
    disperser_parser.add_argument("--degree", type=int, default=None, help="Optional: Left degree D.")
    disperser_parser.add_argument(
        "--k", type=int, default=1, help="Optional: Subsets of size 2^k are checked. [Default: 1]"
    )
    disperser_parser.add_argument(
        "--epsilon",
        type=float,
        default=0.5,
        help="Optional: Allowed uncovered fraction. [Default: 0.5]",
    )
    disperser_parser.add_argument(
        "--seed", type=int, default=0, help="Optional: Search seed. [Default: 0]"
    )
    disperser_parser.add_argument(
        "--samples",
        type=int,
        default=None,
        help="Optional: Check this many random subsets instead of all. [Default: exhaustive]",
    )
    disperser_parser.add_argument(
        "--attempts",
        type=int,
        default=DEFAULT_SEARCH_BUDGET,
        help=f"Optional: Search budget. [Default: {DEFAULT_SEARCH_BUDGET}]",
    )

    return parser.parse_args(cmdl)
