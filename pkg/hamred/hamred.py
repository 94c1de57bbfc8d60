import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import logmuse
from ubiquerg import expandpath

from hamred import formats, kitaev, reductions
from hamred._version import __version__
from hamred.circuits import VerifierCircuit, classify_inputs, decompose, monotone_check
from hamred.cli import _parse_cmdl
from hamred.const import (
    CLOCK_LEGAL,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_SLACK,
    EXIT_FAIL,
    EXIT_OK,
    EXIT_UNDETERMINED,
    EXIT_USAGE,
    FAILS,
    FORMAT_VERSION,
    HOLDS,
    MODE_BASIC,
    NO,
    UNDETERMINED,
    YES,
)
from hamred.disperser import (
    DisperserGraph,
    EncodingTree,
    find_disperser,
    verify_disperser,
)
from hamred.ops import OperatorSum, assemble, assemble_many, spectrum_table
from hamred.utils import HamredException, RegisterLayoutError, SchemaError, dimension_cap

_LOGGER = logging.getLogger(__name__)

_STATUS = {YES: HOLDS, NO: FAILS, UNDETERMINED: UNDETERMINED}


@dataclass
class Verdict:
    name: str
    status: str
    margin: Optional[float] = None


@dataclass
class RunReport:
    """What a command checked, with the outcome of each check."""

    command: str
    parameters: Dict = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    elapsed: float = 0.0
    seed: Optional[int] = None

    def add(self, name: str, holds, margin: Optional[float] = None):
        """Record a check; holds may be a bool or a status string."""
        if isinstance(holds, str):
            status = holds
        else:
            status = HOLDS if holds else FAILS
        self.verdicts.append(Verdict(name, status, None if margin is None else float(margin)))
        _LOGGER.info(
            f"{name}: {status}" + ("" if margin is None else f" (margin {margin:.6g})")
        )

    @property
    def exit_code(self) -> int:
        statuses = {v.status for v in self.verdicts}
        if FAILS in statuses:
            return EXIT_FAIL
        if UNDETERMINED in statuses:
            return EXIT_UNDETERMINED
        return EXIT_OK

    def to_dict(self) -> Dict:
        data = {"version": FORMAT_VERSION, "kind": "report", "hamred": __version__}
        data.update(asdict(self))
        return data


def parse_subset(text: Optional[str]) -> List[int]:
    """'0,3,4' -> [0, 3, 4]; empty or None gives the empty subset."""
    if not text:
        return []
    try:
        return sorted({int(token) for token in text.split(",") if token.strip()})
    except ValueError:
        raise SchemaError(f"subset must be comma-separated integers, got {text!r}", "--subset")


class Hamred:
    """
    Run one hamred command: compile, reduce, verify, spectrum or disperser.
    """

    def __init__(
        self,
        command: str,
        inputs: List[str] = None,
        output: str = None,
        report: str = None,
        dim_cap: int = None,
        disable_progressbar: bool = False,
        csv: str = None,
        slack: float = None,
        clock: str = CLOCK_LEGAL,
        kind: str = None,
        tree: str = None,
        delta: float = None,
        mode: str = MODE_BASIC,
        g: int = None,
        g_prime: int = None,
        epsilon: float = None,
        seed: int = 0,
        subset: str = None,
        brute_force: bool = False,
        max_size: int = None,
        k: int = None,
        action: str = None,
        left: int = None,
        right: int = None,
        depth: int = None,
        degree: int = None,
        samples: int = None,
        attempts: int = None,
        opts=None,
        **kwargs,
    ):
        """
        Constructor

        :param str command: one of compile, reduce, verify, spectrum, disperser
        :param list[str] inputs: artifact paths the command reads
        :param str output: artifact path to write [Default: null]
        :param str report: JSON run report path; the report is logged when absent
        :param int dim_cap: dense dimension cap override [Default: $HAMRED_DIM_CAP or 8192]
        :param bool disable_progressbar: hide rich progress bars
        :param str csv: CSV path for spectra and subset tables
        :param float slack: threshold comparison slack
        :param str clock: clock encoding for compilation
        :param str kind: reduction kind for reduce
        :param str tree: encoding tree artifact for qmw and qmsa
        :param float delta: fixed Delta for qssc, None for automatic
        :param str mode: qirr regime, basic or improved
        :param int g: weight threshold when wrapping a circuit as qmw
        :param int g_prime: weight threshold when wrapping a circuit as qmw
        :param float epsilon: verifier error, or disperser uncovered fraction
        :param int seed: seed for disperser search and sampling
        :param str subset: comma-separated candidate subset for verify
        :param bool brute_force: enumerate subsets up to the size threshold
        :param int max_size: enumeration size limit
        :param int k: spectrum length, or disperser subset exponent
        :param str action: find or verify for disperser
        :param int left: disperser left size
        :param int right: disperser right size
        :param int depth: encoding tree depth
        :param int degree: disperser left degree
        :param int samples: sampled disperser checks
        :param int attempts: disperser search budget
        :param opts: opts object [Optional]
        """
        global _LOGGER
        arguments = dict(locals())
        _LOGGER = logmuse.logger_via_cli(opts) if opts is not None else logging.getLogger(__name__)

        self.command = command
        self.inputs = [expandpath(p) for p in (inputs or [])]
        self.output = output
        self.report_path = report
        self.dim_cap = dimension_cap(dim_cap)
        self.progress = not disable_progressbar
        self.csv = csv
        self.slack = DEFAULT_SLACK if slack is None else slack
        self.clock = clock
        self.kind = kind
        self.tree = tree
        self.delta = delta
        self.mode = mode
        self.g = g
        self.g_prime = g_prime
        self.epsilon = epsilon
        self.seed = seed
        self.subset = subset
        self.brute_force = brute_force
        self.max_size = max_size
        self.k = k
        self.action = action
        self.left = left
        self.right = right
        self.depth = depth
        self.degree = degree
        self.samples = samples
        self.attempts = attempts or DEFAULT_SEARCH_BUDGET

        parameters = {
            key: value
            for key, value in arguments.items()
            if key not in ("self", "opts", "kwargs") and value is not None
        }
        self.run_report = RunReport(command, parameters, seed=seed)

    def run(self) -> RunReport:
        """Run the command, then write or log the report."""
        start = time.time()
        handler = getattr(self, f"_cmd_{self.command}", None)
        if handler is None:
            raise RegisterLayoutError(f"unknown command {self.command!r}")
        handler()
        self.run_report.elapsed = time.time() - start
        if self.report_path:
            formats.write(self.run_report.to_dict(), self.report_path)
        else:
            _LOGGER.debug(f"Report: {self.run_report.to_dict()}")
        return self.run_report

    def _input(self, expected: List[str] = None):
        if not self.inputs:
            raise SchemaError("no input artifact given", "inputs")
        return formats.load(self.inputs[0], expected)

    def _save(self, obj):
        if self.output:
            formats.dump(obj, self.output)
        else:
            _LOGGER.info("No --output given; artifact not written")

    def _cmd_compile(self):
        V = self._input(["circuit"])
        kit = kitaev.compile(decompose(V), self.clock, self.dim_cap)
        sum_, groups = kit.groups()
        if self.output:
            formats.write(formats.encode_operator_sum(sum_, groups), self.output)
        self.run_report.parameters.update({"L": kit.L, "dimension": kit.dim})
        self.run_report.add("compiled", True)

    def _cmd_reduce(self):
        kind = self.kind
        if kind in ("qmw", "qmsa"):
            V = self._input(["circuit"])
            if self.tree:
                T = formats.load(self.tree, ["encoding_tree"])
                build = reductions.to_qmsa if kind == "qmsa" else reductions.to_qmw
                instance = build(V, T, self.progress)
            elif self.g is not None and self.g_prime is not None:
                instance = reductions.QmwInstance.from_verifier(V, self.g, self.g_prime)
                if kind == "qmsa":
                    instance = reductions.QmsaInstance(
                        instance.W, instance.g, instance.g_prime, instance.provenance
                    )
            else:
                raise SchemaError(f"{kind} needs --tree, or --g and --g-prime", "--tree")
            self.run_report.add("g_le_g_prime", instance.g <= instance.g_prime)
        elif kind == "qssc":
            Q = self._input(["qmw", "qmsa"])
            instance = reductions.qmw_to_qssc(
                Q, self.delta, self.epsilon or 0.0, self.clock, self.slack, self.dim_cap
            )
            lowest = reductions.verify_qssc(
                instance, range(len(instance.terms)), self.slack, self.dim_cap
            )
            self.run_report.add("full_set_cover", lowest.is_cover, lowest.margin)
        elif kind == "qirr":
            Q = self._input(["qssc"])
            instance = reductions.qssc_to_qirr(Q, self.mode, dim_cap=self.dim_cap)
            self.run_report.add("projector_terms", True)
        elif kind == "lh":
            V = self._input(["circuit"])
            instance = reductions.cq_to_lh(
                V, self.epsilon or 0.0, self.clock, self.slack, self.dim_cap
            )
            self.run_report.add("a_below_b", instance.a < instance.b, instance.b - instance.a)
        elif kind == "lh-hw":
            Q = self._input(["qmw", "qmsa"])
            instance = reductions.qmw_to_lh_hw(Q, self.epsilon or 0.0, self.clock, self.dim_cap)
            self.run_report.add("a_below_b", instance.a < instance.b, instance.b - instance.a)
        else:
            raise SchemaError(f"unknown reduction {kind!r}", "kind")
        self._save(instance)

    def _cmd_verify(self):
        instance = self._input()
        if isinstance(instance, reductions.QsscInstance):
            self._verify_qssc(instance)
        elif isinstance(instance, reductions.QirrInstance):
            self._verify_qirr(instance)
        elif isinstance(instance, reductions.QmwInstance):
            self._verify_qmw(instance)
        elif isinstance(instance, reductions.CqLhInstance):
            result = reductions.verify_lh(instance, self.max_size, self.slack, self.dim_cap)
            self.run_report.add("lh_instance", _STATUS[result.status])
        elif isinstance(instance, VerifierCircuit):
            statuses = classify_inputs(instance, self.slack, self.progress)
            undecided = [x for x, s in statuses.items() if s == UNDETERMINED]
            self.run_report.parameters["statuses"] = statuses
            self.run_report.add("bounded_error", not undecided)
        else:
            raise SchemaError("verify accepts circuit, qmw, qmsa, qssc, qirr and cq_lh", "kind")

    def _verify_qmw(self, Q: reductions.QmwInstance):
        self.run_report.add("monotone", monotone_check(Q.W, self.slack, self.progress))
        f = reductions.qmw_min_weight(Q)
        self.run_report.parameters["min_weight"] = f
        if f is None:
            self.run_report.add("weight_within_g", False)
        else:
            self.run_report.add("weight_within_g", f <= Q.g, Q.g - f)

    def _verify_qssc(self, instance: reductions.QsscInstance):
        if self.subset is not None:
            verdict = reductions.verify_qssc(
                instance, parse_subset(self.subset), self.slack, self.dim_cap
            )
            self.run_report.add("cover", verdict.is_cover, verdict.margin)
        lemma = reductions.projection_check(instance, self.slack, self.dim_cap)
        self.run_report.add(
            "projection_lemma", lemma.applicable and bool(lemma.holds), lemma.margin
        )
        if self.brute_force:
            table = reductions.cover_table(
                instance, self.max_size, self.slack, self.progress, self.dim_cap
            )
            if self.csv:
                table.to_csv(expandpath(self.csv), index=False)
            limit = instance.g_prime if self.max_size is None else self.max_size
            small = table[table["size"] <= limit]
            self.run_report.add("no_cover_up_to_size", bool(small["below_beta"].all()))

    def _verify_qirr(self, instance: reductions.QirrInstance):
        chosen = parse_subset(self.subset) if self.subset is not None else list(
            range(len(instance.terms))
        )
        result = reductions.verify_qirr(instance, chosen, self.slack, self.dim_cap)
        self.run_report.parameters["route"] = result.route
        self.run_report.add(
            "irreducible_subset", _STATUS[result.status], result.eigenvalue - instance.gamma
        )

    def _cmd_spectrum(self):
        obj = self._input(["operator_sum", "circuit", "qssc", "cq_lh"])
        if isinstance(obj, VerifierCircuit):
            H = assemble(kitaev.compile(decompose(obj), self.clock, self.dim_cap).total(), self.dim_cap)
        elif isinstance(obj, reductions.QsscInstance):
            H = assemble_many(list(obj.terms), self.dim_cap)
        elif isinstance(obj, reductions.CqLhInstance):
            H = assemble(obj.hamiltonian, self.dim_cap)
        elif isinstance(obj, OperatorSum):
            H = assemble(obj, self.dim_cap)
        table = spectrum_table(H, self.k, self.dim_cap)
        _LOGGER.info(f"Spectrum ({H.dim} dimensions):\n{table.to_string(index=False)}")
        if self.csv:
            table.to_csv(expandpath(self.csv), index=False)
        self.run_report.parameters["lowest"] = float(table["eigenvalue"].iloc[0])
        self.run_report.add("spectrum", True)

    def _cmd_disperser(self):
        if self.action == "find":
            self._disperser_find()
        else:
            self._disperser_verify()

    def _disperser_find(self):
        left = 2 ** (self.depth + 1) - 1 if self.depth is not None else self.left
        if left is None or self.right is None or self.degree is None:
            raise SchemaError("find needs --left or --depth, plus --right and --degree", "--left")
        graph = find_disperser(
            left,
            self.right,
            self.degree,
            self.k or 0,
            0.5 if self.epsilon is None else self.epsilon,
            seed=self.seed,
            max_attempts=self.attempts,
            samples=self.samples,
        )
        self.run_report.add("disperser_found", True)
        self._save(EncodingTree(self.depth, graph) if self.depth is not None else graph)

    def _disperser_verify(self):
        obj = self._input(["disperser", "encoding_tree"])
        graph: DisperserGraph = obj.graph if isinstance(obj, EncodingTree) else obj
        result = verify_disperser(
            graph,
            self.k or 0,
            0.5 if self.epsilon is None else self.epsilon,
            samples=self.samples,
            seed=self.seed,
            progress=self.progress,
        )
        self.run_report.parameters.update(
            {"subsets_checked": result.subsets_checked, "exhaustive": result.exhaustive}
        )
        margin = None if result.min_coverage is None else result.min_coverage - result.required
        self.run_report.add("disperser", result.holds, margin)


def main(cmdl: List[str] = None) -> int:
    """Run the script."""
    args = _parse_cmdl(sys.argv[1:] if cmdl is None else cmdl)
    args_dict = vars(args)
    args_dict["opts"] = args
    try:
        report = Hamred(**args_dict).run()
    except HamredException as e:
        _LOGGER.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    return report.exit_code
