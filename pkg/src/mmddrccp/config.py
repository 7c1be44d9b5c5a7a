"""Run configuration: a single YAML document with problem / kernel / radius /
data / solver / experiment blocks, validated with line-anchored errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .constraints import (
    AffineInXi,
    ConstraintModel,
    PiecewiseAffine,
    QuadraticForm,
    SupportPolytope,
)
from .reformulations import DrccpProblem, MipConfig
from .conic import SolverTolerances


class ConfigError(ValueError):
    """Configuration problem, carrying the offending key path and line."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path} (line {line})" if line is not None else path
        super().__init__(f"{where}: {message}")


def _compose_with_lines(text: str):
    """Parse YAML into plain data plus a {dotted.path: line} map (1-based)."""
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    lines: dict[str, int] = {}

    def build(node, path):
        if node is None:
            return None
        lines.setdefault(path or "<root>", node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            out = {}
            for key_node, val_node in node.value:
                key = str(key_node.value)
                child = f"{path}.{key}" if path else key
                lines[child] = key_node.start_mark.line + 1
                out[key] = build(val_node, child)
            return out
        if isinstance(node, yaml.SequenceNode):
            return [build(v, f"{path}[{i}]") for i, v in enumerate(node.value)]
        return yaml.SafeLoader("").construct_object(node, deep=True)

    data = build(node, "")
    return data, lines


class _Block:
    """A dict wrapper that reports missing/ill-typed keys with line anchors."""

    def __init__(self, data: dict, lines: dict[str, int], path: str):
        if not isinstance(data, dict):
            raise ConfigError(path, "expected a mapping", lines.get(path))
        self.data = data
        self.lines = lines
        self.path = path

    def _child(self, key) -> str:
        return f"{self.path}.{key}" if self.path else str(key)

    def _line(self, key):
        return self.lines.get(self._child(key), self.lines.get(self.path or "<root>"))

    def has(self, key) -> bool:
        return key in self.data

    def get(self, key, default=None):
        return self.data.get(key, default)

    def require(self, key):
        if key not in self.data:
            raise ConfigError(self._child(key), "missing required key", self._line(key))
        return self.data[key]

    def sub(self, key) -> "_Block":
        return _Block(self.require(key), self.lines, self._child(key))

    def opt_sub(self, key) -> "_Block | None":
        if key not in self.data or self.data[key] is None:
            return None
        return _Block(self.data[key], self.lines, self._child(key))

    def number(self, key, default=None):
        val = self.data.get(key, default)
        if val is default and key not in self.data:
            return default
        try:
            return float(val)
        except (TypeError, ValueError):
            raise ConfigError(self._child(key), f"expected a number, got {val!r}", self._line(key))

    def integer(self, key, default=None):
        val = self.data.get(key, default)
        if val is default and key not in self.data:
            return default
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(self._child(key), f"expected an integer, got {val!r}", self._line(key))
        return val

    def string(self, key, default=None, choices=None):
        val = self.data.get(key, default)
        if val is default and key not in self.data:
            return default
        if not isinstance(val, str):
            raise ConfigError(self._child(key), f"expected a string, got {val!r}", self._line(key))
        if choices and val not in choices:
            raise ConfigError(
                self._child(key), f"expected one of {sorted(choices)}, got {val!r}", self._line(key)
            )
        return val

    def array(self, key, default=None):
        val = self.data.get(key, default)
        if val is default and key not in self.data:
            return default
        try:
            return np.asarray(val, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(self._child(key), "expected a numeric array", self._line(key))

    def error(self, key, message):
        raise ConfigError(self._child(key) if key else (self.path or "<root>"), message, self._line(key))


@dataclass
class GeneratorSpec:
    mean: np.ndarray
    diag_cov: np.ndarray
    n: int
    seed: int


@dataclass
class DataConfig:
    csv_path: Path | None = None
    inline: np.ndarray | None = None
    generator: GeneratorSpec | None = None


@dataclass
class KernelConfig:
    family: str = "gaussian"
    bandwidth: float | str = "median"  # "median" or a positive number
    sup_bound: float = 1.0


@dataclass
class RadiusConfig:
    method: str = "bootstrap"  # rate | bootstrap | fixed
    delta: float = 0.05
    beta: float = 0.95
    replicates: int = 1000
    scale: str = "mmd_squared"
    value: float | None = None  # fixed method
    seed: int | None = None


@dataclass
class SolverConfig:
    path: str = "cvar"  # cvar | mip | tractable
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iters: int = 200
    enumeration_cap: int = 20
    big_m: float | None = None
    jitter: float = 1e-10
    ridge: float = 1e-9
    risk_offset: float = 0.0
    nonnegative_t: bool = False

    def tolerances(self) -> SolverTolerances:
        return SolverTolerances(feas=self.feas_tol, gap=self.gap_tol, max_iters=self.max_iters)


@dataclass
class ExperimentConfig:
    seeds: list = field(default_factory=lambda: list(range(16)))
    n_train: list = field(default_factory=lambda: [25, 50, 100, 200, 500])
    eval_size: int = 100_000


@dataclass
class RunConfig:
    problem: DrccpProblem
    support: SupportPolytope | None
    kernel: KernelConfig
    radius: RadiusConfig
    data: DataConfig
    solver: SolverConfig
    experiment: ExperimentConfig
    base_dir: Path

    def mip_config(self) -> MipConfig:
        if self.solver.big_m is None:
            raise ConfigError("solver.big_m", "the MIP path requires a big_m value")
        return MipConfig(big_m=self.solver.big_m, enumeration_cap=self.solver.enumeration_cap)


def _parse_model(block: _Block) -> tuple[ConstraintModel, SupportPolytope | None]:
    kind = block.string("type", choices={"affine", "piecewise_affine", "quadratic_form"})
    if kind is None:
        block.error("type", "missing required key")
    support = None
    if block.has("support"):
        sb = block.sub("support")
        support = SupportPolytope(C=sb.array("C"), h=sb.array("h"))
    if kind == "quadratic_form":
        dim = block.integer("dim")
        if dim is None:
            block.error("dim", "missing required key")
        model = QuadraticForm(dim=dim, level=block.number("level", 1.0))
    elif kind == "affine":
        a_coef = block.array("a_coef")
        if a_coef is None:
            block.error("a_coef", "missing required key")
        a_coef = np.atleast_2d(a_coef)
        m, n = a_coef.shape
        model = AffineInXi(
            a_coef=a_coef,
            a_const=block.array("a_const", np.zeros(m)),
            b_coef=block.array("b_coef", np.zeros(n)),
            b_const=block.number("b_const", 0.0),
        )
    else:
        pieces = block.require("pieces")
        if not isinstance(pieces, list) or not pieces:
            block.error("pieces", "expected a nonempty list of pieces")
        mats, b_coefs, b_consts = [], [], []
        for i, _ in enumerate(pieces):
            pb = _Block(pieces[i], block.lines, f"{block.path}.pieces[{i}]")
            A = pb.array("A")
            if A is None:
                pb.error("A", "missing required key")
            A = np.atleast_2d(A)
            mats.append(A)
            b_coefs.append(pb.array("b_coef", np.zeros(A.shape[0])))
            b_consts.append(pb.number("b_const", 0.0))
        model = PiecewiseAffine(a_mats=tuple(mats), b_coefs=np.array(b_coefs), b_consts=np.array(b_consts))
    return model, support


def load_config(path) -> RunConfig:
    """Load and validate a run configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}")
    try:
        data, lines = _compose_with_lines(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(str(path), f"YAML parse error: {exc}", line)
    if data is None:
        raise ConfigError(str(path), "empty config document")

    root = _Block(data, lines, "")

    pb = root.sub("problem")
    model, support = _parse_model(pb.sub("model"))
    ds = pb.sub("decision_set")
    cost = pb.array("cost")
    if cost is None:
        pb.error("cost", "missing required key")
    alpha = pb.number("alpha")
    if alpha is None:
        pb.error("alpha", "missing required key")
    G, dvec = ds.array("G"), ds.array("d")
    if G is None or dvec is None:
        ds.error("G", "decision_set requires G and d")
    try:
        problem = DrccpProblem(
            cost=cost,
            sense=pb.string("sense", "min", choices={"min", "max"}),
            decision_G=G,
            decision_d=dvec,
            model=model,
            alpha=alpha,
        )
    except ValueError as exc:
        pb.error(None, str(exc))

    kb = root.opt_sub("kernel")
    kernel = KernelConfig()
    if kb is not None:
        kernel.family = kb.string("family", "gaussian", choices={"gaussian", "linear_plus_one"})
        bw = kb.get("bandwidth", "median")
        if isinstance(bw, str):
            if bw != "median":
                kb.error("bandwidth", f"expected a positive number or 'median', got {bw!r}")
            kernel.bandwidth = "median"
        else:
            kernel.bandwidth = kb.number("bandwidth")
            if kernel.bandwidth <= 0:
                kb.error("bandwidth", "bandwidth must be positive")
        kernel.sup_bound = kb.number("C", kb.number("sup_bound", 1.0))

    rb = root.opt_sub("radius")
    radius = RadiusConfig()
    if rb is not None:
        radius.method = rb.string("method", "bootstrap", choices={"rate", "bootstrap", "fixed"})
        radius.delta = rb.number("delta", 0.05)
        radius.beta = rb.number("beta", 0.95)
        radius.replicates = rb.integer("B", rb.integer("replicates", 1000))
        radius.scale = rb.string("scale", "mmd_squared", choices={"mmd_squared", "mmd"})
        radius.value = rb.number("value") if rb.has("value") else None
        radius.seed = rb.integer("seed") if rb.has("seed") else None
        if radius.method == "fixed" and radius.value is None:
            rb.error("value", "fixed radius method requires a value")
        for name, val in (("delta", radius.delta), ("beta", radius.beta)):
            if not (0.0 < val < 1.0):
                rb.error(name, f"{name} must lie in (0, 1)")

    db = root.sub("data")
    sources = [k for k in ("csv", "inline", "generator") if db.has(k)]
    if len(sources) != 1:
        db.error(None, f"exactly one data source of csv/inline/generator required, got {sources or 'none'}")
    datacfg = DataConfig()
    if db.has("csv"):
        csv_path = Path(db.string("csv"))
        if not csv_path.is_absolute():
            csv_path = path.parent / csv_path
        if not csv_path.exists():
            db.error("csv", f"sample file does not exist: {csv_path}")
        datacfg.csv_path = csv_path
    elif db.has("inline"):
        datacfg.inline = np.atleast_2d(db.array("inline"))
    else:
        gb = db.sub("generator")
        mean = gb.array("mean")
        diag_cov = gb.array("diag_cov")
        if mean is None or diag_cov is None:
            gb.error("mean", "generator requires mean and diag_cov")
        n = gb.integer("n")
        if n is None or n < 1:
            gb.error("n", "generator requires a positive sample count n")
        datacfg.generator = GeneratorSpec(
            mean=mean, diag_cov=diag_cov, n=n, seed=gb.integer("seed", 0)
        )

    sb = root.opt_sub("solver")
    solver = SolverConfig()
    if sb is not None:
        solver.path = sb.string("path", "cvar", choices={"cvar", "mip", "tractable"})
        solver.feas_tol = sb.number("feas_tol", 1e-8)
        solver.gap_tol = sb.number("gap_tol", 1e-8)
        solver.max_iters = sb.integer("max_iters", 200)
        solver.enumeration_cap = sb.integer("enumeration_cap", 20)
        solver.big_m = sb.number("big_m") if sb.has("big_m") else None
        solver.jitter = sb.number("jitter", 1e-10)
        solver.ridge = sb.number("ridge", 1e-9)
        solver.risk_offset = sb.number("risk_offset", 0.0)
        solver.nonnegative_t = bool(sb.get("nonnegative_t", False))

    eb = root.opt_sub("experiment")
    experiment = ExperimentConfig()
    if eb is not None:
        seeds = eb.get("seeds")
        if seeds is not None:
            if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
                eb.error("seeds", "expected a list of integers")
            experiment.seeds = seeds
        n_train = eb.get("n_train")
        if n_train is not None:
            if not isinstance(n_train, list) or not all(isinstance(v, int) and v > 0 for v in n_train):
                eb.error("n_train", "expected a list of positive integers")
            experiment.n_train = n_train
        experiment.eval_size = eb.integer("eval_size", 100_000)

    return RunConfig(
        problem=problem,
        support=support,
        kernel=kernel,
        radius=radius,
        data=datacfg,
        solver=solver,
        experiment=experiment,
        base_dir=path.parent,
    )
