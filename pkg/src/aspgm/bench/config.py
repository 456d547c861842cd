"""Suite configuration files.

A suite file is a flat list of ``key = value`` lines.  List values are
comma separated; ``#`` starts a comment.  Example::

    families = ls, logistic
    dims = 200, 400
    kappas = 1e2, 1e4
    spectra = uniform, bimodal
    seeds = 0, 1
    algorithms = aspgm-5-5, bspgm-7, obl
    thresholds = 1e-4, 1e-7, 1e-10
    budget = 3000
"""
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..problems import FAMILIES, SPECTRA
from .algorithms import parse_algorithm

DEFAULT_SUITE = """\
# synthetic suite at desk scale: 6 families x 2 dims x 2 kappas x 2 spectra x 2 seeds
families = ls, logistic, logsumexp, possquared, fournorm, cubicreg
dims = 200, 400
kappas = 1e2, 1e4
spectra = uniform, bimodal
seeds = 0, 1
algorithms = aspgm-5-5, aspgm-1-1, bspgm-7, obl, ogm, gd, lbfgs-bl
thresholds = 1e-4, 1e-7, 1e-10
budget = 3000
"""


@dataclass
class SuiteConfig:
    families: list
    dims: list
    kappas: list
    spectra: list
    seeds: list
    algorithms: list
    thresholds: list
    budget: int
    hard: list = field(default_factory=list)
    ref_budget: int = 2000

    def problems(self):
        """Problem descriptors in a fixed order."""
        out = []
        for fam in self.families:
            for d in self.dims:
                for kappa in self.kappas:
                    for spec in self.spectra:
                        for seed in self.seeds:
                            out.append(("synthetic", fam, d, kappa, spec, seed))
        for which in self.hard:
            for d in self.dims:
                out.append(("hard", which, d, None, None, 0))
        return out


_LIST_KEYS = {
    "families": str, "dims": int, "kappas": float, "spectra": str, "seeds": int,
    "algorithms": str, "thresholds": float, "hard": str,
}
_SCALAR_KEYS = {"budget": int, "ref_budget": int}
_REQUIRED = ("families", "dims", "kappas", "spectra", "seeds", "algorithms", "thresholds", "budget")


def _convert(kind, text, key, lineno):
    try:
        if kind is int:
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {text!r} as {kind.__name__}", lineno) from None


def parse_suite(text):
    """Parse suite text into a :class:`SuiteConfig`."""
    values = {}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if key in _LIST_KEYS:
            items = [v.strip() for v in val.split(",")]
            if any(not v for v in items):
                raise ConfigError(f"{key}: empty list item", lineno)
            values[key] = [_convert(_LIST_KEYS[key], v, key, lineno) for v in items]
        elif key in _SCALAR_KEYS:
            values[key] = _convert(_SCALAR_KEYS[key], val, key, lineno)
        else:
            raise ConfigError(f"unknown key {key!r}", lineno)
        where[key] = lineno

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    for fam in values["families"]:
        if fam not in FAMILIES:
            raise ConfigError(f"unknown family {fam!r}", where["families"])
    for spec in values["spectra"]:
        if spec not in SPECTRA:
            raise ConfigError(f"unknown spectrum {spec!r}", where["spectra"])
    for which in values.get("hard", []):
        if which not in ("A", "B", "C"):
            raise ConfigError(f"unknown hard instance {which!r}", where["hard"])
    for alg in values["algorithms"]:
        try:
            parse_algorithm(alg)
        except ValueError as exc:
            raise ConfigError(str(exc), where["algorithms"]) from None
    if any(d < 1 for d in values["dims"]):
        raise ConfigError("dims must be positive", where["dims"])
    if any(k < 1 for k in values["kappas"]):
        raise ConfigError("kappas must be at least 1", where["kappas"])
    if any(not 0 < t < 1 for t in values["thresholds"]):
        raise ConfigError("thresholds must lie in (0, 1)", where["thresholds"])
    if values["budget"] < 1:
        raise ConfigError("budget must be positive", where["budget"])
    return SuiteConfig(**values)


def load_suite(path):
    with open(path, encoding="utf-8") as fh:
        return parse_suite(fh.read())


def default_suite():
    return parse_suite(DEFAULT_SUITE)
