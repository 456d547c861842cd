"""Convex test problems: synthetic families, hard quadratics, LIBSVM data.

Every instance exposes ``inst(x) -> (f, grad)``.  Data matrices may be dense
arrays or ``scipy.sparse`` matrices; only products with ``A`` and ``A.T`` are
used.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg
from scipy.special import expit

from .errors import AspgmError, EmptyFile, MalformedLine, ShapeMismatch

FAMILIES = ("ls", "logistic", "logsumexp", "possquared", "fournorm", "cubicreg")
SPECTRA = ("uniform", "bimodal")

EXACT = "exact"
NUMERICAL = "numerical"


@dataclass(frozen=True)
class SpectrumSpec:
    kind: str
    kappa: float

    def draw(self, d, rng):
        """Singular values of ``A``; ``kappa`` targets the condition of ``A^T A``."""
        r = math.sqrt(self.kappa)
        if self.kind == "uniform":
            return rng.uniform(1.0, r, d)
        if self.kind == "bimodal":
            low = int(round(0.9 * d))
            return np.concatenate([rng.uniform(1.0, 1.1, low), rng.uniform(0.9 * r, r, d - low)])
        raise ValueError(f"unknown spectrum {self.kind!r}")


@dataclass
class ProblemInstance:
    id: str
    family: str
    d: int
    fun: object
    x0: np.ndarray
    A: object = None
    b: np.ndarray = None
    c: np.ndarray = None
    xstar: np.ndarray = None
    fstar: float = None
    L: float = None
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fun(x)

    def known_optimum(self):
        """``(x*, f*)`` when available in closed form, else ``None``."""
        if self.fstar is None and self.family == "ls" and self.A is not None:
            A = self.A.toarray() if scipy.sparse.issparse(self.A) else self.A
            xs = np.linalg.lstsq(A, self.b, rcond=None)[0]
            self.xstar, self.fstar = xs, float(self.fun(xs)[0])
        if self.fstar is None:
            return None
        return self.xstar, self.fstar


def _spectral_norm(A):
    if scipy.sparse.issparse(A):
        if min(A.shape) <= 2:
            return float(np.linalg.norm(A.toarray(), 2))
        return float(scipy.sparse.linalg.svds(A.astype(float), k=1, return_singular_vectors=False)[0])
    return float(np.linalg.norm(A, 2))


def make_objective(family, A, b=None, c=None, *, x0=None, id=None, sigma_max=None):
    """Wrap data ``(A, b, c)`` in one of the six objective families.

    ``b`` has length ``m`` except for ``cubicreg``, where it is the linear
    term in ``R^d``.  ``c`` is only used by ``logistic`` and holds the
    labels.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if A.ndim != 2:
        raise ShapeMismatch("A must be two-dimensional")
    m, d = A.shape
    need_b = family not in ("logistic",)
    if need_b:
        if b is None:
            raise ShapeMismatch(f"{family} needs b")
        b = np.asarray(b, dtype=float)
        want = d if family == "cubicreg" else m
        if b.shape != (want,):
            raise ShapeMismatch(f"b has shape {b.shape}, expected ({want},)")
    if family == "logistic":
        if c is None or np.shape(c) != (m,):
            raise ShapeMismatch(f"logistic needs labels c of shape ({m},)")
        c = np.asarray(c, dtype=float)
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise ShapeMismatch(f"x0 has shape {x0.shape}, expected ({d},)")
    smax = sigma_max if sigma_max is not None else None
    At = A.T

    if family == "ls":
        def fun(x):
            r = A @ x - b
            return 0.5 * float(r @ r), At @ r
        L = (lambda s: s * s)
    elif family == "logistic":
        def fun(x):
            z = c * (A @ x)
            f = np.sum(np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z))))
            f += 0.5 * float(x @ x) / m
            return float(f), At @ (c * expit(z)) + x / m
        L = (lambda s: 0.25 * s * s + 1.0 / m)
    elif family == "logsumexp":
        def fun(x):
            u = A @ x - b
            top = max(0.0, float(np.max(u)))
            e = np.exp(u - top)
            tot = math.exp(-top) + float(np.sum(e))
            return top + math.log(tot), At @ (e / tot)
        L = (lambda s: s * s)
    elif family == "possquared":
        def fun(x):
            r = np.maximum(A @ x - b, 0.0)
            return float(r @ r), 2.0 * (At @ r)
        L = (lambda s: 2.0 * s * s)
    elif family == "fournorm":
        def fun(x):
            r = A @ x - b
            r2 = r * r
            return 0.25 * float(r2 @ r2), At @ (r2 * r)
        L = None
    else:
        def fun(x):
            Ax = A @ x
            nx = math.sqrt(float(x @ x))
            f = 0.5 * float(Ax @ Ax) + float(b @ x) + nx**3 / (6.0 * m)
            return f, At @ Ax + b + (nx / (2.0 * m)) * x
        L = None

    inst = ProblemInstance(id=id or f"{family}-m{m}-d{d}", family=family, d=d, fun=fun, x0=x0,
                           A=A, b=b, c=c)
    if L is not None:
        inst.L = L(smax if smax is not None else _spectral_norm(A))
    return inst


def gen_synthetic(family, d, spectrum, seed):
    """Random instance with ``m = 4d`` rows and prescribed singular values.

    ``A = U diag(sigma) V^T`` with orthonormal factors from QR of Gaussian
    matrices.  ``b ~ N(0, 1)^m`` and labels ``c`` uniform on ``{0, 1}``
    mapped to ``{-1, +1}``.  The cubic family uses the first ``d`` entries of
    ``b`` as its linear term.  The starting point is the origin.
    """
    if isinstance(spectrum, tuple):
        spectrum = SpectrumSpec(*spectrum)
    m = 4 * d
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((m, d)))
    V, _ = np.linalg.qr(rng.standard_normal((d, d)))
    sigma = spectrum.draw(d, rng)
    A = (U * sigma) @ V.T
    b = rng.standard_normal(m)
    c = 2.0 * rng.integers(0, 2, m) - 1.0
    pid = f"{family}-d{d}-kappa{spectrum.kappa:g}-{spectrum.kind}-s{seed}"
    bb = b[:d].copy() if family == "cubicreg" else b
    inst = make_objective(family, A, bb, c if family == "logistic" else None, id=pid,
                          sigma_max=float(np.max(sigma)))
    inst.meta.update(kappa=spectrum.kappa, spectrum=spectrum.kind, seed=seed, sigma=sigma)
    return inst


def quadratic(H, b, x0=None, id="quadratic"):
    """``0.5 x^T H x + b^T x`` with ``H`` symmetric positive definite."""
    d = H.shape[0]
    b = np.asarray(b, dtype=float)
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)

    def fun(x):
        Hx = H @ x
        return 0.5 * float(x @ Hx) + float(b @ x), Hx + b

    if scipy.sparse.issparse(H):
        xs = scipy.sparse.linalg.spsolve(H.tocsc(), -b)
        L = _spectral_norm(H)
    else:
        xs = np.linalg.solve(H, -b)
        L = float(np.linalg.eigvalsh(H)[-1])
    inst = ProblemInstance(id=id, family="quadratic", d=d, fun=fun, x0=x0, A=H, b=b,
                           xstar=xs, fstar=0.5 * float(b @ xs), L=L)
    return inst


def hard_instance(which, d):
    """Poorly conditioned quadratics ``0.5 x^T A x + b^T x``.

    ``A``: tridiagonal with unit diagonal and -1/2 off-diagonals, ``b = -e_1/2``.
    ``B``: diagonal ``sin^2(pi i / (2d))``, ``b = 0``, ``x0 = 1/a_ii``.
    ``C``: diagonal ``1..d``, ``b = 1``.
    """
    if which == "A":
        off = -0.5 * np.ones(d - 1)
        H = scipy.sparse.diags([off, np.ones(d), off], [-1, 0, 1], format="csr")
        b = np.zeros(d)
        b[0] = -0.5
        ab = np.zeros((3, d))
        ab[0, 1:] = off
        ab[1] = 1.0
        ab[2, :-1] = off
        xs = scipy.linalg.solve_banded((1, 1), ab, -b)
        x0 = np.zeros(d)
        L = 1.0 - math.cos(math.pi * d / (d + 1))
    elif which == "B":
        diag = np.sin(np.pi * np.arange(1, d + 1) / (2 * d)) ** 2
        H = scipy.sparse.diags(diag, format="csr")
        b = np.zeros(d)
        xs = np.zeros(d)
        x0 = 1.0 / diag
        L = float(diag.max())
    elif which == "C":
        diag = np.arange(1, d + 1, dtype=float)
        H = scipy.sparse.diags(diag, format="csr")
        b = np.ones(d)
        xs = -1.0 / diag
        x0 = np.zeros(d)
        L = float(d)
    else:
        raise ValueError(f"unknown hard instance {which!r}")

    def fun(x):
        Hx = H @ x
        return 0.5 * float(x @ Hx) + float(b @ x), Hx + b

    return ProblemInstance(id=f"hard{which}-d{d}", family=f"hard{which}", d=d, fun=fun, x0=x0,
                           A=H, b=b, xstar=xs, fstar=0.5 * float(b @ xs), L=L)


def parse_libsvm(path, n_features=None):
    """Read a LIBSVM text file into ``(csr_matrix, labels)``.

    Indices are 1-based in the file.  Blank lines and ``#`` comments are
    skipped; indices within a line may come in any order but not repeat.
    """
    rows, cols, vals, labels = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise MalformedLine(lineno, raw, "bad label") from None
            seen = set()
            r = len(labels)
            for tok in parts[1:]:
                idx, sep, val = tok.partition(":")
                if not sep:
                    raise MalformedLine(lineno, raw, f"token {tok!r} is not index:value")
                try:
                    j = int(idx)
                    v = float(val)
                except ValueError:
                    raise MalformedLine(lineno, raw, f"token {tok!r} is not index:value") from None
                if j < 1:
                    raise MalformedLine(lineno, raw, f"index {j} is not positive")
                if j in seen:
                    raise MalformedLine(lineno, raw, f"index {j} repeated")
                if not math.isfinite(v):
                    raise MalformedLine(lineno, raw, f"value at index {j} is not finite")
                seen.add(j)
                rows.append(r)
                cols.append(j - 1)
                vals.append(v)
            labels.append(label)
    if not labels:
        raise EmptyFile(f"{path}: no samples")
    d = (max(cols) + 1) if cols else 0
    if n_features is not None:
        if n_features < d:
            raise ShapeMismatch(f"file uses index {d} but n_features={n_features}")
        d = n_features
    X = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(len(labels), d))
    X.sort_indices()
    return X, np.array(labels)


def libsvm_instance(path, family, n_features=None):
    """Least squares (labels as targets) or logistic (labels as signs) on a file."""
    X, y = parse_libsvm(path, n_features)
    if family == "ls":
        return make_objective("ls", X, y, id=f"ls-{path}")
    if family == "logistic":
        c = np.where(y > 0, 1.0, -1.0)
        return make_objective("logistic", X, c=c, id=f"logistic-{path}")
    raise ValueError("LIBSVM data supports the ls and logistic families")


def reference_optimum(inst, budget=2000, scipy_budget=20000):
    """Best known optimal value and how it was obtained.

    Closed forms are used when available.  Otherwise the minimum over runs of
    the restarted method and L-BFGS with backtracking (``budget`` calls each)
    and SciPy's L-BFGS-B (``scipy_budget``) is returned with the
    ``numerical`` flag.
    """
    known = inst.known_optimum()
    if known is not None:
        return known[1], EXACT
    from . import adaptive, baselines

    f0, g0 = inst(inst.x0)
    tol = 1e-13 * (1.0 + float(np.linalg.norm(g0)))
    best = f0
    try:
        best = min(best, adaptive.run(inst, inst.x0, 5, 5, budget, grad_tol=tol).sample.f)
    except AspgmError:
        pass
    try:
        best = min(best, baselines.run_lbfgs_bl(inst, inst.x0, budget=budget, grad_tol=tol).f)
    except AspgmError:
        pass
    opt = scipy.optimize.minimize(inst, inst.x0, jac=True, method="L-BFGS-B",
                                  options=dict(maxiter=scipy_budget, maxfun=scipy_budget, gtol=tol,
                                               ftol=0.0, maxcor=20))
    if np.isfinite(opt.fun):
        best = min(best, float(opt.fun))
    return float(best), NUMERICAL
