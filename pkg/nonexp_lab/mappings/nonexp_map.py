"""
Nonexpansive self-mappings and their combinators.

A :class:`NonexpMap` wraps a constructor tree (:mod:`map_nodes`) with a
claimed Lipschitz bound.  Maps with ``claimed_lip > 1`` exist only as
perturbation intermediates and must be tagged ``intermediate=True``;
everything handed to metrics, witnesses or the fixed-point layer is
checked with :func:`require_nonexpansive`.

Usage::

    from nonexp_lab.geometry import EuclideanSpace
    from nonexp_lab.mappings import affine, contract_toward, identity

    R1 = EuclideanSpace(1)
    f = affine(R1, 1.0, 1.0)                  # x -> x + 1
    f_g = contract_toward(f, [0.0], 1 / 12)   # x -> (11/12) x + 1
    f_g([24.0])                               # array([23.])
"""

import numpy as np

from ..geometry.spaces import Hyperboloid2, HalfSpace, L1Space
from ..utility import config_manager
from ..utility import error as E
from ..utility.utility import require_unit_interval
from . import map_nodes as N

# claimed constants within this of 1 count as 1
LIP_ROUNDING = 1e-12


class NonexpMap:
    """An evaluable self-mapping with a claimed Lipschitz bound.

    Attributes:
        root (MapNode): constructor tree, also the provenance.
        claimed_lip (float): claimed Lipschitz constant.
        model: the space model.
        intermediate (bool): tagged perturbation intermediate, the only kind
            allowed to claim more than 1.
    """

    __slots__ = ("root", "claimed_lip", "model", "intermediate")

    def __init__(self, root, claimed_lip, intermediate=False):
        claimed_lip = float(claimed_lip)
        if claimed_lip < 0:
            raise E.InputError(f"Claimed Lipschitz constant must be nonnegative: {claimed_lip}",
                               code="1103")
        if claimed_lip > 1.0 and claimed_lip <= 1.0 + LIP_ROUNDING:
            claimed_lip = 1.0
        if claimed_lip > 1.0 and not intermediate:
            raise E.InputError(f"Map is not nonexpansive: claimed_lip={claimed_lip}; only tagged "
                               f"intermediates may exceed 1.", code="1103")
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "claimed_lip", claimed_lip)
        object.__setattr__(self, "model", root.model)
        object.__setattr__(self, "intermediate", bool(intermediate and claimed_lip > 1.0))

    def __setattr__(self, name, value):
        raise AttributeError("NonexpMap is immutable")

    def __call__(self, x):
        return self.root.evaluate(x)

    def evaluate_many(self, xs):
        """Images of the rows of *xs*."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[0] == 0:
            return np.empty((0, self.model.coord_dim))
        return np.array([self.root.evaluate(x) for x in xs])

    @property
    def provenance(self):
        return self.root

    @property
    def within_slack(self):
        """``claimed_lip <= 1 + intermediate_lip_slack``."""
        slack = float(config_manager.load_setting_value("intermediate_lip_slack"))
        return self.claimed_lip <= 1.0 + slack

    def __repr__(self):
        tag = ", intermediate" if self.intermediate else ""
        return f"NonexpMap(lip={self.claimed_lip:.6g}{tag}, {self.root!r})"


def require_nonexpansive(f, code="1103"):
    """Raise ``E.InputError`` unless *f* is a member of M (claimed_lip <= 1)."""
    if f.claimed_lip > 1.0:
        raise E.InputError(f"Map is not nonexpansive: claimed_lip={f.claimed_lip}", code=code,
                           context={"claimed_lip": f.claimed_lip})
    return f


def eval(f, x, model=None):  # noqa: A001 - mirrors the operation name
    """Evaluate *f* at a validated point.

    Raises:
        E.InputError: *model* given and different from ``f.model`` (code
            ``1100``), or *x* of the wrong dimension (code ``1000``).
    """
    if model is not None and model != f.model:
        raise E.InputError("Map belongs to a different model.", code="1100")
    return f(f.model.validate(x))


# ---------------------------------------------------------------------------
# Leaves
# ---------------------------------------------------------------------------

def identity(model):
    return NonexpMap(N.Identity(model), 1.0)


def constant(model, p):
    return NonexpMap(N.Constant(model, model.validate(p)), 0.0)


def affine(model, matrix, offset):
    """The affine map ``x -> A x + b`` on a flat model.

    *matrix* may be a scalar (multiple of the identity) and *offset* a
    scalar (broadcast).  The claimed constant is the operator norm for the
    model's metric: spectral norm on Euclidean models, max column sum on
    L1Space.

    Raises:
        E.GeometryError: on Hyperboloid2 (code ``2002``).
        E.InputError:    shape mismatch (``1000``), a map leaving the
            half-space (``1104``) or an expansive matrix (``1103``).
    """
    if isinstance(model, Hyperboloid2):
        raise E.GeometryError("Operation not supported by model: affine maps on Hyperboloid2.",
                              code="2002")
    d = model.dim
    A = np.asarray(matrix, dtype=float)
    if A.ndim == 0:
        A = float(A) * np.eye(d)
    try:
        b = np.broadcast_to(np.asarray(offset, dtype=float), (d,)).copy()
    except ValueError:
        raise E.InputError(f"Dimension mismatch: affine offset {np.shape(offset)} for dimension {d}.",
                           code="1000")
    if A.shape != (d, d):
        raise E.InputError(f"Dimension mismatch: affine matrix {A.shape} for dimension {d}.",
                           code="1000")
    if isinstance(model, HalfSpace):
        if np.any(A[-1, :-1] != 0.0) or A[-1, -1] < 0.0 or b[-1] < 0.0:
            raise E.InputError("Affine map does not preserve the model: the last row must be "
                               "(0, ..., 0, a) with a >= 0 and offset >= 0.", code="1104")
    lip = np.linalg.norm(A, 1) if isinstance(model, L1Space) else np.linalg.norm(A, 2)
    return NonexpMap(N.Affine(model, A, b), lip)


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------

def _combined(root, claimed, *parents):
    intermediate = any(p.intermediate for p in parents) and claimed > 1.0 + LIP_ROUNDING
    return NonexpMap(root, claimed, intermediate=intermediate)


def contract_toward(f, theta, gamma):
    """``f_gamma(x) = (1-gamma) f(x) (+) gamma f(theta)``.

    ``claimed_lip = (1-gamma) f.claimed_lip`` and ``f_gamma(theta) = f(theta)``.

    Raises:
        E.InputError: gamma outside (0, 1) (code ``1101``).
    """
    require_unit_interval("gamma", gamma, code="1101")
    theta = f.model.validate(theta)
    return _combined(N.ContractToward(f.root, theta, gamma), (1.0 - gamma) * f.claimed_lip, f)


def convex_with_constant(f, p, beta):
    """``x -> (1-beta) f(x) (+) beta p`` with ``claimed_lip = (1-beta) f.claimed_lip``."""
    require_unit_interval("beta", beta, code="1101", closed=True)
    p = f.model.validate(p)
    return _combined(N.ConvexWithConstant(f.root, p, beta), (1.0 - beta) * f.claimed_lip, f)


def compose(outer, inner):
    """``outer o inner`` with the product of the claimed constants."""
    if outer.model != inner.model:
        raise E.InputError("Composition of maps from different models.", code="1105")
    return _combined(N.Composition(outer.root, inner.root), outer.claimed_lip * inner.claimed_lip,
                     outer, inner)


def cone_map(model, x0, t0, v, u):
    """The cone ``x -> (1-w(x)) v (+) w(x) u``, ``w(x) = max((t0 - d(x,x0))/t0, 0)``.

    Lipschitz with constant ``d(u, v)/t0``; tagged intermediate when that
    exceeds 1.
    """
    if not t0 > 0:
        raise E.InputError(f"t0 must be positive, got {t0!r}.", code="1102")
    x0, v, u = model.validate(x0), model.validate(v), model.validate(u)
    lip = model.dist(u, v) / t0
    return NonexpMap(N.Cone(model, x0, t0, v, u), lip, intermediate=lip > 1.0)


def piecewise(model, select, pieces, claimed_lip, labels=None, intermediate=False):
    """Glue maps by a selector; the caller supplies the glued constant."""
    node = N.Piecewise(model, select, [p.root for p in pieces], labels)
    return NonexpMap(node, claimed_lip, intermediate=intermediate)
