"""
Constructor-tree node types for self-mappings of a space model.

A mapping is a tree of nodes, much like an expression tree: leaves are
:class:`Identity`, :class:`Constant` and :class:`Affine`; inner nodes
combine their children with the model's convex combination.  The tree is
the mapping's provenance: ``repr(node)`` prints it, ``node.walk()``
iterates it.

Each node implements:

- ``evaluate(x)``: the image of the point *x* (no validation)
- ``params()``   : the constructor parameters shown in ``repr``

Nodes are immutable once built.  Perturbation nodes (radial collapse,
glued maps, isometry patches) live in :mod:`nonexp_lab.perturbations`
and subclass :class:`MapNode` the same way.
"""

import numpy as np


def _fmt(value):
    if isinstance(value, np.ndarray):
        return "[" + ", ".join(f"{v:.6g}" for v in value.reshape(-1)) + "]"
    if isinstance(value, float):
        return f"{value:.6g}"
    return repr(value)


class MapNode:
    """Base node.

    Attributes:
        model: the :class:`~nonexp_lab.geometry.spaces.SpaceModel` the map acts on.
        children (tuple[MapNode]): sub-maps, empty for leaves.
    """

    kind = "node"

    def __init__(self, model, children=()):
        self.model = model
        self.children = tuple(children)

    def evaluate(self, x):
        raise NotImplementedError

    def params(self):
        return {}

    def walk(self):
        """Yield this node and all descendants, depth first."""
        yield self
        for child in self.children:
            yield from child.walk()

    def __repr__(self):
        parts = [f"{k}={_fmt(v)}" for k, v in self.params().items()]
        parts += [repr(c) for c in self.children]
        return f"{self.kind}({', '.join(parts)})"


class Identity(MapNode):
    """The identity map."""

    kind = "identity"

    def evaluate(self, x):
        return np.array(x, dtype=float)


class Constant(MapNode):
    """The constant map at the point ``p``."""

    kind = "constant"

    def __init__(self, model, p):
        super().__init__(model)
        self.p = np.array(p, dtype=float)

    def evaluate(self, x):
        return self.p.copy()

    def params(self):
        return {"p": self.p}


class Affine(MapNode):
    """``x -> A x + b`` on a flat model."""

    kind = "affine"

    def __init__(self, model, matrix, offset):
        super().__init__(model)
        self.matrix = np.array(matrix, dtype=float)
        self.offset = np.array(offset, dtype=float)

    def evaluate(self, x):
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def params(self):
        return {"A": self.matrix, "b": self.offset}


class ConvexWithConstant(MapNode):
    """``x -> (1-beta) f(x) (+) beta p``."""

    kind = "convex_with_constant"

    def __init__(self, child, p, beta):
        super().__init__(child.model, (child,))
        self.p = np.array(p, dtype=float)
        self.beta = float(beta)

    def evaluate(self, x):
        return self.model.combine(self.children[0].evaluate(x), self.p, self.beta)

    def params(self):
        return {"p": self.p, "beta": self.beta}


class ContractToward(ConvexWithConstant):
    """``x -> (1-gamma) f(x) (+) gamma f(theta)``; ``f(theta)`` is computed once."""

    kind = "contract_toward"

    def __init__(self, child, theta, gamma):
        super().__init__(child, child.evaluate(theta), gamma)
        self.theta = np.array(theta, dtype=float)

    def params(self):
        return {"theta": self.theta, "gamma": self.beta}


class Composition(MapNode):
    """``x -> outer(inner(x))``."""

    kind = "compose"

    def __init__(self, outer, inner):
        super().__init__(outer.model, (outer, inner))

    def evaluate(self, x):
        return self.children[0].evaluate(self.children[1].evaluate(x))


class Cone(MapNode):
    """``x -> (1-w(x)) v (+) w(x) u`` with ``w(x) = max((t0 - d(x,x0))/t0, 0)``.

    Equal to ``u`` at ``x0`` and to ``v`` outside ``B(x0, t0)``.
    """

    kind = "cone"

    def __init__(self, model, x0, t0, v, u):
        super().__init__(model)
        self.x0 = np.array(x0, dtype=float)
        self.t0 = float(t0)
        self.v = np.array(v, dtype=float)
        self.u = np.array(u, dtype=float)

    def weight(self, x):
        return max((self.t0 - self.model.dist(x, self.x0)) / self.t0, 0.0)

    def evaluate(self, x):
        w = self.weight(x)
        if w <= 0.0:
            return self.v.copy()
        return self.model.combine(self.v, self.u, min(w, 1.0))

    def params(self):
        return {"x0": self.x0, "t0": self.t0, "v": self.v, "u": self.u}


class Piecewise(MapNode):
    """Pieces chosen by a selector: ``x -> children[select(x)](x)``.

    ``labels`` names the pieces in ``repr``; the selector is part of the
    constructor that built the node and is not printed.
    """

    kind = "piecewise"

    def __init__(self, model, select, pieces, labels=None):
        super().__init__(model, pieces)
        self.select = select
        self.labels = tuple(labels or (f"piece{i}" for i in range(len(pieces))))

    def evaluate(self, x):
        return self.children[self.select(x)].evaluate(x)

    def params(self):
        return {"pieces": list(self.labels)}
