"""
Sampled estimators for Lipschitz-type quantities of a map.

All estimators return *lower* bounds of suprema: the best quotient (or
image distance) over sampled pairs, after a refinement pass that perturbs
the best pair with shrinking Gaussian proposals.  Deterministic extreme
pairs (axis points of the sampling ball) are always included, so affine
maps are measured exactly.

Sampling is split into batches with seeds derived from the caller's seed;
batches run through :func:`parallel_map` and are reduced by a max in batch
order, so results do not depend on the thread count.

Usage::

    from nonexp_lab.mappings import affine, empirical_lipschitz, rakotch_gauges

    f = affine(R1, 0.5, 1.0)
    empirical_lipschitz(f, [0.0], 50.0, budget=2000, seed=1).value   # 0.5
    rakotch_gauges(f, [0.0], n_max=8, budget=500, seed=1).gauges      # [0.5, ...]
"""

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ..geometry.sampling import ball_sampler
from ..utility import config_manager
from ..utility import error as E
from ..utility.utility import derive_seeds, get_logger, parallel_map, require_positive, rng_for
from .nonexp_map import require_nonexpansive

log = get_logger(__name__)

# random pairs per sampling batch
BATCH_SIZE = 512
# proposals per refinement round
REFINE_PROPOSALS = 24
# local_lipschitz samples scales r * 2^-k for k = 0..LOCAL_SCALES
LOCAL_SCALES = 20
# below 1/M the step function uses dyadic indices M * 2^j, j <= STEP_MAX_DOUBLINGS
STEP_MAX_DOUBLINGS = 48
# relative slack on "rho(x, y) <= t" so exact extreme pairs are not lost to rounding
_DIST_RTOL = 1e-12


@dataclass(frozen=True)
class LipEstimate:
    """A sampled lower bound of a supremum.

    Attributes:
        value: the largest sampled quotient (or image distance for moduli).
        pairs_tested: number of pairs evaluated, refinement included.
        region: human readable description of the sampled region.
        seed: the seed the estimate was produced with.
        best_pair: the pair attaining ``value``, or ``None`` if no pair was admissible.
    """
    value: float
    pairs_tested: int
    region: str
    seed: int
    best_pair: tuple = field(default=None, compare=False, repr=False)


def _describe_point(x):
    return "(" + ", ".join(f"{v:.6g}" for v in np.asarray(x).reshape(-1)) + ")"


# ---------------------------------------------------------------------------
# Pair search
# ---------------------------------------------------------------------------

def _pair_scores(f, xs, ys, admissible, quotient=True):
    """Scores of the pairs ``(xs[i], ys[i])``; inadmissible pairs score -inf."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.shape[0] == 0:
        return np.empty(0)
    model = f.model
    dxy = model.dist_pairs(xs, ys)
    dimg = model.dist_pairs(f.evaluate_many(xs), f.evaluate_many(ys))
    ok = admissible(xs, ys, dxy)
    if quotient:
        ok = ok & (dxy > 0)
        vals = np.divide(dimg, dxy, out=np.zeros_like(dimg), where=dxy > 0)
    else:
        vals = dimg
    return np.where(ok, vals, -np.inf)


def _best_of(xs, ys, scores):
    if scores.shape[0] == 0:
        return -np.inf, None
    i = int(np.argmax(scores))
    if not np.isfinite(scores[i]):
        return -np.inf, None
    return float(scores[i]), (np.array(xs[i]), np.array(ys[i]))


def _refine(f, value, pair, admissible, scale, seed, quotient=True, move_x=True):
    """Shrinking Gaussian proposals around the best pair; returns (value, pair, tested)."""
    if pair is None:
        return value, pair, 0
    model = f.model
    rounds = int(config_manager.load_setting_value("refinement_rounds"))
    rng = rng_for(seed, 7)
    x, y = pair
    tested = 0
    for k in range(rounds):
        sigma = scale * math.ldexp(1.0, -k)
        xs = np.array([model.perturb(x, sigma, rng) if move_x else x for _ in range(REFINE_PROPOSALS)])
        ys = np.array([model.perturb(y, sigma, rng) for _ in range(REFINE_PROPOSALS)])
        scores = _pair_scores(f, xs, ys, admissible, quotient)
        tested += REFINE_PROPOSALS
        best, best_pair = _best_of(xs, ys, scores)
        if best > value:
            value, (x, y) = best, best_pair
    return value, (x, y), tested


def _batched_search(f, make_pairs, admissible, budget, seed, quotient=True):
    """Evaluate ``budget`` random pairs in seeded batches and reduce by max.

    ``make_pairs(count, batch_seed)`` returns two arrays of rows.
    """
    n_batches = max(1, -(-budget // BATCH_SIZE))
    seeds = derive_seeds(seed, n_batches)
    sizes = [min(BATCH_SIZE, budget - i * BATCH_SIZE) for i in range(n_batches)]

    def run(i):
        xs, ys = make_pairs(sizes[i], seeds[i])
        value, pair = _best_of(xs, ys, _pair_scores(f, xs, ys, admissible, quotient))
        return value, pair, xs.shape[0]

    value, pair, tested = -np.inf, None, 0
    for v, p, n in parallel_map(run, range(n_batches)):
        tested += n
        if v > value:
            value, pair = v, p
    return value, pair, tested


def _ball_admissible(model, center, radius, min_dist=0.0):
    slack = model.tol

    def admissible(xs, ys, dxy):
        inside = (model.dist_many(center, xs) <= radius + slack) & \
                 (model.dist_many(center, ys) <= radius + slack)
        return inside & (dxy >= min_dist)
    return admissible


def _ball_pairs(model, center, radius, short_scale=None):
    """Pair generator on a ball: half independent pairs, half short pairs."""

    def make_pairs(count, batch_seed):
        pts = ball_sampler(model, center, radius, 2 * count, batch_seed)
        xs, ys = pts[0::2].copy(), pts[1::2].copy()
        rng = rng_for(batch_seed, 3)
        scale = radius if short_scale is None else short_scale
        for i in range(count // 2, count):
            # short pairs catch kinks of piecewise maps
            sigma = scale * math.ldexp(1.0, -int(rng.integers(0, 12)))
            ys[i] = model.perturb(xs[i], sigma, rng)
        return xs, ys
    return make_pairs


def _extreme_pairs(model, center, radius):
    """Opposite axis points, and the center with each axis point."""
    pts = model.axis_points(center, radius)
    xs = [pts[i] for i in range(0, len(pts) - 1, 2)] + [center] * len(pts)
    ys = [pts[i + 1] for i in range(0, len(pts) - 1, 2)] + list(pts)
    return np.array(xs), np.array(ys)


def _quotient_sup(f, center, radius, budget, seed, min_dist=0.0):
    """Shared core of empirical_lipschitz and the Rakotch gauges."""
    model = f.model
    admissible = _ball_admissible(model, center, radius, min_dist)
    ex, ey = _extreme_pairs(model, center, radius)
    value, pair = _best_of(ex, ey, _pair_scores(f, ex, ey, admissible))
    tested = ex.shape[0]
    short = max(radius / 8.0, 2.0 * min_dist)
    v, p, n = _batched_search(f, _ball_pairs(model, center, radius, short), admissible, budget, seed)
    tested += n
    if v > value:
        value, pair = v, p
    value, pair, n = _refine(f, value, pair, admissible, radius / 16.0, seed)
    tested += n
    return max(value, 0.0), pair, tested


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def empirical_lipschitz(f, region_center, region_radius, budget=None, seed=0):
    """Largest sampled quotient ``rho(f(x),f(y)) / rho(x,y)`` over a ball.

    Validates ``claimed_lip`` of composites assembled from pieces: the
    result never exceeds the true constant, so ``value > claimed_lip + slack``
    disproves a claim.

    Args:
        f:             the map (intermediates allowed).
        region_center: center of the sampled ball.
        region_radius: positive radius.
        budget:        random pairs; defaults to the ``default_budget`` setting.
        seed:          integer seed.

    Returns:
        LipEstimate
    """
    require_positive("region_radius", region_radius, code="1003")
    budget = _budget(budget)
    center = f.model.validate(region_center)
    value, pair, tested = _quotient_sup(f, center, region_radius, budget, seed)
    log.debug("empirical_lipschitz %r: %.12g over %d pairs", f.root, value, tested)
    return LipEstimate(value, tested, f"B({_describe_point(center)}, {region_radius:g})", seed, pair)


def _budget(budget):
    if budget is None:
        budget = int(config_manager.load_setting_value("default_budget"))
    if budget < 1:
        raise E.InputError("Sample count must be at least 1.", code="1004")
    return int(budget)


def modulus_profile(f, t_grid, region_radius=10.0, budget=None, seed=0, center=None):
    """Sampled lower bounds of the modulus of continuity over a grid of t.

    ``omega_f(t) = sup { rho(f(x), f(y)) : rho(x, y) <= t }``.  Every grid
    point is evaluated on one shared pool of pairs and the profile is the
    running max in t, so it is nondecreasing by construction.  Pairs start
    in ``B(center, region_radius)``; extreme pairs ``center +/- (t/2) e_i``
    and ``(center, center + t e_i)`` are included for every grid value.

    Returns:
        list[LipEstimate], in the order of *t_grid*.
    """
    ts = [float(t) for t in t_grid]
    if not ts:
        return []
    for t in ts:
        require_positive("t0", t)
    require_positive("region_radius", region_radius, code="1003")
    budget = _budget(budget)
    model = f.model
    center = model.origin() if center is None else model.validate(center)
    order = sorted(range(len(ts)), key=lambda i: ts[i])

    # pool: (rho(x,y), rho(f(x),f(y)), x, y)
    xs, ys = [], []
    for t in ts:
        ex, ey = _extreme_pairs(model, center, t / 2.0)
        xs.extend(ex[: len(ex) // 3])
        ys.extend(ey[: len(ey) // 3])
        for p in model.axis_points(center, t):
            xs.append(center)
            ys.append(p)
    rng = rng_for(seed, 5)
    starts = ball_sampler(model, center, region_radius, budget, seed)
    for x in starts:
        t = ts[int(rng.integers(0, len(ts)))]
        d = t if rng.random() < 0.5 else t * rng.uniform(0.5, 1.0)
        hint = model.perturb(x, 1.0, rng)
        xs.append(x)
        ys.append(model.point_at_distance(x, d, hint).point)
    xs, ys = np.array(xs), np.array(ys)
    dxy = model.dist_pairs(xs, ys)
    dimg = model.dist_pairs(f.evaluate_many(xs), f.evaluate_many(ys))
    tested = xs.shape[0]

    raw = {}
    for i in order:
        t = ts[i]

        def admissible(a, b, d, t=t):
            return d <= t * (1.0 + _DIST_RTOL)

        mask = admissible(None, None, dxy)
        if np.any(mask):
            j = int(np.argmax(np.where(mask, dimg, -np.inf)))
            value, pair = float(dimg[j]), (xs[j], ys[j])
        else:
            value, pair = 0.0, None
        value, pair, n = _refine(f, value, pair, admissible, t / 8.0, seed + i, quotient=False)
        tested += n
        raw[i] = (value, pair)

    out = [None] * len(ts)
    running, running_pair = 0.0, None
    for i in order:
        value, pair = raw[i]
        if value > running:
            running, running_pair = value, pair
        out[i] = (running, running_pair)
    region = f"B({_describe_point(center)}, {region_radius:g})"
    return [LipEstimate(v, tested, f"{region}, d(x,y) <= {ts[i]:g}", seed, p)
            for i, (v, p) in enumerate(out)]


def modulus_of_continuity(f, t0, region_radius=10.0, budget=None, seed=0, center=None):
    """Sampled lower bound of ``omega_f(t0)``; see :func:`modulus_profile`."""
    return modulus_profile(f, [t0], region_radius, budget, seed, center)[0]


def local_lipschitz(f, x, r, budget=None, seed=0):
    """Sampled lower bound of ``sup rho(f(x),f(y))/rho(x,y)`` over ``0 < rho(x,y) < r``.

    Partner points ``y`` sit at distances ``scale * u``, ``u`` in [0.5, 1), for
    the scales ``r, r/2, ..., r * 2^-20``; axis points at half of each scale
    are always included.  Refinement moves ``y`` only.
    """
    require_positive("r", r)
    budget = _budget(budget)
    model = f.model
    x = model.validate(x)
    rng = rng_for(seed, 11)
    per_scale = max(1, budget // (LOCAL_SCALES + 1))
    ys = []
    for k in range(LOCAL_SCALES + 1):
        scale = r * math.ldexp(1.0, -k)
        ys.extend(model.axis_points(x, 0.5 * scale))
        for _ in range(per_scale):
            hint = model.perturb(x, 1.0, rng)
            ys.append(model.point_at_distance(x, scale * rng.uniform(0.5, 1.0), hint).point)
    ys = np.array(ys)
    xs = np.repeat(x[None, :], ys.shape[0], axis=0)

    def admissible(a, b, d):
        return (d > 0) & (d < r)

    value, pair = _best_of(xs, ys, _pair_scores(f, xs, ys, admissible))
    scale = model.dist(*pair) / 4.0 if pair is not None else r / 4.0
    value, pair, n = _refine(f, value, pair, admissible, scale, seed, move_x=False)
    return LipEstimate(max(value, 0.0), xs.shape[0] + n,
                       f"0 < d({_describe_point(x)}, y) < {r:g}", seed, pair)


# ---------------------------------------------------------------------------
# Rakotch gauges
# ---------------------------------------------------------------------------

def rakotch_gauge_estimate(f, theta, n, budget=None, seed=0, radius=None):
    """Sampled ``c_{f,n}``: sup quotient over ``x, y`` in ``B(theta, radius)``, ``rho(x,y) >= 1/n``.

    *radius* defaults to *n*; :class:`RakotchGauge` passes a fixed radius
    for the restricted gauges below ``1/M``.
    """
    if n < 1:
        raise E.InputError(f"Estimator parameter must be positive: n={n!r}", code="1102")
    budget = _budget(budget)
    theta = f.model.validate(theta)
    radius = float(n if radius is None else radius)
    value, pair, tested = _quotient_sup(f, theta, radius, budget, seed, min_dist=1.0 / n)
    region = f"B({_describe_point(theta)}, {radius:g}), d(x,y) >= 1/{n}"
    return LipEstimate(value, tested, region, seed, pair)


class RakotchGauge:
    """Gauges ``c_{f,1} <= ... <= c_{f,n_max}`` and the step function ``phi_{f,M}``, ``M = n_max``.

    ``step(t)`` returns ``c_M`` for ``t >= 1/M``.  For smaller ``t`` it uses
    gauges restricted to ``B(theta, M)`` at the dyadic indices ``M * 2^j``,
    computed on first use and cached.  Each such value bounds the quotient
    of pairs in ``B(theta, M)`` at distance at least ``1/(M 2^j)``, so
    ``rho(f(x), f(y)) <= step(rho(x, y)) * rho(x, y)`` holds there up to
    sampling error.

    Attributes:
        f: the map the gauges were computed for.
        theta: base point.
        n_max: the index M.
        gauges (list[float]): ``gauges[n-1]`` estimates ``c_{f,n}``.
        estimates (list[LipEstimate]): the raw per-n estimates.
    """

    def __init__(self, f, theta, gauges, estimates, budget, seed):
        self.f = f
        self.theta = theta
        self.n_max = len(gauges)
        self.gauges = list(gauges)
        self.estimates = list(estimates)
        self._budget = budget
        self._seed = seed
        self._below = []
        self._lock = threading.Lock()

    def _restricted(self, j):
        with self._lock:
            while len(self._below) < j:
                k = len(self._below) + 1
                n = self.n_max * (1 << k)
                est = rakotch_gauge_estimate(self.f, self.theta, n, self._budget,
                                             self._seed + 1000 + k, radius=self.n_max)
                prev = self._below[-1] if self._below else self.gauges[-1]
                self._below.append(min(max(prev, est.value), 1.0))
            return self._below[j - 1]

    def step(self, t):
        """The step function ``phi_{f,M}(t)``, nonincreasing in ``t``.

        Below ``1/M`` the values come from ``B(theta, M)`` rather than
        ``B(theta, n)``, so they lower-bound the unrestricted ``c_{f,n}``.
        """
        if t < 0:
            raise E.InputError(f"Estimator parameter must be positive: t={t!r}", code="1102")
        M = self.n_max
        if t >= 1.0 / M:
            return self.gauges[-1]
        if t == 0:
            return self._restricted(STEP_MAX_DOUBLINGS)
        j = min(max(1, math.ceil(math.log2(1.0 / (t * M)))), STEP_MAX_DOUBLINGS)
        return self._restricted(j)

    __call__ = step

    @property
    def all_below_one(self):
        return self.gauges[-1] < 1.0

    def __repr__(self):
        return f"RakotchGauge(n_max={self.n_max}, c_M={self.gauges[-1]:.6g})"


def rakotch_gauges(f, theta, n_max, budget=None, seed=0):
    """Estimate ``c_{f,n}`` for ``n = 1..n_max`` and assemble the step function.

    Per-n estimates run in parallel with derived seeds.  The list is made
    nondecreasing by a running max and clipped to [0, 1].

    Raises:
        E.InputError: *f* not nonexpansive (``1103``) or ``n_max < 1`` (``1102``).
    """
    require_nonexpansive(f)
    if n_max < 1:
        raise E.InputError(f"Estimator parameter must be positive: n_max={n_max!r}", code="1102")
    budget = _budget(budget)
    theta = f.model.validate(theta)
    seeds = derive_seeds(seed, n_max)
    estimates = parallel_map(lambda n: rakotch_gauge_estimate(f, theta, n, budget, seeds[n - 1]),
                             range(1, n_max + 1))
    gauges, running = [], 0.0
    for est in estimates:
        running = max(running, est.value)
        gauges.append(min(running, 1.0))
    log.debug("rakotch gauges %r: %s", f.root, gauges)
    return RakotchGauge(f, theta, gauges, estimates, budget, seed)
