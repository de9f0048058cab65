"""Shattering instances: the randomized zero-reference family, the explicit
index-encoding family, its convex variant, exhaustive margin verification,
and domain rescaling."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CapacityExceededError, InvalidInputError
from .lipschitz import AnchoredLipschitz, budget, min_feasible_slope
from .numerics import norm

ENUMERATION_M_CAP = 14   # 2^m witnesses are materialized/enumerated
LAZY_M_CAP = 16          # implicit witnesses: only single matrices realized

SLACK_TOL = 1e-12
NORM_TOL = 1e-9


def labeling_bits(y, m):
    """Labeling index -> 0/1 vector (bit i of y is the label of point i)."""
    return (y >> np.arange(m)) & 1


def labeling_values(y, m, eps):
    return np.where(labeling_bits(y, m) == 1, eps, -eps)


# ---------------------------------------------------------------------------
# structured witnesses for the index-encoding constructions.
#
# Anchor (j, z) is the vector a*e_j + b*e_{m+z} in R^n with value +/-eps
# according to bit j of z.  The coordinates a, b are taken from an actual
# matrix-vector product so evaluation at the encoded points is bit-exact.

class EncodedMinForm:
    """Min-form interpolant over the m*2^m encoded points, max metric, slope 1."""

    metric = "infinity"
    L = 1.0

    def __init__(self, m, n, eps, coord_a, coord_b):
        self.m = int(m)
        self.n = int(n)
        self.eps = float(eps)
        self.coord_a = float(coord_a)
        self.coord_b = float(coord_b)
        self.j_arr = np.tile(np.arange(m, dtype=np.int64), 1 << m)
        z = np.repeat(np.arange(1 << m, dtype=np.int64), m)
        self.zc_arr = m + z
        bits = (z >> self.j_arr) & 1
        self.vals = np.where(bits == 1, self.eps, -self.eps)

    @property
    def num_anchors(self):
        return self.j_arr.shape[0]

    def eval(self, X, chunk=512):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n:
            raise InvalidInputError("dimension mismatch")
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            out[s : s + chunk] = _kernels.encoded_min_eval(
                X[s : s + chunk], self.j_arr, self.zc_arr, self.vals,
                self.coord_a, self.coord_b,
            )
        return out

    def __call__(self, x):
        return float(self.eval(np.atleast_2d(x))[0])

    def anchors_dense(self):
        A = np.zeros((self.num_anchors, self.n))
        A[np.arange(self.num_anchors), self.j_arr] = self.coord_a
        A[np.arange(self.num_anchors), self.zc_arr] = self.coord_b
        return A

    def anchor_points(self):
        if self.num_anchors > 1 << 16:
            return None
        return self.anchors_dense()

    def to_anchored(self):
        return AnchoredLipschitz(self.anchors_dense(), self.vals, self.L, self.metric)


class EncodedMaxAffine:
    """Pointwise max of the two-hot affine pieces 0.5*(x_j + x_{m+z}) over
    all (j, z) with bit j of z set, floored at kappa, shifted down."""

    metric = "infinity"

    def __init__(self, m, n, eps, kappa=0.5):
        self.m = int(m)
        self.n = int(n)
        self.eps = float(eps)
        self.kappa = float(kappa)
        self.shift = -(0.5 + self.eps)
        j = np.tile(np.arange(m, dtype=np.int64), 1 << m)
        z = np.repeat(np.arange(1 << m, dtype=np.int64), m)
        keep = ((z >> j) & 1) == 1
        self.j_arr = j[keep]
        self.zc_arr = m + z[keep]

    @property
    def num_pieces(self):
        return self.j_arr.shape[0]

    def eval(self, X, chunk=256):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n:
            raise InvalidInputError("dimension mismatch")
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            Q = X[s : s + chunk]
            piece_vals = 0.5 * (Q[:, self.j_arr] + Q[:, self.zc_arr])
            out[s : s + chunk] = np.maximum(piece_vals.max(axis=1), self.kappa)
        return out + self.shift

    def __call__(self, x):
        return float(self.eval(np.atleast_2d(x))[0])

    def piece_dual_norm(self):
        # Euclidean dual norm of each two-hot direction
        return 0.5 * math.sqrt(2.0)

    def loss_subgrad(self, W, x):
        """(f(Wx), subgradient of W -> f(Wx)); ties pick the lowest piece."""
        z = W @ x
        piece_vals = 0.5 * (z[self.j_arr] + z[self.zc_arr])
        best = int(np.argmax(piece_vals))
        V = np.zeros_like(W)
        if piece_vals[best] >= self.kappa:
            V[self.j_arr[best]] = 0.5 * x
            V[self.zc_arr[best]] += 0.5 * x
            val = piece_vals[best] + self.shift
        else:
            val = self.kappa + self.shift
        return float(val), V

    def directions_dense(self):
        D = np.zeros((self.num_pieces, self.n))
        D[np.arange(self.num_pieces), self.j_arr] = 0.5
        D[np.arange(self.num_pieces), self.zc_arr] += 0.5
        return D


# ---------------------------------------------------------------------------

@dataclass
class SeparatedFamily:
    """Unit points and a matrix per labeling whose encoded images are spread."""

    points: np.ndarray          # (m, d), unit rows
    matrices: np.ndarray        # (2^m, n, d)
    separation: float           # measured min pairwise distance of {W_s x_i}
    separation_ok: bool         # reached the 1/4 target
    resamples_used: int


def random_separated_family(d, m, n, seed, max_resamples=20, target=0.25):
    """Sphere points plus Gaussian matrices, redrawn until the m*2^m encoded
    vectors are pairwise at least `target` apart (or resamples run out)."""
    if d < 20:
        raise InvalidInputError(f"d={d} < 20")
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    if m > ENUMERATION_M_CAP:
        raise CapacityExceededError(f"m={m} > {ENUMERATION_M_CAP}")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for attempt in range(max_resamples):
        X = rng.standard_normal((m, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        W = rng.standard_normal((1 << m, n, d)) / math.sqrt(n)
        fro = np.linalg.norm(W.reshape(1 << m, -1), axis=1)
        cap = math.sqrt(2.0 * d)
        over = fro > cap
        if over.any():
            W[over] *= (cap / fro[over])[:, None, None]
        encoded = np.einsum("snd,md->smn", W, X).reshape(-1, n)
        sep, _ = _kernels.min_pairwise_dist(encoded)
        if best is None or sep > best.separation:
            best = SeparatedFamily(X, W, sep, sep >= target, attempt + 1)
        if sep >= target:
            break
    return best


# ---------------------------------------------------------------------------

@dataclass
class ShatterInstance:
    """Points plus one witness per labeling, all inside the reference ball."""

    kind: str                   # zero-init | nonzero-init | convex
    m: int
    margin: float               # eps
    d: int
    n: int
    points: np.ndarray          # (m, d), norms <= domain_radius
    W0: np.ndarray              # (n, d)
    B: float                    # Frobenius radius around W0
    threshold: float            # s
    witness_fn: object          # evaluable on R^n rows
    metric: str
    domain_radius: float        # b_x
    declared_w0_norm: float
    params: dict = field(default_factory=dict)
    _witness_supplier: object = None

    @property
    def num_labelings(self):
        return 1 << self.m

    def witness_for(self, y):
        """Dense parameter matrix for labeling index y."""
        if not 0 <= y < self.num_labelings:
            raise InvalidInputError(f"labeling index {y} out of range")
        return self._witness_supplier(y)

    def labeling_values(self, y):
        return labeling_values(y, self.m, self.margin)

    def manifest(self):
        return {
            "kind": self.kind,
            "m": self.m,
            "eps": self.margin,
            "d": self.d,
            "n": self.n,
            "B": self.B,
            "W0_norm": self.declared_w0_norm,
            "metric": self.metric,
            "domain_radius": self.domain_radius,
            "witness_fn": type(self.witness_fn).__name__,
            "params": self.params,
        }


def instance_from_manifest(obj):
    kind = obj["kind"]
    p = obj.get("params", {})
    if kind == "zero-init":
        return zero_init_instance(
            p["B"], p["L"], obj["eps"], p["m_cap"], p["seed"],
            n=p.get("n", 256), max_resamples=p.get("max_resamples", 20),
        )
    if kind == "nonzero-init":
        return nonzero_init_instance(obj["m"], obj["eps"])
    if kind == "convex":
        return convex_instance(obj["m"], obj["eps"], p.get("kappa", 0.5))
    raise InvalidInputError(f"unknown instance kind {kind!r}")


# ---------------------------------------------------------------------------

def zero_init_instance(B, L, eps, m_cap, seed, n=256, max_resamples=20):
    """Randomized instance around the zero reference matrix.

    The ambient input dimension is floor(L^2 B^2 / (128 eps^2)); witnesses
    are the separated-family matrices scaled by 8 eps / L, and the witness
    function interpolates +/-eps over all m*2^m encoded points.
    """
    if B < 1 or L < 1:
        raise InvalidInputError("need B >= 1 and L >= 1")
    if not 0 < eps <= 1:
        raise InvalidInputError("need 0 < eps <= 1")
    d = int(L * L * B * B / (128.0 * eps * eps))
    if d < 20:
        raise InvalidInputError(
            f"L^2 B^2 / (128 eps^2) = {d} < 20: inputs too small for the construction"
        )
    if m_cap > ENUMERATION_M_CAP:
        raise CapacityExceededError(f"m_cap={m_cap} > {ENUMERATION_M_CAP}")
    fam = random_separated_family(d, m_cap, n, seed, max_resamples=max_resamples)
    m = m_cap
    scale = 8.0 * eps / L
    witnesses = scale * fam.matrices
    anchors = np.einsum("snd,md->smn", witnesses, fam.points).reshape(-1, n)
    # value of point i under labeling s is +/-eps by bit i of s
    s_idx = np.repeat(np.arange(1 << m), m)
    i_idx = np.tile(np.arange(m), 1 << m)
    values = np.where(((s_idx >> i_idx) & 1) == 1, eps, -eps)
    scaled_sep = scale * fam.separation
    slope_budget = budget([-eps, eps], 2.0 * eps / L)  # = L by the closed form
    feasible = min_feasible_slope(anchors, values, "euclidean-vector") \
        if anchors.shape[0] <= 4096 else 2.0 * eps / max(scaled_sep, 1e-300)
    L_eff = max(slope_budget, feasible)
    fn = AnchoredLipschitz(anchors, values, L_eff, "euclidean-vector")
    inst = ShatterInstance(
        kind="zero-init",
        m=m,
        margin=eps,
        d=d,
        n=n,
        points=fam.points,
        W0=np.zeros((n, d)),
        B=float(B),
        threshold=0.0,
        witness_fn=fn,
        metric="euclidean-vector",
        domain_radius=1.0,
        declared_w0_norm=0.0,
        params={
            "B": B, "L": L, "m_cap": m_cap, "seed": seed, "n": n,
            "max_resamples": max_resamples,
            "separation": fam.separation,
            "separation_ok": bool(fam.separation_ok),
            "witness_slope": L_eff,
        },
        _witness_supplier=lambda y: witnesses[y],
    )
    return inst


def _encoding_geometry(m, w0_coeff, eps):
    """Shared geometry of the index-encoding constructions, pre-rescale.

    Points e_i + e_m live on the radius-sqrt(2) ball; the reference matrix
    writes w0_coeff*eps at coordinate i, and each witness adds a single unit
    entry that copies the labeling index into the output."""
    d = m + 1
    n = (1 << m) + m
    points = np.zeros((m, d))
    points[np.arange(m), np.arange(m)] = 1.0
    points[:, m] = 1.0
    W0 = np.zeros((n, d))
    W0[np.arange(m), np.arange(m)] = w0_coeff * eps
    return d, n, points, W0


def _encoded_supplier(W0, m):
    def supplier(y):
        W = W0.copy()
        W[m + y, W.shape[1] - 1] += W0_UNIT
        return W
    return supplier


W0_UNIT = 1.0


def nonzero_init_instance(m, eps, rescaled=True):
    """Deterministic instance with a small nonzero reference matrix.

    Pre-rescale: points e_i + e_{m+1}, W0 = 2 eps [I | 0], each witness adds
    a unit entry encoding the labeling, so W_y x_i = 2 eps e_i + e_{m+y}.
    The witness function is the slope-1 min-form interpolant in the max
    metric over the m 2^m encoded points.  With `rescaled` the domain is
    shrunk onto the unit ball, giving B = sqrt(2) and reference spectral
    norm 2 sqrt(2) eps."""
    if not 0 < eps <= 0.5:
        raise InvalidInputError("need 0 < eps <= 0.5")
    if m < 1 or m > LAZY_M_CAP:
        raise CapacityExceededError(f"m={m} outside [1, {LAZY_M_CAP}]")
    d, n, points, W0 = _encoding_geometry(m, 2.0, eps)
    inst = ShatterInstance(
        kind="nonzero-init",
        m=m,
        margin=eps,
        d=d,
        n=n,
        points=points,
        W0=W0,
        B=1.0,
        threshold=0.0,
        witness_fn=None,
        metric="infinity",
        domain_radius=math.sqrt(2.0),
        declared_w0_norm=2.0 * eps,
        params={"rescaled": rescaled},
        _witness_supplier=_encoded_supplier(W0, m),
    )
    if rescaled:
        inst = rescale_domain(inst, math.sqrt(2.0))
    _attach_min_form_witness(inst)
    return inst


def convex_instance(m, eps, kappa=0.5, rescaled=True):
    """Convex variant: the doubled reference matrix and the max-affine
    witness over the two-hot directions.  Exact +/-eps outputs hold for
    eps <= 0.25 with the default constant piece."""
    if not 0 < eps <= 0.5:
        raise InvalidInputError("need 0 < eps <= 0.5")
    if m < 1 or m > LAZY_M_CAP:
        raise CapacityExceededError(f"m={m} outside [1, {LAZY_M_CAP}]")
    d, n, points, W0 = _encoding_geometry(m, 4.0, eps)
    inst = ShatterInstance(
        kind="convex",
        m=m,
        margin=eps,
        d=d,
        n=n,
        points=points,
        W0=W0,
        B=1.0,
        threshold=0.0,
        witness_fn=EncodedMaxAffine(m, n, eps, kappa),
        metric="infinity",
        domain_radius=math.sqrt(2.0),
        declared_w0_norm=4.0 * eps,
        params={"kappa": kappa, "rescaled": rescaled},
        _witness_supplier=_encoded_supplier(W0, m),
    )
    if rescaled:
        inst = rescale_domain(inst, math.sqrt(2.0))
    return inst


def _attach_min_form_witness(inst):
    """Read the encoded coordinates off an actual product so that witness
    evaluation at the encoded points is bit-exact."""
    z = inst.witness_for(0) @ inst.points[0]
    coord_a = float(z[0])
    coord_b = float(z[inst.m + 0])
    inst.witness_fn = EncodedMinForm(inst.m, inst.n, inst.margin, coord_a, coord_b)


def rescale_domain(inst, b_x):
    """Divide the points by b_x and absorb the factor into all parameter
    matrices; witness values f(Wx) are unchanged up to one multiply/divide
    round-trip per coordinate."""
    if not b_x > 0:
        raise InvalidInputError("b_x must be positive")
    supplier = inst._witness_supplier
    new = ShatterInstance(
        kind=inst.kind,
        m=inst.m,
        margin=inst.margin,
        d=inst.d,
        n=inst.n,
        points=inst.points / b_x,
        W0=inst.W0 * b_x,
        B=inst.B * b_x,
        threshold=inst.threshold,
        witness_fn=inst.witness_fn,
        metric=inst.metric,
        domain_radius=inst.domain_radius / b_x,
        declared_w0_norm=inst.declared_w0_norm * b_x,
        params=dict(inst.params),
        _witness_supplier=lambda y: supplier(y) * b_x,
    )
    if isinstance(inst.witness_fn, EncodedMinForm):
        _attach_min_form_witness(new)
    return new


# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    passed: bool
    worst_slack: float
    failures: list
    w0_norm_ok: bool
    ball_ok: bool
    checked_labelings: int


def verify_shattering(inst, block=128, max_failures=32):
    """Exhaustively check the margin condition over every labeling and point.

    worst_slack is the minimum signed surplus over all 2^m * m checks;
    the instance passes iff it is >= -1e-12 and the norm declarations hold.
    """
    if inst.m > ENUMERATION_M_CAP:
        raise CapacityExceededError(
            f"m={inst.m} > {ENUMERATION_M_CAP}: full enumeration infeasible"
        )
    m = inst.m
    eps = inst.margin
    s = inst.threshold
    w0_norm = norm(inst.W0, "spectral")
    w0_ok = abs(w0_norm - inst.declared_w0_norm) <= NORM_TOL
    ball_ok = True
    worst = np.inf
    failures = []
    X = inst.points
    for start in range(0, inst.num_labelings, block):
        ys = range(start, min(start + block, inst.num_labelings))
        Q = np.empty((len(ys) * m, inst.n))
        for k, y in enumerate(ys):
            W = inst.witness_for(y)
            if np.linalg.norm(W - inst.W0) > inst.B + NORM_TOL:
                ball_ok = False
            Q[k * m : (k + 1) * m] = X @ W.T
        vals = np.asarray(inst.witness_fn.eval(Q)).reshape(len(ys), m)
        for k, y in enumerate(ys):
            bits = labeling_bits(y, m)
            slack = np.where(bits == 1, vals[k] - (s + eps), (s - eps) - vals[k])
            w = float(slack.min())
            if w < worst:
                worst = w
            if (slack < -SLACK_TOL).any() and len(failures) < max_failures:
                for i in np.nonzero(slack < -SLACK_TOL)[0]:
                    if len(failures) < max_failures:
                        failures.append((y, int(i), float(vals[k, i])))
    passed = worst >= -SLACK_TOL and w0_ok and ball_ok
    return VerifyReport(passed, worst, failures, w0_ok, ball_ok, inst.num_labelings)
