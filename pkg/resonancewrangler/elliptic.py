"""Discrete Dirichlet elliptic operators and their resonance splitting.

A problem is assembled into a sparse symmetric stiffness matrix, the matrix is diagonalized densely, and the eigenbasis is split around the resonance eigenvalue into the three invariant subspaces X-, X0 and X+. All state vectors are GridFunctions: grid values and spectral coefficients kept in sync.
"""

import logging
import math

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import sparse
from scipy.integrate import trapezoid

from resonancewrangler import errors

log = logging.getLogger(__name__)

MIN_GRID_SIZE = 8
CLUSTER_RTOL = 1e-8
SNAP_RTOL = 1e-6
POSITIVITY_FLOOR = 1e-12
PARTS = ("P", "Q-", "Q+", "Q")


class EllipticProblem(object):
    """An interval (0, L) with the divergence-form operator -(a y')' or a rectangle (0, L1) x (0, L2) with the Laplacian, both under Dirichlet conditions."""

    def __init__(self, lengths, grid_size, coefficient=None):
        """Creates a problem.

        Args:
            lengths: L for an interval, or (L1, L2) for a rectangle.
            grid_size: interior nodes per axis, at least MIN_GRID_SIZE.
            coefficient: vectorized callable a(x) for the interval; None means a = 1. The rectangle only carries the Laplacian.
        """
        lengths = tuple(float(length) for length in np.atleast_1d(lengths))
        if len(lengths) not in (1, 2):
            raise errors.ConfigurationError("domain must be an interval or a rectangle")
        if min(lengths) <= 0:
            raise errors.ConfigurationError("domain lengths must be positive")
        if int(grid_size) < MIN_GRID_SIZE:
            raise errors.ConfigurationError("grid_size must be at least %d, got %s" % (MIN_GRID_SIZE, grid_size))
        if len(lengths) == 2 and coefficient is not None:
            raise errors.ConfigurationError("the rectangle carries the constant-coefficient Laplacian only")

        self._lengths = lengths
        self._n = int(grid_size)
        self._coefficient = coefficient
        self._spacing = tuple(length / (self._n + 1) for length in lengths)

    @property
    def dim(self):
        return len(self._lengths)

    @property
    def lengths(self):
        return self._lengths

    @property
    def grid_size(self):
        return self._n

    @property
    def spacing(self):
        return self._spacing

    @property
    def shape(self):
        return (self._n,) * self.dim

    @property
    def size(self):
        """Number of interior nodes, which is also the number of modes."""
        return self._n ** self.dim

    @property
    def cell(self):
        """Quadrature weight of one interior node."""
        return float(np.prod(self._spacing))

    @property
    def measure(self):
        return float(np.prod(self._lengths))

    def axes(self, boundary=False):
        """Returns the node coordinates along each axis, interior only unless boundary is set."""
        if boundary:
            return [np.linspace(0.0, length, self._n + 2) for length in self._lengths]
        return [np.linspace(0.0, length, self._n + 2)[1:-1] for length in self._lengths]

    def _points(self, boundary):
        axes = self.axes(boundary)
        if self.dim == 1:
            return axes[0]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    @property
    def nodes(self):
        """Interior node coordinates: shape (N,) on an interval, (N*N, 2) on a rectangle, in the ordering of grid values."""
        return self._points(False)

    def same_grid(self, other):
        return self._lengths == other.lengths and self._n == other.grid_size

    def coefficient_values(self):
        """Samples a on every node of the interval, boundary nodes included."""
        points = self.axes(boundary=True)[0]
        if self._coefficient is None:
            return np.ones_like(points)
        return np.broadcast_to(np.asarray(self._coefficient(points), dtype=float), points.shape).copy()

    def inner(self, u, v):
        """Discrete L2 inner product of two grid-value vectors (trapezoidal weights; boundary values vanish)."""
        return self.cell * float(np.dot(u, v))

    def integrate(self, func):
        """Trapezoidal integral over the closed domain of a vectorized func(points)."""
        points = self._points(True)
        values = np.asarray(func(points), dtype=float)
        values = np.broadcast_to(values, (points.shape[0],))
        if self.dim == 1:
            return float(trapezoid(values, dx=self._spacing[0]))
        grid = values.reshape(self._n + 2, self._n + 2)
        return float(trapezoid(trapezoid(grid, dx=self._spacing[1], axis=1), dx=self._spacing[0]))

    def gradient(self, values):
        """Second-order central differences, one-sided at boundary-adjacent nodes. Returns shape (N,) on an interval and (N*N, 2) on a rectangle."""
        if self.dim == 1:
            return np.gradient(values, self._spacing[0], edge_order=2)
        parts = np.gradient(values.reshape(self.shape), *self._spacing, edge_order=2)
        return np.column_stack([part.ravel() for part in parts])

    def snap_rtol(self, target):
        """Relative snapping tolerance for a continuum eigenvalue: covers the O(lambda h^2) discretization error."""
        return max(SNAP_RTOL, abs(target) * max(self._spacing) ** 2)


def _second_difference(n, h, a_half):
    diagonal = (a_half[:-1] + a_half[1:]) / h ** 2
    off = -a_half[1:-1] / h ** 2
    return sparse.diags([off, diagonal, off], [-1, 0, 1], format="csr")


def assemble(problem):
    """Returns the symmetric positive definite stiffness matrix of the problem, Dirichlet rows eliminated."""
    if problem.dim == 1:
        a = problem.coefficient_values()
        if not np.all(np.isfinite(a)) or np.min(a) <= 0:
            bad = int(np.argmin(a))
            raise errors.EllipticityError("coefficient must be positive, a = %.6g at node %d" % (a[bad], bad))
        a_half = 0.5 * (a[:-1] + a[1:])
        matrix = _second_difference(problem.grid_size, problem.spacing[0], a_half)
    else:
        n = problem.grid_size
        ones = np.ones(n + 1)
        lx = _second_difference(n, problem.spacing[0], ones)
        ly = _second_difference(n, problem.spacing[1], ones)
        eye = sparse.identity(n, format="csr")
        matrix = (sparse.kron(lx, eye) + sparse.kron(eye, ly)).tocsr()

    asymmetry = abs(matrix - matrix.T).max()
    if asymmetry > 1e-12 * abs(matrix).max():
        raise errors.EllipticityError("assembled matrix is not symmetric (%.3g)" % asymmetry)

    log.debug("assembled %dD operator with %d unknowns", problem.dim, matrix.shape[0])
    return matrix


class SpectralDecomposition(object):
    """Eigenpairs of the discrete operator with the splitting X- + X0 + X+ around the resonance eigenvalue. Instances are immutable."""

    def __init__(self, problem, eigenvalues, basis, cluster_ids, clusters, k, alpha):
        self._problem = problem
        self._mu = _frozen(eigenvalues)
        self._basis = _frozen(basis)
        self._cluster_ids = _frozen(cluster_ids)
        self._clusters = _frozen(clusters)
        self._k = int(k)
        self._alpha = float(alpha)

        self._minus = _frozen(np.flatnonzero(cluster_ids < k - 1))
        self._kernel = _frozen(np.flatnonzero(cluster_ids == k - 1))
        self._plus = _frozen(np.flatnonzero(cluster_ids > k - 1))

        self._multiplicities = tuple(int(m) for m in np.bincount(cluster_ids, minlength=len(clusters)))
        self._d = (0,) + tuple(int(d) for d in np.cumsum(self._multiplicities))
        self._delta = 0.0 if eigenvalues[0] > POSITIVITY_FLOOR else abs(float(eigenvalues[0])) + 1.0

        lam = self.lambda_value
        self._gap_minus = lam - float(clusters[k - 2]) if k >= 2 else None
        self._gap_plus = float(clusters[k]) - lam if k < len(clusters) else None

        rates = lam - np.asarray(eigenvalues, dtype=float)
        rates[self._kernel] = 0.0
        self._rates = _frozen(rates)
        self._alpha_weights = _frozen((self._mu + self._delta) ** self._alpha)

    @property
    def problem(self):
        return self._problem

    @property
    def size(self):
        return len(self._mu)

    @property
    def eigenvalues(self):
        """Mode eigenvalues mu_j, ascending, one per mode."""
        return self._mu

    @property
    def basis(self):
        """H-orthonormal eigenvectors as columns of grid values."""
        return self._basis

    @property
    def clusters(self):
        """Distinct eigenvalues lambda_1 < lambda_2 < ..."""
        return self._clusters

    @property
    def multiplicities(self):
        return self._multiplicities

    @property
    def cluster_ids(self):
        return self._cluster_ids

    @property
    def k(self):
        return self._k

    @property
    def lambda_value(self):
        return float(self._clusters[self._k - 1])

    @property
    def minus_modes(self):
        return self._minus

    @property
    def kernel_modes(self):
        return self._kernel

    @property
    def plus_modes(self):
        return self._plus

    @property
    def delta(self):
        return self._delta

    @property
    def alpha(self):
        return self._alpha

    @property
    def d(self):
        """Cumulative multiplicities: d[0] = 0, d[l] = sum of the first l multiplicities."""
        return self._d

    @property
    def d_k(self):
        return self._d[self._k]

    @property
    def gap_minus(self):
        return self._gap_minus

    @property
    def gap_plus(self):
        return self._gap_plus

    @property
    def c(self):
        """Decay constant: the smallest applicable spectral gap."""
        gaps = [gap for gap in (self._gap_minus, self._gap_plus) if gap is not None]
        return min(gaps) if gaps else None

    @property
    def rates(self):
        """Shifted rates z_j = lambda - mu_j, exactly zero on kernel modes."""
        return self._rates

    @property
    def alpha_weights(self):
        """Diagonal of A_delta^alpha: (mu_j + delta)^alpha."""
        return self._alpha_weights

    @property
    def kernel_dim(self):
        return len(self._kernel)

    @property
    def kernel_basis(self):
        """Kernel eigenvectors as columns of grid values."""
        return self._basis[:, self._kernel]

    def to_spectral(self, values):
        """Coefficients of grid values; a 2D array is treated as one state per row."""
        return self._problem.cell * (values @ self._basis)

    def to_values(self, coefficients):
        """Grid values of coefficients; a 2D array is treated as one state per row."""
        return coefficients @ self._basis.T

    def mask(self, part):
        """Boolean mode mask of a projection: P (kernel), Q- (minus), Q+ (plus) or Q (minus and plus)."""
        ids = {
            "P": self._kernel,
            "Q-": self._minus,
            "Q+": self._plus,
            "Q": np.concatenate([self._minus, self._plus]),
        }
        if part not in ids:
            raise errors.ConfigurationError("unknown projection %r, expected one of %s" % (part, ", ".join(PARTS)))
        selected = np.zeros(self.size, dtype=bool)
        selected[ids[part]] = True
        return selected

    def mode_class(self, j):
        if self._cluster_ids[j] < self._k - 1:
            return "minus"
        if self._cluster_ids[j] == self._k - 1:
            return "kernel"
        return "plus"

    def coerce(self, u):
        """Returns u expressed in this decomposition, raising DimensionError when the grids differ."""
        if u.dec is self:
            return u
        if not self._problem.same_grid(u.dec.problem):
            raise errors.DimensionError("grid function lives on a different grid")
        return GridFunction.from_values(self, u.values)

    def to_frame(self):
        """One row per mode: index, eigenvalue, cluster id and class."""
        return pd.DataFrame({
            "index": np.arange(self.size),
            "eigenvalue": self._mu,
            "cluster": self._cluster_ids,
            "class": [self.mode_class(j) for j in range(self.size)],
        })

    def summary(self):
        return {
            "k": self._k,
            "lambda": self.lambda_value,
            "dim_minus": len(self._minus),
            "dim_kernel": len(self._kernel),
            "dim_plus": len(self._plus),
            "d_k": self.d_k,
            "d_k_minus_1": self._d[self._k - 1],
            "delta": self._delta,
            "alpha": self._alpha,
            "gap_minus": self._gap_minus,
            "gap_plus": self._gap_plus,
        }


def _frozen(array):
    array = np.array(array)
    array.setflags(write=False)
    return array


def _cluster(eigenvalues):
    scale = max(np.max(np.abs(eigenvalues)), POSITIVITY_FLOOR)
    breaks = np.diff(eigenvalues) > CLUSTER_RTOL * scale
    ids = np.concatenate([[0], np.cumsum(breaks)])
    clusters = np.array([eigenvalues[ids == i].mean() for i in range(ids[-1] + 1)])
    return ids, clusters


def decompose(matrix, lambda_target, alpha, problem, k=None, rtol=SNAP_RTOL):
    """Diagonalizes the operator and splits the modes around the resonance eigenvalue.

    Args:
        matrix: the assembled operator (sparse or dense).
        lambda_target: the resonance value; snapped to the nearest distinct eigenvalue within rtol (relative). Ignored when k is given.
        alpha: fractional exponent in (3/4, 1).
        problem: the EllipticProblem the matrix was assembled from.
        k: optional 1-based index of the resonance eigenvalue among the distinct ones.
        rtol: relative snapping tolerance.
    """
    if not 0.75 < alpha < 1.0:
        raise errors.ConfigurationError("alpha must lie in (3/4, 1), got %s" % alpha)

    dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, dtype=float)
    if dense.shape != (problem.size, problem.size):
        raise errors.DimensionError("matrix of shape %s does not fit a grid of %d nodes" % (dense.shape, problem.size))
    mu, vectors = scipy.linalg.eigh(dense)
    ids, clusters = _cluster(mu)

    if k is None:
        if lambda_target is None:
            raise errors.ConfigurationError("either lambda_target or k is required")
        nearest = int(np.argmin(np.abs(clusters - lambda_target)))
        if abs(clusters[nearest] - lambda_target) > rtol * max(abs(lambda_target), POSITIVITY_FLOOR):
            raise errors.ResonanceMismatchError(
                "%.10g is not an eigenvalue: nearest is %.10g" % (lambda_target, clusters[nearest]))
        k = nearest + 1
    elif not 1 <= k <= len(clusters):
        raise errors.ResonanceMismatchError("eigenvalue index %d outside 1..%d" % (k, len(clusters)))

    basis = vectors / math.sqrt(problem.cell)
    dec = SpectralDecomposition(problem, mu, basis, ids, clusters, k, alpha)
    log.debug("decomposed %d modes into %d clusters; k = %d, lambda = %.10g, dims (-, 0, +) = (%d, %d, %d)",
              dec.size, len(clusters), k, dec.lambda_value,
              len(dec.minus_modes), dec.kernel_dim, len(dec.plus_modes))
    return dec


class GridFunction(object):
    """A state on the interior grid, held as grid values and as spectral coefficients of one decomposition."""

    def __init__(self, dec, values, spectral):
        self._dec = dec
        self._values = _frozen(values)
        self._spectral = _frozen(spectral)

    @classmethod
    def from_values(cls, dec, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (dec.size,):
            raise errors.DimensionError("expected %d grid values, got %d" % (dec.size, values.size))
        return cls(dec, values, dec.to_spectral(values))

    @classmethod
    def from_spectral(cls, dec, spectral):
        spectral = np.asarray(spectral, dtype=float).ravel()
        if spectral.shape != (dec.size,):
            raise errors.DimensionError("expected %d coefficients, got %d" % (dec.size, spectral.size))
        return cls(dec, dec.to_values(spectral), spectral)

    @classmethod
    def zeros(cls, dec):
        return cls(dec, np.zeros(dec.size), np.zeros(dec.size))

    @property
    def dec(self):
        return self._dec

    @property
    def values(self):
        return self._values

    @property
    def spectral(self):
        return self._spectral

    def _combine(self, other, sign):
        other = self._dec.coerce(other)
        return GridFunction.from_spectral(self._dec, self._spectral + sign * other.spectral)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        return GridFunction.from_spectral(self._dec, scalar * self._spectral)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def project(dec, u, part):
    """Applies P, Q-, Q+ or Q = Q- + Q+ by zeroing spectral coefficients outside the selected modes."""
    u = dec.coerce(u)
    return GridFunction.from_spectral(dec, np.where(dec.mask(part), u.spectral, 0.0))


def fractional_norm(dec, u, which="alpha"):
    """Returns ||u||_H or ||u||_alpha = ||A_delta^alpha u||_H."""
    u = dec.coerce(u)
    if which == "H":
        return float(np.linalg.norm(u.spectral))
    if which == "alpha":
        return float(np.linalg.norm(dec.alpha_weights * u.spectral))
    raise errors.ConfigurationError("unknown norm %r, expected 'H' or 'alpha'" % which)


def smoothing_constant(dec):
    """Explicit K1 with ||A_delta^alpha S_A(t) x|| <= K1 e^{-(lambda + c/2) t} t^{-alpha} ||x|| on X+ for all t > 0."""
    c = dec.gap_plus if dec.c is None else dec.c
    base = max(dec.lambda_value + dec.delta, 0.0)
    return (dec.alpha / math.e * (2.0 + 2.0 * base / c)) ** dec.alpha


def _random_in(dec, modes, count, rng):
    coefficients = np.zeros((count, dec.size))
    coefficients[:, modes] = rng.standard_normal((count, len(modes)))
    return coefficients


def verify_decay(dec, t_samples, count=50, rng=None):
    """Checks the three decay inequalities of the splitting on random vectors.

    X+ bounds use every positive sample t; the X- bound uses -|t|. The contraction bounds use K = 1 and the decay constant c; the smoothing bound uses c/2 with the explicit constant K1. Returns a dict keyed by inequality name with status (pass, fail or skipped), the measured worst-case constant and the allowed one.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    alpha, lam, c = dec.alpha, dec.lambda_value, dec.c
    mu = dec.eigenvalues
    report = {}

    positive = [float(t) for t in t_samples if t > 0]
    backward = sorted(set(-abs(float(t)) for t in t_samples if t != 0))

    if len(dec.plus_modes) == 0 or not positive:
        report["smoothing_plus"] = _skipped("X+ is empty" if len(dec.plus_modes) == 0 else "no positive t")
        report["contraction_plus"] = dict(report["smoothing_plus"])
    else:
        plus = dec.plus_modes
        vectors = _random_in(dec, plus, count, rng)[:, plus]
        norms = np.linalg.norm(vectors, axis=1)
        half = c / 2.0
        smooth, contract = 0.0, 0.0
        for t in positive:
            smoothed = dec.alpha_weights[plus] * np.exp(-(mu[plus] - lam - half) * t) * vectors
            smooth = max(smooth, float(np.max(np.linalg.norm(smoothed, axis=1) * t ** alpha / norms)))
            contracted = np.exp((lam - mu[plus] + c) * t) * vectors
            contract = max(contract, float(np.max(np.linalg.norm(contracted, axis=1) / norms)))
        report["smoothing_plus"] = _verdict(smooth, smoothing_constant(dec), half)
        report["contraction_plus"] = _verdict(contract, 1.0, c)

    if len(dec.minus_modes) == 0 or not backward:
        report["expansion_minus"] = _skipped("X- is empty" if len(dec.minus_modes) == 0 else "no t samples")
    else:
        minus = dec.minus_modes
        vectors = _random_in(dec, minus, count, rng)[:, minus]
        norms = np.linalg.norm(vectors, axis=1)
        expand = 0.0
        for t in backward:
            grown = np.exp((lam - mu[minus] - c) * t) * vectors
            expand = max(expand, float(np.max(np.linalg.norm(grown, axis=1) / norms)))
        report["expansion_minus"] = _verdict(expand, 1.0, c)

    return report


def _skipped(reason):
    return {"status": "skipped", "measured_K": None, "allowed_K": None, "c": None, "reason": reason}


def _verdict(measured, allowed, c):
    status = "pass" if measured <= allowed * (1.0 + 1e-10) else "fail"
    return {"status": status, "measured_K": measured, "allowed_K": allowed, "c": c, "reason": ""}


def projection_audit(dec, count=100, rng=None):
    """Largest deviation, over random vectors, of the projection identities and of the H-orthogonality of P u and Q u."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(count):
        u = GridFunction.from_values(dec, rng.standard_normal(dec.size))
        p, qm, qp = (project(dec, u, part) for part in ("P", "Q-", "Q+"))
        scale = max(fractional_norm(dec, u, "H"), 1.0)
        checks = [
            p + qm + qp - u,
            project(dec, p, "P") - p,
            project(dec, qm, "Q-") - qm,
            project(dec, qp, "Q+") - qp,
            project(dec, qp, "P"),
            project(dec, p, "Q"),
            project(dec, qm, "Q+"),
        ]
        worst = max(worst, max(np.max(np.abs(g.values)) for g in checks) / scale)
        q = project(dec, u, "Q")
        worst = max(worst, abs(dec.problem.inner(p.values, q.values)) / scale ** 2)
    return worst


def orthonormality_defect(dec):
    """Max deviation of the H-Gram matrix of the eigenbasis from the identity."""
    gram = dec.problem.cell * (dec.basis.T @ dec.basis)
    return float(np.max(np.abs(gram - np.eye(dec.size))))


def eigen_residual(dec, matrix):
    """Max over modes of ||A v_j - mu_j v_j||_H / |mu_j|."""
    applied = matrix @ dec.basis
    residual = applied - dec.basis * dec.eigenvalues
    norms = np.sqrt(dec.problem.cell * np.sum(residual ** 2, axis=0))
    return float(np.max(norms / np.maximum(np.abs(dec.eigenvalues), POSITIVITY_FLOOR)))


def kernel_zero_audit(dec, floor=1e-8):
    """Looks for two adjacent interior nodes where a kernel eigenfunction is below floor, which would mean a zero set of positive measure. Returns a list of (mode, node) witnesses; empty on success. Rectangles are not audited."""
    if dec.problem.dim != 1:
        return []
    witnesses = []
    for mode in dec.kernel_modes:
        small = np.abs(dec.basis[:, mode]) < floor
        for node in np.flatnonzero(small[:-1] & small[1:]):
            witnesses.append((int(mode), int(node)))
    return witnesses
