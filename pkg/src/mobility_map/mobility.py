"""Mobility scoring: the empirical rule table and the Gaussian-process regressor trained on it."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import HyperparameterError, ParameterError
from .validation import check_positive

# left edges of the bins; the last bin of each axis is unbounded
SLOPE_EDGES = np.array([0.0, 10.0, 20.0, 30.0, 40.0])
ROUGHNESS_EDGES = np.array([1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2])

# representative inputs used as GPR training points (bin midpoints)
SLOPE_REPS = np.array([5.0, 15.0, 25.0, 35.0, 45.0])
ROUGHNESS_REPS = np.array([1.1, 1.3, 1.5, 1.7, 1.9, 2.1, 2.3])

# rows: roughness bins, columns: slope bins
RULE_TABLE = np.array([
    [1.00, 0.75, 0.50, 0.25, 0.00],
    [0.75, 0.50, 0.25, 0.00, 0.00],
    [0.50, 0.25, 0.00, 0.00, 0.00],
    [0.25, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00],
])


def rule_lookup(slope, roughness):
    """Tabulated mobility for a slope (degrees) and roughness ratio.

    Bins are left-closed; roughness below 1 counts as 1.
    """
    if not np.isfinite(slope) or slope < 0:
        raise ParameterError(f"slope must be a finite value >= 0, got {slope}")
    if not np.isfinite(roughness):
        raise ParameterError(f"roughness must be finite, got {roughness}")
    roughness = max(float(roughness), 1.0)
    col = int(np.searchsorted(SLOPE_EDGES, slope, side="right")) - 1
    row = int(np.searchsorted(ROUGHNESS_EDGES, roughness, side="right")) - 1
    return float(RULE_TABLE[row, col])


def training_set():
    """Table entries as ``(X, y)``: X holds (slope, roughness) at every bin representative."""
    s, r = np.meshgrid(SLOPE_REPS, ROUGHNESS_REPS)
    X = np.column_stack([s.ravel(), r.ravel()])
    return X, RULE_TABLE.ravel().copy()


def se_kernel(x_i, x_j, sigma_f=1.0, length_scale=0.1):
    """Squared-exponential covariance between rows of ``x_i`` and rows of ``x_j``."""
    length_scale = check_positive(length_scale, "length_scale")
    a = np.atleast_2d(np.asarray(x_i, dtype=float))
    b = np.atleast_2d(np.asarray(x_j, dtype=float))
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
    k = sigma_f ** 2 * np.exp(-d2 / (2.0 * length_scale ** 2))
    if np.ndim(x_i) == 1 and np.ndim(x_j) == 1:
        return float(k[0, 0])
    return k


class MobilityRegressor(RegressorMixin, BaseEstimator):
    """Gaussian-process mean predictor with a squared-exponential kernel.

    Inputs are rescaled per feature to ``[0, 1]`` over the training range, and
    queries are clamped into that box.  Predictions are clipped to ``[0, 1]``.

    Parameters
    ----------
    sigma_f : float
        Signal standard deviation of the kernel.
    length_scale : float
        Kernel length scale in normalised units.
    sigma_n : float
        Observation noise standard deviation.
    """

    def __init__(self, sigma_f=1.0, length_scale=0.1, sigma_n=1e-2):
        self.sigma_f = sigma_f
        self.length_scale = length_scale
        self.sigma_n = sigma_n

    def _scale(self, X):
        Z = (X - self.lower_) / self.span_
        return np.clip(Z, 0.0, 1.0)

    def fit(self, X=None, y=None):
        """Fit on ``(X, y)``; with no arguments the rule table is used."""
        if X is None and y is None:
            X, y = training_set()
        X, y = check_X_y(X, y, y_numeric=True)
        check_positive(self.sigma_f, "sigma_f")
        check_positive(self.length_scale, "length_scale")
        if not np.isfinite(self.sigma_n) or self.sigma_n < 0:
            raise ParameterError(f"sigma_n must be >= 0, got {self.sigma_n}")
        self.lower_ = X.min(axis=0)
        span = X.max(axis=0) - self.lower_
        self.span_ = np.where(span > 0, span, 1.0)
        self.X_train_ = self._scale(X)
        self.y_train_ = y.astype(float)
        K = se_kernel(self.X_train_, self.X_train_, self.sigma_f, self.length_scale)
        K[np.diag_indices_from(K)] += self.sigma_n ** 2
        try:
            factor = cho_factor(K, lower=True)
        except LinAlgError as exc:
            raise HyperparameterError(f"kernel matrix is not positive definite: {exc}") from exc
        pivots = np.diag(factor[0])
        if pivots.min() ** 2 <= 1e-10 * K.diagonal().max():
            raise HyperparameterError("kernel matrix is numerically singular")
        self.alpha_ = cho_solve(factor, self.y_train_)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_raw(self, X):
        """Posterior mean without the final clip to ``[0, 1]``."""
        check_is_fitted(self, "alpha_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        k_star = se_kernel(self._scale(X), self.X_train_, self.sigma_f, self.length_scale)
        return k_star @ self.alpha_

    def predict(self, X):
        return np.clip(self.predict_raw(X), 0.0, 1.0)


def gpr_fit(X=None, y=None, sigma_f=1.0, length_scale=0.1, sigma_n=1e-2):
    """Fit a :class:`MobilityRegressor`, by default on the rule table."""
    return MobilityRegressor(sigma_f, length_scale, sigma_n).fit(X, y)


def gpr_predict(model, slope, roughness):
    """Mobility score for one (slope, roughness) pair."""
    return float(model.predict([[slope, max(float(roughness), 1.0)]])[0])


def mobility_grid(model, slopes=None, roughnesses=None):
    """Dense evaluation as an (m, 3) array of (slope, roughness, score) rows."""
    if slopes is None:
        slopes = np.linspace(0.0, 50.0, 51)
    if roughnesses is None:
        roughnesses = np.linspace(1.0, 2.4, 29)
    s, r = np.meshgrid(np.asarray(slopes, float), np.asarray(roughnesses, float), indexing="ij")
    X = np.column_stack([s.ravel(), r.ravel()])
    return np.column_stack([X, model.predict(X)])


@dataclass(frozen=True)
class SegmentScore:
    """Score of one segment.

    ``status`` is ``"ground"``, ``"scored"``, ``"undersized"`` or ``"undefined"``.
    """

    segment_id: int
    n_points: int
    slope: float
    roughness: float
    score: float
    status: str


@dataclass(frozen=True)
class MobilityMap:
    """Scores of the ground (id 0) and every region, with per-point labels."""

    entries: list = field(default_factory=list)
    labels: np.ndarray = None

    def scores(self):
        return np.array([e.score for e in self.entries])

    def point_scores(self):
        """Score of every point; unassigned points score 0."""
        lookup = np.zeros(max((e.segment_id for e in self.entries), default=0) + 1)
        for e in self.entries:
            lookup[e.segment_id] = e.score
        out = np.zeros(len(self.labels))
        assigned = self.labels >= 0
        out[assigned] = lookup[self.labels[assigned]]
        return out


def score_segments(segments, properties, model, ground_size=0):
    """Score every segment.

    Ground gets 1; undersized segments and those with undefined properties get
    0; the rest are scored by ``model``.  Segment ``s`` receives id ``s.id + 1``
    so that id 0 is the ground.
    """
    entries = [SegmentScore(0, int(ground_size), 0.0, 1.0, 1.0, "ground")]
    for seg, prop in zip(segments, properties):
        sid = seg.id + 1
        if seg.undersized:
            entries.append(SegmentScore(sid, len(seg), prop.slope, prop.roughness, 0.0,
                                        "undersized"))
        elif not prop.defined:
            entries.append(SegmentScore(sid, len(seg), prop.slope, prop.roughness, 0.0,
                                        "undefined"))
        else:
            score = gpr_predict(model, prop.slope, prop.roughness)
            entries.append(SegmentScore(sid, len(seg), prop.slope, prop.roughness, score,
                                        "scored"))
    return entries
