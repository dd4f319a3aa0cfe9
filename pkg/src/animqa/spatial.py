"""
Point-set distance features between a reference and a generated animation.

Chamfer (f1) averages squared nearest-neighbour distances in both
directions; Hausdorff (f2) takes the worst unsquared one.  Both are averaged
over aligned frame pairs.
"""
import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyFrame, FrameCountMismatch

# candidates fetched per query before the exact lowest-index tie-break
_CANDIDATES = 2
# normalised-time gaps closer than this are treated as equal
_TIE_TOLERANCE = 1e-12


def _as_points(points):
    if hasattr(points, "points"):
        points = points.points
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"expected an (m, 3) point array, got shape {points.shape}")
    if len(points) == 0:
        raise EmptyFrame("frame has no points")
    return points


def brute_force_nearest(data, queries):
    """Exact nearest neighbours by a full distance matrix (ties: lowest index)."""
    data = _as_points(data)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    d2 = ((queries[:, None, :] - data[None, :, :]) ** 2).sum(axis=-1)
    idx = np.argmin(d2, axis=1)
    return idx, d2[np.arange(len(queries)), idx]


class NearestNeighborIndex:
    """Exact nearest-neighbour queries over one point frame.

    A k-d tree proposes a few candidates per query; squared distances are then
    recomputed here and the minimum taken with ties going to the lowest point
    index, so results match :func:`brute_force_nearest` exactly.
    """

    def __init__(self, points):
        self.points = _as_points(points)
        self._tree = cKDTree(self.points)
        self._k = min(_CANDIDATES, len(self.points))

    def __len__(self):
        return len(self.points)

    def query(self, queries):
        """Return ``(indices, squared distances)`` for an ``(q, 3)`` array.

        A single 3-vector returns ``(nearest point, squared distance)``.
        """
        q = np.asarray(queries, dtype=float)
        single = q.ndim == 1
        idx, d2 = self._query(np.atleast_2d(q))
        if single:
            return self.points[idx[0]], float(d2[0])
        return idx, d2

    def _query(self, q):
        dist, cand = self._tree.query(q, k=self._k)
        if self._k == 1:
            cand, dist = cand[:, None], dist[:, None]
        d2 = ((q[:, None, :] - self.points[cand]) ** 2).sum(axis=-1)
        best = d2.min(axis=1)
        # lowest index among exact ties; unreachable candidates count as far
        masked = np.where(d2 == best[:, None], cand, len(self.points))
        idx = masked.min(axis=1)
        # every candidate tied: there may be more equal points beyond the k found
        full = np.flatnonzero((d2 == best[:, None]).all(axis=1)) if self._k > 1 else []
        for r in full:
            ball = self._tree.query_ball_point(q[r], np.sqrt(best[r]) * (1 + 1e-12) + 1e-300)
            ball = np.asarray(ball, dtype=np.int64)
            bd2 = ((q[r] - self.points[ball]) ** 2).sum(axis=-1)
            ties = ball[bd2 == bd2.min()]
            if bd2.min() <= best[r]:
                best[r] = bd2.min()
                idx[r] = ties.min()
        return idx, best


def nn_sq_distances(a, b, index_b=None):
    """Squared distance from every point of ``a`` to its nearest point in ``b``."""
    a = _as_points(a)
    if index_b is None:
        index_b = NearestNeighborIndex(b)
    return index_b.query(a)[1]


def _frame_nn(a, b):
    """Both directions of squared NN distances for one frame pair."""
    a, b = _as_points(a), _as_points(b)
    return nn_sq_distances(a, b), nn_sq_distances(b, a)


def chamfer_frame(a, b):
    ab, ba = _frame_nn(a, b)
    return float(ab.mean() + ba.mean())


def hausdorff_frame(a, b):
    ab, ba = _frame_nn(a, b)
    return float(np.sqrt(max(ab.max(), ba.max())))


def align_indices(times_a, times_b):
    """Pair up frames of two sequences by normalised time.

    Equal-length sequences pair frame ``i`` with frame ``i``.  Otherwise the
    longer sequence sets the grid and each of its frames is matched with the
    frame of the shorter one nearest in ``(t - t0) / duration`` (ties go to the
    earlier frame).  Returns two index arrays of the grid length.
    """
    ta = np.asarray(times_a, dtype=float)
    tb = np.asarray(times_b, dtype=float)
    if len(ta) == len(tb):
        idx = np.arange(len(ta))
        return idx, idx.copy()
    swap = len(ta) < len(tb)
    long_, short = (tb, ta) if swap else (ta, tb)
    ul = (long_ - long_[0]) / (long_[-1] - long_[0])
    us = (short - short[0]) / (short[-1] - short[0])
    # nearest by |ul - us|, lowest index on ties; gaps within rounding of
    # each other count as tied so midpoint frames resolve predictably
    pos = np.searchsorted(us, ul, side="left")
    lo = np.clip(pos - 1, 0, len(us) - 1)
    hi = np.clip(pos, 0, len(us) - 1)
    pick = np.where(np.abs(ul - us[hi]) < np.abs(ul - us[lo]) - _TIE_TOLERANCE, hi, lo)
    grid = np.arange(len(long_))
    return (pick, grid) if swap else (grid, pick)


def aligned_pairs(ref, gen, align=True):
    """Index pairs for two timed sequences (``AnimationSequence``/``PoseSequence``)."""
    if len(ref) != len(gen) and not align:
        raise FrameCountMismatch(f"reference has {len(ref)} frames, generated has {len(gen)}")
    return align_indices(ref.times, gen.times)


def frame_pair_distances(ref, gen, align=True):
    """Per aligned frame: ``(chamfer, hausdorff)`` arrays."""
    ia, ib = aligned_pairs(ref, gen, align)
    cham = np.empty(len(ia))
    haus = np.empty(len(ia))
    cache = {}
    for k, (i, j) in enumerate(zip(ia, ib)):
        key = (int(i), int(j))
        if key not in cache:
            ab, ba = _frame_nn(ref.frames[i], gen.frames[j])
            cache[key] = (ab.mean() + ba.mean(), np.sqrt(max(ab.max(), ba.max())))
        cham[k], haus[k] = cache[key]
    return cham, haus


def chamfer_feature(ref, gen, align=True):
    """f1: frame-averaged symmetric chamfer distance (squared metres)."""
    return float(frame_pair_distances(ref, gen, align)[0].mean())


def hausdorff_feature(ref, gen, align=True):
    """f2: frame-averaged symmetric Hausdorff distance (metres)."""
    return float(frame_pair_distances(ref, gen, align)[1].mean())
