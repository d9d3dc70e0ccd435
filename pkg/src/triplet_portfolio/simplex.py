"""Simplex grid enumeration, local optima, and triangle geometry.

The three local optima (max return, min volatility, max persistence)
are found by brute force over a lattice of weight vectors with entries
in multiples of 1/q. Their triangle spans the practical investing
region; the balanced portfolios reported from it are the centroid, the
incenter, and the grid point minimizing the summed distance to all
three vertices (the Fermat point of the triangle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateTriangleError, GridSizeError
from .returns import StatisticsBundle, WeightVector
from .validation import as_readonly, point_array, weight_array

DEFAULT_POINT_CEILING = 10_000_000
_DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class SimplexGrid:
    """All weight vectors with entries in {0, 1/q, ..., 1} summing to 1.

    `compositions` holds the exact integer lattice (rows sum to q), so
    every floating-point row of `points` satisfies the simplex
    invariant to round-off of a single division.
    """

    dimension: int
    resolution: int
    compositions: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "compositions", as_readonly(self.compositions))
        object.__setattr__(self, "points", as_readonly(self.points))

    @property
    def step(self) -> float:
        return 1.0 / self.resolution

    def __len__(self) -> int:
        return self.points.shape[0]


def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    if parts == 2:
        first = np.arange(total + 1, dtype=np.int64)
        return np.column_stack([first, total - first])
    blocks = []
    for v in range(total + 1):
        tail = _compositions(total - v, parts - 1)
        head = np.full((tail.shape[0], 1), v, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def enumerate_simplex(
    dimension: int, resolution: int, point_ceiling: int = DEFAULT_POINT_CEILING
) -> SimplexGrid:
    """Enumerate the simplex lattice in ascending lexicographic order.

    The point count is C(q + N - 1, N - 1); enumeration is refused when
    it would exceed `point_ceiling`.
    """
    n, q = int(dimension), int(resolution)
    if n < 1:
        raise DataError(f"dimension must be >= 1, got {dimension}")
    if q < 1:
        raise DataError(f"resolution must be >= 1, got {resolution}")
    count = math.comb(q + n - 1, n - 1)
    if count > point_ceiling:
        raise GridSizeError(
            f"grid of dimension {n} at resolution {q} has {count} points, "
            f"above the ceiling of {point_ceiling}"
        )
    comps = _compositions(q, n)
    return SimplexGrid(
        dimension=n, resolution=q, compositions=comps, points=comps / float(q)
    )


@dataclass(frozen=True)
class OptimalTriangle:
    """The three local-optimum weights and their pairwise distances."""

    w_r: WeightVector
    w_sigma: WeightVector
    w_h: WeightVector
    d_sigma_h: float
    d_r_h: float
    d_r_sigma: float
    interval_days: int | None = None

    @classmethod
    def from_vertices(
        cls, w_r, w_sigma, w_h, interval_days: int | None = None
    ) -> "OptimalTriangle":
        vr = w_r if isinstance(w_r, WeightVector) else WeightVector(w_r)
        vs = w_sigma if isinstance(w_sigma, WeightVector) else WeightVector(w_sigma)
        vh = w_h if isinstance(w_h, WeightVector) else WeightVector(w_h)
        if not (len(vr) == len(vs) == len(vh)):
            raise DataError("triangle vertices must share one dimension")
        return cls(
            w_r=vr,
            w_sigma=vs,
            w_h=vh,
            d_sigma_h=weight_distance(vs, vh),
            d_r_h=weight_distance(vr, vh),
            d_r_sigma=weight_distance(vr, vs),
            interval_days=interval_days,
        )

    @property
    def dimension(self) -> int:
        return len(self.w_r)

    @property
    def vertices(self) -> np.ndarray:
        """Vertex matrix, rows ordered (w_r, w_sigma, w_h)."""
        return np.vstack(
            [self.w_r.as_array(), self.w_sigma.as_array(), self.w_h.as_array()]
        )

    @property
    def perimeter(self) -> float:
        return self.d_sigma_h + self.d_r_h + self.d_r_sigma


@dataclass(frozen=True)
class GlobalOptimum:
    """Balanced portfolios derived from an optimal triangle.

    incenter, incircle_radius, and fermat may be None: the first two
    when the triangle is degenerate (note says why), the last when no
    grid was supplied.
    """

    centroid: WeightVector
    incenter: WeightVector | None
    incircle_radius: float | None
    fermat: WeightVector | None
    degenerate: bool = False
    note: str = ""

    @property
    def method_labels(self) -> tuple[str, ...]:
        labels = ["centroid"]
        if self.incenter is not None:
            labels.append("incenter")
        if self.fermat is not None:
            labels.append("fermat")
        return tuple(labels)


@dataclass(frozen=True)
class AveragedTriangle:
    """Vertex-wise average of per-interval triangles with dispersion.

    sd_* are per-component standard deviations across intervals
    (ddof=1); sem_* are the corresponding standard errors of the mean.
    """

    triangle: OptimalTriangle
    n_intervals: int
    sd_w_r: np.ndarray
    sd_w_sigma: np.ndarray
    sd_w_h: np.ndarray
    sem_w_r: np.ndarray
    sem_w_sigma: np.ndarray
    sem_w_h: np.ndarray

    def __post_init__(self):
        for name in ("sd_w_r", "sd_w_sigma", "sd_w_h", "sem_w_r", "sem_w_sigma", "sem_w_h"):
            object.__setattr__(self, name, as_readonly(getattr(self, name)))


def weight_distance(a, b) -> float:
    """Euclidean distance between two weight vectors."""
    arr_a = weight_array(a)
    arr_b = weight_array(b, n=arr_a.size)
    return float(np.linalg.norm(arr_a - arr_b))


def local_optima(stats: StatisticsBundle, grid: SimplexGrid) -> OptimalTriangle:
    """Grid argmax of return, argmin of volatility, argmax of persistence.

    Volatility is minimized through the variance (same argmin, no square
    roots). Ties resolve to the lexicographically smallest weight vector
    because enumeration order is lexicographic and argmax/argmin take
    the first hit.
    """
    if grid.dimension != stats.n_assets:
        raise DataError(
            f"grid dimension {grid.dimension} does not match {stats.n_assets} assets"
        )
    pts = grid.points
    ret = pts @ stats.mean_returns
    var = np.einsum("ij,jk,ik->i", pts, stats.covariance, pts)
    hur = pts @ stats.hurst
    return OptimalTriangle.from_vertices(
        w_r=WeightVector(pts[np.argmax(ret)]),
        w_sigma=WeightVector(pts[np.argmin(var)]),
        w_h=WeightVector(pts[np.argmax(hur)]),
        interval_days=stats.interval_days,
    )


def centroid(tri: OptimalTriangle) -> WeightVector:
    """Component-wise mean of the three vertices."""
    return WeightVector(tri.vertices.mean(axis=0))


def _heron_terms(tri: OptimalTriangle, denominator: float) -> tuple[float, float, float, float]:
    s = tri.perimeter / denominator
    return s, s - tri.d_sigma_h, s - tri.d_r_h, s - tri.d_r_sigma


def _check_nondegenerate(tri: OptimalTriangle) -> None:
    s, t1, t2, t3 = _heron_terms(tri, 2.0)
    if s <= 0.0:
        raise DegenerateTriangleError("triangle has zero perimeter")
    area_sq = s * t1 * t2 * t3
    area = math.sqrt(max(area_sq, 0.0))
    if area <= _DEGENERACY_RTOL * s * s:
        raise DegenerateTriangleError(
            "triangle is degenerate (coincident or collinear vertices)"
        )


def incenter(tri: OptimalTriangle) -> WeightVector:
    """Side-length-weighted blend of the vertices.

    Each vertex is weighted by the length of the side opposite to it;
    the result lies inside any non-degenerate triangle.
    """
    _check_nondegenerate(tri)
    blended = (
        tri.d_sigma_h * tri.w_r.as_array()
        + tri.d_r_h * tri.w_sigma.as_array()
        + tri.d_r_sigma * tri.w_h.as_array()
    ) / tri.perimeter
    return WeightVector(blended)


def incircle_radius(tri: OptimalTriangle, convention: str = "standard") -> float:
    """Radius of the inscribed circle, sqrt((s-a)(s-b)(s-c)/s).

    `convention` picks the definition of s: "standard" uses the
    semi-perimeter (perimeter/2, the Heron choice), "thirds" uses
    perimeter/3, kept only for comparison; with thirds the radicand
    goes negative for most real triangles and the failure is raised
    rather than patched over.
    """
    if convention == "standard":
        denominator = 2.0
    elif convention == "thirds":
        denominator = 3.0
    else:
        raise DataError(f"convention must be 'standard' or 'thirds', got {convention!r}")
    s, t1, t2, t3 = _heron_terms(tri, denominator)
    if s <= 0.0:
        raise DegenerateTriangleError("triangle has zero perimeter")
    worst = min(t1, t2, t3)
    if worst <= 0.0:
        # A non-positive s-minus-side factor means the radicand is negative
        # or meaningless, even when two sign flips make the product positive.
        reason = (
            "the triangle is degenerate"
            if convention == "standard"
            else "the perimeter/3 convention breaks Heron's formula here"
        )
        raise DegenerateTriangleError(
            f"negative Heron radicand term (s - side = {worst:.6g}) with "
            f"s = perimeter/{denominator:g}; {reason}"
        )
    return math.sqrt((t1 * t2 * t3) / s)


def fermat_point(tri: OptimalTriangle, grid: SimplexGrid) -> WeightVector:
    """Grid point minimizing the summed distance to the three vertices."""
    if grid.dimension != tri.dimension:
        raise DataError(
            f"grid dimension {grid.dimension} does not match triangle dimension {tri.dimension}"
        )
    pts = grid.points
    total = sum(np.linalg.norm(pts - v, axis=1) for v in tri.vertices)
    return WeightVector(pts[np.argmin(total)])


def barycentric_coordinates(w, tri: OptimalTriangle) -> tuple[np.ndarray, float]:
    """Least-squares barycentric coordinates of w against the triangle.

    Returns coordinates ordered (w_r, w_sigma, w_h) summing to one, and
    the off-plane residual norm. The point may lie outside the simplex;
    membership is a separate question answered by triangle_membership.
    """
    arr = point_array(w, n=tri.dimension)
    origin = tri.w_h.as_array()
    edges = np.column_stack(
        [tri.w_r.as_array() - origin, tri.w_sigma.as_array() - origin]
    )
    coef, _, rank, _ = np.linalg.lstsq(edges, arr - origin, rcond=None)
    if rank < 2:
        raise DegenerateTriangleError(
            "triangle is degenerate (coincident or collinear vertices); "
            "barycentric coordinates are not unique"
        )
    alpha, beta = float(coef[0]), float(coef[1])
    coords = np.array([alpha, beta, 1.0 - alpha - beta])
    reconstructed = origin + edges @ coef
    residual = float(np.linalg.norm(arr - reconstructed))
    return coords, residual


def triangle_membership(w, tri: OptimalTriangle, tol: float = 1e-9) -> bool:
    """Whether w lies inside the triangle within `tol`.

    Requires all barycentric coordinates >= -tol and an off-plane
    residual <= tol.
    """
    coords, residual = barycentric_coordinates(w, tri)
    return bool(np.all(coords >= -tol) and residual <= tol)


def average_local_weights(triangles) -> AveragedTriangle:
    """Vertex-wise mean across per-interval triangles, with dispersion.

    Sides are recomputed from the averaged vertices. The mean of simplex
    points is itself a simplex point, so the result is always valid.
    """
    tris = list(triangles)
    if not tris:
        raise DataError("cannot average an empty list of triangles")
    dim = tris[0].dimension
    if any(t.dimension != dim for t in tris):
        raise DataError("all triangles must share one dimension")
    stacks = {
        "w_r": np.vstack([t.w_r.as_array() for t in tris]),
        "w_sigma": np.vstack([t.w_sigma.as_array() for t in tris]),
        "w_h": np.vstack([t.w_h.as_array() for t in tris]),
    }
    n = len(tris)
    means = {k: v.mean(axis=0) for k, v in stacks.items()}
    sds = {
        k: (v.std(axis=0, ddof=1) if n > 1 else np.zeros(dim)) for k, v in stacks.items()
    }
    return AveragedTriangle(
        triangle=OptimalTriangle.from_vertices(
            means["w_r"], means["w_sigma"], means["w_h"], interval_days=None
        ),
        n_intervals=n,
        sd_w_r=sds["w_r"],
        sd_w_sigma=sds["w_sigma"],
        sd_w_h=sds["w_h"],
        sem_w_r=sds["w_r"] / math.sqrt(n),
        sem_w_sigma=sds["w_sigma"] / math.sqrt(n),
        sem_w_h=sds["w_h"] / math.sqrt(n),
    )


def effective_subspace_membership(w, triangles, tol: float = 1e-9) -> bool:
    """Whether w belongs to every triangle in the list (their overlap)."""
    tris = list(triangles)
    if not tris:
        raise DataError("membership in an empty collection of triangles is undefined")
    return all(triangle_membership(w, t, tol=tol) for t in tris)


def global_optimum(
    tri: OptimalTriangle,
    grid: SimplexGrid | None = None,
    heron_convention: str = "standard",
) -> GlobalOptimum:
    """Assemble centroid, incenter, incircle radius, and Fermat point.

    The centroid survives any degeneracy; incenter and incircle radius
    are replaced by a note when the triangle is degenerate or when the
    requested Heron convention produces a negative radicand.
    """
    center = centroid(tri)
    inc: WeightVector | None
    radius: float | None
    note = ""
    degenerate = False
    try:
        inc = incenter(tri)
    except DegenerateTriangleError as exc:
        inc, degenerate, note = None, True, str(exc)
    if inc is not None:
        try:
            radius = incircle_radius(tri, convention=heron_convention)
        except DegenerateTriangleError as exc:
            radius, note = None, str(exc)
    else:
        radius = None
    fermat = fermat_point(tri, grid) if grid is not None else None
    return GlobalOptimum(
        centroid=center,
        incenter=inc,
        incircle_radius=radius,
        fermat=fermat,
        degenerate=degenerate,
        note=note,
    )


def grid_constrained_maximizer(
    stats: StatisticsBundle, grid: SimplexGrid, risk_aversion: float = 1.0
) -> tuple[WeightVector, bool]:
    """Grid maximizer of w'R - gamma*w'Cw under w'H >= 1/2.

    Returns the maximizing weight and whether the persistence constraint
    could be honored (False means no grid point satisfies it and the
    maximum was taken unconstrained).
    """
    if grid.dimension != stats.n_assets:
        raise DataError(
            f"grid dimension {grid.dimension} does not match {stats.n_assets} assets"
        )
    pts = grid.points
    objective = pts @ stats.mean_returns - risk_aversion * np.einsum(
        "ij,jk,ik->i", pts, stats.covariance, pts
    )
    feasible = pts @ stats.hurst >= 0.5
    if feasible.any():
        masked = np.where(feasible, objective, -np.inf)
        return WeightVector(pts[np.argmax(masked)]), True
    return WeightVector(pts[np.argmax(objective)]), False
