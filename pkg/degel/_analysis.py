# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""Measurements on solution fields: oscillation, growth rates, critical zones and free boundaries"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ._discretization import gradient_field, jet_at
from ._errors import GridMismatchError, ParameterError, StencilError
from ._grid import Node, NodeKind, Point, ScalarField, sup_over_sphere
from ._helpers import format_number, write_text_lines

RADII_PER_DECADE = 8
MIN_FIT_SAMPLES = 4


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line through (log r, log value)"""

    radii: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    r2: float

    def to_csv_lines(self) -> list[str]:
        """`r,value` rows followed by the trailer with the fitted line"""
        lines = ["r,value"]
        for r, v in zip(self.radii, self.values):
            lines.append(f"{format_number(r)},{format_number(v)}")
        lines.append(
            f"slope={format_number(self.slope)},intercept={format_number(self.intercept)},"
            f"r2={format_number(self.r2)}"
        )
        return lines


@dataclass(frozen=True)
class DensityReport:
    """Share of positivity nodes in balls around a free-boundary point"""

    radii: tuple[float, ...]
    ratios: tuple[float, ...]
    theta_min: float


def fit_exponent(samples: Sequence[tuple[float, float]], min_radius: float = 0.0) -> ExponentFit:
    """
    Fit value ~ C r^slope by least squares in log-log coordinates.

    Args:
        samples (Sequence): (r, value) pairs, in any order.
        min_radius (float): Smallest admissible radius, usually 2h of the
        grid the values were measured on.

    Returns:
        ExponentFit: Slope, intercept and coefficient of determination.

    Raises:
        ParameterError: With fewer than 4 samples, repeated or too small radii,
        or nonpositive values.
    """
    if len(samples) < MIN_FIT_SAMPLES:
        raise ParameterError(f"need at least {MIN_FIT_SAMPLES} samples, got {len(samples)}")
    ordered = sorted((float(r), float(v)) for r, v in samples)
    radii = np.array([r for r, _ in ordered])
    values = np.array([v for _, v in ordered])
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ParameterError("exponent fits need positive finite values")
    if np.any(np.diff(radii) <= 0):
        raise ParameterError("radii of an exponent fit must be distinct")
    if radii[0] <= 0 or radii[0] < min_radius - 1e-12:
        raise ParameterError(f"radii must be at least {min_radius}, got {radii[0]}")

    log_r, log_v = np.log(radii), np.log(values)
    slope, intercept = np.polyfit(log_r, log_v, 1)
    predicted = slope * log_r + intercept
    total = float(np.sum((log_v - log_v.mean()) ** 2))
    residual = float(np.sum((log_v - predicted) ** 2))
    r2 = 1.0 if total == 0 else 1.0 - residual / total
    logging.debug("Fitted slope %.4f (r2 %.4f) over %s radii", slope, r2, radii.size)
    return ExponentFit(
        radii=tuple(radii.tolist()),
        values=tuple(values.tolist()),
        slope=float(slope),
        intercept=float(intercept),
        r2=r2,
    )


def write_fit_csv(fit: ExponentFit, path: str) -> None:
    """Write a fit as CSV to a file, or to stdout for `-`"""
    write_text_lines(fit.to_csv_lines(), path)


def log_spaced_radii(r_min: float, r_max: float, per_decade: int = RADII_PER_DECADE) -> list[float]:
    """
    Geometrically spaced radii from r_min to r_max, both included.

    At least 4 radii are returned so that the result can always be fitted.
    """
    if not 0 < r_min < r_max:
        raise ParameterError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if per_decade < 1:
        raise ParameterError(f"per_decade must be positive, got {per_decade}")
    count = max(math.ceil(per_decade * math.log10(r_max / r_min)) + 1, MIN_FIT_SAMPLES)
    return np.geomspace(r_min, r_max, count).tolist()


def _node_near(u: ScalarField, x0: Point) -> Node:
    grid = u.grid
    node = grid.nearest_node(x0)
    if grid.kinds[node] == NodeKind.EXTERIOR:
        raise ParameterError(f"point {x0} lies outside the domain")
    px, py = grid.point_of(node)
    if math.hypot(px - x0[0], py - x0[1]) > 2.0 * grid.h:
        raise ParameterError(f"point {x0} is not within 2h of a grid node")
    return node


def _interior_node_near(u: ScalarField, x0: Point) -> Node:
    node = _node_near(u, x0)
    if u.grid.kinds[node] != NodeKind.INTERIOR:
        raise ParameterError(f"point {x0} is not at an interior node")
    return node


def _check_radius(u: ScalarField, r: float, multiple: float) -> None:
    if r < multiple * u.grid.h - 1e-12:
        raise ParameterError(f"radius {r} is below {multiple:g}h = {multiple * u.grid.h}")


def _ball(u: ScalarField, centre: Point, r: float) -> np.ndarray:
    return u.grid.defined & (u.grid.distance_from(centre) <= r + 1e-9 * u.grid.h)


def oscillation(u: ScalarField, x0: Point, r: float) -> float:
    """
    sup over B_r(x0) of |u - l|, with l the tangent plane of the discrete jet at x0.

    x0 is snapped to its nearest node, which must be interior.

    Raises:
        ParameterError: If x0 is outside the mask or r < 4h.
    """
    _check_radius(u, r, 4.0)
    node = _interior_node_near(u, x0)
    jet = jet_at(u, node)
    centre = u.grid.point_of(node)
    x1, x2 = u.grid.coordinates
    plane = u.at(node) + jet.grad[0] * (x1 - centre[0]) + jet.grad[1] * (x2 - centre[1])
    ball = _ball(u, centre, r)
    return float(np.max(np.abs(u.values[ball] - plane[ball])))


def gradient_growth(u: ScalarField, x0: Point, r: float) -> float:
    """
    sup over interior nodes of B_r(x0) of |grad_h u - grad_h u(x0)|.

    Raises:
        ParameterError: If x0 is outside the mask or r < 4h.
    """
    _check_radius(u, r, 4.0)
    node = _interior_node_near(u, x0)
    g1, g2 = gradient_field(u)
    centre = u.grid.point_of(node)
    ball = _ball(u, centre, r) & u.grid.interior
    return float(np.max(np.hypot(g1[ball] - g1[node], g2[ball] - g2[node])))


def critical_zone(u: ScalarField, r: float, beta: float) -> np.ndarray:
    """Boolean mask of interior nodes with |grad_h u| <= r^beta"""
    if r <= 0:
        raise ParameterError(f"radius must be positive, got {r}")
    g1, g2 = gradient_field(u)
    zone = np.zeros_like(u.grid.interior)
    interior = u.grid.interior
    zone[interior] = np.hypot(g1[interior], g2[interior]) <= r**beta
    return zone


def nondegeneracy_ratio(
    u: ScalarField,
    x0: Point,
    radii: Sequence[float],
    exponent: float,
    reference: float | None = None,
) -> tuple[float, list[float]]:
    """
    (sup over the sphere of radius r of u, minus the reference) / r^exponent per radius.

    The reference defaults to u at the node nearest x0. Passing the obstacle
    value there measures growth away from the obstacle instead.

    Returns:
        tuple[float, list[float]]: The minimum ratio and the ratio per radius.
    """
    if not radii:
        raise ParameterError("at least one radius is required")
    node = _node_near(u, x0)
    base = u.at(node) if reference is None else float(reference)
    centre = u.grid.point_of(node)
    ratios = [(sup_over_sphere(u, centre, r) - base) / r**exponent for r in radii]
    return min(ratios), ratios


def free_boundary(u: ScalarField, threshold: float) -> np.ndarray:
    """Boolean mask of interior nodes with u <= threshold next to a 4-neighbour above it"""
    above = np.zeros_like(u.grid.defined)
    above[u.grid.defined] = u.values[u.grid.defined] > threshold
    padded = np.pad(above, 1, constant_values=False)
    n = u.grid.n
    neighbour_above = (
        padded[2 : n + 2, 1 : n + 1]
        | padded[0:n, 1 : n + 1]
        | padded[1 : n + 1, 2 : n + 2]
        | padded[1 : n + 1, 0:n]
    )
    return u.grid.interior & ~above & neighbour_above


def free_boundary_node(
    u: ScalarField, threshold: float, near: Point | None = None, window: float = 0.0
) -> Node:
    """
    The free-boundary node closest to a point, the grid centre by default.

    With a positive `window`, every free-boundary node within that distance of
    the closest one is a candidate, and the candidate with the largest
    4-neighbour value wins. That node lies nearest to the interface between
    {u <= threshold} and {u > threshold}, while the closest node to an inner
    point tends to be the one deepest inside the zero set.

    Raises:
        ParameterError: If the free boundary is empty or the window negative.
    """
    if window < 0:
        raise ParameterError(f"window must be nonnegative, got {window}")
    mask = free_boundary(u, threshold)
    if not np.any(mask):
        raise ParameterError(f"no free boundary at threshold {threshold}")
    grid = u.grid
    near = grid.center if near is None else near
    dist = np.where(mask, grid.distance_from(near), np.inf)
    i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
    if window == 0:
        return (int(i), int(j))

    candidates = mask & (grid.distance_from(grid.point_of((i, j))) <= window + 1e-9 * grid.h)
    padded = np.pad(np.where(grid.defined, u.values, -np.inf), 1, constant_values=-np.inf)
    n = grid.n
    neighbour_max = np.maximum.reduce(
        [
            padded[2 : n + 2, 1 : n + 1],
            padded[0:n, 1 : n + 1],
            padded[1 : n + 1, 2 : n + 2],
            padded[1 : n + 1, 0:n],
        ]
    )
    score = np.where(candidates, neighbour_max, -np.inf)
    i, j = np.unravel_index(int(np.argmax(score)), score.shape)
    return (int(i), int(j))


def positive_density(
    u: ScalarField, z0: Point, radii: Sequence[float], threshold: float
) -> DensityReport:
    """
    Node-count share of {u > threshold} in B_r(z0) for every radius.

    Raises:
        ParameterError: If z0 is not within one diagonal step of the free boundary.
    """
    if not radii:
        raise ParameterError("at least one radius is required")
    node = _node_near(u, z0)
    centre = u.grid.point_of(node)
    boundary = free_boundary(u, threshold)
    reach = math.sqrt(2.0) * u.grid.h + 1e-9 * u.grid.h
    if not np.any(boundary & (u.grid.distance_from(centre) <= reach)):
        raise ParameterError(f"point {z0} is not near the free boundary")
    ratios = []
    for r in radii:
        ball = _ball(u, centre, r)
        total = int(np.count_nonzero(ball))
        ratios.append(int(np.count_nonzero(u.values[ball] > threshold)) / total)
    return DensityReport(radii=tuple(radii), ratios=tuple(ratios), theta_min=min(ratios))


def sup_profile(u: ScalarField, x0: Point, radii: Sequence[float]) -> list[tuple[float, float]]:
    """(r, sup over B_r(x0) of |u|) per radius"""
    centre = u.grid.point_of(_node_near(u, x0))
    samples = []
    for r in radii:
        _check_radius(u, r, 2.0)
        samples.append((r, float(np.max(np.abs(u.values[_ball(u, centre, r)])))))
    return samples


def gradient_profile(
    u: ScalarField, x0: Point, radii: Sequence[float]
) -> list[tuple[float, float]]:
    """(r, sup over interior nodes of B_r(x0) of |grad_h u|) per radius"""
    centre = u.grid.point_of(_node_near(u, x0))
    g1, g2 = gradient_field(u)
    samples = []
    for r in radii:
        _check_radius(u, r, 2.0)
        ball = _ball(u, centre, r) & u.grid.interior
        if not np.any(ball):
            raise StencilError(f"no interior node within {r} of {x0}")
        samples.append((r, float(np.max(np.hypot(g1[ball], g2[ball])))))
    return samples


def oscillation_profile(u: ScalarField, x0: Point, radii: Sequence[float]):
    """(r, oscillation) per radius"""
    return [(r, oscillation(u, x0, r)) for r in radii]


def gradient_growth_profile(u: ScalarField, x0: Point, radii: Sequence[float]):
    """(r, gradient growth) per radius"""
    return [(r, gradient_growth(u, x0, r)) for r in radii]


def approximation_distance(u: ScalarField, h_field: ScalarField, radius: float) -> float:
    """
    max of sup |u - h| and sup |grad_h u - grad_h h| over B_radius around the grid centre.

    Values are compared on all defined nodes of the ball, gradients on its
    interior nodes.

    Raises:
        GridMismatchError: If the fields live on different grids.
    """
    if not u.grid.same_as(h_field.grid):
        raise GridMismatchError(
            f"cannot compare fields on grids {u.grid.key} and {h_field.grid.key}"
        )
    ball = _ball(u, u.grid.center, radius)
    if not np.any(ball):
        raise ParameterError(f"no node within radius {radius}")
    values = float(np.max(np.abs(u.values[ball] - h_field.values[ball])))
    u1, u2 = gradient_field(u)
    h1, h2 = gradient_field(h_field)
    inner = ball & u.grid.interior
    gradients = float(np.max(np.hypot(u1[inner] - h1[inner], u2[inner] - h2[inner]), initial=0.0))
    return max(values, gradients)
