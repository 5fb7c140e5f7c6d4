import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

import numpy as np

from profile_solver.profile import Profile

logger = logging.getLogger(__name__)

BAND = 1e-9
ANCHOR_T = 1.0 / 3.0
ANCHOR_WINDOW = 1e-12
ANCHOR_MARGIN = 1e-6
CONSTANT_SLOPE = 1e-6


class MarginStatus(Enum):
    SATISFIED = 'satisfied'
    BOUNDARY = 'boundary'
    VIOLATED = 'violated'


class Regime(Enum):
    BELOW = 'below'
    ANCHOR = 'anchor'
    ABOVE = 'above'


@dataclass(frozen=True, slots=True)
class PropertyMargin:
    name: str
    satisfied: bool
    margin: float
    location: int
    radius: float
    status: MarginStatus


@dataclass(frozen=True, slots=True)
class PropertyReport:
    regime: Regime
    margins: List[PropertyMargin]

    @property
    def all_satisfied(self) -> bool:
        return all(entry.satisfied for entry in self.margins)

    def __getitem__(self, name: str) -> PropertyMargin:
        for entry in self.margins:
            if entry.name == name:
                return entry
        raise KeyError(name)


@dataclass(frozen=True, slots=True)
class MonotonicityFlags:
    u_strictly_increasing: bool
    v_direction: str
    v_strictly_monotone: bool
    expected_v_direction: str


def regime_of(t: float) -> Regime:
    if abs(t - ANCHOR_T) <= ANCHOR_WINDOW:
        return Regime.ANCHOR
    return Regime.BELOW if t < ANCHOR_T else Regime.ABOVE


def _status(margin: float) -> MarginStatus:
    if abs(margin) <= BAND:
        return MarginStatus.BOUNDARY
    return MarginStatus.SATISFIED if margin > 0 else MarginStatus.VIOLATED


def margin_profiles(profile: Profile) -> Dict[str, np.ndarray]:
    """ Node-wise margin columns, in output order. Positive values satisfy the corresponding sign condition.
    Raises:
        PreconditionError: if the profile has no derivatives.
    """
    profile.require_derivatives()
    u, v, s = np.asarray(profile.u), np.asarray(profile.v), profile.s_plus
    du, dv = np.asarray(profile.du), np.asarray(profile.dv)
    return {
        'r': np.asarray(profile.r),
        'u': u,
        'minus_v': -v,
        'minus_u_plus_3v': -(u + 3.0 * v),
        'norm_gap': s * s / 3.0 - u * u - 3.0 * v * v,
        'v_gap': v + s / 6.0,
        'p': u * du,
        'q': -dv * (1.0 + 6.0 * v),
    }


def _strict(name: str, values: np.ndarray, r: np.ndarray) -> PropertyMargin:
    location = int(np.argmin(values))
    margin = float(values[location])
    return PropertyMargin(name, margin > BAND, margin, location + 1, float(r[location]), _status(margin))


def _non_strict(name: str, values: np.ndarray, r: np.ndarray, scale: float) -> PropertyMargin:
    location = int(np.argmin(values))
    margin = float(values[location])
    return PropertyMargin(name, margin >= -BAND * scale, margin, location + 1, float(r[location]), _status(margin))


def check_properties(profile: Profile) -> PropertyReport:
    """ Evaluate the sign conditions of a radial solution at interior nodes.
    Sign conditions: u > 0, v < 0, u + 3v < 0, u^2 + 3v^2 < s^2/3; v on the side of -s/6 fixed by t against 1/3
    (or v = -s/6 at t = 1/3); u' > 0, p = u u' >= 0 and q = -v'(1 + 6v) >= 0.
    Args:
        profile: solved profile with derivatives.
    Returns:
        PropertyReport with the worst-case margin of every condition and the interior node where it occurs.
    Raises:
        PreconditionError: if the profile has no derivatives.
    """
    columns = margin_profiles(profile)
    interior = profile.interior()
    r = columns['r'][interior]
    s = profile.s_plus
    regime = regime_of(profile.params.t)
    margins = [
        _strict('H1_u_positive', columns['u'][interior], r),
        _strict('H1_v_negative', columns['minus_v'][interior], r),
        _strict('H1_u_plus_3v_negative', columns['minus_u_plus_3v'][interior], r),
        _strict('H1_norm_bound', columns['norm_gap'][interior], r),
    ]
    gap = columns['v_gap'][interior]
    if regime is Regime.ANCHOR:
        location = int(np.argmax(np.abs(gap)))
        margin = float(ANCHOR_MARGIN * s - abs(gap[location]))
        margins.append(PropertyMargin('H4_v_anchored', margin >= 0, margin, location + 1, float(r[location]),
                                      MarginStatus.SATISFIED if margin >= 0 else MarginStatus.VIOLATED))
    elif regime is Regime.BELOW:
        margins.append(_strict('H2_v_above', gap, r))
    else:
        margins.append(_strict('H3_v_below', -gap, r))
    margins.append(_strict('H5_du_positive', np.asarray(profile.du)[interior], r))
    margins.append(_non_strict('H5_p', columns['p'][interior], r, s * s))
    margins.append(_non_strict('H5_q', columns['q'][interior], r, s))

    for entry in margins:
        if not entry.satisfied:
            logger.warning(f'Property {entry.name} fails with margin {entry.margin:.3e} at r={entry.radius:.4g} '
                           f'(t={profile.params.t}, k={profile.params.k})')
    return PropertyReport(regime=regime, margins=margins)


def strict_monotonicity(profile: Profile) -> MonotonicityFlags:
    """ Monotonicity of u and v across interior nodes; the direction of v is observed, and the expected direction
    (decreasing below t = 1/3, increasing above) is recorded next to it. """
    profile.require_derivatives()
    interior = profile.interior()
    du, dv = np.asarray(profile.du)[interior], np.asarray(profile.dv)[interior]
    u_increasing = bool(np.all(du > BAND) and np.all(np.diff(np.asarray(profile.u)) > 0))
    if np.max(np.abs(dv)) <= CONSTANT_SLOPE:
        direction = 'constant'
    elif np.all(dv > 0):
        direction = 'increasing'
    elif np.all(dv < 0):
        direction = 'decreasing'
    else:
        direction = 'non-monotone'
    expected = {Regime.BELOW: 'decreasing', Regime.ANCHOR: 'constant', Regime.ABOVE: 'increasing'}
    return MonotonicityFlags(
        u_strictly_increasing=u_increasing,
        v_direction=direction,
        v_strictly_monotone=direction in ('increasing', 'decreasing'),
        expected_v_direction=expected[regime_of(profile.params.t)],
    )
