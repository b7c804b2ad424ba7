import math
from typing import Optional

import numpy as np
import pytest
import torch

from waypointnav.common.constants import (
    DISCRETE_DISTANCES,
    DISCRETE_OFFSETS,
    EXPRESSIVITY_PRESETS,
    N_SECTORS,
    OFFSET_BOUND,
    STOP,
)
from waypointnav.common.exceptions import NotAMotionError, NumericError
from waypointnav.modules.actionspace.heads import (
    DISTANCE,
    N_PANO,
    OFFSET,
    ActionBatch,
    ExpressivityConfig,
    HeadOutputs,
    WaypointAction,
    WaypointDistribution,
    compose_waypoint,
    decomposed_entropy,
    joint_logprob,
    map_distance_head,
    map_offset_head,
    mode_action,
    sample_action,
)
from waypointnav.modules.world.grid import wrap_signed

PRESETS = list(EXPRESSIVITY_PRESETS)


def random_heads(config: ExpressivityConfig, seed: int = 0, batch: int = 1, spread: Optional[float] = None):
    generator = torch.Generator().manual_seed(seed)

    def raw(component):
        width = config.width(component)
        if width == 0:
            return None
        values = torch.randn(batch, N_SECTORS, width, generator=generator, dtype=torch.float64)
        if spread is not None and config.mode_of(component) == "continuous":
            values[..., 1] = spread
        return values

    pano_logits = torch.randn(batch, N_PANO, generator=generator, dtype=torch.float64)
    offset_raw = raw(OFFSET)
    return HeadOutputs(pano_logits, offset_raw, raw(DISTANCE), config)


def constant_heads(config: ExpressivityConfig, pano_logits: torch.Tensor, value: float = 0.0) -> HeadOutputs:
    def raw(component):
        width = config.width(component)
        return None if width == 0 else torch.full((N_SECTORS, width), value, dtype=torch.float64)

    return HeadOutputs(pano_logits.to(torch.float64), raw(OFFSET), raw(DISTANCE), config)


def test_presets_cover_the_six_configurations() -> None:
    pairs = {(c.distance_mode, c.offset_mode) for c in map(ExpressivityConfig.from_preset, PRESETS)}
    assert len(pairs) == 6
    assert ("fixed", "fixed") in pairs
    assert ExpressivityConfig.from_preset("dfixed").label == "D/fixed"
    for preset in PRESETS:
        assert ExpressivityConfig.from_preset(preset).preset == preset


def test_config_rejects_unknown_modes() -> None:
    with pytest.raises(ValueError, match="Unknown expressivity mode"):
        ExpressivityConfig("continuous", "sometimes")
    with pytest.raises(ValueError, match="Unknown expressivity preset"):
        ExpressivityConfig.from_preset("xx")


def test_widths_follow_modes() -> None:
    config = ExpressivityConfig.from_preset("dc")
    assert config.width(DISTANCE) == len(DISCRETE_DISTANCES)
    assert config.width(OFFSET) == 2
    assert ExpressivityConfig.from_preset("fixedfixed").width(OFFSET) == 0


def test_head_outputs_validate_shapes() -> None:
    config = ExpressivityConfig.from_preset("dd")
    with pytest.raises(ValueError, match="pano logits"):
        HeadOutputs(torch.zeros(12), torch.zeros(12, 7), torch.zeros(12, 6), config)
    with pytest.raises(ValueError, match="offset head"):
        HeadOutputs(torch.zeros(13), torch.zeros(12, 2), torch.zeros(12, 6), config)
    with pytest.raises(ValueError, match="distance head"):
        HeadOutputs(torch.zeros(13), torch.zeros(12, 7), None, config)


def test_waypoint_action_validation() -> None:
    with pytest.raises(ValueError, match="carry no offset"):
        WaypointAction(STOP, 0.0, 1.0)
    with pytest.raises(ValueError, match="pano must be a sector"):
        WaypointAction(13, 0.0, 1.0)
    with pytest.raises(ValueError, match="need both"):
        WaypointAction(2, 0.0)
    with pytest.raises(ValueError, match="outside"):
        WaypointAction(2, math.radians(20.0), 1.0)
    with pytest.raises(ValueError, match="outside"):
        WaypointAction(2, 0.0, 4.5)
    assert WaypointAction(STOP).is_stop


def test_offset_head_mapping() -> None:
    d = map_offset_head(torch.tensor(0.0), torch.tensor(0.0))
    assert float(d.loc) == 0.0
    assert float(d.scale) == pytest.approx(OFFSET_BOUND / 2 + 1e-3)
    saturated = map_offset_head(torch.tensor(1e3), torch.tensor(-1e3))
    assert float(saturated.loc) == pytest.approx(OFFSET_BOUND)
    assert float(saturated.loc) <= OFFSET_BOUND
    assert float(saturated.scale) == pytest.approx(1e-3)
    assert float(saturated.low) == -OFFSET_BOUND and float(saturated.high) == OFFSET_BOUND


def test_distance_head_mapping() -> None:
    d = map_distance_head(torch.tensor(0.0), torch.tensor(0.0))
    assert float(d.loc) == pytest.approx(2.125)
    assert float(d.scale) == pytest.approx(1.875 / 2 + 1e-3)
    assert (float(d.low), float(d.high)) == (0.25, 4.0)


@pytest.mark.parametrize("mapper", [map_offset_head, map_distance_head])
def test_head_mapping_rejects_non_finite(mapper) -> None:
    with pytest.raises(NumericError):
        mapper(torch.tensor(float("nan")), torch.tensor(0.0))
    with pytest.raises(NumericError):
        mapper(torch.tensor(0.0), torch.tensor(float("inf")))


@pytest.mark.parametrize(
    "pano, offset_deg, distance, expected_deg",
    [(3, 10.0, 1.0, 100.0), (0, 0.0, 0.25, 0.0), (11, 15.0, 2.0, 345.0), (0, -10.0, 1.0, 350.0)],
)
def test_compose_waypoint(pano, offset_deg, distance, expected_deg) -> None:
    r, theta = compose_waypoint(WaypointAction(pano, math.radians(offset_deg), distance))
    assert r == distance
    assert theta == pytest.approx(math.radians(expected_deg))
    assert 0.0 <= theta < 2 * math.pi


def test_compose_waypoint_rejects_stop() -> None:
    with pytest.raises(NotAMotionError):
        compose_waypoint(WaypointAction(STOP))


def test_every_bearing_is_reachable() -> None:
    rng = np.random.default_rng(0)
    for bearing in rng.uniform(0.0, 2 * math.pi, size=500):
        pano = int(round(bearing / math.radians(30.0))) % N_SECTORS
        offset = wrap_signed(bearing - pano * math.radians(30.0))
        _, theta = compose_waypoint(WaypointAction(pano, offset, 1.0))
        assert abs(wrap_signed(theta - bearing)) < 1e-9


def test_uniform_discrete_joint_logprob() -> None:
    heads = constant_heads(ExpressivityConfig.from_preset("dd"), torch.zeros(N_PANO))
    action = WaypointAction(3, DISCRETE_OFFSETS[2], DISCRETE_DISTANCES[2])
    assert joint_logprob(heads, action) == pytest.approx(-math.log(546))


def test_stop_joint_logprob_is_the_pano_factor() -> None:
    logits = torch.zeros(N_PANO)
    logits[STOP] = math.log(12.0)
    heads = constant_heads(ExpressivityConfig.from_preset("cc"), logits)
    assert joint_logprob(heads, WaypointAction(STOP)) == pytest.approx(math.log(0.5))


def test_fixed_heads_contribute_nothing() -> None:
    logits = torch.arange(N_PANO, dtype=torch.float64)
    heads = constant_heads(ExpressivityConfig.from_preset("fixedfixed"), logits)
    expected = float(torch.log_softmax(logits, dim=-1)[4])
    assert joint_logprob(heads, WaypointAction(4, 0.0, 0.25)) == pytest.approx(expected)
    assert joint_logprob(heads, WaypointAction(4, 0.0, 0.75)) == -math.inf


def test_off_support_discrete_values_are_minus_infinity() -> None:
    heads = constant_heads(ExpressivityConfig.from_preset("dd"), torch.zeros(N_PANO))
    assert joint_logprob(heads, WaypointAction(1, math.radians(2.0), 1.25)) == -math.inf
    assert joint_logprob(heads, WaypointAction(1, 0.0, 1.0)) == -math.inf


def _quadrature(component, mode: str, n_nodes: int = 96):
    if mode == "fixed":
        return np.array([component.fixed]), np.array([1.0])
    if mode == "discrete":
        return np.array(component.atoms), np.ones(len(component.atoms))
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    low, high = component.bounds
    half = (high - low) / 2
    return low + half * (nodes + 1), half * weights


@pytest.mark.parametrize("preset", PRESETS)
def test_joint_probability_normalises(preset) -> None:
    config = ExpressivityConfig.from_preset(preset)
    heads = random_heads(config, seed=11, spread=0.5)
    offsets, offset_weights = _quadrature(OFFSET, config.offset_mode)
    distances, distance_weights = _quadrature(DISTANCE, config.distance_mode)
    pano, offset, distance = np.meshgrid(np.arange(N_SECTORS), offsets, distances, indexing="ij")
    weights = np.broadcast_to(offset_weights[None, :, None] * distance_weights[None, None, :], pano.shape)
    rows = pano.size

    def expand(t):
        return None if t is None else t.expand(rows, *t.shape[1:])

    distribution = WaypointDistribution(
        HeadOutputs(expand(heads.pano_logits), expand(heads.offset_raw), expand(heads.distance_raw), config)
    )
    actions = ActionBatch(
        torch.tensor(pano.ravel(), dtype=torch.long),
        torch.tensor(offset.ravel(), dtype=torch.float64),
        torch.tensor(distance.ravel(), dtype=torch.float64),
        torch.full((rows,), 0.5, dtype=torch.float64),
    )
    motion_mass = float((torch.exp(distribution.log_prob(actions)) * torch.tensor(weights.ravel())).sum())
    stop_mass = float(torch.softmax(heads.pano_logits[0], dim=-1)[STOP])
    assert motion_mass + stop_mass == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("preset", PRESETS)
def test_sampled_actions_are_valid_and_supported(preset) -> None:
    config = ExpressivityConfig.from_preset(preset)
    distribution = WaypointDistribution(random_heads(config, seed=3, batch=256))
    batch = distribution.sample(torch.Generator().manual_seed(0))
    assert torch.isfinite(distribution.log_prob(batch)).all()
    for action in batch.to_actions():
        if action.is_stop:
            continue
        if config.offset_mode == "discrete":
            assert min(abs(action.offset - o) for o in DISCRETE_OFFSETS) < 1e-12
        if config.offset_mode == "fixed":
            assert action.offset == 0.0
        if config.distance_mode == "discrete":
            assert action.distance in DISCRETE_DISTANCES
        if config.distance_mode == "fixed":
            assert action.distance == 0.25


def test_sampling_is_reproducible() -> None:
    heads = random_heads(ExpressivityConfig.from_preset("cc"), seed=5)
    first = sample_action(heads, torch.Generator().manual_seed(9))
    assert sample_action(heads, torch.Generator().manual_seed(9)) == first


def test_uniform_entropies() -> None:
    s_pano, s_offset, s_dist = decomposed_entropy(
        constant_heads(ExpressivityConfig.from_preset("dd"), torch.zeros(N_PANO))
    )
    assert s_pano == pytest.approx(math.log(13))
    assert s_offset == pytest.approx(12 / 13 * math.log(7))
    assert s_dist == pytest.approx(12 / 13 * math.log(6))


def test_fixed_components_have_zero_entropy() -> None:
    _, s_offset, s_dist = decomposed_entropy(constant_heads(ExpressivityConfig.from_preset("fixedc"), torch.zeros(13)))
    assert s_dist == 0.0
    assert s_offset != 0.0


def test_component_entropy_is_weighted_by_sector_probabilities() -> None:
    config = ExpressivityConfig.from_preset("dd")
    offset_raw = torch.zeros(N_SECTORS, 7, dtype=torch.float64)
    offset_raw[1:, 0] = 50.0
    logits = torch.zeros(N_PANO, dtype=torch.float64)
    logits[0] = 2.0
    logits[STOP] = 3.0
    heads = HeadOutputs(logits, offset_raw, torch.zeros(N_SECTORS, 6, dtype=torch.float64), config)
    _, s_offset, _ = decomposed_entropy(heads)
    sector_probs = torch.softmax(logits, dim=-1)[:N_SECTORS]
    assert s_offset == pytest.approx(float(sector_probs[0]) * math.log(7), rel=1e-6)


def test_stop_mass_carries_no_component_entropy() -> None:
    logits = torch.zeros(N_PANO, dtype=torch.float64)
    logits[STOP] = math.log(12.0)
    _, s_offset, s_dist = decomposed_entropy(constant_heads(ExpressivityConfig.from_preset("dfixed"), logits))
    assert s_offset == pytest.approx(0.5 * math.log(7))
    assert s_dist == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_decomposed_entropies_sum_to_the_joint_entropy(seed) -> None:
    heads = random_heads(ExpressivityConfig.from_preset("dfixed"), seed=seed)
    heads.pano_logits[0, STOP] = 1.5
    pano = torch.softmax(heads.pano_logits[0], dim=-1)
    offsets = torch.softmax(heads.offset_raw[0], dim=-1)
    joint = torch.cat([pano[STOP, None], (pano[:N_SECTORS, None] * offsets).flatten()])
    joint_entropy = float(-(joint * torch.log(joint)).sum())
    assert joint.sum() == pytest.approx(1.0)
    assert sum(decomposed_entropy(heads)) == pytest.approx(joint_entropy, rel=1e-9)


def test_mode_prefers_stop_when_it_dominates() -> None:
    logits = torch.zeros(N_PANO)
    logits[STOP] = math.log(108.0)
    assert mode_action(constant_heads(ExpressivityConfig.from_preset("cc"), logits)).is_stop


def test_mode_of_zero_continuous_heads() -> None:
    logits = torch.zeros(N_PANO)
    logits[5] = 1.0
    action = mode_action(constant_heads(ExpressivityConfig.from_preset("cc"), logits))
    assert action.pano == 5
    assert action.offset == pytest.approx(0.0)
    assert action.distance == pytest.approx(2.125)


def test_mode_ties_go_to_the_lowest_sector() -> None:
    logits = torch.zeros(N_PANO)
    logits[2] = logits[5] = 3.0
    action = mode_action(constant_heads(ExpressivityConfig.from_preset("dd"), logits))
    assert action.pano == 2
    assert action.offset == DISCRETE_OFFSETS[0]
    assert action.distance == DISCRETE_DISTANCES[0]


def test_offset_magnitude_is_differentiable_for_continuous_offsets() -> None:
    config = ExpressivityConfig.from_preset("cc")
    heads = random_heads(config, seed=2, batch=32)
    heads.offset_raw.requires_grad_(True)
    distribution = WaypointDistribution(heads)
    batch = distribution.sample(torch.Generator().manual_seed(1))
    magnitude = distribution.offset_magnitude(batch)
    assert torch.allclose(magnitude, torch.where(batch.is_stop, 0.0, batch.offset.abs()).to(magnitude.dtype))
    magnitude.sum().backward()
    assert heads.offset_raw.grad is not None
