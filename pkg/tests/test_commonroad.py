import math
from dataclasses import replace

import pytest

from src.commonroad.builder import (
    benchmark_id,
    build_planning_problem,
    build_scenario,
    convert_state,
    find_ego_vehicle,
    map_obstacle_type,
)
from src.commonroad.model import CrState, Interval, ObstacleType, Rectangle
from src.commonroad.resampling import integer_ratio, resample_trajectory
from src.errors import EmptyTrajectory, NoVehicleEntity, OverrideNotFound, TrajectoryTooShort
from src.openscenario.model import BoundingBox, EntityConfig
from src.openscenario.parser import parse_openscenario
from src.settings import ConverterSettings, GoalSettings
from src.simulation.engine import run
from src.simulation.state import EntityState

from conftest import SCENARIOS


def _entity(name, category="VEHICLE.CAR"):
    return EntityConfig(name, category, BoundingBox(length=4.5, width=1.8))


# ---------------------------------------------------------------- mapping

@pytest.mark.parametrize("category, expected", [
    ("VEHICLE.CAR", ObstacleType.CAR),
    ("VEHICLE.VAN", ObstacleType.CAR),
    ("vehicle.truck", ObstacleType.TRUCK),
    ("VEHICLE.SEMITRAILER", ObstacleType.TRUCK),
    ("VEHICLE.MOTORBIKE", ObstacleType.MOTORCYCLE),
    ("VEHICLE.TRAM", ObstacleType.TRAIN),
    ("PEDESTRIAN", ObstacleType.PEDESTRIAN),
    ("PEDESTRIAN.WHEELCHAIR", ObstacleType.PEDESTRIAN),
    ("MISC_OBJECT.POLE", ObstacleType.ROAD_BOUNDARY),
    ("MISC_OBJECT.STREETLAMP", ObstacleType.PILLAR),
    ("MISC_OBJECT.TREE", ObstacleType.UNKNOWN),
])
def test_obstacle_types(category, expected):
    assert map_obstacle_type(category) is expected


def test_convert_state_normalizes_heading():
    state = EntityState(frame=7, x=1.0, y=2.0, h=1.5 * math.pi, speed=3.0, wheel_angle=0.1)
    converted = convert_state(state)
    assert converted.time_step == 7
    assert converted.position == (1.0, 2.0)
    assert converted.orientation == pytest.approx(-0.5 * math.pi)
    assert (converted.velocity, converted.steering_angle) == (3.0, 0.1)
    assert convert_state(state, time_step=2).time_step == 2


# ---------------------------------------------------------------- resampling

@pytest.mark.parametrize("dt_in, dt_out, expected", [
    (0.01, 0.1, 10),
    (0.1, 0.1, 1),
    (0.02, 0.1, 5),
    (0.04, 0.1, 0),
    (0.1, 0.05, 0),
])
def test_integer_ratio(dt_in, dt_out, expected):
    assert integer_ratio(dt_in, dt_out) == expected


def test_integer_ratio_picks_states():
    states = [EntityState(k, 0.1 * k, 0.0, 0.0, 10.0) for k in range(101)]
    resampled = resample_trajectory(states, 0.01, 0.1)
    assert [s.frame for s in resampled] == list(range(11))
    assert [s.x for s in resampled] == [states[10 * k].x for k in range(11)]


def test_fractional_ratio_interpolates():
    states = [EntityState(k, 0.4 * k, 1.0, 0.0, 10.0) for k in range(26)]
    resampled = resample_trajectory(states, 0.04, 0.1)
    assert len(resampled) == 11
    for k, state in enumerate(resampled):
        assert state.frame == k
        assert state.x == pytest.approx(float(k))
        assert state.y == pytest.approx(1.0)


def test_interpolated_heading_takes_the_short_way():
    states = [EntityState(0, 0.0, 0.0, math.pi - 0.1), EntityState(1, 0.0, 0.0, -math.pi + 0.1)]
    resampled = resample_trajectory(states, 0.15, 0.1)
    assert len(resampled) == 2
    assert resampled[1].h == pytest.approx(-math.pi + 0.1 / 3)


def test_resampling_needs_states():
    with pytest.raises(EmptyTrajectory):
        resample_trajectory([], 0.01, 0.1)


# ---------------------------------------------------------------- ego and goal

def test_ego_by_conventional_name():
    entities = [_entity("Lead"), _entity("Hero"), _entity("Walker", "PEDESTRIAN")]
    assert find_ego_vehicle(entities).name == "Hero"


def test_ego_defaults_to_first_vehicle():
    entities = [_entity("Walker", "PEDESTRIAN"), _entity("Car1"), _entity("Car2")]
    assert find_ego_vehicle(entities).name == "Car1"


def test_ego_override():
    entities = [_entity("Ego"), _entity("Car2")]
    assert find_ego_vehicle(entities, "Car2").name == "Car2"
    with pytest.raises(OverrideNotFound):
        find_ego_vehicle(entities, "Nobody")


def test_ego_needs_a_vehicle():
    with pytest.raises(NoVehicleEntity):
        find_ego_vehicle([_entity("Walker", "PEDESTRIAN"), _entity("Pole", "MISC_OBJECT.POLE")])


def test_planning_problem_goal():
    states = [CrState(k, (2.0 * k, -1.75), 0.1, 20.0) for k in range(51)]
    problem = build_planning_problem(states, Rectangle(5.0, 2.0), problem_id=9)

    assert problem.problem_id == 9
    assert problem.initial_state == states[0]
    goal = problem.goal
    assert (goal.position.length, goal.position.width) == (15.0, 4.0)
    assert goal.position.center == (100.0, -1.75)
    assert goal.position.orientation == 0.1
    assert goal.time_step == Interval(40, 50)
    assert goal.orientation.start == pytest.approx(-0.25)
    assert goal.orientation.end == pytest.approx(0.45)
    assert goal.velocity is None


def test_planning_problem_velocity_margin():
    states = [CrState(k, (float(k), 0.0), 0.0, 1.0) for k in range(3)]
    goal = build_planning_problem(states, Rectangle(5.0, 2.0), GoalSettings(velocity_margin=2.0)).goal
    assert goal.velocity == Interval(0.0, 3.0)


def test_planning_problem_needs_two_states():
    with pytest.raises(TrajectoryTooShort):
        build_planning_problem([CrState(0, (0.0, 0.0), 0.0)], Rectangle(5.0, 2.0))


@pytest.mark.parametrize("stem, country, expected", [
    ("pedestrian_collision", "ZAM", "ZAM_pedestriancollision-1_1_T-1"),
    ("Simple Overtake!", "DEU", "DEU_SimpleOvertake-1_1_T-1"),
    ("___", "ZAM", "ZAM_Scenario-1_1_T-1"),
])
def test_benchmark_id(stem, country, expected):
    assert benchmark_id(stem, country) == expected


# ---------------------------------------------------------------- scenario

def test_build_scenario_ids_and_obstacles(handmade, straight_map):
    scenario = build_scenario(handmade.trace, straight_map.network, handmade.document, stem="handmade")

    assert scenario.metadata.benchmark_id == "ZAM_handmade-1_1_T-1"
    assert (scenario.metadata.author, scenario.metadata.date) == ("tests", "2024-05-01")
    assert scenario.metadata.dt == 0.1
    assert [l.lanelet_id for l in scenario.lanelet_network] == [1, 2, 3]

    (pole,) = scenario.static_obstacles
    assert (pole.obstacle_id, pole.obstacle_type, pole.name) == (4, ObstacleType.ROAD_BOUNDARY, "Pole")
    assert pole.initial_state.position == (30.0, -8.0)

    (truck,) = scenario.dynamic_obstacles
    assert (truck.obstacle_id, truck.obstacle_type) == (5, ObstacleType.TRUCK)
    assert (truck.shape.length, truck.shape.width) == (12.0, 2.5)
    assert truck.initial_state.time_step == 0
    assert [s.time_step for s in truck.trajectory] == [1, 2]
    assert truck.trajectory[-1].position == pytest.approx((43.0, -5.25))

    problem = scenario.planning_problem
    assert problem.problem_id == 6
    assert problem.initial_state.position == pytest.approx((5.0, -1.75))
    assert problem.goal.position.center == pytest.approx((7.0, -1.75))
    assert problem.goal.time_step == Interval(1, 2)
    assert len(scenario.ego_trajectory) == 3
    assert scenario.max_time_step == 2


def test_moving_misc_object_is_dynamic(handmade, straight_map):
    states = dict(handmade.trace.states)
    states["Pole"] = [replace(s, x=30.0 + 0.01 * s.frame) for s in states["Pole"]]
    trace = replace(handmade.trace, states=states)
    scenario = build_scenario(trace, straight_map.network, handmade.document)
    assert scenario.static_obstacles == []
    assert [o.obstacle_type for o in scenario.dynamic_obstacles] == [ObstacleType.ROAD_BOUNDARY, ObstacleType.TRUCK]


def test_settings_override_ego_and_metadata(handmade, straight_map):
    settings = ConverterSettings(ego_name="Truck", author="someone", date="2025-01-02", country_code="DEU")
    scenario = build_scenario(handmade.trace, straight_map.network, handmade.document, settings, stem="x")
    assert scenario.metadata.benchmark_id == "DEU_x-1_1_T-1"
    assert (scenario.metadata.author, scenario.metadata.date) == ("someone", "2025-01-02")
    assert [o.name for o in scenario.dynamic_obstacles] == ["Ego"]
    assert scenario.planning_problem.initial_state.position == pytest.approx((40.0, -5.25))


def test_overtake_scenario(straight_map):
    document = parse_openscenario((SCENARIOS / "SimpleOvertake.xosc").read_bytes(), source="SimpleOvertake.xosc")
    trace = run(document, straight_map)
    scenario = build_scenario(trace, straight_map.network, document, stem="SimpleOvertake")

    (b,) = scenario.dynamic_obstacles
    assert (b.obstacle_id, b.name) == (4, "B")
    assert scenario.planning_problem.problem_id == 5
    assert scenario.planning_problem.initial_state.position == pytest.approx((10.0, -5.25))
    assert scenario.planning_problem.initial_state.velocity == pytest.approx(25.0)
    assert len(scenario.ego_trajectory) == trace.final_frame // 10 + 1
    assert b.final_time_step == trace.final_frame // 10
