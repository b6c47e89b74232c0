"""Grid-world building domain: scenarios, compilation, env profiles, rendering."""

from .compile import CompiledBuilding, StateBlowup, compile_building
from .profiles import EnvProfile, env_step, make_env
from .scenario import BuildingScenario, GeometryError, SchemaError, load_scenario, load_scenario_file

__all__ = [
    "BuildingScenario", "CompiledBuilding", "EnvProfile", "GeometryError", "SchemaError", "StateBlowup",
    "compile_building", "env_step", "load_scenario", "load_scenario_file", "make_env",
]
