"""swingsim: multi-machine power system transient stability simulation.

Classical (second-order) and two-axis (fourth-order) generator models over a
network reduced to the generator internal buses, with event-driven fault
staging and fixed-step RK4 integration.
"""

from .errors import DivergenceError, ScenarioError, SingularMatrixError
from .genmodel import (
    OMEGA_S_50HZ,
    OMEGA_S_60HZ,
    ClassicalGenParams,
    FourthOrderGenParams,
    NetworkSolution,
    classical_derivatives,
    classical_network_solution,
    dq_from_xy,
    fourth_order_derivatives,
    fourth_order_network_solution,
    xy_from_dq,
)
from .initstate import (
    OperatingPoint,
    init_classical,
    init_fourth_order,
    initialize_classical,
    initialize_fourth,
)
from .netred import (
    SourceImpedance,
    build_t1,
    build_t2,
    build_y_bus,
    constant_internal_admittance,
    expand_real_blocks,
    internal_bus_admittance,
    invert_y_r,
    kron_reduce,
    load_shunt,
)
from .scenario_io import (
    parse_scenario,
    parse_scenario_text,
    read_trajectory,
    serialize_scenario,
    write_trajectory,
)
from .sim import (
    MODEL_CLASSICAL,
    MODEL_FOURTH_ORDER,
    NetworkSpec,
    NetworkStage,
    Scenario,
    StabilityReport,
    Trajectory,
    rk4_step,
    simulate,
    stability_summary,
)

__version__ = "0.1.0"
