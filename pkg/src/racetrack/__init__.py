"""Continuous racetrack economy: equilibrium fields, replicator dynamics and
linear stability of the flat-earth state."""
from .analysis import (SpikeReport, SweepResult, count_spikes, max_spike_count,
                       measure_mode_growth, sweep)
from .dynamics import (IntegrationBlowupError, IntegratorConfig, SimulationResult,
                       initial_condition, rhs, simulate, simulate_seed, step)
from .equilibrium import (DegenerateDensityError, ModelParams, average_real_wage,
                          nominal_wage, price_index, real_wage, solve)
from .geometry import build_grid, build_kernel, circular_distance, integrate
from .stability import (closed_economy_limit, homogeneous_state, mode_coefficient,
                        no_black_hole, spectrum, stability_coefficient,
                        tail_instability_threshold)

__version__ = "0.1.0"
