#Version number. Updated if generating a new release.
#Otherwise, do not change.
__version__ = "0.1.0"

#Key imports.
from .aces_pipeline import ACESPipeline
from .circuits.circuit_generators import build_circuit, build_toy_circuit
from .noise_toolkit.noise_generators import build_noise_model
from .design_toolkit.experimental_design import ExperimentalDesign
from .design_toolkit.experimental_design import build_basic_design, load_reference_design
from .scoring_toolkit.merit_calcs import merit
from .simulation_toolkit.outcome_dataset import OutcomeDataset
from .exceptions import RankDeficiencyError, SizeGuardError
