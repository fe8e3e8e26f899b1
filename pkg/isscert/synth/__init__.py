from .config import SynthConfig  # NOQA
from .biconvex import (synth_gas, synth_iss_actuator_biconvex,  # NOQA
                       synth_iss_process_biconvex, freeze_exogenous)
from .convex import (synth_iss_actuator_convex, synth_iss_process_convex,  # NOQA
                     synth_modelbased_convex)
from .comparison import extract_comparison_functions  # NOQA
from .sontag import sontag_redesign  # NOQA
