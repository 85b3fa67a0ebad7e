"""Box dimension of phase curves of generalized Bessel equations."""

from .curve_zoo import circle, clothoid, fresnel, hopf_trajectory, power_spiral, segment, synthetic_wavy
from .dimension import DimensionEstimate, box_count, estimate_dimension, minkowski_area, verify_dimension_law
from .errors import SpiralDimError
from .ode_oracle import OdeState, integrate, integrate_batch
from .phase_curve import CurveTrace, excise, mirror, sample_trajectory
from .special_functions import BesselParams, bessel_j, bessel_y, gen_bessel
from .waviness import WavinessReport, check_waviness, classify, critical_point_equations, detect_sequence

__version__ = "0.1.0"
