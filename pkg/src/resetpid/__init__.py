"""Reset PID control: describing-function loop shaping, hybrid simulation,
stability certificates and closed-loop identification."""

from .describing import cutoff_ratio_beta, df, df_curve, theta_d
from .lti import FrequencyCurve, RationalTF, StateSpaceModel, freq_response, matrix_exp, second_order_plant, series, tf_to_ss
from .loopshape import DesignSpec, OpenLoop, open_loop_df, phase_margin, pid_comparator, reset_pid_a, reset_pid_b
from .reset import ResetController, ResetElement, apply_reset, clegg, gfore, reset_taming_pole
from .sim import SimConfig, SimTrace, discretize, first_harmonic, simulate_closed_loop
from .stability import Infeasible, StabilityCertificate, StabilityProblem, Unknown, check_stability, closed_loop_matrix, verify_certificate

__version__ = "0.1.0"
