"""Joint adaptive-modulation-and-coding plus cooperative truncated-ARQ design.

Closed-form spectral efficiency and packet loss analytics for relay,
conventional, fixed-rate and land-mobile-satellite schemes; a switching
threshold designer driven by a target-PER search; and a Monte Carlo
protocol simulator that independently checks every closed form.
"""

__version__ = "0.1.0"

from .analytics import (AllOutageError, LinkDesign, Metrics, RelayLinkModel,
                        eps_bar, eps_n, eta_amc_only, eta_conventional,
                        eta_coop, eta_coop_nr1, eta_fixed, eta_lmsc,
                        eta_rd_convention_gap, eta_slowfade, mode_avg_per,
                        mode_probability, outage_mode_avg_per, plr_amc_only,
                        plr_conventional, plr_coop, plr_coop_nr1, plr_fixed,
                        plr_lmsc, plr_slowfade)
from .channels import (Discrete, Exponential, Lutz, LutzParams,
                       RayleighLognormal, Rician, SnrDistribution,
                       lognormal_mgf, lutz_F, lutz_G)
from .designer import (DesignOutcome, DesignedLink, FixedDesignOutcome,
                       InfeasibleDesignError, design_amc_only,
                       design_slowfade, design_thresholds,
                       optimize_conventional, optimize_coop, optimize_fixed,
                       optimize_lmsc, solve_rd_target, solve_rd_target_lmsc,
                       target_per_upper_bound)
from .modes import (AmcMode, ModeSet, db_to_linear, linear_to_db,
                    per_instantaneous, validate_mode_set)
from .quadrature import QuadratureError, QuadResult, integrate
from .scenario import Scenario, SchemaError, load_mode_set, parse_scenario
from .simulator import (SimConfig, SimResult, run, run_conventional,
                        run_fixed, run_slowfade)
from .specfun import bessel_i0, bessel_i0e, marcum_q1
