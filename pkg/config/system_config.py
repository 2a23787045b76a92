"""
Configuration settings for the electron/ion coupling simulator.

Physical inputs are given in laboratory units (eV, MHz, nm, u); every module
converts to atomic units internally.
"""

import os

from dotenv import load_dotenv

# Pick up EIQ_* overrides from a local .env file if present
load_dotenv()

# Ion trap and electron beam defaults
PHYSICS_CONFIG = {
    'ion_mass_u': 39.9626,  # 40Ca+
    'trap_frequency_mhz': 0.5,
    'two_pi_convention': False,  # False: the MHz figure is used directly as rad/s (x 1e6)
    'spot_width_fraction': 0.05,  # delta_r / R0
    'arrival_time_phase': 0.0,  # Omega * t_el, radians
    'literature_sigma_tot_range': (15.0, 36.0),  # electron-Ca+ total cross section, a0^2 pi
}

# Special function evaluation
SPECFUN_CONFIG = {
    'series_asymptotic_crossover': 40.0,  # |z| above which the asymptotic branch is used
    'series_rtol': 1e-17,
    'series_max_terms': 2000,
    'asymptotic_rtol': 1e-12,  # smallest-term acceptance for the asymptotic branch
    'oracle_guard_digits': 25,
    'oracle_max_abs_z': 500.0,
}

# Scattering sweeps and quadrature oracles
SCATTERING_CONFIG = {
    'unwrap_max_step': 1.5707963267948966,  # pi/2
    'quadrature_half_window': 12.0,  # in Gaussian widths
    'quadrature_epsabs': 1e-12,
    'quadrature_epsrel': 1e-11,
    'quadrature_limit': 400,
}

# Protocol simulation
METROLOGY_CONFIG = {
    'chunk_size': 50000,  # trials per RNG stream; fixed so results do not depend on worker count
    'restart_coherence_threshold': 1e-9,
    'finite_difference_step': 1e-4,
}

# Command line output
CLI_CONFIG = {
    'float_format': '%.12g',
    'line_terminator': '\n',
    'manifest_suffix': '.manifest.json',
    'constant_set_version': 'CODATA-2018',
}

# System-wide settings
SYSTEM_CONFIG = {
    'log_level': os.environ.get('EIQ_LOG_LEVEL', 'INFO'),  # DEBUG, INFO, WARNING, ERROR, CRITICAL
    'log_file_path': os.environ.get('EIQ_LOG_FILE', './logs/system.log'),
    'output_dir': os.environ.get('EIQ_OUTPUT_DIR', '.'),
}
