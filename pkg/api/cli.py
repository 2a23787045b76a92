"""Command-line front end for the electron/ion coupling simulator.

Each sub-command runs one sweep or simulation and writes a CSV table plus a
JSON manifest next to it:

    phase-profile    phase shift and scattering probability against b
    flip-prob        qubit-flip probability against |alpha| for several energies
    backaction-map   electron back action eta over (sqrt(chi), b)
    fisher           Fisher information tables for the lossy protocol
    protocol-sim     Monte-Carlo run of the phase-estimation protocol

Exit codes: 0 on success, 1 on invalid physics input or I/O failure,
2 on flag parsing errors.
"""

import argparse
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

# Add project root to path for imports
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config.system_config import PHYSICS_CONFIG, SYSTEM_CONFIG
from physics.backaction import eta_map
from physics.errors import DomainError, SimulationError
from physics.scattering import ScatterInput, phase_profile
from physics.units import BeamConfig, TrapConfig, electron_velocity
from quantum.coupling.electron_qubit_coupling import flip_probability_curve
from quantum.metrology.fisher_information import (
    expected_fisher_lossy, fisher_nonideal, optimal_n, relative_gain,
)
from quantum.metrology.monte_carlo import monte_carlo_protocol
from quantum.metrology.phase_estimation import ProtocolConfig, analytic_p0
from api.run_output import RunManifest, resolve_output_path, write_run

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
# Flags that do not change the emitted table
NON_PHYSICS_FLAGS = ('handler', 'out', 'log_level', 'no_log_file', 'workers', 'command')


def configure_logging(level: str, log_file: Optional[str]) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LOG_FORMAT, handlers=handlers)


def _trap(args: argparse.Namespace) -> TrapConfig:
    return TrapConfig.from_mhz(args.trap_mhz, two_pi_convention=args.two_pi)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


def cmd_phase_profile(args: argparse.Namespace) -> pd.DataFrame:
    """Phase shift relative to b = 0 and P_scat on a uniform b grid."""
    _require(args.points >= 2, f"--points must be at least 2, got {args.points}")
    _require(args.b_max > 0.0, f"--b-max must be positive, got {args.b_max}")
    trap = _trap(args)
    beam = BeamConfig.focused_on(trap, args.energy_ev, args.spot_fraction)
    scatter_input = ScatterInput(beam=beam, trap=trap, alpha=(args.alpha, 0.0))
    b_over_r0 = np.linspace(0.0, args.b_max, args.points)
    rows = phase_profile(scatter_input, b_over_r0 * trap.r0, workers=args.workers)
    return pd.DataFrame({
        'b_over_R0': b_over_r0,
        'delta_phi_minus_phi0': [row[1] for row in rows],
        'p_scat': [row[2] for row in rows],
    })


def cmd_flip_prob(args: argparse.Namespace) -> pd.DataFrame:
    """Flip probability sin^2(g/2) for the electron aimed at the +alpha component."""
    _require(args.points >= 2, f"--points must be at least 2, got {args.points}")
    _require(args.alpha_max > 0.0, f"--alpha-max must be positive, got {args.alpha_max}")
    energies = sorted(args.energy_ev)
    alphas = np.linspace(0.0, args.alpha_max, args.points)
    curve = flip_probability_curve(energies, alphas, _trap(args), args.spot_fraction)
    frame = pd.DataFrame({'alpha': alphas})
    for j, energy in enumerate(energies):
        frame[f'p1_{energy:g}eV'] = curve[:, j]
    return frame


def cmd_backaction_map(args: argparse.Namespace) -> pd.DataFrame:
    """Long-format eta over sqrt(chi) and b / R0."""
    _require(args.grid >= 2, f"--grid must be at least 2, got {args.grid}")
    _require(0.0 < args.chi_max < 1.0, f"--chi-max must lie in (0, 1), got {args.chi_max}")
    sqrt_chi = np.linspace(0.0, math.sqrt(args.chi_max), args.grid)
    b_over_r0 = np.linspace(0.0, args.b_max, args.grid)
    chi = sqrt_chi ** 2
    values = eta_map(chi, b_over_r0, electron_velocity(args.energy_ev))
    return pd.DataFrame({
        'sqrt_chi': np.repeat(sqrt_chi, b_over_r0.size),
        'chi': np.repeat(chi, b_over_r0.size),
        'b_over_R0': np.tile(b_over_r0, sqrt_chi.size),
        'eta': values.reshape(-1),
    })


def cmd_fisher(args: argparse.Namespace) -> pd.DataFrame:
    """Either the n table at fixed eps or the optimum over an eps sweep."""
    if args.eps_sweep is not None:
        eps_min, eps_max, points = args.eps_sweep
        _require(int(points) == points and points >= 2, "--eps-sweep needs an integer point count >= 2")
        _require(0.0 < eps_min <= eps_max < 1.0, "--eps-sweep bounds must satisfy 0 < min <= max < 1")
        eps = np.linspace(eps_min, eps_max, int(points))
        return pd.DataFrame({
            'eps': eps,
            'n_star': [optimal_n(float(e)) for e in eps],
            'gain': [relative_gain(float(e)) for e in eps],
        })

    _require(args.n_max >= 1, f"--n-max must be at least 1, got {args.n_max}")
    n = np.arange(1, args.n_max + 1)
    return pd.DataFrame({
        'n': n,
        'SQL': n.astype(float),
        'HL': (n * n).astype(float),
        'expected_F': [expected_fisher_lossy(int(k), args.eps) for k in n],
        'F_nonideal': [fisher_nonideal(int(k), args.g, args.phi) for k in n],
    })


def cmd_protocol_sim(args: argparse.Namespace) -> pd.DataFrame:
    """Monte-Carlo estimate of p0 next to its analytic expectation, NaN where none exists."""
    cfg = ProtocolConfig(n_electrons=args.n, loss_prob=args.eps, coupling_g=args.g,
                         true_phase=args.phi, initial_beta=args.beta0,
                         initial_coherence=args.coherence, seed=args.seed,
                         phase_offset=args.phase_offset)
    result = monte_carlo_protocol(cfg, args.trials, workers=args.workers)
    if cfg.correction_is_exact:
        expected = analytic_p0(cfg)
    else:
        logger.info(f"No analytic p0 for phase offset {cfg.phase_offset} at g={cfg.coupling_g}")
        expected = math.nan
    return pd.DataFrame([{
        'n': cfg.n_electrons,
        'eps': cfg.loss_prob,
        'g': cfg.coupling_g,
        'phi': cfg.true_phase,
        'trials': result.trials,
        'empirical_p0': result.empirical_p0,
        'stderr': result.standard_error,
        'analytic_p0': expected,
        'restart_count': result.restart_count,
        'detected_trials': result.detected_trials,
        'detected_p0': result.detected_p0,
    }])


def _add_common(parser: argparse.ArgumentParser, default_out: str) -> None:
    parser.add_argument('--out', default=default_out, help='CSV path; relative paths go under EIQ_OUTPUT_DIR')
    parser.add_argument('--workers', type=int, default=1, help='parallel workers for sweeps')


def _add_trap(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--trap-mhz', type=float, default=PHYSICS_CONFIG['trap_frequency_mhz'])
    parser.add_argument('--two-pi', action='store_true',
                        help='multiply the trap frequency by 2 pi (default: MHz figure used as 1e6 rad/s)')
    parser.add_argument('--spot-fraction', type=float, default=PHYSICS_CONFIG['spot_width_fraction'],
                        help='electron spot width in units of R0')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='eiq', description='Electron/ion coupling simulations')
    parser.add_argument('--log-level', default=SYSTEM_CONFIG['log_level'])
    parser.add_argument('--no-log-file', action='store_true', help='log to stderr only')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('phase-profile', help='phase shift and P_scat against impact parameter')
    p.add_argument('--energy-ev', type=float, default=100.0)
    p.add_argument('--alpha', type=float, default=0.0,
                   help='cat displacement; recorded for provenance, the profile depends on b only')
    p.add_argument('--b-max', type=float, default=3.0, help='in units of R0')
    p.add_argument('--points', type=int, default=301)
    _add_trap(p)
    _add_common(p, 'phase_profile.csv')
    p.set_defaults(handler=cmd_phase_profile)

    p = sub.add_parser('flip-prob', help='qubit flip probability against |alpha|')
    p.add_argument('--energy-ev', type=float, nargs='+', default=[100.0, 1e3, 1e4, 1e5])
    p.add_argument('--alpha-max', type=float, default=10.0)
    p.add_argument('--points', type=int, default=101)
    _add_trap(p)
    _add_common(p, 'flip_prob.csv')
    p.set_defaults(handler=cmd_flip_prob)

    p = sub.add_parser('backaction-map', help='electron back action eta')
    p.add_argument('--energy-ev', type=float, default=100.0)
    p.add_argument('--chi-max', type=float, default=0.01)
    p.add_argument('--b-max', type=float, default=3.0, help='in units of R0')
    p.add_argument('--grid', type=int, default=61)
    _add_common(p, 'backaction_map.csv')
    p.set_defaults(handler=cmd_backaction_map)

    p = sub.add_parser('fisher', help='Fisher information tables')
    p.add_argument('--eps', type=float, default=0.01)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument('--n-max', type=int, default=300)
    mode.add_argument('--eps-sweep', type=float, nargs=3, metavar=('MIN', 'MAX', 'POINTS'))
    p.add_argument('--g', type=float, default=math.pi)
    p.add_argument('--phi', type=float, default=0.0)
    _add_common(p, 'fisher.csv')
    p.set_defaults(handler=cmd_fisher)

    p = sub.add_parser('protocol-sim', help='Monte-Carlo phase-estimation run')
    p.add_argument('--n', type=int, default=3)
    p.add_argument('--eps', type=float, default=0.0)
    p.add_argument('--g', type=float, default=math.pi)
    p.add_argument('--phi', type=float, default=0.5)
    p.add_argument('--beta0', type=float, default=0.0)
    p.add_argument('--coherence', type=float, default=1.0)
    p.add_argument('--phase-offset', type=float, default=0.0, help='error of the phase prior used in the correction')
    p.add_argument('--trials', type=int, default=100000)
    p.add_argument('--seed', type=int, default=0)
    _add_common(p, 'protocol_sim.csv')
    p.set_defaults(handler=cmd_protocol_sim)
    return parser


def run_command(args: argparse.Namespace) -> RunManifest:
    """Run the selected sub-command and write its outputs."""
    handler: Callable[[argparse.Namespace], pd.DataFrame] = args.handler
    parameters: Dict[str, Any] = {k: v for k, v in sorted(vars(args).items()) if k not in NON_PHYSICS_FLAGS}
    logger.info(f"Running {args.command} with {parameters}")
    frame = handler(args)
    manifest = RunManifest(command=args.command, parameters=parameters, seed=getattr(args, 'seed', None))
    return write_run(frame, resolve_output_path(args.out), manifest)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, None if args.no_log_file else SYSTEM_CONFIG['log_file_path'])
    try:
        run_command(args)
    except (SimulationError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    except OSError as e:
        logger.error(f"{args.command} could not write output: {e}")
        return 1
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
