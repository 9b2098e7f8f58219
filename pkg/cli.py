#!/usr/bin/env python3
"""
Unified Command-Line Interface for the square-root diffusion laboratory

Usage:
    python cli.py simulate [options]      # Exact or Euler path ensembles
    python cli.py density [options]       # Transition density tables
    python cli.py moments [options]       # Closed-form moments vs Monte Carlo
    python cli.py bounds [options]        # Certify growth and convergence-rate bounds
    python cli.py estimate [options]      # sigma^2 and drift MLE from trajectories
    python cli.py instability [options]   # Occupancy curves of bounded sets
    python cli.py limit [options]         # Weak-limit KS check for the smoothed Bessel process

Exit codes: 0 success, 1 runtime error, 2 configuration or usage error.
"""

import argparse
import json
import math
import sys
import traceback

import numpy as np
import pandas as pd
from scipy import integrate

from bounds import (
    EstimateWithError, bessel_growth_bounds, bn_tn_schedule, certify, discretization_budget,
    approx_bessel_bound, growth_bound_gronwall, growth_bound_moment, growth_lower_bound_moment,
    gronwall_is_tighter, linearity_spread, mc_distance_curve, mc_running_sup_second_moment,
    mc_running_sup_square, mc_sup_l1_distance, rate_bound_l1, rate_bound_l2_distributional,
    rate_bound_l2_pathwise, schedule_bound,
)
from config import (
    COMMANDS, DEFAULT_CONFIG, DEFAULT_SEED, OUTPUT_DIR, build_experiment_config, get_path, load_config_file,
)
from errors import ConfigError
from estimate import DiscreteTrajectory, ergodic_time_average_inverse, estimate_ensemble, estimation_report
from instability import (
    cir_occupancy_limit, drift_limit_constants, ks_critical_value, ks_statistic,
    occupancy_average, weak_limit_reference_cdf, weak_limit_samples,
)
from logger import get_cli_logger, set_level
from model import (
    BesselSqParams, CirParams, bessel_sq_moment_p, cir_stationary_density, integrated_mean,
    is_bessel, moment, transition_density,
)
from report_generator import ReportGenerator
from simulate import PathEnsemble, TimeGrid, simulate, simulate_coupled, simulate_exact, simulate_smoothed_bessel

logger = get_cli_logger()

MACHINE_FLOAT = '%.17g'
MOMENT_ROWS = 8

KNOB_HELP = {
    'x0': 'Initial value',
    'y0': 'Initial value of the squared Bessel process',
    'a': 'Drift level a',
    'b': 'Mean-reversion rate b (0 selects the squared Bessel process)',
    'b0': 'Rate of the limit model',
    'sigma': 'Diffusion scale sigma',
    'T': 'Horizon',
    'n_steps': 'Number of time steps',
    'n_paths': 'Number of Monte Carlo paths',
    'method': 'Path scheme: exact or euler',
    'record_stride': 'Keep every k-th grid point',
    'times': 'Comma-separated evaluation times',
    'bessel_times': 'Comma-separated evaluation times for the squared Bessel and smoothed runs',
    'x_max': 'Upper end of the density grid',
    'n_points': 'Density grid points',
    'bn_list': 'Comma-separated rates b_n of the approximating models',
    'z': 'Confidence multiplier on the standard error',
    'coarsen': 'Step multiplier of the coarse run used for the discretisation budget',
    'n_report': 'Approximate number of report times',
    'growth_a': 'Drift level for the growth-bound runs',
    'growth_b': 'Rate for the CIR growth-bound run',
    'growth_T': 'Horizon for the growth-bound runs',
    'input': "Trajectory CSV with header 't,value' (empty: simulate)",
    'step': 'Time step',
    'sigma_source': 'sigma for the MLE: known or qv',
    'N': 'Level of the bounded set |x| < N',
    'max_step': 'Largest step of the graded grid',
    'initial_step': 'First step of the graded grid',
    'eps': 'Smoothing parameter epsilon (nonzero)',
    'c': 'Drift constant of the smoothed Bessel process',
    'v0': 'Initial value of the smoothed Bessel process',
    'tolerance': 'Allowed bias of the finite-time occupancy average',
    'ks_threshold': 'Largest accepted KS distance to the limit law',
}

COMMAND_HELP = {
    'simulate': 'Simulate a CIR or squared Bessel path ensemble',
    'density': 'Tabulate transition densities and check normalisation',
    'moments': 'Compare closed-form moments with Monte Carlo',
    'bounds': 'Certify growth and convergence-rate bounds',
    'estimate': 'Estimate sigma^2 and the drift from discrete observations',
    'instability': 'Occupancy curves for CIR, squared Bessel and smoothed Bessel',
    'limit': 'Kolmogorov-Smirnov check of the smoothed Bessel weak limit',
}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _banner(title, config=None):
    print("=" * 80)
    print(title)
    print("=" * 80)
    if config is not None:
        print(f"Seed: {config.seed}")
        print(f"Workers: {config.workers}")
    print()


def _done(message):
    print("\n" + "=" * 80)
    print(f"✓ {message}")
    print("=" * 80)


def _output_path(config, key, name=None):
    """PATHS entry relocated under the run's output directory"""
    path = config.out_dir / get_path(key).relative_to(OUTPUT_DIR)
    if name is not None:
        path = path / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format=MACHINE_FLOAT, encoding='utf-8', lineterminator='\n')
    return path


def _write_json(payload, path):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def _model(config):
    """CirParams, or BesselSqParams when b = 0"""
    x0, a, sigma = config['x0'], config['a'], config['sigma']
    b = config.get('b', 0.0)
    if b == 0:
        return BesselSqParams(y0=x0, a=a, sigma=sigma)
    return CirParams(x0=x0, a=a, b=b, sigma=sigma)


def _steps(T, step):
    return max(1, int(round(T / step)))


def _report_indices(n_times, n_rows):
    """Evenly spread indices in 1..n_times-1, always ending at the last time"""
    picks = np.linspace(1, n_times - 1, min(n_rows, n_times - 1))
    return np.unique(np.round(picks).astype(int))


def _thin(e, every):
    """Ensemble restricted to every k-th recorded time (last time kept)"""
    idx = np.arange(0, e.n_times, every)
    if idx[-1] != e.n_times - 1:
        idx = np.append(idx, e.n_times - 1)
    return PathEnsemble(
        grid=e.grid.subsample(idx), values=e.values[:, idx], params_tag=e.params_tag,
        seed=e.seed, nonnegative=e.nonnegative, metadata=dict(e.metadata),
    )


def _write_config_record(config, path):
    path.write_text(config.as_record(exclude=('workers', 'out')), encoding='utf-8')
    return path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(config):
    """Simulate one ensemble and compare its mean curve with E X_t"""
    _banner("Square-Root Diffusion Path Simulation", config)
    p = _model(config)
    grid = TimeGrid.uniform(config['T'], config['n_steps'])
    print(f"Model: {p.tag()}")
    print(f"Grid: {grid!r}, method: {config['method']}")

    print("1. Simulating paths...")
    e = simulate(
        p, grid, config['n_paths'], config.seed, method=config['method'],
        workers=config.workers, record_stride=config['record_stride'],
    )

    print("2. Saving ensemble...")
    csv_path = e.to_csv(_output_path(config, 'ensemble_csv'))
    bin_path = e.to_binary(_output_path(config, 'ensemble_bin'))
    _write_config_record(config, csv_path.with_suffix('.config'))

    print("3. Checking mean curve against E X_t...")
    rows = []
    for i in _report_indices(e.n_times, MOMENT_ROWS):
        t = float(e.times[i])
        est = EstimateWithError.from_samples(e.values[:, i])
        exact = moment(p, t, 1)
        rows.append({
            'time': t, 'exact_mean': exact, 'mc_mean': est.mean, 'stderr': est.stderr,
            'z_score': (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0,
        })
    table = pd.DataFrame(rows)

    report = ReportGenerator('Path Simulation', config)
    report.add_key_values('Ensemble', {
        'model': p.tag(), 'paths': e.n_paths, 'recorded times': e.n_times,
        'csv': csv_path.name, 'binary': bin_path.name,
    })
    report.add_table(table, heading='Mean curve vs closed form')
    report.save(csv_path.with_suffix('.md'))

    print(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    print(f"\n🎲 Seed: {config.seed}")
    _done("Simulation completed successfully!")
    return 0


def cmd_density(config):
    """Tabulate p_t(x) (or g_t) and integrate it over (0, inf)"""
    _banner("Transition Density Tables")
    p = _model(config)
    xs = np.linspace(0.0, config['x_max'], config['n_points'])
    print(f"Model: {p.tag()}")

    columns = {'x': xs}
    masses = []
    for t in config['times']:
        columns[f"t={t!r}"] = transition_density(p, t, xs)
        mass = integrate.quad(lambda v: transition_density(p, t, v), 0.0, np.inf, limit=400)[0]
        masses.append({'time': t, 'mass': mass, 'mass_error': abs(mass - 1.0)})
        print(f"  t={t:g}: integral = {mass:.10f}")
    if not is_bessel(p):
        columns['stationary'] = cir_stationary_density(p, xs)
    frame = pd.DataFrame(columns)
    path = _write_frame(frame, _output_path(config, 'density_csv'))

    report = ReportGenerator('Transition Density', config)
    report.add_table(pd.DataFrame(masses), heading='Normalisation')
    if not is_bessel(p):
        last = frame.columns[len(config['times'])]
        gap = float(np.max(np.abs(frame[last] - frame['stationary'])))
        report.add_key_values('Stationary law', {'time': config['times'][-1], 'max |p_t - pi|': gap})
    report.save(path.with_suffix('.md'))
    _done(f"Density table saved to: {path}")
    return 0


def cmd_moments(config):
    """Closed-form E X_t^k, k = 1, 2, 3, against an exact-sampling ensemble"""
    _banner("Moment Tables", config)
    p = _model(config)
    times = list(config['times'])
    n_paths = config['n_paths']
    print(f"Model: {p.tag()}")

    ensemble = None
    if n_paths >= 2:
        print("1. Sampling exact marginals...")
        grid = TimeGrid.from_times([0.0] + times)
        ensemble = simulate_exact(p, grid, n_paths, config.seed, workers=config.workers)

    rows = []
    for j, t in enumerate(times):
        for k in (1, 2, 3):
            row = {'time': t, 'k': k, 'closed_form': moment(p, t, k),
                   'mc_mean': math.nan, 'stderr': math.nan, 'z_score': math.nan}
            if ensemble is not None:
                est = EstimateWithError.from_samples(ensemble.values[:, j + 1] ** k)
                row.update(mc_mean=est.mean, stderr=est.stderr,
                           z_score=(est.mean - row['closed_form']) / est.stderr)
            rows.append(row)
    table = pd.DataFrame(rows)
    path = _write_frame(table, _output_path(config, 'moments_csv'))

    report = ReportGenerator('Moments', config)
    report.add_table(table, heading='E X_t^k')
    report.add_table(pd.DataFrame({
        'time': times, 'integrated_mean': [integrated_mean(p, t) for t in times],
    }), heading='Integral of E X_s over [0, t]')
    if is_bessel(p) and 2.0 * p.a / p.sigma ** 2 > 1.0:
        inverse = []
        for j, t in enumerate(times):
            row = {'time': t, 'closed_form': bessel_sq_moment_p(p, t, -1.0), 'mc_mean': math.nan}
            if ensemble is not None:
                row['mc_mean'] = float(np.mean(1.0 / ensemble.values[:, j + 1]))
            inverse.append(row)
        report.add_table(pd.DataFrame(inverse), heading='E 1/Y_t')
    report.save(path.with_suffix('.md'))

    print(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    _done(f"Moment table saved to: {path}")
    return 0


def _rate_certifications(config, p0, models, fine, coarse, times_mask):
    """L1 and L2 reports for each approximating model against p0"""
    reports = []
    times = fine[0].times[times_mask]
    for i, pn in enumerate(models, start=1):
        bn = pn.b
        for label, power in (('l1', 1), ('l2', 2)):
            fine_curve = [v for v, keep in zip(mc_distance_curve(fine[0], fine[i], power), times_mask) if keep]
            coarse_curve = [v for v, keep in zip(mc_distance_curve(coarse[0], coarse[i], power), times_mask) if keep]
            if power == 1:
                bound = [rate_bound_l1(pn, p0, t) for t in times]
            else:
                bound = [min(rate_bound_l2_distributional(pn, p0, t), rate_bound_l2_pathwise(pn, p0, t))
                         for t in times]
            reports.append(certify(
                f"{label}_bn={bn!r}", times, fine_curve, bound, z=config['z'],
                budget=discretization_budget(coarse_curve, fine_curve), kind='upper',
                bn=bn, b0=p0.b, seed=config.seed,
            ))
    return reports


def _growth_certifications(config, grid, stride):
    """Growth bounds for a CIR model with b > 0 and its squared Bessel counterpart"""
    x0, a, sigma, z = config['x0'], config['growth_a'], config['sigma'], config['z']
    cir = CirParams(x0=x0, a=a, b=config['growth_b'], sigma=sigma)
    besq = cir.to_bessel()
    reports = []
    for p in (cir, besq):
        e = simulate_exact(p, grid, config['n_paths'], config.seed, workers=config.workers)
        coarse = _thin(e, config['coarsen'])
        if is_bessel(p):
            fine_curve = mc_running_sup_square(e)
            coarse_curve = mc_running_sup_square(coarse)
        else:
            fine_curve = mc_running_sup_second_moment(e, p)
            coarse_curve = mc_running_sup_second_moment(coarse, p)
        pos = np.arange(1, coarse.n_times, max(1, stride // config['coarsen']))
        if pos[-1] != coarse.n_times - 1:
            pos = np.append(pos, coarse.n_times - 1)
        times = coarse.times[pos]
        empirical = [fine_curve[j] for j in e.grid.indices_of(times)]
        budget = discretization_budget([coarse_curve[j] for j in pos], empirical)
        name = 'besq' if is_bessel(p) else 'cir'
        reports.append(certify(f"growth_{name}_gronwall", times, empirical,
                               growth_bound_gronwall(p, times), z=z, budget=budget, model=p.tag()))
        if is_bessel(p):
            upper, lower = bessel_growth_bounds(p, times)
        else:
            upper, lower = growth_bound_moment(p, times), growth_lower_bound_moment(p, times)
        reports.append(certify(f"growth_{name}_upper", times, empirical, upper,
                               z=z, budget=budget, model=p.tag()))
        reports.append(certify(f"growth_{name}_lower", times, empirical, lower,
                               z=z, budget=budget, kind='lower', model=p.tag()))
    return reports, besq


def cmd_bounds(config):
    """Coupled Euler runs certify the rate bounds; exact runs certify the growth bounds"""
    _banner("Bound Certification", config)
    p0 = CirParams(x0=config['x0'], a=config['a'], b=config['b0'], sigma=config['sigma'])
    models = [p0.with_b(bn) for bn in config['bn_list']]
    grid = TimeGrid.uniform(config['T'], config['n_steps'])
    m = config['coarsen']
    stride = max(1, (grid.n_steps // m) // config['n_report'])
    print(f"Limit model: {p0.tag()}")
    print(f"Rates b_n: {config['bn_list']}")

    print("1. Running coupled fine and coarse ensembles...")
    family = [p0] + models
    fine = simulate_coupled(family, grid, config['n_paths'], config.seed, workers=config.workers,
                            record_stride=stride * m)
    coarse = simulate_coupled(family, grid, config['n_paths'], config.seed, workers=config.workers,
                              record_stride=stride, coarsen=m)
    mask = fine[0].times > 0

    print("2. Certifying L1 and L2 rate bounds...")
    reports = _rate_certifications(config, p0, models, fine, coarse, mask)

    print("3. Certifying growth bounds...")
    growth_grid = TimeGrid.uniform(config['growth_T'], config['n_steps'])
    growth_reports, besq = _growth_certifications(config, growth_grid, stride * m)
    reports.extend(growth_reports)

    out_dir = _output_path(config, 'bounds_dir', 'summary.json').parent
    for r in reports:
        r.to_csv(out_dir / f"{r.label}.csv")
        r.to_json(out_dir / f"{r.label}.json")

    sup_rows = []
    for i, pn in enumerate(models, start=1):
        est, arg_time = mc_sup_l1_distance(fine[0], fine[i])
        sup_rows.append({
            'bn': pn.b, 'sup_l1_mean': est.mean, 'stderr': est.stderr,
            'argmax_time': arg_time, 'l1_bound': rate_bound_l1(pn, p0, grid.T),
            'approx_bessel_bound': approx_bessel_bound(p0, pn.b, grid.T) if p0.b == 0 else math.nan,
        })
    sup_table = pd.DataFrame(sup_rows).sort_values('bn', ascending=False, kind='stable')
    monotone = bool(np.all(np.diff(sup_table['sup_l1_mean'].to_numpy()) <= 0))
    try:
        spread = linearity_spread(sup_table['bn'], sup_table['sup_l1_mean'])
    except ValueError:
        spread = math.nan

    schedule = pd.DataFrame([
        {'n': n, 'b_n': bn_tn_schedule(n)[0], 'T_n': bn_tn_schedule(n)[1], 'bound': schedule_bound(p0, n)}
        for n in (10 ** 2, 10 ** 4, 10 ** 8)
    ])
    check_times = np.array([0.01, 0.1, 0.5, 1.0, 2.0])
    tighter = pd.DataFrame({
        'time': check_times,
        'gronwall': growth_bound_gronwall(besq, check_times),
        'bessel_upper': bessel_growth_bounds(besq, check_times)[0],
        'gronwall_tighter': gronwall_is_tighter(besq, check_times),
    })

    all_passed = all(r.passed for r in reports)
    summary = {
        'seed': config.seed,
        'passed': all_passed,
        'monotone_in_bn': monotone,
        'linearity_spread': spread,
        'reports': {r.label: r.passed for r in reports},
        'sup_l1': sup_table.to_dict(orient='records'),
    }
    summary_path = _write_json(summary, out_dir / 'summary.json')

    report = ReportGenerator('Bound Certification', config)
    report.add_section('Verdicts')
    for r in reports:
        worst = float(np.min(r.slack_in_stderr))
        report.add_verdict(r.label, r.passed, f"min slack {worst:.3g} stderr")
    report.add_table(sup_table, heading='Sup L1 distance by rate')
    report.add_key_values('Trend', {'monotone in b_n': monotone, 'linearity spread': spread})
    report.add_table(schedule, heading='Schedule b_n = 1/n, T_n = log log n')
    report.add_table(tighter, heading='Gronwall vs squared Bessel upper bound')
    report.save(out_dir / 'bounds.md')

    for r in reports:
        print(f"  {'✓' if r.passed else '✗'} {r.label}")
    print(f"\n🎲 Seed: {config.seed}")
    if not all_passed:
        print(f"\n✗ Some bounds were not certified; see {summary_path}")
        return 1
    _done("All bounds certified!")
    return 0


def cmd_estimate(config):
    """Estimate from an input CSV, or from simulated squared Bessel paths"""
    _banner("Parameter Estimation", config)
    sigma = config['sigma'] if config['sigma_source'] == 'known' else None
    json_path = _output_path(config, 'estimate_json')
    report = ReportGenerator('Parameter Estimation', config)

    if config['input']:
        print(f"1. Loading trajectory {config['input']}...")
        traj = DiscreteTrajectory.from_csv(config['input'])
        result = estimation_report(traj, sigma=sigma)
        result.to_json(json_path)
        payload = result.to_dict()
        payload['inverse_average'] = ergodic_time_average_inverse(traj)
        report.add_key_values('Estimates', payload)
        for key, value in payload.items():
            print(f"  {key}: {value:.6g}")
    else:
        p = BesselSqParams(y0=config['y0'], a=config['a'], sigma=config['sigma'])
        grid = TimeGrid.uniform(config['T'], _steps(config['T'], config['step']))
        print(f"1. Simulating {config['n_paths']} paths of {p.tag()} on {grid!r}...")
        e = simulate_exact(p, grid, config['n_paths'], config.seed, workers=config.workers)
        print("2. Estimating each path...")
        frame = estimate_ensemble(e, sigma=sigma, workers=config.workers)
        _write_frame(frame, json_path.with_suffix('.csv'))
        a_hat = EstimateWithError.from_samples(frame['a'])
        sigma2_hat = EstimateWithError.from_samples(frame['sigma2'])
        payload = {
            'seed': config.seed, 'n_paths': int(len(frame)), 'T': grid.T, 'n': grid.n_steps,
            'a': p.a, 'a_hat_mean': a_hat.mean, 'a_hat_stderr': a_hat.stderr,
            'a_hat_median': float(frame['a'].median()),
            'sigma2': p.sigma ** 2, 'sigma2_hat_mean': sigma2_hat.mean, 'sigma2_hat_stderr': sigma2_hat.stderr,
            'inverse_average_mean': float(frame['inverse_average'].mean()),
        }
        _write_json(payload, json_path)
        report.add_key_values('Ensemble estimates', payload)
        print(f"  a: true {p.a:.6g}, estimate {a_hat.mean:.6g} ± {a_hat.stderr:.3g}")
        print(f"  sigma^2: true {p.sigma ** 2:.6g}, estimate {sigma2_hat.mean:.6g} ± {sigma2_hat.stderr:.3g}")

    report.save(json_path.with_suffix('.md'))
    _done(f"Estimates saved to: {json_path}")
    return 0


def cmd_instability(config):
    """CIR occupancy converges to its stationary mass; Bessel-type occupancy decays"""
    _banner("Occupancy of Bounded Sets", config)
    N = config['N']
    cir = CirParams(x0=config['x0'], a=config['a'], b=config['b'], sigma=config['sigma'])
    out_dir = _output_path(config, 'instability_dir', 'summary.json').parent

    print("1. CIR occupancy...")
    grid = TimeGrid.uniform(config['T'], _steps(config['T'], config['step'])).including(config['times'])
    e = simulate_exact(cir, grid, config['n_paths'], config.seed, workers=config.workers)
    cir_curve = occupancy_average(e, N, config['times'])
    limit = cir_occupancy_limit(cir, N)
    terminal = cir_curve.terminal
    gap = abs(terminal.mean - limit)
    cir_ok = gap <= max(config['tolerance'], 3.0 * terminal.stderr)
    print(f"  limit {limit:.6g}, occupancy at T {terminal.mean:.6g} ± {terminal.stderr:.3g}")

    print("2. Squared Bessel occupancy...")
    horizon = max(config['bessel_times'])
    long_grid = TimeGrid.graded(horizon, config['step'], config['max_step']).including(config['bessel_times'])
    eb = simulate_exact(cir.to_bessel(), long_grid, config['n_paths'], config.seed, workers=config.workers)
    besq_curve = occupancy_average(eb, N, config['bessel_times'])

    print("3. Smoothed Bessel occupancy...")
    es = simulate_smoothed_bessel(config['eps'], config['c'], config['v0'], long_grid,
                                  config['n_paths'], config.seed, workers=config.workers)
    smooth_curve = occupancy_average(es, N, config['bessel_times'])

    curves = {'cir': cir_curve, 'besq': besq_curve, 'smoothed_bessel': smooth_curve}
    for name, curve in curves.items():
        curve.metadata.update(limit=limit if name == 'cir' else 0.0)
        curve.to_csv(out_dir / f"occupancy_{name}.csv")
        curve.to_json(out_dir / f"occupancy_{name}.json")

    verdicts = {
        'cir_matches_limit': bool(cir_ok),
        'besq_decreasing': besq_curve.is_decreasing(),
        'smoothed_decreasing': smooth_curve.is_decreasing(),
    }
    _write_json({'seed': config.seed, 'N': N, 'cir_limit': limit, 'verdicts': verdicts},
                out_dir / 'summary.json')

    report = ReportGenerator('Occupancy of Bounded Sets', config)
    report.add_section('Verdicts')
    report.add_verdict('CIR occupancy matches P(2a/sigma^2, 2bN/sigma^2)', cir_ok,
                       f"gap {gap:.3g}, limit {limit:.6g}")
    report.add_verdict('Squared Bessel occupancy decreasing', verdicts['besq_decreasing'])
    report.add_verdict('Smoothed Bessel occupancy decreasing', verdicts['smoothed_decreasing'])
    for name, curve in curves.items():
        report.add_table(curve.to_frame(), heading=name)
    report.save(out_dir / 'instability.md')

    for label, ok in verdicts.items():
        print(f"  {'✓' if ok else '✗'} {label}")
    print(f"\n🎲 Seed: {config.seed}")
    if not all(verdicts.values()):
        print("\n✗ Occupancy behaviour differs from the expected limits")
        return 1
    _done("Instability diagnostics completed successfully!")
    return 0


def cmd_limit(config):
    """KS distance between |V_T|/sqrt(T) and the time-one law of the limit"""
    _banner("Smoothed Bessel Weak Limit", config)
    eps, c = config['eps'], config['c']
    grid = TimeGrid.graded(config['T'], config['initial_step'], config['max_step'])
    print(f"Grid: {grid!r}")

    print("1. Simulating terminal values...")
    e = simulate_smoothed_bessel(eps, c, config['v0'], grid, config['n_paths'], config.seed,
                                 workers=config.workers, record_stride=grid.n_steps)
    samples = weak_limit_samples(e)

    print("2. Kolmogorov-Smirnov test...")
    statistic = ks_statistic(samples, lambda x: weak_limit_reference_cdf(1.0, x, c))
    critical = ks_critical_value(samples.size)
    passed = statistic < config['ks_threshold']

    drift = [
        {'x': x, **drift_limit_constants(eps, c, x)._asdict()}
        for x in (1e2, 1e4, 1e8, -1e8)
    ]
    path = _output_path(config, 'limit_json')
    _write_frame(pd.DataFrame({'scaled_abs_terminal': samples}), path.with_suffix('.csv'))
    _write_json({
        'seed': config.seed, 'T': grid.T, 'n_steps': grid.n_steps, 'n_paths': int(samples.size),
        'eps': eps, 'c': c, 'v0': config['v0'],
        'ks_statistic': statistic, 'ks_critical_1pct': critical, 'ks_threshold': config['ks_threshold'],
        'passed': bool(passed),
        'drift_limits': drift,
    }, path)

    report = ReportGenerator('Smoothed Bessel Weak Limit', config)
    report.add_verdict('KS statistic below the threshold', passed,
                       f"{statistic:.4g} vs {config['ks_threshold']:.4g} (1% critical value {critical:.4g})")
    report.add_table(pd.DataFrame(drift), heading='Drift averages (limits c as x -> +inf, -c as x -> -inf)')
    report.save(path.with_suffix('.md'))

    print(f"  KS = {statistic:.6g}, critical = {critical:.6g}")
    print(f"\n🎲 Seed: {config.seed}")
    if not passed:
        print("\n✗ KS statistic exceeds the threshold")
        return 1
    _done("Weak-limit check passed!")
    return 0


COMMAND_FUNCS = {
    'simulate': cmd_simulate,
    'density': cmd_density,
    'moments': cmd_moments,
    'bounds': cmd_bounds,
    'estimate': cmd_estimate,
    'instability': cmd_instability,
    'limit': cmd_limit,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _float_list(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _add_knobs(parser, command):
    for key, default in DEFAULT_CONFIG[command].items():
        if key in ('seed', 'workers', 'out'):
            continue
        if isinstance(default, list):
            kind = _float_list
            shown = ','.join(f"{v:g}" for v in default)
        else:
            kind = type(default)
            shown = default if default != '' else "''"
        parser.add_argument(
            '--' + key.replace('_', '-'), dest=key, type=kind, default=None,
            help=f"{KNOB_HELP.get(key, key)} (default: {shown})",
        )


def build_parser():
    """Argument parser with one subcommand per experiment"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help=f'64-bit seed (default: {DEFAULT_SEED})')
    common.add_argument('--workers', type=int, default=None, help='Worker threads; results do not depend on it')
    common.add_argument('--out', default=None, help='Output directory (default: SQD_OUTPUT_DIR or ./output)')
    common.add_argument('--config', default=None, help='Flat key = value config file; flags override it')
    common.add_argument('--log-level', default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='Logging level')

    parser = argparse.ArgumentParser(
        description='Square-Root Diffusion Laboratory',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Exact CIR ensemble with default settings
  python cli.py simulate

  # Squared Bessel ensemble (b = 0) with a fixed seed
  python cli.py simulate --b 0 --seed 7

  # Certify rate bounds for a custom list of b_n on four workers
  python cli.py bounds --bn-list 0.5,0.1 --workers 4

  # Estimate from an observed trajectory
  python cli.py estimate --input data/path.csv --sigma-source qv

  # Weak-limit check from a config file
  python cli.py limit --config limit.cfg
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=COMMAND_HELP[command], parents=[common])
        _add_knobs(sub, command)
        sub.set_defaults(func=COMMAND_FUNCS[command])
    return parser


def main(argv=None):
    """Main CLI entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Show help if no command specified
    if not args.command:
        parser.print_help()
        return 0

    if args.log_level:
        set_level(args.log_level)

    try:
        file_values = load_config_file(args.config) if args.config else None
        overrides = {key: getattr(args, key, None) for key in DEFAULT_CONFIG[args.command]}
        config = build_experiment_config(args.command, file_values, overrides)
    except ConfigError as e:
        print(f"✗ Configuration error: {e}", file=sys.stderr)
        return 2

    logger.info(f"Running '{args.command}' with seed {config.seed}")
    try:
        return args.func(config)
    except Exception as e:
        print(f"\n✗ Error during {args.command}: {e}")
        traceback.print_exc()
        return 1


if __name__ == '__main__':
    sys.exit(main())
