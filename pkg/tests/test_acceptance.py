"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np

from qasym.channel import (
    DephasingParams,
    Gaussian,
    Kicks,
    PureProbe,
    dephase,
    dephase_general,
    ensemble_average_channel,
    noise_to_dephasing,
)
from qasym.classical import (
    CoherentConfig,
    asymptotic_variance,
    error_prop_variance,
    four_arm_variance,
    idiff_moments,
    mc_classical_oracle,
)
from qasym.cli import main
from qasym.entanglement import (
    distillable_entanglement,
    kappa_gain_region,
    mc_state,
    rel_entropy_coherence,
)
from qasym.interferometer import (
    InterferometerConfig,
    bootstrap_precision,
    estimator_moments,
    fisher_information,
    sample_counts,
)
from qasym.metrology import q_opt, qfi_closed, qfi_max, qfi_numeric
from qasym.qmath import random_density_matrix

from oracles import grid_argmax, kick_average, qfi_formula, qfi_max_unfactored

LN2 = math.log(2)


def cp_grid():
    """640 CP-valid (q, eta, kappa) points, boundaries included."""
    pts = []
    for q in np.linspace(0.0, 1.0, 10):
        for eta in np.linspace(0.05, 1.0, 8):
            lo = 2 * eta**2 - 1
            for kappa in np.linspace(lo, 1.0, 8):
                pts.append((float(q), float(eta), float(kappa)))
    return pts


def test_criterion_1_closed_form_vs_numeric_qfi(verdict):
    pts = cp_grid()
    t0 = time.perf_counter()
    err = max(
        abs(qfi_closed(q, (e, k)).value - qfi_numeric(dephase(q, (e, k))).value) for q, e, k in pts
    )
    dt = time.perf_counter() - t0
    verdict(1, "closed-form QFI equals SLD-based QFI", len(pts) >= 500 and err <= 1e-9 and dt < 5,
            f"{len(pts)} points, max |diff| = {err:.2e}, {dt:.2f} s")


def test_criterion_2_qfi_strictly_decreasing_in_kappa(verdict):
    worst = -math.inf
    for eta in (0.3, 0.5, 0.8, 0.95):
        ks = np.linspace(2 * eta**2 - 1, 1.0, 201)
        for q in (0.2, 0.5, 0.8):
            f = np.array([qfi_closed(q, (eta, k)).value for k in ks])
            worst = max(worst, float(np.max(np.diff(f))))
    verdict(2, "QFI strictly decreasing in kappa", worst < -1e-8, f"largest forward difference {worst:.3e}")


def test_criterion_3_measurement_optimality(verdict):
    err = 0.0
    for q, e, k in cp_grid():
        cfg = InterferometerConfig(q, DephasingParams(e, k), 1.0, 0.0)
        err = max(err, abs(fisher_information(cfg).value - qfi_closed(q, (e, k)).value))
    verdict(3, "three-outcome FI at theta0 equals QFI", err <= 1e-9, f"max |FI - QFI| = {err:.2e}")


def test_criterion_4_probe_optimality(verdict):
    dq = dmax = dlib = 0.0
    for kappa in (-0.5, 0.0, 0.5, 0.9):
        for eta in (0.5, math.sqrt((kappa + 1) / 2)):
            q, f = grid_argmax(lambda x: qfi_formula(x, eta, kappa), step=1e-4)
            expr = qfi_max_unfactored(eta, kappa)
            dq = max(dq, abs(q - q_opt(kappa)))
            dmax = max(dmax, abs(f - expr))
            dlib = max(dlib, abs(qfi_max((eta, kappa)) - expr))
    exact = q_opt(1.0) == 0.5
    ok = dq <= 2e-4 and dmax <= 1e-8 and dlib <= 1e-8 and exact
    verdict(4, "grid argmax matches q_opt and the optimal-QFI expression", ok,
            f"|dq| = {dq:.1e}, |grid max - expr| = {dmax:.1e}, |qfi_max - expr| = {dlib:.1e}, q_opt(1) = {q_opt(1.0)!r}")


def test_criterion_5_ensemble_equivalence(verdict):
    kick_err = 0.0
    for phi0 in (0.3, math.pi / 3, 1.1):
        for c in (-1.0, -0.4, 0.0, 0.7, 1.0):
            for q in (0.2, 0.5, 0.9):
                m = Kicks(phi0, c)
                avg = kick_average(PureProbe(q).density, phi0, c)
                kick_err = max(kick_err, float(np.max(np.abs(avg - dephase(q, noise_to_dephasing(m))))))
                lib = ensemble_average_channel(m, PureProbe(q).density)
                kick_err = max(kick_err, float(np.max(np.abs(lib - avg))))
    gauss_err = 0.0
    rho = random_density_matrix(3, np.random.default_rng(2))
    for s2 in (0.1, LN2, 1.5):
        for c in (-1.0, -0.3, 0.0, 0.5, 1.0):
            g = Gaussian.from_variance(s2, c)
            avg = ensemble_average_channel(g, rho, method="quadrature")
            gauss_err = max(gauss_err, float(np.max(np.abs(avg - dephase_general(rho, noise_to_dephasing(g))))))
    c0_err = 0.0
    for phi0 in (0.2, 0.7, 1.2):
        eta = math.cos(phi0)
        pk = noise_to_dephasing(Kicks(phi0, 0.0))
        pg = noise_to_dephasing(Gaussian.from_variance(-2 * math.log(eta), 0.0))
        c0_err = max(c0_err, abs(pk.kappa - pk.eta**2), abs(pg.kappa - pg.eta**2), abs(pg.eta - eta))
    range_err = 0.0
    for s2 in (0.1, LN2, 2.0):
        lo = noise_to_dephasing(Gaussian.from_variance(s2, -1.0))
        hi = noise_to_dephasing(Gaussian.from_variance(s2, 1.0))
        range_err = max(range_err, abs(lo.kappa - lo.eta**4), abs(hi.kappa - 1.0))
    ok = kick_err <= 1e-14 and gauss_err <= 1e-8 and c0_err <= 1e-12 and range_err <= 1e-15
    verdict(5, "noise ensembles reproduce the multiplier channel", ok,
            f"kicks {kick_err:.1e}, gaussian {gauss_err:.1e}, c=0 {c0_err:.1e}, kappa range {range_err:.1e}")


def test_criterion_6_estimator_efficiency(verdict):
    t0 = time.perf_counter()
    sin_err = var_err = 0.0
    for e, k in [(0.8, 0.5), (0.95, 0.9), (1.0, 1.0)]:
        for v in (1.0, 0.97):
            cfg = InterferometerConfig(0.5, DephasingParams(e, k), v, 0.0)
            for th in np.linspace(-1.5, 1.5, 13):
                sin_err = max(sin_err, abs(estimator_moments(cfg, th)[0] - math.sin(th)))
            var_err = max(var_err, abs(estimator_moments(cfg, 0.0)[1] - 1 / fisher_information(cfg).value))

    seed = 2024
    worst_z = 0.0
    ordered = True
    rows = []
    for eta in (0.8, 0.95):
        prec = []
        for c in (-1.0, 0.0, 1.0):
            cfg = InterferometerConfig.from_noise(0.5, Kicks(math.acos(eta), c))
            counts = sample_counts(cfg, 0.0, 100_000, seed)
            rep = bootstrap_precision(counts, 1000, 10_000, cfg, seed)
            z = (rep.precision - rep.fisher) / rep.precision_stderr
            worst_z = max(worst_z, abs(z))
            prec.append(rep.precision)
            rows.append(f"eta={eta} c={c:+.0f}: {rep.precision:.4f} vs FI {rep.fisher:.4f} (z={z:+.2f})")
        ordered &= prec[0] > prec[1] > prec[2]
    dt = time.perf_counter() - t0
    print("\n".join(rows))
    ok = sin_err <= 1e-12 and var_err <= 1e-12 and worst_z <= 3 and ordered and dt < 60
    verdict(6, "estimator unbiased, efficient, bootstrap precision matches FI", ok,
            f"|E - sin| = {sin_err:.1e}, |Var - 1/FI| = {var_err:.1e}, max |z| = {worst_z:.2f}, "
            f"ordering {'ok' if ordered else 'broken'}, {dt:.1f} s")


def test_criterion_7_entanglement_identities(verdict):
    err = 0.0
    for q in np.linspace(0, 1, 11):
        for eta in np.linspace(0, 1, 8):
            for kappa in np.linspace(2 * eta**2 - 1, 1, 8):
                ed = distillable_entanglement(mc_state(q, (eta, kappa)))
                err = max(err, abs(ed - rel_entropy_coherence(dephase(q, (eta, kappa)))))
    top = distillable_entanglement(mc_state(1 / 3, (1.0, 1.0)))
    sweep = kappa_gain_region(1 / 3, 0.8)
    gain = sweep.gain_intervals
    frozen = (
        len(gain) == 1
        and abs(gain[0][0] - 0.28) <= 1e-12
        and abs(gain[0][1] - 0.4402) <= 2e-3
        and all(a > 0 for a, _ in gain)
    )
    ok = err <= 1e-10 and abs(top - math.log2(3)) <= 1e-12 and frozen
    verdict(7, "E_d equals relative entropy of coherence; kappa gain region exists", ok,
            f"max |E_d - C_r| = {err:.1e}, E_d(1/3,1,1) - log2 3 = {top - math.log2(3):.1e}, "
            f"gain interval at q=1/3, eta=0.8: {gain}")


def test_criterion_8_classical_light(verdict):
    qt_err = 0.0
    for q in (0.2, 0.5, 0.8):
        for s2 in (0.2, LN2, 1.2):
            for c in (-1.0, 0.0, 0.5, 1.0):
                cfg = CoherentConfig(250.0, q, Gaussian.from_variance(s2, c))
                s = error_prop_variance(cfg)
                f1 = qfi_closed(q, noise_to_dephasing(cfg.noise)).value
                qt_err = max(qt_err, abs(s.quantum_term * cfg.n0 - 1 / f1))
    floor_m1 = asymptotic_variance(Gaussian.from_variance(LN2, -1.0))
    floor_p1 = asymptotic_variance(Gaussian.from_variance(LN2, 1.0))

    cfg = CoherentConfig(10.0, 0.5, Gaussian.from_variance(LN2, 0.0))
    m = idiff_moments(cfg)
    mc = mc_classical_oracle(cfg, samples=1_000_000, seed=1)
    z = mc.z_scores(m)
    mc_ok = all(abs(v) < 5 for v in z.values())

    four_err = 0.0
    for c in (-1.0, -0.5, 0.0, 0.5, 1.0):
        four = four_arm_variance(CoherentConfig(10.0, 0.5, Gaussian.from_variance(LN2, c)))
        three_c1 = error_prop_variance(CoherentConfig(10.0, 0.5, Gaussian.from_variance(LN2, 1.0)))
        four_err = max(four_err, abs(four.quantum_term - three_c1.quantum_term))

    # The oracle run decides between the candidate forms: the corrected phase-noise
    # term and floor agree with it, the plus-sign bracket and the doubled floor do not.
    s2, c = LN2, 0.0
    plus_bracket = 1 + math.exp((c - 1) * s2) + math.exp(-2 * s2) * (math.exp((1 - c) * s2) + 1)
    plus_var = cfg.n0**2 * cfg.q * (1 - cfg.q) * plus_bracket
    slope2 = m.slope**2
    floor = asymptotic_variance(cfg.noise)
    z_plus = (mc.var_classical - plus_var) / mc.var_classical_se
    z_floor = (mc.var_classical / slope2 - floor) / (mc.var_classical_se / slope2)
    z_double = (mc.var_classical / slope2 - 2 * floor) / (mc.var_classical_se / slope2)
    resolved = abs(z_floor) < 5 and abs(z_plus) > 5 and abs(z_double) > 5

    ok = qt_err <= 1e-10 and floor_m1 == 0.0 and abs(floor_p1 - 0.75) <= 1e-12 and mc_ok \
        and four_err <= 1e-12 and resolved
    verdict(8, "coherent-light error propagation", ok,
            f"|n0 qt - 1/F| = {qt_err:.1e}, floor(c=-1) = {floor_m1}, floor(ln2, c=1) = {floor_p1:.15g}, "
            f"MC z = {{{', '.join(f'{k}: {v:+.2f}' for k, v in z.items())}}}, four-arm {four_err:.1e}, "
            f"oracle z: corrected floor {z_floor:+.1f}, doubled floor {z_double:+.0f}, plus sign {z_plus:+.0f}")


def test_criterion_9_determinism_across_threads(verdict, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    commands = {
        "estimate": ["estimate", "--model", "kicks", "--phi0", "0.6435", "--c", "-1", "--n", "100000",
                     "--n-sets", "500", "--set-size", "5000", "--seed", "3"],
        "classical": ["classical", "--n0", "10", "--mc", "200000", "--seed", "3"],
        "sweep": ["sweep", "kappa", "--eta", "0.8", "--start", "0.28", "--stop", "1", "--num", "50"],
        "simulate": ["simulate", "--eta", "0.8", "--kappa", "0.5", "--n", "100000", "--seed", "3"],
    }
    same = True
    for name, argv in commands.items():
        blobs = []
        for threads in (1, 4, 8):
            path = tmp_path / f"{name}-{threads}.out"
            assert main(argv + ["--threads", str(threads), "-o", str(path)]) == 0
            blobs.append(path.read_bytes())
        same &= blobs[0] == blobs[1] == blobs[2]
    capsys.readouterr()
    verdict(9, "byte-identical outputs for 1, 4 and 8 worker threads", same,
            f"{len(commands)} commands compared")
