"""Acceptance criteria, one test each.

Every test records a ``criterion N: PASS|FAIL ...`` line before asserting;
the lines are printed together at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from fraccomm import norms as Nm
from fraccomm import singular, spectral
from fraccomm import squarefn as Q
from fraccomm import verify as V
from fraccomm.grid import (
    Bump,
    Gaussian,
    GridFunction,
    Torus,
    TruncatedLine,
    WavePacket,
    default_family,
    make_domain,
    sample_family,
)


def record(log, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    log.append(line)
    print(line)
    return ok


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def stable(report, index):
    s = next(item for item in report.summary() if item["index"] == index)
    vals = list(s["max_ratio"].values())
    return s["finite"] and all(math.isfinite(v) for v in vals), s["resolution_change"], vals


def test_criterion_01_operator_cross_validation(acceptance_log):
    fams = [Gaussian(1.0), Bump(3.0), WavePacket(4.0, 1.0)]
    res, dt = timed(V.check_spectral_vs_quadrature, fams, N=1024, orders=(0.3, 0.7, 1.0, 1.5), tol=1e-2)
    worst = max(v["1024"] for v in res.details["errors"].values())
    ok = res.passed and dt <= 10
    record(acceptance_log, 1, ok, f"worst rel err {worst:.2e} (<= 1e-2, shrinks at N=2048), {dt:.1f}s (<= 10s)")
    assert ok


def test_criterion_02_commutator_identity(acceptance_log):
    res, dt = timed(V.check_identity_commint, default_family(), N=1024, orders=(0.3, 0.9, 1.0, 1.5, 1.9), tol=1e-2)
    worst = max(res.details["worst_relative_error"].values())
    torus = res.details["torus_exp_s1_residual"]
    ok = res.passed and worst <= 1e-2 and torus <= 1e-12 and dt <= 30
    record(acceptance_log, 2, ok, f"worst rel err {worst:.2e} (<= 1e-2), torus residual {torus:.1e} (<= 1e-12), "
                                  f"{dt:.1f}s (<= 30s)")
    assert ok


def test_criterion_03_pointwise_cauchy_schwarz(acceptance_log):
    res, dt = timed(V.check_cs_suite, default_family(), N=1024, splits=((0.4, 0.5), (0.45, 0.45), (0.9, 0.9)))
    nviol = sum(res.details["violations"].values())
    worst = max(res.details["worst_ratio"].values())
    ok = res.passed and nviol == 0 and dt <= 60
    record(acceptance_log, 3, ok, f"{nviol} violations, worst |T|/(D D) {worst:.9f}, {dt:.1f}s (<= 60s)")
    assert ok


def test_criterion_04_stein_pointwise_bound(acceptance_log):
    res = V.check_stein_suite(default_family(), N=1024, orders=(0.25, 0.5, 0.75), tol=0.10)
    changes = {s: r["change"] for s, r in res.details["orders"].items()}
    finite = all(math.isfinite(r["max_ratio"]["1024"]) for r in res.details["orders"].values())
    ok = res.passed and finite and max(changes.values()) <= 0.10
    record(acceptance_log, 4, ok, "changes 512->1024 " + ", ".join(f"s={s}: {c:.2%}" for s, c in changes.items())
           + " (<= 10%)")
    assert ok


def test_criterion_05_pointwise_commutator_bound(acceptance_log):
    res = V.check_commutator_suite(default_family(), N=1024, indices=(0.45, 0.45, 1.8, 1.8), tol=0.10)
    c = res.details["constant"]
    ok = res.passed and math.isfinite(c["1024"]) and res.details["change"] <= 0.10
    record(acceptance_log, 5, ok, f"C = {c['512']:.4f} -> {c['1024']:.4f}, change {res.details['change']:.2%} (<= 10%)")
    assert ok


def test_criterion_06_besov_constant(acceptance_log):
    pt = V.SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, q1=2, q2=2)
    rep = V.sweep(V.SweepConfig("besov", points=(pt,)))
    bound = abs(singular.constant_c(1, 0.9)) * 1.03
    worst = rep.max_ratio()
    ok = worst <= bound and all(r.admissible for r in rep.rows)
    record(acceptance_log, 6, ok, f"max ratio {worst:.6f} <= |c(1,0.9)|*1.03 = {bound:.6f}")
    assert ok


def test_criterion_07_novel_range_sweep(acceptance_log):
    pt = V.SweepPoint(s1=0.9, s2=0.9, p1=0.8, p2=0.8)
    rep = V.sweep(V.SweepConfig("commutator", points=(pt,), resolutions=(512, 1024)))
    finite, change, vals = stable(rep, pt.key())
    flagged = all("novel-range" in r.flags for r in rep.rows)
    ok = finite and flagged and change <= 0.15 and pt.r == pytest.approx(0.4)
    record(acceptance_log, 7, ok, f"r = {pt.r:g}, max ratio {vals[0]:.4f} -> {vals[1]:.4f}, change {change:.2%} (<= 15%)")
    assert ok


def test_criterion_08_weighted_sweep(acceptance_log):
    pts = tuple(V.SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, a1=a1, a2=a2)
                for a1, a2 in ((0.2, 0.2), (0.5, 0.5), (0.2, 0.5)))
    rep = V.sweep(V.SweepConfig("weighted", points=pts, resolutions=(512, 1024)))
    ok, parts = True, []
    for pt in pts:
        finite, change, vals = stable(rep, pt.key())
        rows = [r for r in rep.rows if r.index == pt.key()]
        ap = {N: (next(r.ap1 for r in rows if r.N == N), next(r.ap2 for r in rows if r.N == N)) for N in (512, 1024)}
        ap_stable = all(abs(ap[1024][k] - ap[512][k]) / ap[512][k] <= 0.15 for k in (0, 1))
        ok &= finite and change <= 0.15 and ap_stable and all(r.admissible for r in rows)
        parts.append(f"a=({pt.a1:g},{pt.a2:g}) change {change:.2%} A_q {ap[1024][0]:.3f}/{ap[1024][1]:.3f}")
    # the left side is measured with w1^(r/p1) w2^(r/p2)
    dom = make_domain(1, TruncatedLine(20.0), 512)
    u, v = sample_family(Gaussian(1.0), dom), sample_family(WavePacket(4.0, 1.0), dom)
    w1, w2 = Nm.make_power_weight(0.2, dom), Nm.make_power_weight(0.5, dom)
    comm = spectral.commutator_spectral(u, v, 0.9).samples
    direct = (dom.h * (np.abs(comm) * (w1.values * w2.values) ** 0.5).sum())
    row = next(r for r in rep.rows if r.N == 512 and r.index == pts[2].key()
               and r.pair == f"{Gaussian(1.0).id}|{WavePacket(4.0, 1.0).id}")
    ok &= row.lhs == pytest.approx(direct, rel=1e-12)
    record(acceptance_log, 8, ok, "; ".join(parts) + " (<= 15%), lhs exponents r/p_j checked")
    assert ok


def test_criterion_09_square_function_machinery(acceptance_log):
    dom = make_domain(1, TruncatedLine(20.0), 256)
    funcs = [sample_family(f, dom) for f in default_family()]
    conv_err, mono_lam, mono_ap = 0.0, True, True
    for u in funcs:
        a = Q.g_star(u, Q.GStarParams(1.5)).samples.real
        b = Q.g_star(u, Q.GStarParams(1.5, mode="direct")).samples.real
        conv_err = max(conv_err, float(np.abs(a - b).max() / np.abs(b).max()))
        gs = [Q.g_star(u, Q.GStarParams(lam)).samples.real for lam in (1.1, 1.5, 2.0, 3.0)]
        mono_lam &= all(np.all(y <= x * (1 + 1e-12)) for x, y in zip(gs, gs[1:]))
        ar = [Q.area_integral(u, ap).samples.real for ap in (0.5, 1.0, 2.0)]
        mono_ap &= all(np.all(x <= y * (1 + 1e-12)) for x, y in zip(ar, ar[1:]))
    pts = tuple(V.SweepPoint(p=p, lam=lam) for p, lam in ((2, 1.5), (4, 1.2), (1.5, 1.6)))
    rep = V.sweep(V.SweepConfig("gstar_lp", points=pts, resolutions=(512, 1024)))
    bounded = True
    for pt in pts:
        finite, change, _ = stable(rep, pt.key())
        bounded &= finite and change <= 0.15
    ok = conv_err <= 1e-10 and mono_lam and mono_ap and bounded
    record(acceptance_log, 9, ok, f"conv vs direct {conv_err:.1e} (<= 1e-10), lambda/aperture monotone "
                                  f"{mono_lam}/{mono_ap}, g* L^p ratios max {rep.max_ratio():.3f} bounded {bounded}")
    assert ok


def test_criterion_10_lerner_fit(acceptance_log):
    dom = make_domain(1, TruncatedLine(20.0), 1024)
    funcs = [sample_family(f, dom) for f in default_family()]
    weights = [Nm.make_power_weight(a, dom) for a in np.arange(1, 10) / 10]
    fit = V.lerner_fit(weights, V.LebesgueIndices(2, 2), V.FractionalIndices(0.6, 0.6), funcs)
    ok = (len(weights) >= 5 and fit.beta1 <= 1.15 and fit.beta2 <= 1.15
          and fit.r2_1 >= 0.8 and fit.r2_2 >= 0.8)
    record(acceptance_log, 10, ok, f"beta = {fit.beta1:.3f}/{fit.beta2:.3f} (<= 1.15), "
                                   f"R^2 = {fit.r2_1:.3f}/{fit.r2_2:.3f} (>= 0.8), {len(weights)} weights")
    assert ok


def test_criterion_11_determinism_and_budget(acceptance_log):
    (checks_a, reps_a), dt_a = timed(V.default_suite, seed=42, workers=1)
    (checks_b, reps_b), dt_b = timed(V.default_suite, seed=42, workers=4)
    same = all(reps_a[k].to_csv().encode() == reps_b[k].to_csv().encode() for k in V.INEQUALITIES)
    checks_ok = all(c.passed for c in checks_a) and all(c.passed for c in checks_b)
    ok = same and checks_ok and max(dt_a, dt_b) <= 600
    record(acceptance_log, 11, ok, f"{len(reps_a)} sweep CSVs byte-identical {same}, checks pass {checks_ok}, "
                                   f"suite {dt_a:.1f}s / {dt_b:.1f}s (<= 600s)")
    assert ok


def test_torus_plane_wave_commutator_is_zero():
    # the second half of criterion 2, kept as its own direct check
    d = make_domain(1, Torus(2 * math.pi), 64)
    e = GridFunction(d, np.exp(1j * d.axis))
    assert np.abs(spectral.commutator_spectral(e, e, 1.0).samples).max() <= 1e-12
