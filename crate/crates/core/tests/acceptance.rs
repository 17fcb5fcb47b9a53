//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use friedrichs::density::{GaussianDensity, IndicatorDensity, MomentumDensity, SampledDensity};
use friedrichs::dynamics::{
    build_propagator, free_sojourn_analytic, free_sojourn_numeric, propagation_functional, time_delay_sweep, wave_operator,
    Evolution, PropagationMethod, Propagator, SweepOptions, SweepResult, WaveMethod, WaveOptions, WaveSign,
};
use friedrichs::families::{bump, gaussian, gaussian_packet, hermite, nodal_gaussian, DEFAULT_BUMP_SHARPNESS};
use friedrichs::grid::{make_grid, GridFunction, GridSpec};
use friedrichs::localization::{make_localization, LocalizationProfile, ProfileKind};
use friedrichs::resolvent::{boundary_matrix, point_spectrum, FiniteRankModel, Side, SpectrumOptions};
use friedrichs::scattering::{
    energy_grid, ew_time_delay, s_matrix, s_matrix_chain, s_prime, scattering_curve, spectral_shift_integral, ScatteringCurve,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn stationary_spec() -> GridSpec {
    make_grid(16.0, 2048).unwrap()
}

fn stationary_models() -> Vec<FiniteRankModel> {
    let spec = stationary_spec();
    let h = |n| hermite(spec, n, 0.2, 1.1);
    vec![
        FiniteRankModel::new(spec, vec![1.0], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap(),
        FiniteRankModel::new(spec, vec![0.8, -0.4], vec![h(0), h(1)], 10.0).unwrap(),
        FiniteRankModel::new(spec, vec![0.7, -0.5, 0.3], vec![h(0), h(1), h(2)], 10.0).unwrap(),
    ]
}

fn curve_for(model: &FiniteRankModel, points: usize) -> ScatteringCurve {
    let scan: Vec<f64> = (0..=300).map(|i| -3.0 + 0.02 * i as f64).collect();
    let ps = point_spectrum(model, &scan, SpectrumOptions::default(), None).unwrap();
    let excluded = ps.excluded();
    scattering_curve(model, &energy_grid(-2.5, 2.5, points, &excluded), &excluded).unwrap()
}

/// Deterministic points in `[a, b)` from a Weyl sequence.
fn weyl_points(n: usize, a: f64, b: f64) -> Vec<f64> {
    let alpha = 0.5 * (5f64.sqrt() - 1.0);
    (1..=n).map(|i| a + (b - a) * ((i as f64 * alpha) % 1.0)).collect()
}

fn ac1() -> Outcome {
    let spec = make_grid(8.0, 2048).unwrap();
    let states = [
        ("gaussian", gaussian_packet(spec, 0.3, 0.6, 0.8)),
        ("bump", bump(spec, 0.5, 0.25, DEFAULT_BUMP_SHARPNESS)),
    ];
    let profiles = [
        ("indicator", LocalizationProfile::indicator(1.0).unwrap()),
        (
            "smooth",
            make_localization(ProfileKind::SmoothBump {
                delta: 1.0,
                width: 1.0,
                rho: 3.0,
            })
            .unwrap(),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (_, phi) in &states {
        for (_, f) in &profiles {
            for r in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
                let exact = free_sojourn_analytic(phi, f, r);
                let num = free_sojourn_numeric(phi, f, r).unwrap().value;
                worst = worst.max((num - exact).abs() / exact);
            }
        }
    }
    outcome(worst <= 1e-4, format!("max relative error {worst:.2e} (limit 1e-4)"))
}

fn ac2_ac3() -> (Outcome, Outcome) {
    let mut unitarity: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for model in stationary_models() {
        let curve = curve_for(&model, 1001);
        unitarity = unitarity.max(curve.max_unitarity_defect());
        for p in &curve.points {
            cross = cross.max((p.s - s_matrix_chain(&model, p.x).unwrap()).norm());
        }
    }
    (
        outcome(unitarity <= 1e-8, format!("max ||S|-1| = {unitarity:.2e} over 1001 points, N = 1, 2, 3")),
        outcome(cross <= 1e-8, format!("max |S - D(-)/D(+)| = {cross:.2e}")),
    )
}

fn ac4() -> Outcome {
    let mut jump: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    for model in stationary_models() {
        let n = model.rank();
        for x in weyl_points(50, -3.0, 3.0) {
            let plus = boundary_matrix(&model, x, Side::Plus, 1).unwrap().matrix;
            let minus = boundary_matrix(&model, x, Side::Minus, 1).unwrap().matrix;
            for j in 0..n {
                for k in 0..n {
                    let g = model.vector_value(j, x, 0).conj() * model.vector_value(k, x, 0);
                    let expected = Complex64::new(0.0, 2.0 * PI) * g;
                    jump = jump.max((plus[(j, k)] - minus[(j, k)] - expected).norm());
                    symmetry = symmetry.max((minus[(j, k)] - plus[(k, j)].conj()).norm());
                }
            }
        }
    }
    let pass = jump <= 1e-6 && symmetry <= 1e-6;
    outcome(pass, format!("jump residual {jump:.2e}, conjugation residual {symmetry:.2e}"))
}

fn ac5() -> Outcome {
    let step = 1e-3;
    let mut s_err: f64 = 0.0;
    let mut r_err: f64 = 0.0;
    for model in stationary_models() {
        for x in weyl_points(20, -2.0, 2.0) {
            // fourth-order stencil: the two-point rule's truncation error is
            // comparable to the tolerance where |S'| is small
            let s = |y: f64| s_matrix(&model, y).unwrap();
            let fd = ((s(x + step) - s(x - step)) * 8.0 - (s(x + 2.0 * step) - s(x - 2.0 * step))) / (12.0 * step);
            let exact = s_prime(&model, x).unwrap();
            s_err = s_err.max((fd - exact).norm() / exact.norm().max(1e-300));
            let r2 = boundary_matrix(&model, x, Side::Plus, 2).unwrap().matrix;
            let up = boundary_matrix(&model, x + step, Side::Plus, 1).unwrap().matrix;
            let down = boundary_matrix(&model, x - step, Side::Plus, 1).unwrap().matrix;
            let n = model.rank();
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let d = (up[(j, k)] - down[(j, k)]) / (2.0 * step);
                    num += (d - r2[(j, k)]).norm_sqr();
                    den += r2[(j, k)].norm_sqr();
                }
            }
            r_err = r_err.max((num / den).sqrt());
        }
    }
    let pass = s_err <= 1e-5 && r_err <= 1e-5;
    outcome(pass, format!("S' relative error {s_err:.2e}, r2 relative error {r_err:.2e}"))
}

fn ac6() -> Outcome {
    let f = LocalizationProfile::indicator(1.0).unwrap();
    let indicator = IndicatorDensity { a: 1.0, b: 2.0 };
    let mut exact_err: f64 = 0.0;
    for r in [2.5, 3.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        for m in [PropagationMethod::ClosedForm, PropagationMethod::Direct] {
            exact_err = exact_err.max((propagation_functional(&indicator, &f, r, m).unwrap() - 3.0).abs());
        }
    }
    // a grid packet with Gaussian momentum density centered at 1
    let spec = make_grid(16.0, 2048).unwrap();
    let phi = gaussian_packet(spec, 0.0, 1.0, 1.0);
    let rho = SampledDensity::new(&phi).unwrap();
    let target = 2.0 * rho.mean_momentum() * rho.mass();
    let analytic_target = 2.0 * GaussianDensity { k0: 1.0, sigma: 1.0 }.mean_momentum();
    let sweep = [2.0, 4.0, 8.0, 16.0, 32.0];
    let gaps: Vec<f64> = sweep
        .iter()
        .map(|&r| (propagation_functional(&rho, &f, r, PropagationMethod::ClosedForm).unwrap() - target).abs())
        .collect();
    // values at round-off level are compared with a floor
    let floor = 1e-12;
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + floor);
    let at32 = gaps[4];
    let pass = exact_err <= 1e-8 && at32 <= 1e-6 && monotone && (target - analytic_target).abs() < 1e-10;
    outcome(
        pass,
        format!("indicator case max |I-3| = {exact_err:.2e}; Gaussian gaps {}, monotone {monotone}", sci(&gaps)),
    )
}

struct Headline {
    model: FiniteRankModel,
    prop: Propagator,
    curve: ScatteringCurve,
    phi: GridFunction,
    sweep: Result<SweepResult, String>,
    seconds: f64,
}

fn headline() -> Headline {
    let start = Instant::now();
    let spec = make_grid(8.0, 2048).unwrap();
    let model = FiniteRankModel::new(spec, vec![1.0], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap();
    let prop = build_propagator(&model, spec).unwrap();
    let curve = scattering_curve(&model, &energy_grid(0.0, 1.0, 1001, &[]), &[]).unwrap();
    let phi = bump(spec, 0.5, 0.25, DEFAULT_BUMP_SHARPNESS);
    let f = LocalizationProfile::indicator(1.0).unwrap();
    let sweep = time_delay_sweep(
        &prop,
        &model,
        &curve,
        &phi,
        (0.25, 0.75),
        &f,
        &[4.0, 8.0, 16.0, 32.0, 64.0],
        &SweepOptions::default(),
    )
    .map_err(|e| e.to_string());
    Headline {
        model,
        prop,
        curve,
        phi,
        sweep,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn ac7(h: &Headline) -> Outcome {
    let Ok(sweep) = &h.sweep else {
        return outcome(false, format!("sweep failed: {:?}", h.sweep.as_ref().err()));
    };
    let sym = sweep.records.iter().map(|s| (s.tau_in - s.tau_sym).abs()).fold(0.0, f64::max);
    let free = sweep.records.iter().map(|s| (s.t0_s - s.t0).abs()).fold(0.0, f64::max);
    outcome(sym <= 1e-6 && free <= 1e-6, format!("max |tau_in - tau_sym| = {sym:.2e}, max |T0(S phi) - T0(phi)| = {free:.2e}"))
}

fn ac8(h: &Headline) -> Outcome {
    let Ok(sweep) = &h.sweep else {
        return outcome(false, format!("sweep failed: {:?}", h.sweep.as_ref().err()));
    };
    let gaps: Vec<f64> = sweep.records.iter().map(|s| (s.tau_in - sweep.ew_value).abs()).collect();
    // the gap stalls at the discretization floor of the two computations
    let floor = 1e-8 * sweep.ew_value.abs();
    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0] + floor);
    let pass = sweep.rel_gap <= 0.02 && decreasing && h.seconds <= 300.0;
    outcome(
        pass,
        format!(
            "tau_inf = {:.10}, EW = {:.10}, rel gap {:.2e}, gaps {}, {:.0} s",
            sweep.extrapolation.tau_inf,
            sweep.ew_value,
            sweep.rel_gap,
            sci(&gaps),
            h.seconds
        ),
    )
}

fn ac9(h: &Headline) -> Outcome {
    let mut bk: f64 = 0.0;
    for model in stationary_models() {
        bk = bk.max(curve_for(&model, 401).max_birman_krein_residual());
    }
    bk = bk.max(h.curve.max_birman_krein_residual());
    let ew = ew_time_delay(&h.curve, &h.phi).unwrap();
    let shift = -2.0 * PI * spectral_shift_integral(&h.curve, &h.phi).unwrap();
    let integral = (ew - shift).abs();
    outcome(bk <= 1e-6 && integral <= 1e-8, format!("max |theta' + 2 pi xi'| = {bk:.2e}, integral form residual {integral:.2e}"))
}

fn ac10(h: &Headline) -> Outcome {
    let opts = WaveOptions::default();
    let sh = h.phi.spec().spacing().sqrt();
    let dist = |a: &GridFunction, b: &GridFunction| {
        a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() * sh
    };
    let mut agree: f64 = 0.0;
    let mut isometry: f64 = 0.0;
    let mut w_minus = None;
    for sign in [WaveSign::Minus, WaveSign::Plus] {
        let d = wave_operator(&h.prop, &h.model, &h.phi, sign, WaveMethod::Dressing, &opts);
        let c = wave_operator(&h.prop, &h.model, &h.phi, sign, WaveMethod::Cook, &opts);
        match (d, c) {
            (Ok(d), Ok(c)) => {
                agree = agree.max(dist(&d.state, &c.state));
                isometry = isometry.max((d.state.norm() - 1.0).abs()).max((c.state.norm() - 1.0).abs());
                if sign == WaveSign::Minus {
                    w_minus = Some(d.state);
                }
            }
            (d, c) => return outcome(false, format!("wave operator failed: {:?} / {:?}", d.err(), c.err())),
        }
    }
    let w_minus = w_minus.expect("computed above");
    let s = 1.0;
    let lhs = h.prop.evolve(&w_minus, s, Evolution::Full).unwrap();
    let shifted = h.prop.evolve(&h.phi, s, Evolution::Free).unwrap();
    let rhs = wave_operator(&h.prop, &h.model, &shifted, WaveSign::Minus, WaveMethod::Dressing, &opts).unwrap().state;
    let intertwining = dist(&lhs, &rhs);

    let spec = *h.phi.spec();
    let free = FiniteRankModel::free(spec);
    let free_prop = build_propagator(&free, spec).unwrap();
    let mut identity: f64 = 0.0;
    for sign in [WaveSign::Minus, WaveSign::Plus] {
        for m in [WaveMethod::Dressing, WaveMethod::Cook] {
            let w = wave_operator(&free_prop, &free, &h.phi, sign, m, &opts).unwrap();
            identity = identity.max(dist(&w.state, &h.phi));
        }
    }
    let pass = agree <= 1e-4 && isometry <= 1e-4 && intertwining <= 1e-4 && identity <= 1e-14;
    outcome(
        pass,
        format!(
            "Dressing vs Cook {agree:.2e}, isometry {isometry:.2e}, intertwining {intertwining:.2e}, free identity {identity:.1e}"
        ),
    )
}

fn ac11() -> Outcome {
    let spec = stationary_spec();
    let scan: Vec<f64> = (0..=400).map(|i| -4.0 + 0.02 * i as f64).collect();
    let mut spurious = Vec::new();
    for lambda in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
        let model = FiniteRankModel::new(spec, vec![lambda], vec![gaussian(spec, 0.0, 1.0)], 10.0).unwrap();
        let ps = point_spectrum(&model, &scan, SpectrumOptions::default(), None).unwrap();
        if !ps.eigenvalues.is_empty() {
            spurious.push((lambda, ps.eigenvalues));
        }
    }
    let nodal = FiniteRankModel::new(spec, vec![1.5], vec![nodal_gaussian(spec, 0.5)], 10.0).unwrap();
    let ps = point_spectrum(&nodal, &scan, SpectrumOptions::default(), None).unwrap();
    let found = ps.eigenvalues.len() == 1 && (ps.eigenvalues[0] - 0.5).abs() <= 1e-4;
    outcome(
        spurious.is_empty() && found,
        format!("Gaussian family spurious {spurious:?}; embedded case found {:?}", ps.eigenvalues),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: &str, o: Outcome, started: Instant| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failures += 1;
        }
        println!("{id} {tag}: {} [{:.1} s]", o.detail, started.elapsed().as_secs_f64());
    };
    let t = Instant::now();
    report("AC-1", ac1(), t);
    let t = Instant::now();
    let (a2, a3) = ac2_ac3();
    report("AC-2", a2, t);
    report("AC-3", a3, t);
    let t = Instant::now();
    report("AC-4", ac4(), t);
    let t = Instant::now();
    report("AC-5", ac5(), t);
    let t = Instant::now();
    report("AC-6", ac6(), t);
    let h = headline();
    let t = Instant::now();
    report("AC-7", ac7(&h), t);
    report("AC-8", ac8(&h), t);
    let t = Instant::now();
    report("AC-9", ac9(&h), t);
    let t = Instant::now();
    report("AC-10", ac10(&h), t);
    let t = Instant::now();
    report("AC-11", ac11(), t);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
