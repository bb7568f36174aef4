//! Acceptance criteria, one line each. Runs without the test harness and
//! exits non-zero only on unexpected failures.

use std::process::{Command, ExitCode};
use std::time::Instant;

use lossrate::models::cavity::{cavity_expansion, cavity_me, fock_state, number_operator, CavityParams};
use lossrate::models::dicke::{
    dicke_compare, dicke_fidelity_closed, dicke_fidelity_with, dicke_me, dicke_initial, thermal_rates, DickeParams,
};
use lossrate::models::jaynes_cummings::{
    jc_gamma_series, jc_interaction_me, jc_me, jc_psi0, JcParams,
};
use lossrate::models::two_level::{
    excited_population, population_exact, population_series, sigma_z_series, two_level_me, TwoLevelParams,
};
use lossrate::models::AtomObservable;
use lossrate::{
    assemble, default_grid, evolve, evolve_with, finite_difference_deviation, qubit_ops, rate_multiplier,
    solve_hierarchy, CVector, DensityMatrix, EvolveOptions, HilbertSpace, MasterEquation, MultiIndex, Operator,
    RateAssignment, RateParam, TimeGrid, Trajectory,
};
use lossrate_cli::scenario::{Hygiene, HERMITICITY_LIMIT, MIN_EIGENVALUE_LIMIT, TRACE_LIMIT};
use num_complex::Complex64;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Default)]
struct Tally {
    passed: usize,
    failed: Vec<String>,
    expected: Vec<String>,
    hygiene: Vec<(String, Hygiene)>,
}

impl Tally {
    fn record(&mut self, id: &str, ok: bool, what: &str) {
        println!("[{}] {id:<3} {what}", if ok { "PASS" } else { "FAIL" });
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_owned());
        }
    }

    /// A criterion that cannot hold under the model as specified.
    fn record_expected_failure(&mut self, id: &str, ok: bool, what: &str, why: &str) {
        if ok {
            self.record(id, true, what);
            return;
        }
        println!("[FAIL] {id:<3} {what} (expected: {why})");
        self.expected.push(id.to_owned());
    }

    fn check(&mut self, id: &str, what: &str, f: impl FnOnce(&mut Self) -> Res<bool>) {
        match f(self) {
            Ok(ok) => self.record(id, ok, what),
            Err(e) => self.record(id, false, &format!("{what}: error: {e}")),
        }
    }

    fn track(&mut self, label: &str, traj: &Trajectory<Operator>) {
        self.hygiene.push((label.to_owned(), Hygiene::of(traj)));
    }
}

fn info(msg: &str) {
    println!("       {msg}");
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn column(csv: &str, name: &str) -> Res<Vec<f64>> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or("empty csv")?;
    let idx = header
        .split(',')
        .position(|c| c == name)
        .ok_or_else(|| format!("no column {name}"))?;
    lines
        .map(|l| Ok(l.split(',').nth(idx).ok_or("short row")?.parse::<f64>()?))
        .collect()
}

fn criterion_1(t: &mut Tally) {
    let run = || -> Res<(f64, tempfile::TempDir)> {
        let dir = tempfile::tempdir()?;
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_lossrate"))
            .args(["fig1", "--out"])
            .arg(dir.path())
            .stdout(std::process::Stdio::null())
            .status()?;
        let secs = start.elapsed().as_secs_f64();
        if !status.success() {
            return Err(format!("fig1 exited with {status}").into());
        }
        Ok((secs, dir))
    };
    let (secs, dir) = match run() {
        Ok(x) => x,
        Err(e) => {
            t.record("1", false, &format!("fig1 run: {e}"));
            return;
        }
    };
    t.record("1a", secs < 10.0, &format!("fig1 completes in {secs:.2} s (< 10 s)"));
    for (id, gamma, tol) in [("1b", "0.01", 0.01), ("1c", "0.05", 0.05)] {
        t.check(id, &format!("fig1 gamma={gamma}: engine order-1 <sigma_x> vs exact <= {tol}"), |_| {
            let csv = std::fs::read_to_string(dir.path().join(format!("fig1_gamma_{gamma}.csv")))?;
            let exact = column(&csv, "sigmax_exact")?;
            let engine = column(&csv, "sigmax_engine_order1")?;
            let paper = column(&csv, "sigmax_paper_order1")?;
            let dev = max_abs(exact.iter().zip(&engine).map(|(a, b)| a - b));
            let paper_dev = max_abs(exact.iter().zip(&paper).map(|(a, b)| a - b));
            info(&format!("gamma={gamma}: engine {dev:.3e}, printed first-order form {paper_dev:.3e} (reported)"));
            Ok(dev <= tol)
        });
    }
}

fn criterion_2(t: &mut Tally) {
    t.check("2a", "series |sum_q (-gt)^j/j! - e^{-gt}| <= (gt)^{q+1}/(q+1)! + 1e-6", |_| {
        let mut ok = true;
        for gt in [0.1, 0.5, 1.0] {
            let p = TwoLevelParams::new(2.0, gt)?;
            for q in 1..=3usize {
                let bound = gt.powi(q as i32 + 1) / (1..=q + 1).product::<usize>() as f64 + 1e-6;
                ok &= (sigma_z_series(&p, 1.0, q) - (-gt).exp()).abs() <= bound;
                ok &= (population_series(&p, 1.0, q) - (-gt).exp()).abs() <= bound;
            }
        }
        Ok(ok)
    });
    let p = TwoLevelParams::new(2.0, 0.1).expect("valid");
    let me = two_level_me(&p).expect("valid");
    let grid = default_grid(&me, 0.0, 10.0).expect("valid");
    let traj = match evolve(&me, &p.initial, &grid) {
        Ok(traj) => traj,
        Err(e) => {
            t.record("2b", false, &format!("evolve: {e}"));
            return;
        }
    };
    t.track("two-level", &traj);
    t.check("2b", "exact <sigma+ sigma-> vs e^{-gt} <= 1e-7 at default steps", |_| {
        let pop = traj.expectation(&excited_population())?.re();
        let dev = max_abs(pop.iter().map(|(s, x)| x - population_exact(&p, s)));
        info(&format!("population deviation {dev:.3e} over {} steps", grid.steps()));
        Ok(dev <= 1e-7)
    });
    let sz = traj.expectation(&qubit_ops().sigma_z).map(|x| x.re());
    let dev = sz.map(|sz| max_abs(sz.iter().map(|(s, x)| x - (-p.gamma * s).exp())));
    t.record_expected_failure(
        "2c",
        matches!(dev, Ok(d) if d <= 1e-7),
        &format!("exact Pauli <sigma_z> vs e^{{-gt}} <= 1e-7: deviation {:.3e}", dev.unwrap_or(f64::NAN)),
        "the Pauli expectation decays as 2e^{-gt} - 1; e^{-gt} is the excited population",
    );
}

/// Floor below which a finite-difference deviation counts as exact
/// (the coefficient is identically zero and the stencil returns round-off).
const EXACT_FLOOR: f64 = 1e-10;

fn fd_sweep(t: &mut Tally, id: &str, label: &str, me: &MasterEquation, rho0: &DensityMatrix, steps: usize) {
    t.check(id, &format!("{label}: FD ratio in [2.5, 6] and deviation <= 1e-4 at h = 1e-3, all |alpha| <= 2"), |_| {
        let t1 = 4.0 / rate_multiplier(me);
        let grid = TimeGrid::new(0.0, t1, steps)?;
        let coeffs = solve_hierarchy(me, rho0, &grid, 2)?;
        let mut ok = true;
        let mut worst = (0.0f64, String::new());
        let mut ratios = (f64::INFINITY, f64::NEG_INFINITY);
        for alpha in coeffs.indices().iter().filter(|a| a.total_order() > 0) {
            let coarse = finite_difference_deviation(&coeffs, me, rho0, alpha, 1e-3)?;
            let fine = finite_difference_deviation(&coeffs, me, rho0, alpha, 5e-4)?;
            if coarse > worst.0 {
                worst = (coarse, alpha.to_string());
            }
            ok &= coarse <= 1e-4;
            if coarse.max(fine) > EXACT_FLOOR {
                let r = coarse / fine;
                ratios = (ratios.0.min(r), ratios.1.max(r));
                ok &= (2.5..=6.0).contains(&r);
            }
        }
        info(&format!(
            "{label}: t1 = {t1}, {} indices, worst {:.3e} at {}, ratios in [{:.3}, {:.3}]",
            coeffs.indices().len() - 1,
            worst.0,
            worst.1,
            ratios.0,
            ratios.1
        ));
        Ok(ok)
    });
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn superposed_jc(p: JcParams) -> lossrate::Result<JcParams> {
    p.with_initial_amplitudes(&[c(0.6, 0.0), c(0.0, 0.48)], &[c(0.0, 0.0), c(0.64, 0.0)])
}

fn criterion_3(t: &mut Tally) {
    let start = Instant::now();
    let p = TwoLevelParams::new(2.0, 0.0).expect("valid");
    fd_sweep(t, "3a", "two-level", &two_level_me(&p).expect("valid"), &p.initial, 800);

    let cav = CavityParams::new(1.0, 0.0, fock_state(4, 1).expect("valid")).expect("valid");
    fd_sweep(t, "3b", "cavity", &cavity_me(&cav).expect("valid"), &cav.initial, 600);

    let jc = superposed_jc(JcParams::new(1.0, 0.8, 0.5, 0.0, 0.0, 4).expect("valid")).expect("valid");
    fd_sweep(t, "3c", "jaynes-cummings", &jc_me(&jc).expect("valid"), &jc.initial_state(), 800);

    let d = DickeParams::new(2, 1, 1.0, 0.0, 0.0).expect("valid");
    fd_sweep(t, "3d", "dicke N=2", &dicke_me(&d).expect("valid"), &dicke_initial(2, 1).expect("valid"), 800);

    let secs = start.elapsed().as_secs_f64();
    t.record("3e", secs < 60.0, &format!("finite-difference suite in {secs:.1} s (< 60 s)"));
}

fn cavity_superposition(fock_dim: usize) -> lossrate::Result<DensityMatrix> {
    let amps = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.3, 0.4)];
    let v = CVector::from_fn(fock_dim, |i, _| amps.get(i).copied().unwrap_or_default());
    DensityMatrix::pure(&HilbertSpace::boson(fock_dim)?, &v)
}

fn criterion_4(t: &mut Tally) {
    t.check("4a", "cavity Fock recursion = engine coefficients to 1e-8, k <= 2, fock_dim 6", |t| {
        let mut worst = 0.0f64;
        for rho0 in [fock_state(6, 2)?, cavity_superposition(6)?] {
            let p = CavityParams::new(1.3, 0.05, rho0.clone())?;
            let me = cavity_me(&p)?;
            let grid = default_grid(&me, 0.0, 5.0)?;
            let rec = cavity_expansion(&p, 2, &grid)?;
            let eng = solve_hierarchy(&me, &rho0, &grid, 2)?;
            for k in 0..=2usize {
                let alpha = MultiIndex::from_params(1, &vec![RateParam::down(0); k]);
                let d = rec.derivative(k).ok_or("missing order")?;
                worst = worst.max(d.max_deviation(eng.get(&alpha).ok_or("missing index")?));
            }
            t.track("cavity", &evolve(&me, &rho0, &grid)?);
        }
        info(&format!("cavity recursion vs engine {worst:.3e}"));
        Ok(worst <= 1e-8)
    });
    t.check("4b", "cavity <n(t)> = n0 e^{-kappa t} to 1e-6 relative", |t| {
        let p = CavityParams::new(1.0, 0.2, fock_state(6, 2)?)?;
        let me = cavity_me(&p)?;
        let grid = default_grid(&me, 0.0, 10.0)?;
        let traj = evolve(&me, &p.initial, &grid)?;
        t.track("cavity", &traj);
        let n = traj.expectation(&number_operator(6)?)?.re();
        let rel = max_abs(n.iter().map(|(s, x)| x / (2.0 * (-0.2 * s).exp()) - 1.0));
        info(&format!("relative <n> deviation {rel:.3e}"));
        Ok(rel <= 1e-6)
    });
}

fn atom_observables() -> Vec<AtomObservable> {
    vec![
        AtomObservable::sigma_x(),
        AtomObservable::sigma_y(),
        AtomObservable::sigma_z(),
        AtomObservable::new(c(0.3, -0.7), c(-1.1, 0.2), 0.4),
    ]
}

fn criterion_5(t: &mut Tally) {
    t.check("5a", "JC coefficients involving kappa, traced with atom observables, <= 1e-9", |_| {
        let p = superposed_jc(JcParams::new(1.0, 0.8, 0.5, 0.02, 0.01, 4)?)?;
        let me = jc_interaction_me(&p)?;
        let grid = TimeGrid::new(0.0, 5.0, 500)?;
        let coeffs = solve_hierarchy(&me, &p.initial_state(), &grid, 2)?;
        let mut worst = 0.0f64;
        for alpha in coeffs.indices() {
            if alpha.involves(RateParam::down(1)) || alpha.involves(RateParam::up(1)) {
                for a in atom_observables() {
                    let tr = coeffs.traced(alpha, &a.operator(&p.space(), 0)?)?;
                    worst = worst.max(max_abs(tr.samples().iter().map(|z| z.norm())));
                }
            }
        }
        info(&format!("largest kappa trace {worst:.3e}"));
        Ok(worst <= 1e-9)
    });
    t.check("5b", "JC dressed closed form vs unitary evolve: |overlap - 1| <= 1e-8", |t| {
        let mut worst = 0.0f64;
        for &(n, delta, g) in &[(0usize, 0.0, 1.0), (1, 0.3, 0.7), (2, -0.5, 0.4), (0, 1.2, 0.9)] {
            let p = JcParams::new(1.0, 1.0 - delta, g, 0.0, 0.0, 5)?.with_number_state(n)?;
            let me = jc_me(&p)?;
            let grid = default_grid(&me, 0.0, 10.0)?;
            let opts = EvolveOptions {
                leakage_threshold: None,
                ..Default::default()
            };
            let traj = evolve_with(&me, &p.initial_state(), &grid, &opts)?;
            t.track("jaynes-cummings", &traj);
            for (s, rho) in traj.iter() {
                let psi = jc_psi0(&p, n, s)?;
                worst = worst.max((rho.matrix_element(&psi, &psi)?.re - 1.0).abs());
            }
        }
        info(&format!("worst overlap defect {worst:.3e}"));
        Ok(worst <= 1e-8)
    });
    t.check("5c", "JC resonant n=0: <sigma_z> = cos(2gt) to 1e-8", |t| {
        let g = 0.8;
        let p = JcParams::new(1.0, 1.0, g, 0.0, 0.0, 3)?;
        let me = jc_me(&p)?;
        let grid = default_grid(&me, 0.0, 20.0)?;
        let traj = evolve(&me, &p.initial_state(), &grid)?;
        t.track("jaynes-cummings", &traj);
        let sz = traj.expectation(&AtomObservable::sigma_z().operator(&p.space(), 0)?)?.re();
        let dev = max_abs(sz.iter().map(|(s, x)| x - (2.0 * g * s).cos()));
        info(&format!("vacuum Rabi deviation {dev:.3e}"));
        Ok(dev <= 1e-8)
    });
    t.check("5d", "JC gamma-series from engine coefficients vs evolve <= 1e-3, gamma = 1e-3 g, gt in [0, 20]", |t| {
        let g = 1.0;
        let p = JcParams::new(1.0, 1.0, g, 1e-3 * g, 0.0, 4)?.with_number_state(0)?;
        let me = jc_me(&p)?;
        let grid = TimeGrid::new(0.0, 20.0 / g, 4000)?;
        let exact = evolve(&me, &p.initial_state(), &grid)?;
        t.track("jaynes-cummings", &exact);
        let coeffs = solve_hierarchy(&me, &p.initial_state(), &grid, 2)?;
        let series = assemble(&coeffs, &RateAssignment::of(&me), 2)?;
        let mut worst = 0.0f64;
        let mut printed = 0.0f64;
        for a in [AtomObservable::sigma_x(), AtomObservable::sigma_y(), AtomObservable::sigma_z()] {
            let op = a.operator(&p.space(), 0)?;
            let e = exact.expectation(&op)?;
            let s = series.expectation(&op)?;
            worst = worst.max(max_abs(e.samples().iter().zip(s.samples()).map(|(x, y)| (x - y).norm())));
            let b = jc_gamma_series(&p, p.excited_amplitudes(), &a, &grid, 2)?;
            printed = printed.max(max_abs(e.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm())));
        }
        info(&format!("engine series {worst:.3e}; printed-B closed form gap {printed:.3e} (reported)"));
        Ok(worst <= 1e-3)
    });
}

fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .filter(|b| b.count_ones() as usize == m)
        .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
        .collect()
}

fn criterion_6(t: &mut Tally) {
    let start = Instant::now();
    t.check("6a", "Dicke fidelity permutation-invariant to 1e-10 for N = 1, 2, 3", |_| {
        let grid = TimeGrid::new(0.0, 3.0, 600)?;
        let mut worst = 0.0f64;
        for n in 1..=3 {
            for m in 0..=n {
                let p = DickeParams::new(n, m, 1.0, 0.3, 0.1)?;
                let sets = subsets(n, m);
                let base = dicke_fidelity_with(&p, &sets[0], &grid)?;
                for s in &sets[1..] {
                    worst = worst.max(base.max_abs_diff(&dicke_fidelity_with(&p, s, &grid)?));
                }
            }
        }
        info(&format!("largest permutation gap {worst:.3e}"));
        Ok(worst <= 1e-10)
    });
    t.check("6b", "thermal map: G(T -> 0) = 0 and K = G + 1 exactly", |_| {
        let mut ok = thermal_rates(1.0, 0.0)? == lossrate::models::dicke::ThermalRates { k: 1.0, g: 0.0 };
        ok &= thermal_rates(1.0, 1e-3)?.g == 0.0;
        for temp in [0.1, 0.5, 1.0, 3.0, 100.0] {
            let r = thermal_rates(1.0, temp)?;
            ok &= r.k == r.g + 1.0;
        }
        Ok(ok)
    });
    t.check("6c", "Dicke closed form vs evolve report is internally consistent (N = 1, 2, 3)", |t| {
        let grid = TimeGrid::new(0.0, 2.0, 400)?;
        let mut ok = true;
        for (n, m) in [(1, 1), (2, 1), (3, 2)] {
            let p = DickeParams::new(n, m, 1.0, 0.05, 0.02)?;
            let r = dicke_compare(&p, &grid, 1e-4)?;
            t.track("dicke", &evolve(&dicke_me(&p)?, &dicke_initial(n, m)?, &grid)?);
            for (k, s) in grid.times().into_iter().enumerate() {
                ok &= r.gap.samples()[k] == r.closed.samples()[k] - r.exact.samples()[k];
                ok &= r.closed.samples()[k] == dicke_fidelity_closed(&p, s);
                // The closed form is quadratic in each rate, so the one-sided
                // stencil (4F(h) - F(2h) - 3F(0)) / 2h is exact up to round-off.
                let h = 1e-3;
                let at = |k_: f64, g_: f64| -> lossrate::Result<f64> {
                    Ok(dicke_fidelity_closed(&DickeParams::new(n, m, 1.0, k_, g_)?, s))
                };
                let f0 = at(0.0, 0.0)?;
                let dk = (4.0 * at(h, 0.0)? - at(2.0 * h, 0.0)? - 3.0 * f0) / (2.0 * h);
                let dg = (4.0 * at(0.0, h)? - at(0.0, 2.0 * h)? - 3.0 * f0) / (2.0 * h);
                ok &= (dk - r.closed_slope_k.samples()[k]).abs() <= 1e-9;
                ok &= (dg - r.closed_slope_g.samples()[k]).abs() <= 1e-9;
            }
            let (gk, gg) = r.max_slope_gap();
            info(&format!(
                "N={n} m={m}: max |F_closed - F_exact| {:.3e}; slope gaps dF/dK {gk:.3e}, dF/dG {gg:.3e} (reported)",
                r.max_gap()
            ));
        }
        Ok(ok)
    });
    t.check("6d", "full Dicke suite at N = 3 in < 60 s", |t| {
        let s = Instant::now();
        let p = DickeParams::new(3, 2, 1.0, 0.05, 0.02)?;
        let me = dicke_me(&p)?;
        let grid = default_grid(&me, 0.0, 2.0)?;
        let rho0 = dicke_initial(3, 2)?;
        let traj = evolve(&me, &rho0, &grid)?;
        t.track("dicke", &traj);
        let coeffs = solve_hierarchy(&me, &rho0, &grid, 2)?;
        assemble(&coeffs, &RateAssignment::of(&me), 2)?;
        dicke_compare(&p, &grid, 1e-4)?;
        for set in subsets(3, 2) {
            dicke_fidelity_with(&p, &set, &grid)?;
        }
        let secs = s.elapsed().as_secs_f64();
        info(&format!("N=3 suite {secs:.2} s on {} steps; all Dicke checks {:.2} s", grid.steps(), start.elapsed().as_secs_f64()));
        Ok(secs < 60.0)
    });
}

fn criterion_7(t: &mut Tally) {
    let runs = t.hygiene.len();
    let worst = t.hygiene.iter().fold((0.0f64, 0.0f64, f64::INFINITY), |acc, (_, h)| {
        (
            acc.0.max(h.trace_deviation),
            acc.1.max(h.hermiticity_error),
            acc.2.min(h.min_eigenvalue),
        )
    });
    let ok = runs > 0 && worst.0 <= TRACE_LIMIT && worst.1 <= HERMITICITY_LIMIT && worst.2 >= MIN_EIGENVALUE_LIMIT;
    t.record(
        "7a",
        ok,
        &format!(
            "solver hygiene over {runs} gallery runs: trace {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}",
            worst.0, worst.1, worst.2
        ),
    );
    t.check("7b", "RK4 step-halving error ratio in [8, 32] on the decay benchmark", |_| {
        let p = TwoLevelParams::new(2.0, 0.1)?;
        let me = two_level_me(&p)?;
        let err = |steps| -> Res<f64> {
            let traj = evolve(&me, &p.initial, &TimeGrid::new(0.0, 10.0, steps)?)?;
            let pop = traj.expectation(&excited_population())?.re();
            Ok(max_abs(pop.iter().map(|(s, x)| x - population_exact(&p, s))))
        };
        let ratio = err(200)? / err(400)?;
        info(&format!("error ratio {ratio:.3}"));
        Ok((8.0..=32.0).contains(&ratio))
    });
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut t = Tally::default();
    criterion_1(&mut t);
    criterion_2(&mut t);
    criterion_3(&mut t);
    criterion_4(&mut t);
    criterion_5(&mut t);
    criterion_6(&mut t);
    criterion_7(&mut t);
    println!(
        "acceptance: {} passed, {} failed, {} expected failures ({}) in {:.1} s",
        t.passed,
        t.failed.len(),
        t.expected.len(),
        t.expected.join(", "),
        start.elapsed().as_secs_f64()
    );
    if t.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", t.failed.join(", "));
        ExitCode::FAILURE
    }
}
