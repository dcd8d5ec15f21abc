//! The cross-scheme verification report: every module's invariants evaluated
//! on a standard parameter grid, plus the adjudication table for the
//! data-gathering coherence channel.

use crate::cli::curves::{evaluate_curve, parse_csv, write_csv};
use crate::sim::{self, Scheme, TrialPlan};
use crate::states::{MeasBasis, NoiseModel, SignalEnsemble};
use crate::{adaptive, helstrom, qdg, voting};
use serde::Serialize;
use std::fmt::Write as _;

/// Standard grid and tolerances; `--grid`, `--tol`, `--trials`, `--seed`
/// override the fields.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub thetas: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub n_max: u32,
    pub tol: f64,
    pub mc_trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            thetas: vec![PI / 12.0, PI / 8.0, PI / 6.0, PI / 5.0],
            fidelities: vec![0.8, 0.95, 0.99, 0.999, 1.0],
            n_max: 200,
            tol: 1e-12,
            mc_trials: 1_000_000,
            seed: 7,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteValue {
    pub route: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub asserted: bool,
    pub pass: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Grid point at which the worst deviation occurred.
    pub inputs: String,
    /// Values from each route at the worst point.
    pub routes: Vec<RouteValue>,
    pub notes: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BChannelRow {
    pub theta: f64,
    pub fidelity: f64,
    pub n: u32,
    pub oracle: f64,
    pub update_rule: f64,
    pub closed_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho2_printed: Option<f64>,
    pub max_pairwise_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub target_os: String,
    pub target_arch: String,
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub seed: u64,
    pub thetas: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub n_max: u32,
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
    pub b_channel_table: Vec<BChannelRow>,
    pub b_channel_verdict: String,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serialisable");
        s.push('\n');
        s
    }

    /// One line per check, the CLI's stdout format.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if !c.asserted {
                "INFO"
            } else if c.pass {
                "PASS"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                out,
                "[{tag}] {}: max_dev={:.3e} tol={:.1e}{}",
                c.id,
                c.max_deviation,
                c.tolerance,
                if c.inputs.is_empty() {
                    String::new()
                } else {
                    format!(" worst at {}", c.inputs)
                }
            );
        }
        let _ = writeln!(
            out,
            "verification {}",
            if self.passed { "PASSED" } else { "FAILED" }
        );
        out
    }
}

/// Tracks the worst deviation seen, with its inputs and route values.
struct Worst {
    dev: f64,
    inputs: String,
    routes: Vec<RouteValue>,
}

impl Worst {
    fn new() -> Self {
        Self {
            dev: f64::NEG_INFINITY,
            inputs: String::new(),
            routes: vec![],
        }
    }

    fn observe(&mut self, dev: f64, inputs: String, routes: Vec<(&str, f64)>) {
        if dev > self.dev || self.inputs.is_empty() {
            self.dev = self.dev.max(dev);
            self.inputs = inputs;
            self.routes = routes
                .into_iter()
                .map(|(route, value)| RouteValue {
                    route: route.to_string(),
                    value,
                })
                .collect();
        }
    }

    fn entry(self, id: &str, asserted: bool, tolerance: f64, notes: &str) -> CheckEntry {
        CheckEntry {
            id: id.to_string(),
            asserted,
            pass: self.dev <= tolerance,
            max_deviation: self.dev,
            tolerance,
            inputs: self.inputs,
            routes: self.routes,
            notes: notes.to_string(),
        }
    }
}

fn ens(theta: f64) -> SignalEnsemble {
    SignalEnsemble::equal_priors(theta).expect("grid theta")
}

fn nm(f: f64) -> NoiseModel {
    NoiseModel::new(f).expect("grid fidelity")
}

fn noisy(fidelities: &[f64]) -> impl Iterator<Item = f64> + '_ {
    fidelities.iter().copied().filter(|f| *f < 1.0)
}

/// Run the full suite.
pub fn run_report(opts: &VerifyOptions) -> VerificationReport {
    let mut checks = vec![
        states_displacement_identity(opts),
        states_mixed_equals_noise_average(opts),
        states_density_invariants(opts),
        helstrom_basis_noise_independent(opts),
        helstrom_dominates_random_bases(opts),
        helstrom_bound_monotone(opts),
        adaptive_route_equivalence(opts),
        adaptive_mc_agreement(opts),
        adaptive_pure_state_optimality(opts),
        adaptive_limit_convergence(opts),
        adaptive_failure_relaxation(opts),
        adaptive_record_majority_log_decay(opts),
        qdg_unitarity_and_probe_identities(opts),
        qdg_gathering_property(opts),
        qdg_kraus_completeness(opts),
        qdg_a_channel_equivalence(opts),
        qdg_oracle_physicality(opts),
        qdg_limit_convergence(opts),
        local_beats_collective(opts),
        voting_error_monotone(opts),
        voting_chernoff_fit(opts),
        voting_fig1_crossings(opts),
        sim_determinism(opts),
        sim_worker_invariance(opts),
        sim_coverage_calibration(opts),
        cli_csv_round_trip(opts),
    ];
    let (table, verdict, b_entry) = b_channel_adjudication(opts);
    checks.push(b_entry);
    let passed = checks.iter().all(|c| !c.asserted || c.pass);
    VerificationReport {
        environment: Environment {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            target_os: std::env::consts::OS.to_string(),
            target_arch: std::env::consts::ARCH.to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
        seed: opts.seed,
        thetas: opts.thetas.clone(),
        fidelities: opts.fidelities.clone(),
        n_max: opts.n_max,
        tolerance: opts.tol,
        passed,
        checks,
        b_channel_table: table,
        b_channel_verdict: verdict,
    }
}

fn states_displacement_identity(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for k in 0..2u8 {
            for i in 0..41 {
                let delta = -std::f64::consts::PI + f64::from(i) * std::f64::consts::PI / 20.0;
                let tilted = e.displaced_state(k, delta);
                let psi = e.pure_state(k);
                let perp = e.pure_state_perp(k);
                let r0 = tilted.amp0 - (delta.cos() * psi.amp0 - delta.sin() * perp.amp0);
                let r1 = tilted.amp1 - (delta.cos() * psi.amp1 - delta.sin() * perp.amp1);
                worst.observe(
                    r0.abs().max(r1.abs()),
                    format!("theta={theta} k={k} delta={delta:.3}"),
                    vec![("residual0", r0), ("residual1", r1)],
                );
            }
        }
    }
    worst.entry(
        "states_displacement_identity",
        true,
        opts.tol,
        "displaced state equals cos(d) psi_k - sin(d) psi_k_perp",
    )
}

fn states_mixed_equals_noise_average(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for f in noisy(&opts.fidelities) {
            let rho = e.mixed_state(0, &nm(f));
            let d = f.sqrt().acos();
            let plus = e.displaced_state(0, d).projector();
            let minus = e.displaced_state(0, -d).projector();
            let dev = [
                0.5 * (plus.m00 + minus.m00) - rho.m00,
                0.5 * (plus.m01 + minus.m01) - rho.m01,
                0.5 * (plus.m11 + minus.m11) - rho.m11,
            ]
            .iter()
            .fold(0.0f64, |a, b| a.max(b.abs()));
            worst.observe(
                dev,
                format!("theta={theta} F={f}"),
                vec![("mixed_m01", rho.m01), ("average_m01", 0.5 * (plus.m01 + minus.m01))],
            );
        }
    }
    worst.entry(
        "states_mixed_equals_noise_average",
        true,
        1e-10,
        "averaging projectors over a symmetric two-point displacement with <cos^2 d> = F reproduces the mixed state",
    )
}

fn states_density_invariants(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            for k in 0..2u8 {
                let rho = e.mixed_state(k, &nm(f));
                let dev = (rho.trace() - 1.0)
                    .abs()
                    .max(-rho.determinant())
                    .max(-rho.m00);
                worst.observe(
                    dev.max(0.0),
                    format!("theta={theta} F={f} k={k}"),
                    vec![("trace", rho.trace()), ("det", rho.determinant())],
                );
            }
        }
    }
    worst.entry(
        "states_density_invariants",
        true,
        opts.tol,
        "all mixed states are unit-trace and PSD",
    )
}

fn helstrom_basis_noise_independent(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        let mut phis = vec![];
        for &f in &opts.fidelities {
            let noise = nm(f.max(0.6));
            let r = helstrom::optimal_measurement(
                0.5,
                &e.mixed_state(0, &noise),
                &e.mixed_state(1, &noise),
            );
            phis.push((f, r.basis.phi()));
        }
        for w in phis.windows(2) {
            worst.observe(
                (w[0].1 - w[1].1).abs(),
                format!("theta={theta} F={} vs F={}", w[0].0, w[1].0),
                vec![("phi_lo", w[0].1), ("phi_hi", w[1].1)],
            );
        }
    }
    worst.entry(
        "helstrom_basis_noise_independent",
        true,
        opts.tol,
        "equal priors: the mixed-state Helstrom basis does not depend on F",
    )
}

fn helstrom_dominates_random_bases(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let noise = nm(f);
            let rho0 = e.mixed_state(0, &noise);
            let rho1 = e.mixed_state(1, &noise);
            for p0 in [0.3, 0.5, 0.7] {
                let best = helstrom::optimal_measurement(p0, &rho0, &rho1).p_success;
                let mut phi = opts.seed as f64 + theta;
                for _ in 0..64 {
                    phi = (phi * 1.618_033_988_749_895 + 0.382).rem_euclid(std::f64::consts::PI);
                    let basis = MeasBasis::new(phi);
                    let a = rho0.outcome_probs(&basis);
                    let b = rho1.outcome_probs(&basis);
                    let fixed = (p0 * a.0).max((1.0 - p0) * b.0)
                        + (p0 * a.1).max((1.0 - p0) * b.1);
                    worst.observe(
                        (fixed - best).max(0.0),
                        format!("theta={theta} F={f} p0={p0} phi={phi:.4}"),
                        vec![("optimal", best), ("random_basis", fixed)],
                    );
                }
            }
        }
    }
    worst.entry(
        "helstrom_dominates_random_bases",
        true,
        opts.tol,
        "optimal measurement beats 64 random projective bases at every grid point",
    )
}

fn helstrom_bound_monotone(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    let mut thetas = opts.thetas.clone();
    thetas.sort_by(f64::total_cmp);
    for w in thetas.windows(2) {
        for n in 1..=50u32 {
            let lo = helstrom::bound_pure_multi(&ens(w[0]), n).expect("n >= 1");
            let hi = helstrom::bound_pure_multi(&ens(w[1]), n).expect("n >= 1");
            worst.observe(
                (lo - hi).max(0.0),
                format!("theta {} -> {} N={n}", w[0], w[1]),
                vec![("lower_theta", lo), ("higher_theta", hi)],
            );
        }
    }
    for &theta in &thetas {
        let e = ens(theta);
        let mut prev = 0.5;
        for n in 1..=200u32 {
            let here = helstrom::bound_pure_multi(&e, n).expect("n >= 1");
            worst.observe(
                (prev - here).max(0.0),
                format!("theta={theta} N={n}"),
                vec![("previous", prev), ("current", here)],
            );
            prev = here;
        }
    }
    worst.entry(
        "helstrom_bound_monotone",
        true,
        opts.tol,
        "multi-copy bound is nondecreasing in N and theta",
    )
}

fn adaptive_route_equivalence(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let noise = nm(f);
            let dp = adaptive::success_dp_curve(opts.n_max, &e, &noise).expect("grid point");
            for n in 1..=opts.n_max {
                let closed = adaptive::success_closed(n, &e, &noise).expect("equal priors");
                let rec = adaptive::success_recursion(n, &e, &noise).expect("equal priors");
                let dpv = dp[(n - 1) as usize];
                let dev = (closed - rec).abs().max((closed - dpv).abs());
                worst.observe(
                    dev,
                    format!("theta={theta} F={f} N={n}"),
                    vec![("closed", closed), ("recursion", rec), ("dp", dpv)],
                );
            }
        }
    }
    worst.entry(
        "adaptive_route_equivalence",
        true,
        opts.tol,
        "closed form, recursion and chain DP agree over the full grid",
    )
}

fn adaptive_mc_agreement(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    let noisy_f: Vec<f64> = noisy(&opts.fidelities).take(3).collect();
    let mut i = 0usize;
    for &theta in &opts.thetas {
        for &f in &noisy_f {
            let n = [2u32, 5, 10][i % 3];
            i += 1;
            let e = ens(theta);
            let noise = nm(f);
            let plan = TrialPlan {
                scheme: Scheme::Adaptive,
                ensemble: e,
                noise,
                n_copies: n,
                trials: opts.mc_trials,
                seed: opts.seed.wrapping_add(i as u64),
                workers: opts.workers,
            };
            let reference = adaptive::success_closed(n, &e, &noise).expect("equal priors");
            let est = sim::run(&plan).expect("valid plan");
            let v = sim::compare(&est, reference, 3.0);
            worst.observe(
                v.z.abs(),
                format!("theta={theta} F={f} N={n} trials={}", opts.mc_trials),
                vec![("closed", reference), ("monte_carlo", est.p_hat)],
            );
        }
    }
    worst.entry(
        "adaptive_mc_agreement",
        true,
        3.0,
        "Monte Carlo matches the closed form within 3 binomial standard errors at 12 sampled grid points (deviation column is |z|)",
    )
}

fn adaptive_pure_state_optimality(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    let noise = nm(1.0);
    for p0 in [0.3, 0.5, 0.7] {
        for &theta in &opts.thetas {
            let e = SignalEnsemble::new(theta, p0).expect("grid theta");
            let dp = adaptive::success_dp_curve(30, &e, &noise).expect("pure states");
            for (idx, got) in dp.iter().enumerate() {
                let n = idx as u32 + 1;
                let want = helstrom::bound_pure_multi(&e, n).expect("n >= 1");
                worst.observe(
                    (got - want).abs(),
                    format!("theta={theta} p0={p0} N={n}"),
                    vec![("dp", *got), ("helstrom", want)],
                );
            }
        }
    }
    worst.entry(
        "adaptive_pure_state_optimality",
        true,
        opts.tol,
        "perfect preparation: the adaptive scheme attains the multi-copy Helstrom bound for all tested priors",
    )
}

fn adaptive_limit_convergence(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        let c = e.overlap().powi(2);
        for &f in &opts.fidelities {
            let noise = nm(f);
            let limit = adaptive::asymptotic_limit(theta, &noise).expect("theta > 0");
            for n in [50u32, 100, 150, 200] {
                let diff =
                    (adaptive::success_closed(n, &e, &noise).expect("equal priors") - limit).abs();
                let bound = c.powi(n as i32) + 1e-13;
                worst.observe(
                    diff / bound,
                    format!("theta={theta} F={f} N={n}"),
                    vec![("abs_difference", diff), ("bound", bound)],
                );
            }
        }
    }
    worst.entry(
        "adaptive_limit_convergence",
        true,
        1.0,
        "|closed(N) - limit| <= cos^(2N) 2theta + 1e-13 (the exact decay rate; the naive (2F-1)-rate bound is not achievable, deviation column is the ratio)",
    )
}

fn adaptive_failure_relaxation(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        let c = e.overlap().powi(2);
        for &f in &opts.fidelities {
            let curve = adaptive::success_dp_curve(opts.n_max, &e, &nm(f)).expect("grid point");
            for (i, w) in curve.windows(2).enumerate() {
                let allowance = 2.0 * c.powi(i as i32 + 1) + 1e-13;
                worst.observe(
                    (w[0] - w[1]) / allowance,
                    format!("theta={theta} F={f} N={}", i + 1),
                    vec![("success_n", w[0]), ("success_n_plus_1", w[1])],
                );
            }
        }
    }
    worst.entry(
        "adaptive_failure_relaxation",
        true,
        1.0,
        "failure is nonincreasing up to the plateau-relaxation allowance 2 cos^(2N) 2theta; the exact curve overshoots the plateau and is not strictly monotone",
    )
}

fn adaptive_record_majority_log_decay(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    const FLOOR: f64 = 1e-14;
    for &theta in &opts.thetas {
        let e = ens(theta);
        for f in noisy(&opts.fidelities) {
            let curve = adaptive::record_majority_curve(161, &e, &nm(f)).expect("grid point");
            let e81 = 1.0 - curve[80];
            let e161 = 1.0 - curve[160];
            let dev = if e161 <= FLOOR {
                // error below numeric resolution; decay cannot be resolved
                -1.0
            } else {
                e161.ln() - e81.max(FLOOR).ln()
            };
            worst.observe(
                dev.max(-1.0),
                format!("theta={theta} F={f}"),
                vec![("error_81", e81), ("error_161", e161)],
            );
        }
    }
    worst.entry(
        "adaptive_record_majority_log_decay",
        true,
        -1e-6,
        "log error of the record-majority rule keeps decaying from N=81 to N=161 (points whose error underflows f64 resolution count as decayed)",
    )
}

fn qdg_unitarity_and_probe_identities(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let c = (2.0 * theta).cos();
        for n in 1..=opts.n_max {
            let b = qdg::probe_basis(n, theta);
            let id1 = (b.cos_double() - c.powi(n as i32)).abs();
            let id2 = (b.sin_double() - (1.0 - c.powi(2 * n as i32)).max(0.0).sqrt()).abs();
            worst.observe(
                id1.max(id2),
                format!("theta={theta} n={n} (probe identities)"),
                vec![("cos_double", b.cos_double()), ("overlap_power", c.powi(n as i32))],
            );
            if n >= 2 {
                let defect = qdg::build_unitary(n, theta)
                    .expect("theta > 0")
                    .orthogonality_defect();
                worst.observe(
                    defect,
                    format!("theta={theta} n={n} (orthogonality)"),
                    vec![("defect", defect)],
                );
            }
        }
    }
    worst.entry(
        "qdg_unitarity_and_probe_identities",
        true,
        opts.tol,
        "U^T U = I and the theta_n trigonometric identities hold across the grid",
    )
}

fn qdg_gathering_property(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    let mut p2_residual: f64 = 0.0;
    let mut state = opts.seed | 1;
    for _ in 0..50 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let n = 2 + (state >> 33) as u32 % 40;
        let theta = 0.05 + (state >> 11 & 0xffff) as f64 / 65535.0 * 0.70;
        let k = (state >> 1 & 1) as u8;
        let e = ens(theta);
        let u = qdg::build_unitary(n, theta).expect("theta > 0");
        let sig = e.pure_state(k);
        let probe = qdg::probe_basis(n - 1, theta).state(k);
        let got = u.apply(&[
            sig.amp0 * probe.amp0,
            sig.amp0 * probe.amp1,
            sig.amp1 * probe.amp0,
            sig.amp1 * probe.amp1,
        ]);
        let want_probe = qdg::probe_basis(n, theta).state(k);
        let want = [want_probe.amp0, want_probe.amp1, 0.0, 0.0];
        let dev = got
            .iter()
            .zip(&want)
            .fold(0.0f64, |a, (g, w)| a.max((g - w).abs()));
        worst.observe(
            dev,
            format!("theta={theta:.4} n={n} k={k}"),
            vec![("residual", dev)],
        );
        // the perpendicular analogue cannot hold for any unitary; record its size
        let sigp = e.pure_state_perp(k);
        let probep = qdg::probe_basis(n - 1, theta).state_perp(k);
        let gotp = u.apply(&[
            sigp.amp0 * probep.amp0,
            sigp.amp0 * probep.amp1,
            sigp.amp1 * probep.amp0,
            sigp.amp1 * probep.amp1,
        ]);
        let wantp_probe = qdg::probe_basis(n, theta).state_perp(k);
        let wantp = [0.0, 0.0, wantp_probe.amp0, wantp_probe.amp1];
        p2_residual = gotp
            .iter()
            .zip(&wantp)
            .fold(p2_residual, |a, (g, w)| a.max((g - w).abs()));
    }
    let notes = format!(
        "U maps signal x probe onto |0> x (next probe) exactly; the perpendicular counterpart is \
         inconsistent with unitarity (its residual over the same samples is {p2_residual:.3}) \
         and is reported, not asserted"
    );
    worst.entry("qdg_gathering_property", true, opts.tol, &notes)
}

fn qdg_kraus_completeness(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    let mut state = opts.seed | 1;
    for _ in 0..50 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let n = 2 + (state >> 33) as u32 % 30;
        let theta = 0.05 + (state >> 11 & 0xffff) as f64 / 65535.0 * 0.70;
        let k = (state >> 1 & 1) as u8;
        let delta = ((state >> 17 & 0xffff) as f64 / 65535.0 - 0.5) * 2.0;
        let pair = qdg::kraus_pair(n, &ens(theta), k, delta).expect("theta > 0");
        for row in 0..2 {
            for col in 0..2 {
                let mut acc = 0.0;
                for m in &pair {
                    for r in 0..2 {
                        acc += m[r][row] * m[r][col];
                    }
                }
                worst.observe(
                    (acc - f64::from(row == col)).abs(),
                    format!("theta={theta:.4} n={n} k={k} delta={delta:.3}"),
                    vec![("gram_entry", acc)],
                );
            }
        }
    }
    worst.entry(
        "qdg_kraus_completeness",
        true,
        1e-10,
        "sum_i M_i^T M_i = I for Kraus operators at fixed displacement",
    )
}

fn qdg_a_channel_equivalence(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let noise = nm(f);
            let mut rho = e.mixed_state(0, &noise);
            let mut kr = qdg::ProbeCoeffs::initial(0, &noise);
            for n in 2..=100u32 {
                rho = qdg::oracle_step(&rho, n, &e, 0, &noise).expect("theta > 0");
                kr = qdg::kraus_step(&kr, &e, &noise).expect("theta > 0");
                let a_oracle = rho.expectation(&qdg::probe_basis(n, theta).state(0));
                let a_closed = qdg::coeffs_closed(n, &e, 0, &noise).expect("theta > 0").a;
                let dev = (a_oracle - kr.a).abs().max((a_oracle - a_closed).abs());
                worst.observe(
                    dev,
                    format!("theta={theta} F={f} N={n}"),
                    vec![
                        ("oracle", a_oracle),
                        ("update_rule", kr.a),
                        ("closed_form", a_closed),
                    ],
                );
            }
        }
    }
    worst.entry(
        "qdg_a_channel_equivalence",
        true,
        opts.tol,
        "diagonal coefficient: unitary oracle, Kraus recursion and closed form A_N agree, N <= 100",
    )
}

fn qdg_oracle_physicality(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let noise = nm(f);
            for k in 0..2u8 {
                let mut rho = e.mixed_state(k, &noise);
                for n in 2..=opts.n_max {
                    rho = qdg::oracle_step(&rho, n, &e, k, &noise).expect("theta > 0");
                    let defect = (rho.trace() - 1.0)
                        .abs()
                        .max(-rho.determinant())
                        .max(-rho.m00)
                        .max(0.0);
                    worst.observe(
                        defect,
                        format!("theta={theta} F={f} k={k} N={n}"),
                        vec![("trace", rho.trace()), ("det", rho.determinant())],
                    );
                }
            }
        }
    }
    worst.entry(
        "qdg_oracle_physicality",
        true,
        opts.tol,
        "oracle probe states stay unit-trace and PSD along every chain",
    )
}

fn qdg_limit_convergence(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for f in noisy(&opts.fidelities) {
            let noise = nm(f);
            let got = qdg::oracle_success(200, &e, &noise).expect("grid point");
            let want = adaptive::asymptotic_limit(theta, &noise).expect("theta > 0");
            worst.observe(
                (got - want).abs(),
                format!("theta={theta} F={f} N=200"),
                vec![("oracle", got), ("limit", want)],
            );
        }
    }
    worst.entry(
        "qdg_limit_convergence",
        true,
        1e-6,
        "oracle success at N=200 sits on the common asymptotic limit",
    )
}

fn local_beats_collective(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for f in noisy(&opts.fidelities) {
            let noise = nm(f);
            let local = adaptive::success_dp_curve(100, &e, &noise).expect("grid point");
            let collective = qdg::oracle_success_curve(100, &e, &noise).expect("grid point");
            for n in 0..100usize {
                worst.observe(
                    (collective[n] - local[n]).max(0.0),
                    format!("theta={theta} F={f} N={}", n + 1),
                    vec![("adaptive", local[n]), ("qdg", collective[n])],
                );
            }
        }
    }
    worst.entry(
        "local_beats_collective",
        true,
        1e-12,
        "the local adaptive scheme never trails the collective scheme by more than rounding, F < 1, N <= 100",
    )
}

fn voting_error_monotone(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let q = voting::per_copy_q(&e, &nm(f)).expect("equal priors");
            let err = |n: u32| voting::majority_error_ln(&voting::VoteConfig::new(n, q)).exp();
            let mut n = 1u32;
            while n + 2 <= 101 {
                worst.observe(
                    err(n + 2) - err(n),
                    format!("theta={theta} F={f} odd n={n}"),
                    vec![("error_n", err(n)), ("error_n_plus_2", err(n + 2))],
                );
                n += 2;
            }
            for m in 1..=50u32 {
                worst.observe(
                    err(2 * m + 1) - err(2 * m),
                    format!("theta={theta} F={f} even n={}", 2 * m),
                    vec![("error_even", err(2 * m)), ("error_next_odd", err(2 * m + 1))],
                );
            }
        }
    }
    worst.entry(
        "voting_error_monotone",
        true,
        1e-14,
        "majority error is nonincreasing over odd n and even-n fair-coin values interleave (error(2m) >= error(2m+1))",
    )
}

fn voting_chernoff_fit(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    for &theta in &opts.thetas {
        let e = ens(theta);
        for &f in &opts.fidelities {
            let q = voting::per_copy_q(&e, &nm(f)).expect("equal priors");
            if q >= 1.0 {
                continue;
            }
            let fitted = voting::fitted_exponent(q, 201, 2001);
            let want = voting::chernoff_exponent(q);
            worst.observe(
                (fitted - want).abs() / want,
                format!("theta={theta} F={f} q={q:.6}"),
                vec![("fitted", fitted), ("chernoff", want)],
            );
        }
    }
    worst.entry(
        "voting_chernoff_fit",
        true,
        0.02,
        "fitted log-error slope over odd n in [201, 2001] matches the Chernoff exponent within 2% (deviation column is relative)",
    )
}

fn voting_fig1_crossings(opts: &VerifyOptions) -> CheckEntry {
    let mut worst = Worst::new();
    // Small noise: voting is worse than the adaptive scheme at small N.
    {
        let theta = std::f64::consts::PI / 12.0;
        let e = ens(theta);
        let noise = nm(0.999);
        let q = voting::per_copy_q(&e, &noise).expect("equal priors");
        for n in 2..=5u32 {
            let v_err = voting::majority_error_ln(&voting::VoteConfig::new(n, q)).exp();
            let a_err = 1.0 - adaptive::success_closed(n, &e, &noise).expect("equal priors");
            worst.observe(
                a_err - v_err,
                format!("theta=pi/12 F=0.999 N={n} (voting should trail)"),
                vec![("voting_error", v_err), ("adaptive_error", a_err)],
            );
        }
    }
    // More noise: voting eventually beats the common plateau.
    for &theta in &opts.thetas {
        let e = ens(theta);
        let noise = nm(0.95);
        let q = voting::per_copy_q(&e, &noise).expect("equal priors");
        let plateau_err = 1.0 - adaptive::asymptotic_limit(theta, &noise).expect("theta > 0");
        let mut best = f64::INFINITY;
        let mut n = 1u32;
        while n <= 1001 {
            best = best.min(voting::majority_error_ln(&voting::VoteConfig::new(n, q)).exp());
            n += 2;
        }
        worst.observe(
            best - plateau_err,
            format!("theta={theta} F=0.95 (min voting error vs plateau)"),
            vec![("min_voting_error", best), ("plateau_error", plateau_err)],
        );
    }
    worst.entry(
        "voting_fig1_crossings",
        true,
        0.0,
        "at (pi/12, F=0.999) voting errs more than the adaptive scheme for N <= 5; at F=0.95 voting drops below the schemes' common plateau by N <= 1001",
    )
}

fn sim_determinism(opts: &VerifyOptions) -> CheckEntry {
    let plan = TrialPlan {
        scheme: Scheme::Adaptive,
        ensemble: ens(opts.thetas[0]),
        noise: nm(0.95),
        n_copies: 4,
        trials: 50_000,
        seed: opts.seed,
        workers: opts.workers,
    };
    let a = sim::run(&plan).expect("valid plan");
    let b = sim::run(&plan).expect("valid plan");
    let mut worst = Worst::new();
    worst.observe(
        if a.p_hat.to_bits() == b.p_hat.to_bits() {
            0.0
        } else {
            (a.p_hat - b.p_hat).abs().max(f64::MIN_POSITIVE)
        },
        format!("seed={} trials=50000", opts.seed),
        vec![("first_run", a.p_hat), ("second_run", b.p_hat)],
    );
    worst.entry(
        "sim_determinism",
        true,
        0.0,
        "identical plans give bit-identical estimates",
    )
}

fn sim_worker_invariance(opts: &VerifyOptions) -> CheckEntry {
    let mut plan = TrialPlan {
        scheme: Scheme::Qdg,
        ensemble: ens(opts.thetas[opts.thetas.len() - 1]),
        noise: nm(0.9),
        n_copies: 3,
        trials: 50_000,
        seed: opts.seed,
        workers: 1,
    };
    let reference = sim::run(&plan).expect("valid plan");
    let mut worst = Worst::new();
    for workers in [4usize, 8] {
        plan.workers = workers;
        let est = sim::run(&plan).expect("valid plan");
        worst.observe(
            if est.p_hat.to_bits() == reference.p_hat.to_bits() {
                0.0
            } else {
                (est.p_hat - reference.p_hat).abs().max(f64::MIN_POSITIVE)
            },
            format!("workers 1 vs {workers}"),
            vec![("one_worker", reference.p_hat), ("many_workers", est.p_hat)],
        );
    }
    worst.entry(
        "sim_worker_invariance",
        true,
        0.0,
        "aggregates are identical for 1, 4 and 8 workers",
    )
}

fn sim_coverage_calibration(opts: &VerifyOptions) -> CheckEntry {
    let e = ens(opts.thetas[opts.thetas.len() - 1]);
    let noise = nm(0.95);
    let reference = adaptive::success_dp(3, &e, &noise).expect("grid point");
    let mut outliers = 0u32;
    let mut worst_z: f64 = 0.0;
    for i in 0..200u64 {
        let plan = TrialPlan {
            scheme: Scheme::Adaptive,
            ensemble: e,
            noise,
            n_copies: 3,
            trials: 10_000,
            seed: opts.seed.wrapping_add(1000 + i),
            workers: opts.workers,
        };
        let est = sim::run(&plan).expect("valid plan");
        let v = sim::compare(&est, reference, 3.0);
        worst_z = worst_z.max(v.z.abs());
        outliers += u32::from(!v.pass);
    }
    let mut worst = Worst::new();
    worst.observe(
        f64::from(outliers),
        format!("200 seeds from {}, worst |z|={worst_z:.2}", opts.seed + 1000),
        vec![("outliers", f64::from(outliers)), ("reference", reference)],
    );
    worst.entry(
        "sim_coverage_calibration",
        true,
        2.0,
        "across 200 independent seeds, at most 2 estimates fall outside 3 sigma of the exact value",
    )
}

fn cli_csv_round_trip(opts: &VerifyOptions) -> CheckEntry {
    let e = ens(opts.thetas[0]);
    let noise = nm(0.95);
    let curves = vec![
        evaluate_curve(Scheme::Adaptive, &e, &noise, 12).expect("grid point"),
        evaluate_curve(Scheme::Voting, &e, &noise, 12).expect("grid point"),
    ];
    let parsed = parse_csv(&write_csv(&curves)).expect("own output parses");
    let mut worst = Worst::new();
    let mut dev = 0.0f64;
    for curve in &curves {
        let back = parsed
            .iter()
            .find(|c| c.scheme == curve.scheme)
            .expect("scheme present");
        for (a, b) in curve.rows.iter().zip(&back.rows) {
            if a.p_success.to_bits() != b.p_success.to_bits() {
                dev = dev.max((a.p_success - b.p_success).abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    worst.observe(dev, "adaptive+voting, N<=12".to_string(), vec![]);
    worst.entry(
        "cli_csv_round_trip",
        true,
        0.0,
        "parse(write(curves)) reproduces every float bit for bit",
    )
}

fn b_channel_adjudication(opts: &VerifyOptions) -> (Vec<BChannelRow>, String, CheckEntry) {
    let mut table = Vec::new();
    let mut dev_update: f64 = 0.0;
    let mut dev_closed: f64 = 0.0;
    let mut dev_rho2: f64 = 0.0;
    for &theta in &opts.thetas {
        let e = ens(theta);
        for f in noisy(&opts.fidelities) {
            let noise = nm(f);
            let mut rho = e.mixed_state(0, &noise);
            let mut kr = qdg::ProbeCoeffs::initial(0, &noise);
            for n in 2..=5u32 {
                rho = qdg::oracle_step(&rho, n, &e, 0, &noise).expect("theta > 0");
                kr = qdg::kraus_step(&kr, &e, &noise).expect("theta > 0");
                let basis = qdg::probe_basis(n, theta);
                let oracle = rho.matrix_element(&basis.state(0), &basis.state_perp(0));
                let closed = qdg::coeffs_closed(n, &e, 0, &noise).expect("theta > 0").b;
                let rho2_printed = (n == 2).then(|| {
                    noise.infidelity() * (2.0 * theta).cos().powi(2) * (2.0 * theta).sin().powi(2)
                        / basis.sin_double().powi(2)
                });
                dev_update = dev_update.max((oracle - kr.b).abs());
                dev_closed = dev_closed.max((oracle - closed).abs());
                if let Some(r) = rho2_printed {
                    dev_rho2 = dev_rho2.max((oracle - r).abs());
                }
                let mut max_pairwise = (oracle - kr.b).abs().max((oracle - closed).abs());
                max_pairwise = max_pairwise.max((kr.b - closed).abs());
                if let Some(r) = rho2_printed {
                    max_pairwise = max_pairwise
                        .max((oracle - r).abs())
                        .max((kr.b - r).abs())
                        .max((closed - r).abs());
                }
                table.push(BChannelRow {
                    theta,
                    fidelity: f,
                    n,
                    oracle,
                    update_rule: kr.b,
                    closed_form: closed,
                    rho2_printed,
                    max_pairwise_deviation: max_pairwise,
                });
            }
        }
    }
    let verdict = format!(
        "sigma_x update rule matches the explicit-unitary oracle (max |dev| = {dev_update:.3e}); \
         the printed closed form B_N does not (max |dev| = {dev_closed:.3e}, wrong sign and \
         magnitude, and it fails to vanish at F = 1/2), nor does the printed rho_2 coefficient \
         (max |dev| = {dev_rho2:.3e} at N = 2; it differs from the update rule by a factor \
         -1/((2F-1) sin 2theta_2)). The shipped success probability uses the oracle route."
    );
    let mut worst = Worst::new();
    worst.observe(
        dev_update,
        "update rule vs oracle over the grid, N <= 5".to_string(),
        vec![
            ("max_dev_update_rule", dev_update),
            ("max_dev_closed_form", dev_closed),
            ("max_dev_rho2_printed", dev_rho2),
        ],
    );
    let entry = CheckEntry {
        id: "qdg_b_channel_adjudication".to_string(),
        asserted: false,
        pass: true,
        max_deviation: dev_update,
        tolerance: 0.0,
        inputs: worst.inputs,
        routes: worst.routes,
        notes: verdict.clone(),
    };
    (table, verdict, entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_opts() -> VerifyOptions {
        VerifyOptions {
            thetas: vec![std::f64::consts::PI / 6.0, std::f64::consts::PI / 12.0],
            fidelities: vec![0.8, 0.95, 1.0],
            n_max: 60,
            tol: 1e-12,
            mc_trials: 20_000,
            seed: 7,
            workers: 0,
        }
    }

    #[test]
    fn quick_grid_report_passes() {
        let report = run_report(&quick_opts());
        for c in &report.checks {
            assert!(!c.asserted || c.pass, "{} failed: {:?}", c.id, c);
        }
        assert!(report.passed);
        assert!(!report.b_channel_table.is_empty());
        assert!(report.b_channel_verdict.contains("oracle"));
    }

    #[test]
    fn report_covers_every_module_invariant() {
        let report = run_report(&quick_opts());
        let ids: Vec<&str> = report.checks.iter().map(|c| c.id.as_str()).collect();
        for required in [
            "states_displacement_identity",
            "states_mixed_equals_noise_average",
            "states_density_invariants",
            "helstrom_basis_noise_independent",
            "helstrom_dominates_random_bases",
            "helstrom_bound_monotone",
            "adaptive_route_equivalence",
            "adaptive_mc_agreement",
            "adaptive_pure_state_optimality",
            "adaptive_limit_convergence",
            "adaptive_failure_relaxation",
            "adaptive_record_majority_log_decay",
            "qdg_unitarity_and_probe_identities",
            "qdg_gathering_property",
            "qdg_kraus_completeness",
            "qdg_a_channel_equivalence",
            "qdg_oracle_physicality",
            "qdg_limit_convergence",
            "local_beats_collective",
            "voting_error_monotone",
            "voting_chernoff_fit",
            "voting_fig1_crossings",
            "sim_determinism",
            "sim_worker_invariance",
            "sim_coverage_calibration",
            "qdg_b_channel_adjudication",
        ] {
            assert_eq!(
                ids.iter().filter(|id| **id == required).count(),
                1,
                "check {required} must appear exactly once"
            );
        }
    }

    #[test]
    fn json_and_summary_render() {
        let report = run_report(&quick_opts());
        let json = report.to_json();
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(doc["checks"].as_array().unwrap().len() >= 26);
        assert!(doc["b_channel_table"].as_array().unwrap().len() >= 8);
        let summary = report.summary();
        assert!(summary.contains("[PASS]"));
        assert!(summary.contains("verification PASSED"));
    }
}
