//! The acceptance suite: one verdict per criterion, with tolerances fixed here.

pub mod oracles;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cli_io::{self, BetaValue, Command, RunConfig, SpecFile};
use crate::geometry::{classify, sph_to_euc_projection, ConeAngleVector, ConicSurfaceSpec, GeometryTag};
use crate::indicial::{self, mode_matrix, IndicialOperator, ModeOperator};
use crate::liouville::{self, LiouvilleError, SolverOptions};
use crate::mode_spectral::{self, CuspDecayOptions, ModeEigenproblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{:>2}] {} ({:.1} s): {}", self.id, self.title, self.seconds, self.detail)
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "indicial closed forms"),
    (2, "intertwining identities"),
    (3, "X->Y isomorphism bound"),
    (4, "cone-angle geometry"),
    (5, "football and flat-cone spectra"),
    (6, "cusp modes"),
    (7, "football uniformization"),
    (8, "generic uniformization"),
    (9, "transition sweep"),
    (10, "negative controls"),
];

/// Criteria that fail for a structural reason rather than a defect. The map
/// of criterion 3 is a multiple of the identity with `|det| < 1`.
pub const KNOWN_UNATTAINABLE: [u32; 1] = [3];

// Tolerances.
const ROOT_VALUE_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-12;
const FAST_RUNTIME: f64 = 1.0;
const INTERTWINING_SAMPLES: usize = 100;
const DET_SAMPLES: usize = 1000;
const DET_BOUND: f64 = 3.9;
/// Agreement of the finite-difference oracle with the implemented map.
const ORACLE_TOL: f64 = 1e-7;
const LEMMA_SAMPLES: usize = 1000;
const FUZZ_SAMPLES: usize = 100_000;
const SPECTRUM_CELLS: usize = 256;
const FOOTBALL_EIGEN_TOL: f64 = 1e-6;
const SPECTRUM_RUNTIME: f64 = 30.0;
const CUSP_SCALING_TOL: f64 = 0.2;
const FOOTBALL_LEVELS: [u32; 3] = [3, 4, 5];
const FOOTBALL_ORDER: f64 = 1.7;
const FOOTBALL_SUP: f64 = 5e-3;
const FOOTBALL_RUNTIME: f64 = 120.0;
const GENERIC_LEVEL: u32 = 5;
const GENERIC_GB: f64 = 1e-3;
const EXPONENT_TOL: f64 = 0.1;
const GENERIC_RUNTIME: f64 = 300.0;
const SWEEP_LEVEL: u32 = 3;
const SWEEP_ZERO_TOL: f64 = 1e-3;

pub fn title(id: u32) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

/// Runs the listed criteria in order.
pub fn run(ids: &[u32], seed: u64) -> Vec<CriterionResult> {
    ids.iter().map(|&id| run_criterion(id, seed)).collect()
}

pub fn run_criterion(id: u32, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| match id {
        1 => indicial_closed_forms(),
        2 => intertwining(seed),
        3 => xy_isomorphism(seed),
        4 => cone_angle_geometry(seed),
        5 => spectra(),
        6 => cusp_modes(),
        7 => football_uniformization(),
        8 => generic_uniformization(),
        9 => transition_sweep(),
        10 => negative_controls(),
        _ => (false, format!("no criterion {id}")),
    }));
    let (passed, detail) = outcome.unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        (false, format!("panicked: {}", msg.unwrap_or_default()))
    });
    CriterionResult { id, title: title(id).into(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn same_values(got: &[f64], want: &[f64]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= ROOT_VALUE_TOL * (1.0 + b.abs()))
}

fn indicial_closed_forms() -> (bool, String) {
    let start = Instant::now();
    let window = (-6.0, 6.0);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for beta in [-0.25, -0.5, -2.0 / 3.0, -0.75] {
        let cases = [
            (IndicialOperator::ScalarLaplacian, oracles::closed_form_roots(beta, &[], true, window)),
            (IndicialOperator::P, oracles::closed_form_roots(beta, &[-1.0, 1.0], false, window)),
            (IndicialOperator::L, oracles::closed_form_roots(beta, &[-2.0, 2.0], true, window)),
        ];
        for (op, want) in cases {
            let table = indicial::root_table(op, beta, window);
            if !same_values(&table.values(), &want) {
                failures.push(format!("{op:?} at beta {beta:.4}: values differ"));
            }
            worst = worst.max(table.max_residual());
        }
        let scalar = indicial::roots_scalar(beta, window);
        let zero = scalar.roots.iter().find(|r| r.value == 0.0);
        if zero.map(|r| r.log_multiplicity) != Some(1) {
            failures.push(format!("scalar zero at beta {beta:.4} lacks a log partner"));
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    if worst > RESIDUAL_TOL {
        failures.push(format!("eigensection residual {worst:.1e}"));
    }
    if seconds >= FAST_RUNTIME {
        failures.push(format!("runtime {seconds:.2} s"));
    }
    let detail = format!("12 tables; max residual {worst:.1e}; {seconds:.3} s");
    verdict(failures, detail)
}

fn intertwining(seed: u64) -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut trace_clean = true;
    for _ in 0..INTERTWINING_SAMPLES {
        let beta = rng.random_range(-0.99..-0.01);
        let k = rng.random_range(-8i64..=8);
        let b = mode_matrix(ModeOperator::Bianchi, beta, k);
        let l = mode_matrix(ModeOperator::L, beta, k);
        let p = mode_matrix(ModeOperator::P, beta, k);
        let d = mode_matrix(ModeOperator::ConformalKilling, beta, k);
        let scale = 1.0 + indicial::k_beta(beta, k).powi(3).abs();
        worst = worst.max(b.compose(&l).max_abs_diff(&p.compose(&b)) / scale);
        worst = worst.max(l.compose(&d).max_abs_diff(&d.compose(&p)) / scale);
        for zeta in [-2.5, 0.0, 1.0, rng.random_range(-6.0..6.0)] {
            let m = b.at(zeta);
            trace_clean &= (0..m.nrows()).all(|i| m[(i, 0)] == num_complex::Complex64::new(0.0, 0.0));
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    if worst > RESIDUAL_TOL {
        failures.push(format!("composition defect {worst:.1e}"));
    }
    if !trace_clean {
        failures.push("B does not annihilate pure trace".into());
    }
    if seconds >= FAST_RUNTIME {
        failures.push(format!("runtime {seconds:.2} s"));
    }
    verdict(failures, format!("{INTERTWINING_SAMPLES} samples; max relative defect {worst:.1e}; {seconds:.3} s"))
}

fn xy_isomorphism(seed: u64) -> (bool, String) {
    let mut failures = Vec::new();
    // The oracle must confirm the implemented matrix before the bound is judged.
    let mut oracle_gap: f64 = 0.0;
    for beta in [-0.9, -0.75, -0.5, -0.3, -0.1] {
        let (m, _) = oracles::xy_map_by_differences(beta);
        let x = indicial::xbeta_ybeta_map(beta).expect("beta in range");
        for i in 0..2 {
            for j in 0..2 {
                oracle_gap = oracle_gap.max((m[i][j] - x.matrix[i][j]).abs() / (1.0 + m[i][j].abs()));
            }
        }
    }
    if oracle_gap > ORACLE_TOL {
        failures.push(format!("oracle disagrees by {oracle_gap:.1e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_det = f64::INFINITY;
    let mut arg_min = 0.0;
    let mut signs = std::collections::BTreeSet::new();
    for _ in 0..DET_SAMPLES {
        let beta = rng.random_range(-0.999..-0.001);
        let det = indicial::xbeta_ybeta_map(beta).expect("beta in range").determinant;
        signs.insert(det > 0.0);
        if det.abs() < min_det {
            min_det = det.abs();
            arg_min = beta;
        }
    }
    if signs.len() > 1 || min_det == 0.0 {
        failures.push("determinant changes sign".into());
    }
    if min_det < DET_BOUND {
        failures.push(format!("min |det| {min_det:.3e} at beta {arg_min:.4} is below {DET_BOUND}"));
    }
    verdict(failures, format!("oracle gap {oracle_gap:.1e}; min |det| {min_det:.3e}; no sign change: {}", signs.len() == 1))
}

fn cone_angle_geometry(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut spherical_seen = 0usize;
    for _ in 0..LEMMA_SAMPLES {
        // Σβ = −2 with every β in (−1, 0).
        let k = rng.random_range(3..=7);
        let betas = loop {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let b: Vec<f64> = w.iter().map(|x| -2.0 * x / s).collect();
            if b.iter().all(|&x| x > -1.0 && x < 0.0) {
                break b;
            }
        };
        let lambda = rng.random_range(0.001..0.999);
        let scaled = ConeAngleVector::new(betas.iter().map(|b| lambda * b).collect()).expect("inside (-1,0)");
        let spec = ConicSurfaceSpec::new(0, scaled.clone(), None).expect("valid");
        if classify(&spec).tag != GeometryTag::Spherical {
            failures += 1;
        }
        match sph_to_euc_projection(&scaled) {
            Ok((l, euc)) => {
                if (l - lambda).abs() > 1e-12 || (euc.sum() + 2.0).abs() > 1e-12 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
        // Converse: a spherical sample projects into the Euclidean slice.
        let k = rng.random_range(3..=7);
        let candidate: Vec<f64> = (0..k).map(|_| rng.random_range(-0.999..-0.001)).collect();
        let spec = ConicSurfaceSpec::new(0, ConeAngleVector::new(candidate).expect("inside"), None).expect("valid");
        if classify(&spec).tag == GeometryTag::Spherical {
            spherical_seen += 1;
            match sph_to_euc_projection(&spec.angles) {
                Ok((l, euc)) => {
                    let inside = euc.as_slice().iter().all(|&b| b > -1.0 && b < 0.0);
                    let flat = ConicSurfaceSpec::new(0, euc, None).expect("valid");
                    if !(l > 0.0 && l < 1.0) || !inside || classify(&flat).tag != GeometryTag::Euclidean {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    let mut panics = 0usize;
    let mut inconsistent = 0usize;
    for _ in 0..FUZZ_SAMPLES {
        let genus = rng.random_range(0..=2u32);
        let k = rng.random_range(0..=6usize);
        let betas: Vec<f64> = (0..k).map(|_| rng.random_range(-0.999_999..-1e-6)).collect();
        match catch_unwind(|| ConicSurfaceSpec::unplaced(genus, betas).map(|s| classify(&s))) {
            Ok(Ok(class)) => {
                let chi = class.chi_beta;
                let ok = match class.tag {
                    GeometryTag::Hyperbolic => chi < 0.0,
                    GeometryTag::Euclidean => chi.abs() <= crate::geometry::EUCLIDEAN_TOL,
                    _ => chi > 0.0,
                };
                inconsistent += usize::from(!ok);
            }
            Ok(Err(_)) => inconsistent += 1,
            Err(_) => panics += 1,
        }
    }
    let detail = format!(
        "{LEMMA_SAMPLES} lemma samples ({spherical_seen} spherical converses): {failures} failures; \
         {FUZZ_SAMPLES} fuzzed specs: {panics} panics, {inconsistent} inconsistent tags"
    );
    (failures == 0 && panics == 0 && inconsistent == 0, detail)
}

fn spectra() -> (bool, String) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_mode0: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for beta in [-0.25, -0.5, -0.75] {
        for k0 in [1.0, 4.0] {
            match mode_spectral::verify_eigenvalue_bound(beta, k0, &[0, 1, 2, 3], SPECTRUM_CELLS) {
                Ok(report) => {
                    for m in &report.modes {
                        if m.mode == 0 {
                            worst_mode0 = worst_mode0.max((m.lambda - 2.0 * k0).abs());
                        } else {
                            min_margin = min_margin.min(m.margin);
                        }
                    }
                }
                Err(e) => failures.push(format!("beta {beta}, K {k0}: {e}")),
            }
        }
    }
    if worst_mode0 > FOOTBALL_EIGEN_TOL {
        failures.push(format!("mode-0 eigenvalue off by {worst_mode0:.1e}"));
    }
    if !(min_margin > 0.0) {
        failures.push(format!("mode |k|>=1 margin {min_margin:.3e}"));
    }
    let mut bessel_matched = 0;
    let mut worst_ratio: f64 = 0.0;
    for beta in [-0.25, -0.5, -0.75] {
        for k in 0..=2i64 {
            let problem = ModeEigenproblem::flat_cone(beta, k, 1.0, SPECTRUM_CELLS).expect("valid problem");
            let spectrum = mode_spectral::solve_spectrum(&problem, 2).expect("discrete spectrum");
            for n in 1..=2usize {
                let j = oracles::bessel_zero(k as f64 / (1.0 + beta), n);
                let entry = spectrum.eigenvalues[n - 1];
                let gap = (entry.value - j * j).abs();
                worst_ratio = worst_ratio.max(gap / entry.error_bar);
                if gap <= entry.error_bar {
                    bessel_matched += 1;
                } else {
                    failures.push(format!("beta {beta}, k {k}, n {n}: off by {gap:.2e} > bar {:.2e}", entry.error_bar));
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    if seconds >= SPECTRUM_RUNTIME {
        failures.push(format!("runtime {seconds:.1} s"));
    }
    let detail = format!(
        "mode-0 max |λ₁ − 2K| {worst_mode0:.1e}; min margin for |k|>=1 {min_margin:.3}; \
         Bessel {bessel_matched}/18 within bar (max gap/bar {worst_ratio:.2})"
    );
    verdict(failures, detail)
}

fn cusp_modes() -> (bool, String) {
    let mut failures = Vec::new();
    let (p, q) = mode_spectral::cusp_zero_mode_roots();
    let euler = |z: f64| -z * (z - 1.0) - 2.0 * z + 2.0;
    if (p, q) != (1.0, -2.0) || euler(p) != 0.0 || euler(q) != 0.0 {
        failures.push(format!("exponents {p}, {q}"));
    }
    let options = CuspDecayOptions::default();
    let reports: Vec<_> = (1..=5).map(|j| mode_spectral::cusp_mode_decay_check(j, 0.5, 1.0, options)).collect();
    let mut ratios = Vec::new();
    match reports.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(reports) => {
            for r in &reports {
                if !r.barrier_holds {
                    failures.push(format!("barrier fails for j = {}", r.j));
                }
                let ratio = r.constant / reports[0].constant;
                if (ratio - 1.0).abs() > CUSP_SCALING_TOL {
                    failures.push(format!("j = {}: A(j)j²/A(1) = {ratio:.3}", r.j));
                }
                ratios.push(format!("{ratio:.3}"));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    verdict(failures, format!("exponents ({p}, {q}); j²A(j)/A(1) for j=1..5: [{}]", ratios.join(", ")))
}

fn football_uniformization() -> (bool, String) {
    let start = Instant::now();
    let check = match liouville::football_check(-0.5, &FOOTBALL_LEVELS, liouville::MeshOptions::default().grading_rings) {
        Ok(c) => c,
        Err(e) => return (false, e.to_string()),
    };
    let seconds = start.elapsed().as_secs_f64();
    let last = check.levels.last().expect("levels");
    let mut failures = Vec::new();
    if !(check.order >= FOOTBALL_ORDER) {
        failures.push(format!("order {:.3}", check.order));
    }
    if !(last.sup_error < FOOTBALL_SUP) {
        failures.push(format!("level-5 error {:.2e}", last.sup_error));
    }
    if seconds >= FOOTBALL_RUNTIME {
        failures.push(format!("runtime {seconds:.1} s"));
    }
    let errors: Vec<String> = check.levels.iter().map(|l| format!("{:.2e}", l.sup_error)).collect();
    verdict(failures, format!("beta -1/2; sup errors [{}]; order {:.2}; {seconds:.1} s", errors.join(", "), check.order))
}

fn audit_failures(name: &str, sol: &liouville::ConformalSolution, failures: &mut Vec<String>) -> String {
    if !(sol.diagnostics.gb_residual < GENERIC_GB) {
        failures.push(format!("{name}: gb residual {:.1e}", sol.diagnostics.gb_residual));
    }
    match liouville::exponent_audit(sol) {
        Ok(fits) => {
            let worst = fits.iter().map(|f| f.relative_error()).fold(0.0, f64::max);
            if worst > EXPONENT_TOL {
                failures.push(format!("{name}: exponent off by {:.1}%", 100.0 * worst));
            }
            let slopes: Vec<String> = fits.iter().map(|f| format!("{:.3}/{:.3}", f.slope, f.predicted)).collect();
            format!("{name}: gb {:.1e}, slopes [{}]", sol.diagnostics.gb_residual, slopes.join(", "))
        }
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            format!("{name}: audit failed")
        }
    }
}

fn generic_uniformization() -> (bool, String) {
    let options = SolverOptions { mesh_level: GENERIC_LEVEL, ..Default::default() };
    let mut failures = Vec::new();
    let mut details = Vec::new();

    let start = Instant::now();
    let s = 3f64.sqrt() / 2.0;
    let sphere = equilateral_spec([[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.0]]);
    let solved = liouville::cone_positions(&sphere)
        .and_then(|p| liouville::build_mesh(liouville::BaseSurface::RoundSphere, &p, &options.mesh()))
        .and_then(|mesh| liouville::spherical_continuation(&sphere, Arc::new(mesh), &options));
    match solved {
        Ok(sol) => details.push(audit_failures("sphere", &sol, &mut failures)),
        Err(e) => failures.push(format!("sphere: {e}")),
    }
    let seconds = start.elapsed().as_secs_f64();
    if seconds >= GENERIC_RUNTIME {
        failures.push(format!("sphere runtime {seconds:.1} s"));
    }
    details.push(format!("{seconds:.1} s"));

    let start = Instant::now();
    let torus = ConicSurfaceSpec::new(
        1,
        ConeAngleVector::from_rationals(vec![Rational64::new(-1, 2); 2]).expect("valid"),
        Some(vec![[0.25, 0.25, 0.0], [0.75, 0.75, 0.0]]),
    )
    .expect("valid");
    match liouville::uniformize(&torus, &options) {
        Ok(sol) => details.push(audit_failures("torus", &sol, &mut failures)),
        Err(e) => failures.push(format!("torus: {e}")),
    }
    let seconds = start.elapsed().as_secs_f64();
    if seconds >= GENERIC_RUNTIME {
        failures.push(format!("torus runtime {seconds:.1} s"));
    }
    details.push(format!("{seconds:.1} s"));
    verdict(failures, details.join("; "))
}

/// Three cones with `β = −1/2`.
fn equilateral_spec(positions: [[f64; 3]; 3]) -> ConicSurfaceSpec {
    ConicSurfaceSpec::new(0, ConeAngleVector::from_rationals(vec![Rational64::new(-1, 2); 3]).expect("valid"), Some(positions.to_vec()))
        .expect("valid")
}

/// Vertices of a regular tetrahedron on the unit sphere.
pub fn tetrahedron() -> [[f64; 3]; 4] {
    let r = 1.0 / 3f64.sqrt();
    [[r, r, r], [r, -r, -r], [-r, r, -r], [-r, -r, r]]
}

fn transition_sweep() -> (bool, String) {
    let options = SolverOptions { mesh_level: SWEEP_LEVEL, ..Default::default() };
    let path = liouville::symmetric_path(4, Rational64::new(2, 5), Rational64::new(3, 5), 10);
    let report = match liouville::family_sweep(0, &tetrahedron(), &path, &options) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let mut failures = Vec::new();
    let near = |z: Option<f64>| z.is_some_and(|z| (z - 0.5).abs() <= SWEEP_ZERO_TOL);
    if !near(report.k_target_zero) {
        failures.push(format!("K_target zero at {:?}", report.k_target_zero));
    }
    if !near(report.curvature_zero) {
        failures.push(format!("curvature zero at {:?}", report.curvature_zero));
    }
    if report.rejected_at.is_some() || report.points.len() != path.len() {
        failures.push("path left the admissible region".into());
    }
    if !report.dimensions_constant {
        failures.push("dimension counts changed".into());
    }
    let signs: String = report.points.iter().map(|p| if p.k_target > 0.0 { '+' } else if p.k_target < 0.0 { '-' } else { '0' }).collect();
    let detail = format!(
        "K_target zero {:?}, mean-curvature zero {:?}, signs {signs}",
        report.k_target_zero.map(|z| format!("{z:.6}")),
        report.curvature_zero.map(|z| format!("{z:.6}"))
    );
    verdict(failures, detail)
}

fn negative_controls() -> (bool, String) {
    let mut failures = Vec::new();
    let cases = [
        (vec![-0.8, -0.1, -0.1], GeometryTag::OutsideTroyanov),
        (vec![-0.3, -0.6], GeometryTag::TwoConeUnequal),
    ];
    let mut codes = Vec::new();
    for (betas, tag) in cases {
        let positions: Vec<[f64; 3]> = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]][..betas.len()].to_vec();
        let spec = ConicSurfaceSpec::new(0, ConeAngleVector::new(betas.clone()).expect("valid"), Some(positions.clone())).expect("valid");
        if classify(&spec).tag != tag {
            failures.push(format!("{betas:?} classified as {:?}", classify(&spec).tag));
        }
        match liouville::uniformize(&spec, &SolverOptions::default()) {
            Err(LiouvilleError::NotUniformizable { tag: got, .. }) if got == tag => {}
            other => failures.push(format!("{betas:?}: solver returned {:?}", other.map(|s| s.diagnostics))),
        }
        let config = RunConfig {
            command: Command::Uniformize {
                spec: SpecFile {
                    genus: 0,
                    betas: betas.iter().map(|&b| BetaValue::Number(b)).collect(),
                    positions: Some(positions.iter().map(|p| p.to_vec()).collect()),
                    solver: None,
                },
                field: None,
            },
            seed: 0,
        };
        let code = cli_io::run(&config).exit_code;
        codes.push(code);
        if code != 2 {
            failures.push(format!("{betas:?}: exit code {code}"));
        }
    }
    verdict(failures, format!("both rejected by the gate; exit codes {codes:?}"))
}

fn verdict(failures: Vec<String>, detail: String) -> (bool, String) {
    if failures.is_empty() {
        (true, detail)
    } else {
        (false, format!("{detail}; {}", failures.join("; ")))
    }
}
