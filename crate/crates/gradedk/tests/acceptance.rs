//! Acceptance suite: every shipped guarantee of the laboratory, one test per
//! criterion, each printing a single verdict line. Tolerances are pinned
//! here; the quantization terminal threshold was calibrated once against a
//! quadruple-resolution oracle run and is frozen below.

use gradedk::elliptic::{CircleOperatorSpec, QuantizationConfig};
use gradedk::experiments::{index_theorem_experiment, toeplitz_experiment};
use gradedk::func::{catalog, gaussian, odd_gaussian_scaled, resolvent_minus, FunctionSpec};
use gradedk::graded::{graded_tensor, Degree, GradedMatrix, GradingOperator};
use gradedk::hom::{operator_spectral_radius, recover_operator, SpectralHom};
use gradedk::ktheory::{inverse_homotopy_norms, roundtrip_check, FiniteCStar, KZeroClass};
use gradedk::op_norm;
use gradedk::random::{
    random_degree_one, random_homogeneous, random_projection, rng_from_seed, LabRng, RngExt,
};
use num_complex::Complex64;

/// Frozen from the high-resolution oracle run of the calibration example
/// (quadruple mode count): largest observed terminal error 1.533e-2, kept
/// with a factor-1.5 margin.
const QUANTIZE_TERMINAL_THRESHOLD: f64 = 2.3e-2;
const QUANTIZE_EXPONENT_THRESHOLD: f64 = -0.8;

fn verdict(number: u32, name: &str, pass: bool, detail: String) {
    println!(
        "acceptance {number} ({name}): {} -- {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {number} ({name}) failed: {detail}");
}

#[test]
fn a1_koszul_sign_suite() {
    let mut rng = rng_from_seed(1001);
    let degrees = [Degree::Even, Degree::Odd];
    let mut max_residual: f64 = 0.0;
    for _ in 0..200 {
        let dims: Vec<usize> = (0..3).map(|_| rng.gen_range(2..=8usize)).collect();
        let gradings: Vec<GradingOperator> = dims
            .iter()
            .map(|&d| {
                let p = rng.gen_range(1..d);
                GradingOperator::standard(p, d - p)
            })
            .collect();
        let pick = |rng: &mut LabRng| degrees[rng.gen_range(0..2)];
        let (da, db, dc) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let (da2, db2) = (pick(&mut rng), pick(&mut rng));
        let a = random_homogeneous(&mut rng, &gradings[0], da);
        let a2 = random_homogeneous(&mut rng, &gradings[0], da2);
        let b = random_homogeneous(&mut rng, &gradings[1], db);
        let b2 = random_homogeneous(&mut rng, &gradings[1], db2);
        let c = random_homogeneous(&mut rng, &gradings[2], dc);

        // Product sign rule.
        let lhs = graded_tensor(&a, &b)
            .value()
            .mul(graded_tensor(&a2, &b2).value());
        let aa = GradedMatrix::new(a.value().mul(a2.value()), gradings[0].clone()).unwrap();
        let bb = GradedMatrix::new(b.value().mul(b2.value()), gradings[1].clone()).unwrap();
        let sign = if db == Degree::Odd && da2 == Degree::Odd { -1.0 } else { 1.0 };
        max_residual =
            max_residual.max(lhs.distance(&graded_tensor(&aa, &bb).value().scaled_re(sign)));

        // Involution sign rule.
        let t = graded_tensor(&a, &b);
        let sa = GradedMatrix::new(a.value().adjoint(), gradings[0].clone()).unwrap();
        let sb = GradedMatrix::new(b.value().adjoint(), gradings[1].clone()).unwrap();
        let sign = if da == Degree::Odd && db == Degree::Odd { -1.0 } else { 1.0 };
        max_residual = max_residual
            .max(t.value().adjoint().distance(&graded_tensor(&sa, &sb).value().scaled_re(sign)));

        // Associativity of the triple product.
        let left = graded_tensor(&t, &c);
        let bc = graded_tensor(&b, &c);
        let right = graded_tensor(&a, &bc);
        max_residual = max_residual.max(left.value().distance(right.value()));

        // Degree additivity.
        let expected = da.add(db);
        let conj = t.grading().conjugate(t.value());
        let signed = match expected {
            Degree::Even => t.value().clone(),
            Degree::Odd => t.value().map(|z| -z),
        };
        max_residual = max_residual.max(conj.distance(&signed));
    }
    verdict(
        1,
        "koszul sign suite",
        max_residual < 1e-12,
        format!("max residual {max_residual:.3e} over 200 draws, tolerance 1e-12"),
    );
}

#[test]
fn a2_converse_functional_calculus_roundtrip() {
    let mut rng = rng_from_seed(1002);
    let rm = resolvent_minus();
    let mut max_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=32usize);
        let p = rng.gen_range(1..n);
        let eps = GradingOperator::standard(p, n - p);
        let d = random_degree_one(&mut rng, &eps, 1.0);
        let phi = SpectralHom::from_operator(eps.clone(), d.clone()).unwrap();
        let image = phi.apply(&rm).unwrap();
        let recovered = recover_operator(image.value(), &eps).unwrap();
        max_err = max_err.max(op_norm(&(recovered.operator() - &d)));
    }
    verdict(
        2,
        "converse functional calculus roundtrip",
        max_err < 1e-9,
        format!("max operator error {max_err:.3e} over 100 cases (dims 2-32), tolerance 1e-9"),
    );
}

#[test]
fn a3_class_map_roundtrip() {
    let mut rng = rng_from_seed(1003);
    let algebras = [vec![1usize], vec![1, 1], vec![2], vec![1, 2]];
    let mut all_exact = true;
    let mut checked = 0usize;
    for blocks in &algebras {
        let algebra = FiniteCStar::new(blocks.clone());
        for _ in 0..50 {
            let amp = rng.gen_range(1..=3usize);
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for &m in blocks {
                let side = m * amp;
                let rp = rng.gen_range(0..=side);
                plus.push(random_projection(&mut rng, side, rp));
                let rq = rng.gen_range(0..=side);
                minus.push(random_projection(&mut rng, side, rq));
            }
            let x = KZeroClass::from_projections(algebra.clone(), plus, minus).unwrap();
            all_exact &= roundtrip_check(&x).unwrap();
            checked += 1;
        }
    }
    verdict(
        3,
        "class roundtrip identity",
        all_exact,
        format!("{checked} random classes over four algebras, exact rank-vector equality"),
    );
}

#[test]
fn a4_inverse_class_decay() {
    let mut rng = rng_from_seed(1004);
    let eps = GradingOperator::standard(4, 4);
    let d = random_degree_one(&mut rng, &eps, 1.0);
    let phi = SpectralHom::from_operator(eps, d).unwrap();
    let rho = operator_spectral_radius(&phi).unwrap();
    let t_star = 16.0 * (1.0 + rho);
    let grid = [1.0, 2.0, 4.0, 8.0, 16.0, t_star];

    let mut gap_ok = true;
    let mut bound_ok = true;
    let mut terminal_ok = true;
    let mut worst_gap: f64 = f64::INFINITY;
    let mut worst_terminal: f64 = 0.0;
    for f in catalog() {
        let trace = inverse_homotopy_norms(&phi, &f, &grid).unwrap();
        let gaps = trace.spectral_gaps.as_ref().unwrap();
        let bounds = trace.bounds.as_ref().unwrap();
        for ((&t, &gap), (&norm, &bound)) in grid
            .iter()
            .zip(gaps)
            .zip(trace.norms.iter().zip(bounds))
        {
            gap_ok &= gap * gap >= t * t - 1e-9;
            worst_gap = worst_gap.min(gap * gap - t * t);
            bound_ok &= norm <= bound + 1e-10;
        }
        // The vanishing-at-infinity limit is quantitative for the rapidly
        // decaying catalog members; resolvent-type members decay like 1/t and
        // are covered by the spectral bound above.
        if f.tail_sup(t_star, &[]) < 1e-6 {
            terminal_ok &= trace.verdict.terminal_norm < 1e-6;
            worst_terminal = worst_terminal.max(trace.verdict.terminal_norm);
        }
    }
    verdict(
        4,
        "inverse-class decay",
        gap_ok && bound_ok && terminal_ok,
        format!(
            "12-function catalog; min(gap^2 - t^2) = {worst_gap:.3e} >= -1e-9, spectral bounds hold, rapid-decay terminal max {worst_terminal:.3e} < 1e-6 at t = {t_star:.1}"
        ),
    );
}

#[test]
fn a5_toeplitz_index() {
    let mut all = true;
    let mut lines = Vec::new();
    for k in -3i64..=3 {
        let r = toeplitz_experiment(
            &format!("exp({k}i theta)"),
            move |th| Complex64::from_polar(1.0, k as f64 * th),
            64,
        )
        .unwrap();
        all &= r.index == -r.winding && r.winding == k && r.one_sided_dims;
        lines.push(format!("w={k}: index {}", r.index));
    }
    for (name, sign) in [("plus", 1.0f64), ("minus", -1.0f64)] {
        let r = toeplitz_experiment(
            name,
            move |th| Complex64::from_polar(1.0, sign * 2.0 * th) * (2.0 + th.cos()),
            64,
        )
        .unwrap();
        all &= r.index == -r.winding && r.winding == (2.0 * sign) as i64 && r.one_sided_dims;
        lines.push(format!("modulated w={}: index {}", r.winding, r.index));
    }
    verdict(
        5,
        "toeplitz index",
        all,
        format!("{} at 64 modes, exact agreement with minus the winding", lines.join("; ")),
    );
}

fn convergence_catalog() -> Vec<FunctionSpec> {
    vec![
        gaussian(1.0),
        odd_gaussian_scaled(1.0, 1.0),
        gaussian(2.0),
        odd_gaussian_scaled(2.0, 0.5),
    ]
}

#[test]
fn a6_quantization_convergence() {
    let spec = CircleOperatorSpec::scalar(
        1024,
        |_| Complex64::new(1.0, 0.0),
        |th| Complex64::new(th.cos(), 0.0),
    )
    .unwrap();
    let config = QuantizationConfig::new(256, 1024, 1e-3).unwrap();
    let t_grid = [4.0, 8.0, 16.0, 32.0, 64.0];
    let report = index_theorem_experiment(&spec, &convergence_catalog(), &t_grid, &config).unwrap();

    let mut pass = report.indices_agree && report.index_analytic == 0 && report.index_symbolic == 0;
    let mut details = Vec::new();
    for cell in &report.cells {
        let slope = cell.fit_exponent.unwrap_or(0.0);
        let ok = cell.strictly_decreasing
            && cell.terminal_error < QUANTIZE_TERMINAL_THRESHOLD
            && slope <= QUANTIZE_EXPONENT_THRESHOLD;
        pass &= ok;
        details.push(format!(
            "{}: e(64) = {:.3e}, slope {:.2}",
            cell.function, cell.terminal_error, slope
        ));
    }
    verdict(
        6,
        "quantization convergence",
        pass,
        format!(
            "{}; threshold {QUANTIZE_TERMINAL_THRESHOLD:.1e}, exponent bound {QUANTIZE_EXPONENT_THRESHOLD}, indices {} = {}",
            details.join("; "),
            report.index_analytic,
            report.index_symbolic
        ),
    );
}

#[test]
fn a7_exact_quantization_degenerate_case() {
    let spec = CircleOperatorSpec::scalar(
        256,
        |_| Complex64::new(1.0, 0.0),
        |_| Complex64::new(0.0, 0.0),
    )
    .unwrap();
    let config = QuantizationConfig::new(64, 256, 1e-3).unwrap();
    let t_grid = [1.0, 2.0, 4.0, 8.0, 16.0];
    let report =
        index_theorem_experiment(&spec, &convergence_catalog(), &t_grid, &config).unwrap();
    let max_error = report
        .cells
        .iter()
        .flat_map(|c| c.error.iter().copied())
        .fold(0.0, f64::max);
    verdict(
        7,
        "exactness on frequency-only data",
        max_error < 1e-12,
        format!("max e(t) = {max_error:.3e} over the grid, tolerance 1e-12"),
    );
}

#[test]
fn a8_identity_audit() {
    let report = gradedk::audit::run_audit();
    let ids: Vec<&str> = report.checks.iter().map(|c| c.id.as_str()).collect();
    let required = ids.contains(&"cayley-resolvent-normalization")
        && ids.contains(&"bounded-transform-square-sign");
    let forced_ok = report
        .checks
        .iter()
        .all(|c| c.forced_residual <= c.tolerance);
    let counterexamples_visible = report.checks.iter().all(|c| c.displayed_residual > 0.1);
    verdict(
        8,
        "identity audit",
        required && forced_ok && counterexamples_visible,
        format!(
            "{} checks; forced residuals all <= 1e-12; displayed variants fail visibly on small counterexamples",
            report.checks.len()
        ),
    );
}
