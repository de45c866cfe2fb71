//! One runner per subcommand. A runner consumes its config section and a
//! seed, performs the experiment, and returns serializable results plus the
//! failure records that decide the exit code.

use crate::config::ExperimentConfig;
use gradedk::audit::run_audit;
use gradedk::elliptic::{CircleOperatorSpec, QuantizationConfig};
use gradedk::experiments::{index_theorem_experiment, toeplitz_experiment};
use gradedk::func::{catalog, gaussian, odd_gaussian_scaled, resolvent_minus, FunctionSpec};
use gradedk::graded::{graded_tensor, Degree, GradedMatrix, GradingOperator};
use gradedk::hom::{operator_spectral_radius, recover_operator, SpectralHom};
use gradedk::ktheory::{
    hom_direct_sum, hom_inverse, inverse_homotopy_norms, mu, nu, nu_block, roundtrip_check,
    FiniteCStar, KZeroClass,
};
use gradedk::matrix::ComplexMatrix;
use gradedk::op_norm;
use gradedk::random::{
    random_degree_one, random_homogeneous, random_projection, rng_from_seed, LabRng, RngExt,
};
use num_complex::Complex64;
use serde_json::{json, Value};

/// Everything a subcommand produces besides its exit code.
pub struct RunOutcome {
    pub anchors: Vec<&'static str>,
    pub results: Value,
    pub failures: Vec<String>,
    /// Named (t, value) series for CSV export and plots.
    pub curves: Vec<Curve>,
}

pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// An error while running an experiment; parameter problems surface here and
/// count as configuration errors.
pub type RunError = String;

const SIGN_TOL: f64 = 1e-12;

pub fn tensor_audit(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.tensor_audit;
    let mut rng = rng_from_seed(cfg.seed);
    let mut max_product: f64 = 0.0;
    let mut max_involution: f64 = 0.0;
    let mut max_assoc: f64 = 0.0;
    let mut max_degree: f64 = 0.0;

    let degrees = [Degree::Even, Degree::Odd];
    let random_grading = |rng: &mut LabRng| {
        let d = rng.gen_range(c.min_dim..=c.max_dim);
        let p = rng.gen_range(1..d);
        GradingOperator::standard(p, d - p)
    };

    for _ in 0..c.pairs {
        let eps1 = random_grading(&mut rng);
        let eps2 = random_grading(&mut rng);
        let eps3 = random_grading(&mut rng);
        let (da, db) = (degrees[rng.gen_range(0..2)], degrees[rng.gen_range(0..2)]);
        let (da2, db2) = (degrees[rng.gen_range(0..2)], degrees[rng.gen_range(0..2)]);
        let dc = degrees[rng.gen_range(0..2)];
        let a = random_homogeneous(&mut rng, &eps1, da);
        let b = random_homogeneous(&mut rng, &eps2, db);
        let a2 = random_homogeneous(&mut rng, &eps1, da2);
        let b2 = random_homogeneous(&mut rng, &eps2, db2);
        let cc = random_homogeneous(&mut rng, &eps3, dc);

        // Product sign rule.
        let lhs = graded_tensor(&a, &b).value().mul(graded_tensor(&a2, &b2).value());
        let prod_a = GradedMatrix::new(a.value().mul(a2.value()), eps1.clone())
            .expect("same ambient");
        let prod_b = GradedMatrix::new(b.value().mul(b2.value()), eps2.clone())
            .expect("same ambient");
        let sign = if db == Degree::Odd && da2 == Degree::Odd {
            -1.0
        } else {
            1.0
        };
        let rhs = graded_tensor(&prod_a, &prod_b).value().scaled_re(sign);
        max_product = max_product.max(lhs.distance(&rhs));

        // Involution sign rule.
        let t = graded_tensor(&a, &b);
        let star_a = GradedMatrix::new(a.value().adjoint(), eps1.clone()).expect("same ambient");
        let star_b = GradedMatrix::new(b.value().adjoint(), eps2.clone()).expect("same ambient");
        let sign = if da == Degree::Odd && db == Degree::Odd {
            -1.0
        } else {
            1.0
        };
        let star_rhs = graded_tensor(&star_a, &star_b).value().scaled_re(sign);
        max_involution = max_involution.max(t.value().adjoint().distance(&star_rhs));

        // Associativity of the two bracketings.
        let left = graded_tensor(
            &GradedMatrix::new(t.value().clone(), t.grading().clone()).expect("product grading"),
            &cc,
        );
        let bc = graded_tensor(&b, &cc);
        let right = graded_tensor(
            &a,
            &GradedMatrix::new(bc.value().clone(), bc.grading().clone()).expect("product grading"),
        );
        max_assoc = max_assoc.max(left.value().distance(right.value()));

        // Degree additivity under the tensor grading.
        let expected = da.add(db);
        let conj = t.grading().conjugate(t.value());
        let signed = match expected {
            Degree::Even => t.value().clone(),
            Degree::Odd => t.value().map(|z| -z),
        };
        max_degree = max_degree.max(conj.distance(&signed));
    }

    let pass = [max_product, max_involution, max_assoc, max_degree]
        .iter()
        .all(|&r| r < SIGN_TOL);
    let mut failures = Vec::new();
    if !pass {
        failures.push(format!(
            "sign-rule residuals exceed {SIGN_TOL:.0e}: product {max_product:.3e}, involution {max_involution:.3e}, associativity {max_assoc:.3e}, degree {max_degree:.3e}"
        ));
    }
    Ok(RunOutcome {
        anchors: vec![
            "graded-tensor-product-sign",
            "graded-tensor-involution-sign",
            "graded-tensor-associativity",
            "degree-additivity",
        ],
        results: json!({
            "pairs": c.pairs,
            "dims": [c.min_dim, c.max_dim],
            "max_product_residual": max_product,
            "max_involution_residual": max_involution,
            "max_associativity_residual": max_assoc,
            "max_degree_residual": max_degree,
            "tolerance": SIGN_TOL,
        }),
        failures,
        curves: vec![],
    })
}

pub fn cfc_roundtrip(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.cfc_roundtrip;
    let mut rng = rng_from_seed(cfg.seed);
    let rm = resolvent_minus();
    let mut max_operator_err: f64 = 0.0;
    let mut max_image_err: f64 = 0.0;
    for _ in 0..c.cases {
        let n = rng.gen_range(c.min_dim..=c.max_dim);
        let p = rng.gen_range(1..n);
        let eps = GradingOperator::standard(p, n - p);
        let d = random_degree_one(&mut rng, &eps, 1.0);
        let phi = SpectralHom::from_operator(eps.clone(), d.clone())
            .map_err(|e| format!("building the reference homomorphism failed: {e}"))?;
        let image = phi.apply(&rm).map_err(|e| e.to_string())?;
        let recovered =
            recover_operator(image.value(), &eps).map_err(|e| format!("recovery failed: {e}"))?;
        max_operator_err = max_operator_err.max(op_norm(&(recovered.operator() - &d)));
        let reapplied = recovered.apply(&rm).map_err(|e| e.to_string())?;
        max_image_err = max_image_err.max(op_norm(&(reapplied.value() - image.value())));
    }
    let tol = 1e-9;
    let mut failures = Vec::new();
    if max_operator_err >= tol {
        failures.push(format!(
            "recovered operator error {max_operator_err:.3e} exceeds {tol:.0e}"
        ));
    }
    Ok(RunOutcome {
        anchors: vec!["converse-functional-calculus-roundtrip"],
        results: json!({
            "cases": c.cases,
            "dims": [c.min_dim, c.max_dim],
            "max_operator_error": max_operator_err,
            "max_image_error": max_image_err,
            "tolerance": tol,
        }),
        failures,
        curves: vec![],
    })
}

pub fn ktheory_roundtrip(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.ktheory_roundtrip;
    let mut rng = rng_from_seed(cfg.seed);
    let mut algebra_rows = Vec::new();
    let mut failures = Vec::new();

    for blocks in &c.algebras {
        let algebra = FiniteCStar::new(blocks.clone());
        let mut roundtrips = 0usize;
        let mut additive = 0usize;
        let mut inverses = 0usize;
        for _ in 0..c.classes_per_algebra {
            let amp = rng.gen_range(1..=c.max_amplification);
            let make_class = |rng: &mut LabRng| -> Result<KZeroClass, RunError> {
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                for &m in blocks {
                    let side = m * amp;
                    let rank_p = rng.gen_range(0..=side);
                    plus.push(random_projection(rng, side, rank_p));
                    let rank_q = rng.gen_range(0..=side);
                    minus.push(random_projection(rng, side, rank_q));
                }
                KZeroClass::from_projections(algebra.clone(), plus, minus)
                    .map_err(|e| e.to_string())
            };
            let x = make_class(&mut rng)?;
            if roundtrip_check(&x).map_err(|e| e.to_string())? {
                roundtrips += 1;
            }

            let y = make_class(&mut rng)?;
            let phi = mu(&x).map_err(|e| e.to_string())?;
            let psi = mu(&y).map_err(|e| e.to_string())?;
            let summed = hom_direct_sum(&phi, &psi).map_err(|e| e.to_string())?;
            let nu_sum = nu(&summed).map_err(|e| e.to_string())?;
            let expect: Vec<i64> = x
                .rank_vector
                .iter()
                .zip(&y.rank_vector)
                .map(|(a, b)| a + b)
                .collect();
            if nu_sum.rank_vector == expect {
                additive += 1;
            }

            let mut inverted = true;
            for part in &phi.parts {
                let inv = hom_inverse(part).map_err(|e| e.to_string())?;
                let (_, _, r) = nu_block(&inv).map_err(|e| e.to_string())?;
                let (_, _, r0) = nu_block(part).map_err(|e| e.to_string())?;
                if r != -r0 {
                    inverted = false;
                }
            }
            if inverted {
                inverses += 1;
            }
        }
        let all = c.classes_per_algebra;
        if roundtrips != all || additive != all || inverses != all {
            failures.push(format!(
                "algebra {blocks:?}: roundtrip {roundtrips}/{all}, additivity {additive}/{all}, inverse {inverses}/{all}"
            ));
        }
        algebra_rows.push(json!({
            "blocks": blocks,
            "classes": all,
            "roundtrip_exact": roundtrips,
            "additivity_exact": additive,
            "inverse_negation_exact": inverses,
            "verdict": if roundtrips == all && additive == all && inverses == all { "pass" } else { "fail" },
        }));
    }

    Ok(RunOutcome {
        anchors: vec![
            "mu-nu-inverse-pair",
            "class-additivity",
            "class-inverse-negation",
        ],
        results: json!({ "algebras": algebra_rows }),
        failures,
        curves: vec![],
    })
}

pub fn inverse_decay(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.inverse_decay;
    let mut rng = rng_from_seed(cfg.seed);
    let eps = GradingOperator::standard(c.half_dim, c.half_dim);
    let d = match c.generator.as_str() {
        "zero" => ComplexMatrix::zeros(2 * c.half_dim, 2 * c.half_dim),
        _ => random_degree_one(&mut rng, &eps, 1.0),
    };
    let phi =
        SpectralHom::from_operator(eps, d).map_err(|e| format!("invalid generator: {e}"))?;
    let rho = operator_spectral_radius(&phi).map_err(|e| e.to_string())?;
    let t_star = 16.0 * (1.0 + rho);
    let mut grid = c.t_grid.clone();
    if grid.last().copied().unwrap_or(0.0) < t_star {
        grid.push(t_star);
    }

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut failures = Vec::new();
    for f in catalog() {
        let trace = inverse_homotopy_norms(&phi, &f, &grid).map_err(|e| e.to_string())?;
        if !trace.verdict.bounds_hold {
            failures.push(format!(
                "{}: spectral gap or tail bound violated",
                f.name()
            ));
        }
        // Rapid decay reaches the terminal threshold; slower catalog members
        // are covered by the tail bound alone.
        let terminal_bound = f.tail_sup(t_star, &[]);
        if terminal_bound < 1e-6 && trace.verdict.terminal_norm >= 1e-6 {
            failures.push(format!(
                "{}: terminal norm {:.3e} at t = {t_star:.1} not below 1e-6",
                f.name(),
                trace.verdict.terminal_norm
            ));
        }
        let norm_trace: Vec<(f64, f64)> =
            trace.t_grid.iter().copied().zip(trace.norms.iter().copied()).collect();
        rows.push(json!({
            "function": f.name(),
            "norm_trace": norm_trace,
            "spectral_gaps": trace.spectral_gaps,
            "bounds": trace.bounds,
            "verdict": trace.verdict,
        }));
        curves.push(Curve {
            name: f.name().to_string(),
            x: trace.t_grid.clone(),
            y: trace.norms.clone(),
        });
    }

    Ok(RunOutcome {
        anchors: vec![
            "coupled-inverse-spectral-gap",
            "vanishing-at-infinity-decay",
        ],
        results: json!({
            "generator": c.generator,
            "half_dim": c.half_dim,
            "operator": phi.operator(),
            "spectral_radius": rho,
            "terminal_t": t_star,
            "functions": rows,
        }),
        failures,
        curves,
    })
}

pub fn toeplitz_index(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.toeplitz_index;
    let mut symbols: Vec<(String, Box<dyn Fn(f64) -> Complex64>)> = Vec::new();
    for &k in &c.windings {
        symbols.push((
            format!("exp({k}i theta)"),
            Box::new(move |th: f64| Complex64::from_polar(1.0, k as f64 * th)),
        ));
    }
    if c.include_modulated {
        symbols.push((
            "exp(2i theta)(2+cos theta)".into(),
            Box::new(|th: f64| Complex64::from_polar(1.0, 2.0 * th) * (2.0 + th.cos())),
        ));
        symbols.push((
            "exp(-2i theta)(2+cos theta)".into(),
            Box::new(|th: f64| Complex64::from_polar(1.0, -2.0 * th) * (2.0 + th.cos())),
        ));
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, g) in &symbols {
        let report = toeplitz_experiment(name, g, c.n_modes).map_err(|e| e.to_string())?;
        if !report.index_matches_minus_winding || !report.one_sided_dims {
            failures.push(format!(
                "{name}: index {} vs -winding {}, kernel {}, cokernel {}",
                report.index, -report.winding, report.kernel_dim, report.cokernel_dim
            ));
        }
        if !report.stable {
            failures.push(format!(
                "{name}: run not stable at {} modes (needs {})",
                report.n_modes, report.stable_mode_count
            ));
        }
        rows.push(serde_json::to_value(&report).expect("serializable report"));
    }

    Ok(RunOutcome {
        anchors: vec!["toeplitz-index-winding"],
        results: json!({ "n_modes": c.n_modes, "symbols": rows }),
        failures,
        curves: vec![],
    })
}

/// The calibrated catalog for the convergence experiment: two even and two
/// odd Gaussian-type functions whose tails satisfy the default tolerance at
/// the default configuration.
pub fn convergence_catalog() -> Vec<FunctionSpec> {
    vec![
        gaussian(1.0),
        odd_gaussian_scaled(1.0, 1.0),
        gaussian(2.0),
        odd_gaussian_scaled(2.0, 0.5),
    ]
}

pub fn quantize_converge(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let c = &cfg.quantize_converge;
    let spec = CircleOperatorSpec::scalar(
        c.theta_count,
        |_| Complex64::new(1.0, 0.0),
        |th| Complex64::new(th.cos(), 0.0),
    )
    .map_err(|e| e.to_string())?;
    let config = QuantizationConfig::new(c.n_modes, c.theta_count, c.tail_tol)
        .map_err(|e| e.to_string())?;
    let catalog = convergence_catalog();
    let report = index_theorem_experiment(&spec, &catalog, &c.t_grid, &config)
        .map_err(|e| e.to_string())?;

    let mut failures = Vec::new();
    for cell in &report.cells {
        if !cell.strictly_decreasing {
            failures.push(format!("{}: errors are not strictly decreasing", cell.function));
        }
        match cell.fit_exponent {
            Some(slope) if slope <= c.exponent_threshold => {}
            Some(slope) => failures.push(format!(
                "{}: fitted exponent {slope:.3} above {}",
                cell.function, c.exponent_threshold
            )),
            None => {}
        }
        if cell.terminal_error >= c.terminal_threshold {
            failures.push(format!(
                "{}: terminal error {:.3e} not below {:.3e}",
                cell.function, cell.terminal_error, c.terminal_threshold
            ));
        }
    }
    if !report.indices_agree {
        failures.push(format!(
            "analytic index {} disagrees with symbolic index {}",
            report.index_analytic, report.index_symbolic
        ));
    }

    let curves = report
        .cells
        .iter()
        .map(|cell| Curve {
            name: cell.function.clone(),
            x: cell.t.clone(),
            y: cell.error.clone(),
        })
        .collect();
    Ok(RunOutcome {
        anchors: vec!["quantization-convergence", "index-agreement"],
        results: serde_json::to_value(&report).expect("serializable report"),
        failures,
        curves,
    })
}

pub fn paper_audit(_cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let report = run_audit();
    let mut failures = Vec::new();
    for check in &report.checks {
        if !check.pass {
            failures.push(format!(
                "{}: forced identity residual {:.3e} above {:.0e}",
                check.id, check.forced_residual, check.tolerance
            ));
        }
    }
    let anchors = vec![
        "cayley-resolvent-normalization",
        "bounded-transform-square-sign",
        "class-map-projection-difference",
    ];
    Ok(RunOutcome {
        anchors,
        results: serde_json::to_value(&report).expect("serializable report"),
        failures,
        curves: vec![],
    })
}

