//! Integration tests for the artifact chain, the cross-method identities the
//! modules promise each other, and the external file formats.

use abel_volterra::acceptance::{context, resolvent_series_value};
use abel_volterra::artifact::{
    calibration_from_json, calibration_to_json, catalog_from_json, catalog_to_json, curve_to_csv,
    report_to_csv, report_to_json, spec_hash,
};
use abel_volterra::calibration::z0;
use abel_volterra::laplace::{eval_h, laplace_k, TransformAccuracy};
use abel_volterra::residue::{build_report, compute_bz, remainder_bound_ln, ReportOptions};
use abel_volterra::volterra::{
    residual_check, solve, Forcing, KernelModel, Scheme, SolveOptions,
};
use abel_volterra::zeros::{count_zeros, refine_zero, Rect};
use abel_volterra::Complex64;

#[test]
fn artifact_chain_roundtrip_and_determinism() {
    let ctx = context().unwrap();
    let json1 = calibration_to_json(&ctx.calib);
    let json2 = calibration_to_json(&ctx.calib);
    assert_eq!(json1, json2, "calibration serialization must be stable");
    let cal2 = calibration_from_json(&json1).unwrap();
    assert_eq!(cal2.spec, ctx.calib.spec);
    assert_eq!(calibration_to_json(&cal2), json1, "byte-identical reload");

    let cat_json = catalog_to_json(&ctx.calib, &ctx.catalog);
    let cat2 = catalog_from_json(&cat_json, &ctx.calib).unwrap();
    assert_eq!(cat2.zeros.len(), ctx.catalog.zeros.len());
    assert_eq!(catalog_to_json(&ctx.calib, &cat2), cat_json);
    assert_eq!(cat2.z_min, ctx.catalog.z_min);

    // tampering with the kernel parameters breaks the chain
    let tampered = cat_json.replace(&spec_hash(&ctx.calib.spec.params()), "deadbeef");
    assert!(catalog_from_json(&tampered, &ctx.calib).is_err());
    let bad_version = json1.replace("\"schema_version\": 1", "\"schema_version\": 99");
    assert!(calibration_from_json(&bad_version).is_err());
}

#[test]
fn report_artifact_and_csv() {
    let ctx = context().unwrap();
    let opts = ReportOptions {
        m_list: vec![0, 1, 2],
        ..ReportOptions::default()
    };
    let report = build_report(&ctx.calib, &ctx.catalog, &opts, &ctx.acc).unwrap();
    // m = 0 row carries a solver value; large m rows explain infeasibility
    assert!(report.rows[0].solver_ln.is_some());
    assert!(report.rows[2].solver_ln.is_none());
    assert!(report.rows[2].solver_note.contains("infeasible"));
    // lower bounds increase along m
    let lb: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.lower_bound_ln.unwrap())
        .collect();
    assert!(lb[0] < lb[1] && lb[1] < lb[2]);
    let json = report_to_json(&ctx.calib, &report);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "divergence_report");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let csv = report_to_csv(&report);
    assert!(csv.lines().count() == 4);

    // curve CSV has the three columns and parses back
    let grid = solve(
        &KernelModel::Linear,
        Forcing::One,
        &SolveOptions {
            n: 4.0,
            x_end: 1.0,
            h: 0.01,
            scheme: Scheme::ProductTrapezoidal,
            log_domain: None,
        },
    )
    .unwrap();
    let csv = curve_to_csv(&grid);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x,f,log10_abs_f");
    let row: Vec<&str> = lines.nth(50).unwrap().split(',').collect();
    let x: f64 = row[0].parse().unwrap();
    let f: f64 = row[1].parse().unwrap();
    assert!((x - 0.5).abs() < 1e-12);
    assert!((f - (2.0f64 * 0.5).cos()).abs() < 1e-4);
}

#[test]
fn calibrated_transform_hits_minus_one_and_the_zero_free_bound() {
    let ctx = context().unwrap();
    let tight = TransformAccuracy::tight();
    let h = eval_h(&ctx.calib.spec, z0(), &tight).unwrap();
    assert!(h.value.norm() <= 1e-8, "|H(1+i)| = {:e}", h.value.norm());
    // comparability constants recorded on the spec
    assert_eq!(ctx.calib.spec.lower(), ctx.calib.spec.epsilon());
    let b = ctx.calib.spec.epsilon()
        + ctx.calib.spec.bump_height(0)
        + ctx.calib.spec.bump_height(1);
    assert!((ctx.calib.spec.upper() - b).abs() < 1e-12 * b);
    // at the closed-form threshold the transform is small and H stays away
    // from zero
    let r0 = 4.0 * b * b * std::f64::consts::PI;
    for &om in &[0.0, 37.0] {
        let k = laplace_k(&ctx.calib.spec, Complex64::new(r0, om), &ctx.acc).unwrap();
        assert!(k.value.norm() <= 0.5 + k.total_bound());
        let hh = eval_h(&ctx.calib.spec, Complex64::new(r0, om), &ctx.acc).unwrap();
        assert!(hh.value.norm() >= 0.5 - hh.total_bound());
    }
}

#[test]
fn zero_counting_near_z0_and_mirror_symmetry() {
    let ctx = context().unwrap();
    let spec = &ctx.calib.spec;
    let around_z0 = Rect {
        re0: 0.9,
        re1: 1.1,
        im0: 0.9,
        im1: 1.1,
    };
    assert_eq!(count_zeros(spec, around_z0, &ctx.acc).unwrap(), 1);
    let mirror = Rect {
        re0: 0.9,
        re1: 1.1,
        im0: -1.1,
        im1: -0.9,
    };
    assert_eq!(count_zeros(spec, mirror, &ctx.acc).unwrap(), 1);
    // Newton refinement from the canonical seed
    let z = refine_zero(spec, Complex64::new(1.0, 1.0), &ctx.acc).unwrap();
    assert!((z.location - z0()).norm() <= 1e-9);
    assert!(z.residual <= 1e-10);
    assert_eq!(z.multiplicity, 1);
}

#[test]
fn catalog_invariant_under_leaf_halving_and_reinsertion() {
    let ctx = context().unwrap();
    // Re-inserting each refined zero at doubled accuracy keeps |H| within
    // ten times the recorded refinement residual.
    let doubled = ctx.acc.doubled();
    for z in &ctx.catalog.zeros {
        let h = eval_h(&ctx.calib.spec, z.location, &doubled).unwrap();
        assert!(
            h.value.norm() <= 10.0 * z.residual,
            "|H| = {:e} vs residual {:e} at {}",
            h.value.norm(),
            z.residual,
            z.location
        );
    }
    // Halving the quadtree leaf size reproduces the same zeros.
    let halved = abel_volterra::zeros::build_catalog_with_leaf(
        &ctx.calib,
        &ctx.catalog.region,
        &ctx.acc,
        1e-3,
    )
    .unwrap();
    assert_eq!(halved.zeros.len(), ctx.catalog.zeros.len());
    for (a, b) in halved.zeros.iter().zip(&ctx.catalog.zeros) {
        assert!(
            (a.location - b.location).norm() <= 1e-8,
            "{} vs {}",
            a.location,
            b.location
        );
        assert_eq!(a.multiplicity, b.multiplicity);
    }
    assert_eq!(halved.total_winding, ctx.catalog.total_winding);
}

#[test]
fn residue_coefficient_identities() {
    let ctx = context().unwrap();
    let n_exp = ctx.chosen.n_exp;
    let upper = ctx.catalog.z_dom_upper()[0];
    let lower = abel_volterra::zeros::CatalogZero {
        location: upper.location.conj(),
        ..upper
    };
    let b_up = compute_bz(&ctx.calib, &upper, n_exp, 1.0, &ctx.acc).unwrap();
    let b_dn = compute_bz(&ctx.calib, &lower, n_exp, 1.0, &ctx.acc).unwrap();
    assert!((b_dn - b_up.conj()).norm() <= 1e-10 * b_up.norm());
    // simple zero: B is independent of x
    let b_x = compute_bz(&ctx.calib, &upper, n_exp, 0.37, &ctx.acc).unwrap();
    assert_eq!(b_x, b_up);
    // the argument advances by -arg z_min per unit increase of N
    let b_next = compute_bz(&ctx.calib, &upper, n_exp + 1, 1.0, &ctx.acc).unwrap();
    let adv = (b_next / b_up).arg();
    let want = -upper.location.arg();
    let diff = (adv - want).rem_euclid(2.0 * std::f64::consts::PI);
    assert!(
        !(1e-9..=2.0 * std::f64::consts::PI - 1e-9).contains(&diff),
        "advance {adv} vs {want}"
    );
    // remainder bound shrinks relative to the leading factor as m grows
    let lambda = ctx.calib.spec.lambda();
    let x0 = ctx.x0;
    let rel = |m: u32| {
        remainder_bound_ln(&ctx.params, lambda, m, x0)
            - (-(m as f64) * (n_exp as f64 + 1.0 - ctx.catalog.mu_max as f64) * lambda.ln()
                + lambda.powi(m as i32) * ctx.catalog.r_max * x0)
    };
    assert!(rel(1) < rel(0) && rel(2) < rel(1));
}

#[test]
fn solver_self_consistency_at_probes() {
    // Substituting the grid solution back into f + n k*f with an independent
    // quadrature reproduces g to O(h^2) times the kernel's Lipschitz data
    // (the modulation slopes reach b1/delta ~ 6e3, so the constant is large);
    // assert the order by halving h, plus an absolute sanity cap.
    let ctx = context().unwrap();
    let (grid, grid_half) = ctx.m0_grids().unwrap();
    let model = KernelModel::ModulatedAbel(ctx.calib.spec.clone());
    let probes: Vec<usize> = (1..=16).map(|k| k * grid.len() / 17).collect();
    let r_full = residual_check(&model, grid, &probes).unwrap();
    let probes_half: Vec<usize> = probes.iter().map(|p| 2 * p).collect();
    let r_half = residual_check(&model, grid_half, &probes_half).unwrap();
    let max_full = r_full.iter().cloned().fold(0.0, f64::max);
    let max_half = r_half.iter().cloned().fold(0.0, f64::max);
    assert!(max_full <= 2e-3, "residual {max_full:e} too large");
    assert!(
        max_half <= max_full / 2.5 + 1e-7,
        "no order-2 decay: {max_full:e} -> {max_half:e}"
    );
}

#[test]
fn abel_oracle_matches_scaled_complementary_error_function() {
    // The resolvent series equals e^{a^2 x} erfc(a sqrt(x)); cross-check the
    // series oracle against an entirely independent erfc implementation.
    for &(a, x) in &[
        (0.1f64, 0.5f64),
        (0.3545, 1.0),
        (0.7, 2.0),
        (1.2, 1.5),
        (0.05, 3.0),
    ] {
        let series = resolvent_series_value(a, x);
        let z = a * x.sqrt();
        let closed = (z * z).exp() * statrs::function::erf::erfc(z);
        assert!(
            (series - closed).abs() <= 1e-9 * closed.abs(),
            "a={a}, x={x}: {series} vs {closed}"
        );
    }
}

#[test]
fn h_grid_csv_emits_samples() {
    let ctx = context().unwrap();
    let csv = abel_volterra::artifact::h_grid_csv(&ctx.calib, (0.8, 1.2, 4), (0.8, 1.2, 4)).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "sigma,omega,abs_h");
    assert_eq!(lines.count(), 25);
    // the grid straddles the calibrated zero, so some |H| must be small
    let min = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::MAX, f64::min);
    assert!(min < 0.3, "min |H| on the grid = {min}");
}

#[test]
fn artifact_files_roundtrip_on_disk() {
    let ctx = context().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("calibration.json");
    abel_volterra::artifact::write_text(&path, &calibration_to_json(&ctx.calib)).unwrap();
    let text = abel_volterra::artifact::read_text(&path, "the calibration artifact").unwrap();
    let cal = calibration_from_json(&text).unwrap();
    assert_eq!(cal.spec, ctx.calib.spec);
    // missing upstream artifact surfaces as a dependency error naming it
    let missing = dir.path().join("nope.json");
    let err = abel_volterra::artifact::read_text(&missing, "the zero catalog").unwrap_err();
    assert!(err.to_string().contains("zero catalog"), "{err}");
}

#[test]
fn forcing_value_at_zero_matches_continuity() {
    // f(0) = g(0+): 0 for monomials with N >= 1, 1 for g = 1.
    let model = KernelModel::ConstAbel { coef: 0.3 };
    let opts = SolveOptions {
        n: 2.0,
        x_end: 0.5,
        h: 0.01,
        scheme: Scheme::ProductTrapezoidal,
        log_domain: None,
    };
    let g1 = solve(&model, Forcing::One, &opts).unwrap();
    assert_eq!(g1.values.f64_at(0), 1.0);
    let g2 = solve(&model, Forcing::Monomial(4), &opts).unwrap();
    assert_eq!(g2.values.f64_at(0), 0.0);
}
