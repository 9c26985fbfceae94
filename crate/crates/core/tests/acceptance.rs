//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Every tolerance is pinned below next to the check that uses it.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::Instant;

use gaussframe::correspondence::{condition_negative, condition_positive, transfer_negative, LINE_TOLERANCE};
use gaussframe::fields::{stereo_project, stereo_unproject, ComplexField, GridDomain, GridKind, RealField};
use gaussframe::lie::{GroupPreset, Mu, StructureConstants};
use gaussframe::negative::{self, forbidden_curvatures, NullJet};
use gaussframe::positive::{self, ConformalJet};
use gaussframe::report::Refinement;
use gaussframe::scenarios::{gzbar, pseudosphere};
use gaussframe::su2::{embed_oracle_forms, integrate_frame, max_loop_closure_defect, revolution_ode, Quat, RevolutionConfig};
use gaussframe::{Result, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// Observed orders must reach this value; three halvings of a second-order
/// scheme sit slightly below 2 before the asymptotic regime.
const MIN_ORDER: f64 = 1.9;
/// Residuals below this are at rounding level; no order is measurable.
const ROUNDING_FLOOR: f64 = 1e-11;

fn decays_at_order_two(r: &Refinement) -> bool {
    r.values.iter().all(|&v| v < ROUNDING_FLOOR) || r.min_order() >= MIN_ORDER
}

fn pseudosphere_grid(h: f64) -> Result<GridDomain> {
    let n = (1.8 / h).round() as usize + 1;
    GridDomain::new((-2.0, 0.2), (h, h), (n, n), GridKind::Null)
}

fn gzbar_grid(h: f64) -> Result<GridDomain> {
    GridDomain::centered((0.3, 0.2), 0.4, h, GridKind::Conformal)
}

fn criterion_1() -> Result<Outcome> {
    const TOL: f64 = 1e-5;
    const BUDGET_S: f64 = 10.0;
    let start = Instant::now();
    let sample = pseudosphere::position_sample(pseudosphere_grid(5e-3)?)?;
    let forms = embed_oracle_forms(&sample)?;
    let err = forms.max_curvature_error(-1.0);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        err < TOL && secs < BUDGET_S,
        format!("pseudosphere max |K + 1| = {err:.2e} (tol {TOL:.0e}), {secs:.2} s"),
    )
}

fn criterion_2() -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    let s3 = GroupPreset::S3.mu();
    let d = pseudosphere_grid(5e-3)?;
    let mut err: f64 = 0.0;
    for (i, j) in d.nodes() {
        let (u, v) = d.coords(i, j);
        let (a, big, _) = negative::closed_node(s3, &pseudosphere::null_jet(u, v, -2.0))?.real();
        let (pa, pbig) = pseudosphere::printed_frame(u, v);
        err = err.max((a - pa).amax()).max((big - pbig).amax());
    }
    let (a, big, _) = negative::closed_node(s3, &pseudosphere::null_jet(0.0, 0.0, -2.0))?.real();
    let spot = [
        (a[1] + (1.0 + SQRT_2) / 2.0).abs(),
        (big[1] + (SQRT_2 - 1.0) / 2.0).abs(),
        a[2].abs(),
        big[2].abs(),
    ];
    let spot_err = spot.iter().copied().fold(0.0, f64::max);
    outcome(
        err < TOL && spot_err < 1e-14,
        format!("closed forms vs printed frame max = {err:.2e} (tol {TOL:.0e}); spot at origin {spot_err:.1e}"),
    )
}

fn criterion_3() -> Result<Outcome> {
    const DRIFT_TOL: f64 = 1e-8;
    const K_TOL: f64 = 1e-4;
    const BUDGET_S: f64 = 30.0;
    let start = Instant::now();
    let surface = revolution_ode(&RevolutionConfig::default())?;
    let forms = embed_oracle_forms(&surface.sample)?;
    let err = forms.max_curvature_error(-2.0);
    let drift = surface.sample.raw_drift;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        drift < DRIFT_TOL && err < K_TOL && secs < BUDGET_S,
        format!(
            "K = -2 surface: drift {drift:.1e} (tol {DRIFT_TOL:.0e}), max |K_ext + 2| = {err:.2e} (tol {K_TOL:.0e}), {secs:.2} s; planar-profile defect {:.3}",
            surface.profile.ansatz_defect
        ),
    )
}

fn criterion_4() -> Result<Outcome> {
    const MIN_CLOSURE_RATIO: f64 = 3.5;
    let base = gzbar_grid(0.02)?;
    let conn = GroupPreset::S3.mu().christoffel();
    let setup = |d: &GridDomain| -> Result<(ComplexField, RealField)> { Ok((gzbar(*d)?, RealField::constant(*d, 1.0))) };

    let curvature_eq = Refinement::run(base, 4, |d| {
        let (g, k) = setup(d)?;
        Ok(positive::integrability_residual_s3(&g, &k)?.equation.interior_max())
    })?;
    let second_order = Refinement::run(base, 4, |d| {
        let (g, k) = setup(d)?;
        Ok(positive::second_order_residual(GroupPreset::S3.mu(), &g, &k)?.interior_max())
    })?;
    let commutator = Refinement::run(base, 4, |d| {
        let (g, k) = setup(d)?;
        let frame = positive::solve_linear_positive(&conn, &g, &k)?;
        Ok(positive::commutator_residual(&conn, &g, &k, &frame)?.report().interior_max())
    })?;
    let closure = Refinement::run(base, 4, |d| {
        let (g, k) = setup(d)?;
        max_loop_closure_defect(&positive::solve_linear_positive(&conn, &g, &k)?, 2)
    })?;
    let oracle = Refinement::run(base, 4, |d| {
        let (g, k) = setup(d)?;
        let sample = integrate_frame(&positive::solve_linear_positive(&conn, &g, &k)?, Quat::IDENTITY)?;
        Ok(embed_oracle_forms(&sample)?.max_curvature_error(1.0))
    })?;

    let closure_ok = closure.ratios().iter().all(|&r| r >= MIN_CLOSURE_RATIO);
    let pass = decays_at_order_two(&curvature_eq)
        && decays_at_order_two(&second_order)
        && decays_at_order_two(&commutator)
        && closure_ok
        && oracle.min_order() >= MIN_ORDER;
    let fmt = |r: &Refinement| r.values.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join("/");
    outcome(
        pass,
        format!(
            "g = conj z, K = 1: curvature eq {}, second-order eq {}, commutator {} (order {:.2}), closure ratios {:?}, oracle |K_ext - 1| {} (order {:.2})",
            fmt(&curvature_eq),
            fmt(&second_order),
            fmt(&commutator),
            commutator.min_order(),
            closure.ratios().iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
            fmt(&oracle),
            oracle.min_order()
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    const HARMONIC_TOL: f64 = 1e-10;
    const PERTURBED_FLOOR: f64 = 1e-2;
    let d = gzbar_grid(1e-2)?;
    let harmonic = positive::harmonic_residual(&gzbar(d)?)?.summary().max;
    let perturbed = Refinement::run(d, 3, |d| {
        let g = gzbar(*d)?;
        let k = RealField::from_fn(*d, |x, _| 1.0 + 0.3 * x);
        Ok(positive::integrability_residual_s3(&g, &k)?.equation.interior_max())
    })?;
    let bounded = perturbed.values.iter().all(|&v| v > PERTURBED_FLOOR);
    outcome(
        harmonic < HARMONIC_TOL && bounded,
        format!(
            "harmonic defect {harmonic:.1e} (tol {HARMONIC_TOL:.0e}); K = 1 + 0.3x curvature-equation residual {:?}",
            perturbed.values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6() -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = StdRng::seed_from_u64(6);
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let g = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (a, b) = forbidden_curvatures(GroupPreset::S3.mu(), g);
        err = err.max((a + 1.0).abs()).max((b + 1.0).abs());
    }
    outcome(err < TOL, format!("sphere exclusions max |value + 1| = {err:.1e} (tol {TOL:.0e})"))
}

fn criterion_7() -> Result<Outcome> {
    let d = pseudosphere_grid(0.05)?;
    let k = RealField::constant(d, -2.0);
    let t = transfer_negative(&k, Some(-1.0), LINE_TOLERANCE)?;
    let exact = t.k_target.values().iter().all(|&v| v == -1.0);
    let neg_cond = condition_negative(&k)?.summary().max;
    let kp = RealField::constant(gzbar_grid(0.05)?, 2.0);
    let pos_cond = condition_positive(&kp)?.summary().max;
    outcome(
        exact && neg_cond == 0.0 && pos_cond == 0.0 && t.path_dependence < LINE_TOLERANCE,
        format!(
            "K = -2 -> K* = -1 exactly: {exact}; conditions {neg_cond:e} / {pos_cond:e}; line disagreement {:.1e} (tol {LINE_TOLERANCE:.0e})",
            t.path_dependence
        ),
    )
}

fn random_conformal_jet(rng: &mut StdRng) -> ConformalJet {
    let mut c = || C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    let (g, g_z, g_zbar) = (c(), c(), c());
    ConformalJet {
        g,
        g_z,
        g_zbar,
        k: rng.random_range(0.2..3.0),
    }
}

fn random_null_jet(rng: &mut StdRng) -> NullJet {
    let mut c = || C64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    let (g, g_u, g_v) = (c(), c(), c());
    NullJet {
        g,
        g_u,
        g_v,
        k: -rng.random_range(0.2..3.0),
    }
}

fn relative(a: &gaussframe::CVec3, b: &gaussframe::CVec3) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn criterion_8() -> Result<Outcome> {
    const REL_TOL: f64 = 1e-10;
    const DET_TOL: f64 = 1e-12;
    let groups = [
        GroupPreset::S3,
        GroupPreset::Nil3 { tau: 1.0 },
        GroupPreset::Berger { tau: 0.4 },
        GroupPreset::Psl2 { tau: 0.7 },
    ];
    let mut rng = StdRng::seed_from_u64(8);
    let (mut unim, mut sphere, mut null, mut det) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for group in groups {
        let mu = group.mu();
        let conn = mu.christoffel();
        let mut taken = 0;
        while taken < 50 {
            let jet = random_conformal_jet(&mut rng);
            if jet.margin().abs() < 1e-3 {
                continue;
            }
            let (matrix, _) = positive::frame_system(&conn, &jet);
            if matrix.determinant().norm() < 1e-3 {
                continue;
            }
            let generic = positive::solve_node(&conn, &jet).expect("checked non-singular");
            unim = unim.max(relative(&generic, &positive::closed_unimodular_node(mu, &jet)?));
            if group == GroupPreset::S3 {
                sphere = sphere.max(relative(&generic, &positive::closed_s3_node(&jet)));
            }
            det = det.max((matrix.determinant() - positive::discriminant(mu, &jet)).norm());
            taken += 1;
        }
        let mut taken = 0;
        while taken < 50 {
            let jet = random_null_jet(&mut rng);
            let (f1, f2) = forbidden_curvatures(mu, jet.g);
            if (jet.k - f1).abs() < 1e-2 || (jet.k - f2).abs() < 1e-2 || jet.margin().abs() < 1e-3 {
                continue;
            }
            let generic = match negative::solve_node(&conn, &jet) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let closed = negative::closed_node(mu, &jet)?;
            null = null
                .max(relative(&generic.along_u, &closed.along_u))
                .max(relative(&generic.along_v, &closed.along_v));
            taken += 1;
        }
    }
    outcome(
        unim < REL_TOL && sphere < REL_TOL && null < REL_TOL && det < DET_TOL,
        format!(
            "generic vs closed: unimodular {unim:.1e}, sphere {sphere:.1e}, null {null:.1e} (tol {REL_TOL:.0e}); determinant {det:.1e} (tol {DET_TOL:.0e})"
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = StdRng::seed_from_u64(9);
    let mut stereo: f64 = 0.0;
    let mut constants: f64 = 0.0;
    for _ in 0..200 {
        let g = C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        stereo = stereo.max((stereo_project(&stereo_unproject(g))? - g).norm() / (1.0 + g.norm()));
        let c = StructureConstants::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let back = c.mu().structure_constants();
        constants = constants.max((back.as_vector() - c.as_vector()).amax());
        let mu = Mu::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let m = mu.structure_constants().mu();
        constants = constants.max((m.mu1 - mu.mu1).abs().max((m.mu2 - mu.mu2).abs()).max((m.mu3 - mu.mu3).abs()));
    }
    let identity = Refinement::run(gzbar_grid(0.02)?, 4, |d| {
        let g = gzbar(*d)?;
        let k = RealField::from_fn(*d, |x, y| 1.0 + 0.3 * x.sin() * (2.0 * y).cos());
        Ok(positive::integrability_residual_s3(&g, &k)?.log_identity.interior_max())
    })?;
    outcome(
        stereo < TOL && constants < TOL && identity.min_order() >= MIN_ORDER,
        format!(
            "stereographic {stereo:.1e}, structure constants {constants:.1e} (tol {TOL:.0e}); log-derivative identity {:?} (order {:.2})",
            identity.values.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>(),
            identity.min_order()
        ),
    )
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("pseudosphere curvature", criterion_1),
        ("printed frame closed forms", criterion_2),
        ("K = -2 surface in S3", criterion_3),
        ("integrable positive family", criterion_4),
        ("harmonicity and constant curvature", criterion_5),
        ("sphere exclusion identity", criterion_6),
        ("curvature correspondence", criterion_7),
        ("generic vs closed-form solvers", criterion_8),
        ("round trips and log identity", criterion_9),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {detail}", n + 1, if pass { "PASS" } else { "FAIL" });
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
