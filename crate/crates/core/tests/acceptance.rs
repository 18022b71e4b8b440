//! Acceptance gate: ten quantitative criteria covering the laboratory's
//! claims, from spectral lattice structure to bitwise determinism.
//!
//! Each criterion is one test.  On success it prints exactly one
//! `acceptance NN (<slug>): PASS` line (visible with `--nocapture`); a
//! failed assertion is the FAIL record for that criterion.  Tolerances are
//! pinned as named constants next to the criterion they gate.

mod common;

use grushin_lab::blowup::{blowup_report, rescale};
use grushin_lab::frequency::{almgren_profile, extract_degree, height};
use grushin_lab::geometry::GrushinParams;
use grushin_lab::grid::{solve_smallest_eigenpair, GridSpec, ScalarField};
use grushin_lab::identities::{int_by_parts_residual, pohozaev_residual, scaling_checks};
use grushin_lab::potential::{parse_polynomial, Potential};
use grushin_lab::quadrature::build_sphere_quadrature;
use grushin_lab::spectrum::{
    build_spherical_basis, classify_against_formula, degree_from_mu, mu_from_degree, sl_solve,
    Parity, SectorSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

fn pass(n: u32, slug: &str) {
    println!("acceptance {n:02} ({slug}): PASS");
}

fn params(h: usize, k: usize, alpha: u32) -> GrushinParams {
    GrushinParams::new(h, k, alpha).unwrap()
}

fn square_grid(p: &GrushinParams, n: usize) -> GridSpec {
    GridSpec::new(p, &[(-1.0, 1.0), (-1.0, 1.0)], &[n, n]).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------- 1 ----

/// Absolute lattice gap for the `(2, 1, 1)` spectrum (`Q = 4`).
const SPECTRUM_GAP_Q4: f64 = 1e-3;
/// Absolute lattice gap for the `(2, 2, 1)` spectrum (`Q = 6`).
const SPECTRUM_GAP_Q6: f64 = 5e-3;
/// Wall-clock budget for criterion 1.
const SPECTRUM_BUDGET: Duration = Duration::from_secs(30);

/// Criterion 1: for `(2, 1, 1)` the first 6 eigenvalues of each sector
/// `l ∈ {0, 1, 2}` lie within 1e-3 of the lattice `{n(n+2)/4}`, and for
/// `(2, 2, 1)` within 5e-3 of `{n(n+4)/4}`.
#[test]
fn a01_spectrum_matches_integer_degree_lattice() {
    let t0 = Instant::now();
    for (k, gap_tol) in [(1usize, SPECTRUM_GAP_Q4), (2usize, SPECTRUM_GAP_Q6)] {
        let p = params(2, k, 1);
        // The lattice itself, written out: n (n + Q - 2) / (a+1)^2 with
        // Q - 2 = 2k and (a+1)^2 = 4.
        for n in 0..=8u32 {
            let direct = f64::from(n) * f64::from(n + 2 * k as u32) / 4.0;
            let formula = mu_from_degree(&p, n).unwrap();
            assert!(
                (formula - direct).abs() <= 1e-12 * direct.max(1.0),
                "(2,{k},1): formula {formula} != n(n+{}) / 4 = {direct}",
                2 * k
            );
        }
        for l in 0..=2u32 {
            let r = sl_solve(&p, &SectorSpec::new(l, 0), 6, 128).unwrap();
            assert_eq!(r.mu.len(), 6);
            let cls = classify_against_formula(&p, &r.mu);
            assert!(!cls.conjectural, "h = 2 classification must be proven");
            for e in &cls.entries {
                assert!(
                    e.gap <= gap_tol,
                    "(2,{k},1) sector l={l}: eigenvalue {} sits {:.3e} from the \
                     lattice (nearest degree {}), tolerance {gap_tol:.0e}",
                    e.mu,
                    e.gap,
                    e.degree
                );
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed < SPECTRUM_BUDGET,
        "criterion 1 took {elapsed:?}, budget {SPECTRUM_BUDGET:?}"
    );
    pass(1, "spectrum-formula-match");
}

// ---------------------------------------------------------------- 2 ----

/// Absolute round-trip error for the degree <-> eigenvalue inversion.
const INVERSION_TOL: f64 = 1e-12;
/// Wall-clock budget for criterion 2.
const INVERSION_BUDGET: Duration = Duration::from_secs(1);

/// Criterion 2: `degree_from_mu(mu_from_degree(n)) = n` to 1e-12 for
/// `n <= 50` across 10 seeded-random parameter triples with `h >= 2`.
#[test]
fn a02_degree_eigenvalue_inversion_round_trips() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772757368696e);
    for _ in 0..10 {
        let h = rng.random_range(2..=3usize);
        let k = rng.random_range(1..=3usize);
        let alpha = rng.random_range(0..=6u32);
        let p = params(h, k, alpha);
        for n in 0..=50u32 {
            let mu = mu_from_degree(&p, n).unwrap();
            let back = degree_from_mu(&p, mu).unwrap();
            assert!(
                (back - f64::from(n)).abs() <= INVERSION_TOL,
                "({h},{k},{alpha}): degree {n} -> mu {mu} -> degree {back}"
            );
        }
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed < INVERSION_BUDGET,
        "criterion 2 took {elapsed:?}, budget {INVERSION_BUDGET:?}"
    );
    pass(2, "degree-inversion-round-trip");
}

// ---------------------------------------------------------------- 3 ----

/// Absolute gap for the open-case subset check.
const SUBSET_GAP: f64 = 1e-3;
/// Wall-clock budget for criterion 3.
const SUBSET_BUDGET: Duration = Duration::from_secs(10);

/// Criterion 3: for `(1, 1, 1)` (the case where the closed form stays
/// conjectural) the computed angular spectrum contains values within 1e-3
/// of `{0, 0.5, 1.5, 3}` — the values forced by the harmonic polynomials
/// `1, x, y, xy` of homogeneities `0, 1, 2, 3` via
/// `mu = l (l + Q - 2) / (a+1)^2` with `Q = 3`.
#[test]
fn a03_scalar_case_spectrum_contains_harmonic_values() {
    let t0 = Instant::now();
    let p = params(1, 1, 1);
    // Targets from the homogeneity oracle, not hard-coded decimals.
    let targets: Vec<f64> = (0..=3u32)
        .map(|l| {
            let lf = f64::from(l);
            lf * (lf + 1.0) / 4.0
        })
        .collect();
    assert_eq!(targets, vec![0.0, 0.5, 1.5, 3.0]);

    let even = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Even), 5, 96).unwrap();
    let odd = sl_solve(&p, &SectorSpec::with_parity(0, Parity::Odd), 5, 96).unwrap();
    let union: Vec<f64> = even.mu.iter().chain(odd.mu.iter()).copied().collect();
    for target in targets {
        let nearest = union
            .iter()
            .map(|m| (m - target).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest <= SUBSET_GAP,
            "no computed eigenvalue within {SUBSET_GAP:.0e} of {target}; \
             nearest is {nearest:.3e} away (union {union:?})"
        );
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed < SUBSET_BUDGET,
        "criterion 3 took {elapsed:?}, budget {SUBSET_BUDGET:?}"
    );
    pass(3, "open-case-subset");
}

// ---------------------------------------------------------------- 4 ----

/// Band around the exact frequency value on homogeneous harmonics.
const FREQUENCY_BAND: f64 = 2e-2;
/// Band around the exact homogeneity degree for both estimators.
const DEGREE_BAND: f64 = 3e-2;
/// Wall-clock budget for criterion 4.
const CONSTANCY_BUDGET: Duration = Duration::from_secs(60);

/// Criterion 4: on a 257x257 grid for `(1, 1, 1)`, the frequency of the
/// harmonics `u = x` and `u = y` stays within 2e-2 of 1 and 2 over
/// `r ∈ [0.1, 0.4]`, and both degree estimators land within 3e-2.
#[test]
fn a04_frequency_constant_on_homogeneous_harmonics() {
    let t0 = Instant::now();
    let p = params(1, 1, 1);
    let g = square_grid(&p, 257);
    let quad = build_sphere_quadrature(&p, 128).unwrap();
    // 12 radii spanning a factor of 4.5 so both estimators are defined;
    // the band is asserted on the sub-range pinned by the criterion.
    let radii = linspace(0.1, 0.45, 12);
    let cases: [(&str, common::Surface, f64); 2] =
        [("x", |x, _| x, 1.0), ("y", |_, y| y, 2.0)];
    for (name, f, truth) in cases {
        let u = ScalarField::from_fn(&g, |pt| f(pt.x[0], pt.y[0]));
        let prof = almgren_profile(&u, &Potential::Zero, &quad, &radii, 24).unwrap();
        for (r, n) in prof.radii.iter().zip(&prof.frequency) {
            if *r <= 0.4 + 1e-12 {
                assert!(
                    (n - truth).abs() <= FREQUENCY_BAND,
                    "u = {name}: N({r}) = {n}, expected within {FREQUENCY_BAND} of {truth}"
                );
            }
        }
        let est = extract_degree(&prof).unwrap();
        assert!(
            (est.from_frequency - truth).abs() <= DEGREE_BAND,
            "u = {name}: frequency-intercept estimator {} vs {truth}",
            est.from_frequency
        );
        assert!(
            (est.from_height - truth).abs() <= DEGREE_BAND,
            "u = {name}: height-slope estimator {} vs {truth}",
            est.from_height
        );
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed < CONSTANCY_BUDGET,
        "criterion 4 took {elapsed:?}, budget {CONSTANCY_BUDGET:?}"
    );
    pass(4, "frequency-constancy");
}

// ---------------------------------------------------------------- 5 ----

/// Residual bound for the derivative identity on the eigen-solution.
const DH_RESIDUAL_TOL: f64 = 1e-2;
/// Wall-clock budget for criterion 5.
const DH_BUDGET: Duration = Duration::from_secs(60);

/// Criterion 5: the identity `D = (r/2) H'` holds within 1e-2 over
/// `r ∈ [0.1, 0.4]` for the first Dirichlet eigenfunction with its
/// eigenvalue as the potential: the energy subtracts `V u²`, so the
/// identity characterizes `-L_a u = V u`, satisfied exactly by the
/// eigenpair with `V = λ`.
#[test]
fn a05_derivative_identity_on_eigen_solution() {
    let t0 = Instant::now();
    let p = params(1, 1, 1);
    let g = square_grid(&p, 257);
    let (lambda, u) = solve_smallest_eigenpair(&g, &Potential::Zero).unwrap();
    assert!(lambda > 0.0, "principal Dirichlet eigenvalue must be positive");
    let quad = build_sphere_quadrature(&p, 128).unwrap();
    // Geometric spacing keeps the log-log derivative stencils balanced; the
    // height of the eigenfunction is not a power law, so the derivative
    // estimate (unlike the identity itself) depends on the sampling.
    let radii: Vec<f64> = (0..17).map(|i| 0.1 * 4f64.powf(i as f64 / 16.0)).collect();
    let prof = almgren_profile(&u, &Potential::Constant(lambda), &quad, &radii, 24).unwrap();
    for (r, res) in prof.radii.iter().zip(&prof.dh_residual) {
        assert!(
            res <= &DH_RESIDUAL_TOL,
            "derivative-identity residual {res:.3e} at r = {r}, tolerance {DH_RESIDUAL_TOL}"
        );
    }
    let elapsed = t0.elapsed();
    assert!(
        elapsed < DH_BUDGET,
        "criterion 5 took {elapsed:?}, budget {DH_BUDGET:?}"
    );
    pass(5, "derivative-identity");
}

// ---------------------------------------------------------------- 6 ----

/// Monotonicity slack for sampled frequencies of harmonic mixtures.
const MONOTONE_SLACK: f64 = 1e-3;

/// Criterion 6: for five manufactured harmonic combinations the sampled
/// frequency is nondecreasing in `r` up to 1e-3 slack (the potential-free
/// monotonicity shadow).
#[test]
fn a06_frequency_monotone_for_harmonic_mixtures() {
    let p = params(1, 1, 1);
    let g = square_grid(&p, 257);
    let quad = build_sphere_quadrature(&p, 128).unwrap();
    let radii = linspace(0.1, 0.45, 10);
    let mixtures: [(&str, common::Surface); 5] = [
        ("x + y", |x, y| x + y),
        ("x + x*y", |x, y| x + x * y),
        ("y + (y^2 - x^4/6)", |x, y| y + (y * y - x.powi(4) / 6.0)),
        ("x + y + x*y", |x, y| x + y + x * y),
        ("x*y + (x*y^2 - x^5/10)", |x, y| {
            x * y + (x * y * y - x.powi(5) / 10.0)
        }),
    ];
    for (name, f) in mixtures {
        let u = ScalarField::from_fn(&g, |pt| f(pt.x[0], pt.y[0]));
        let prof = almgren_profile(&u, &Potential::Zero, &quad, &radii, 24).unwrap();
        for w in prof.frequency.windows(2) {
            assert!(
                w[1] >= w[0] - MONOTONE_SLACK,
                "u = {name}: frequency decreases {} -> {} beyond the {MONOTONE_SLACK} slack",
                w[0],
                w[1]
            );
        }
    }
    pass(6, "frequency-monotonicity");
}

// ---------------------------------------------------------------- 7 ----

/// Minimum measured convergence order for the integral identities.
const IDENTITY_MIN_ORDER: f64 = 1.5;
/// Residual bound at the finest grid for exact harmonics.
const IDENTITY_FINEST_TOL: f64 = 1e-3;

/// Criterion 7: the Pohozaev-type and integration-by-parts residuals
/// converge with measured order >= 1.5 across 65/129/257 grids on a smooth
/// exact solution, and sit below 1e-3 at the finest grid for an exact
/// harmonic polynomial.
#[test]
fn a07_integral_identities_converge() {
    let p = params(1, 1, 1);
    let quad = build_sphere_quadrature(&p, 128).unwrap();
    // Smooth exact solution: L_a e^y = x^2 e^y, so V = x^2.
    let pot = Potential::Polynomial(parse_polynomial("x1^2", 1, 1).unwrap());
    let mut po = Vec::new();
    let mut ibp = Vec::new();
    for n in [65usize, 129, 257] {
        let g = square_grid(&p, n);
        let u = ScalarField::from_fn(&g, |pt| pt.y[0].exp());
        // Smooth companion with no vanishing pairings against u.
        let v = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.x[0] + pt.y[0]);
        po.push(pohozaev_residual(&u, &pot, &quad, 0.5, 24).unwrap());
        ibp.push(int_by_parts_residual(&u, &v, &quad, 0.5, 24).unwrap());
    }
    for (name, rs) in [("pohozaev", &po), ("integration-by-parts", &ibp)] {
        for w in rs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                order >= IDENTITY_MIN_ORDER,
                "{name}: residuals {rs:?} give order {order:.2} < {IDENTITY_MIN_ORDER}"
            );
        }
    }

    // Exact harmonic at the finest grid: u = x y (L_a u = 0).
    let g = square_grid(&p, 257);
    let u = ScalarField::from_fn(&g, |pt| pt.x[0] * pt.y[0]);
    let v = ScalarField::from_fn(&g, |pt| {
        pt.x[0] * pt.y[0] + pt.x[0] * pt.x[0] + pt.y[0]
    });
    let r_po = pohozaev_residual(&u, &Potential::Zero, &quad, 0.5, 24).unwrap();
    let r_ibp = int_by_parts_residual(&u, &v, &quad, 0.5, 24).unwrap();
    assert!(
        r_po <= IDENTITY_FINEST_TOL,
        "pohozaev residual {r_po:.3e} on the exact harmonic"
    );
    assert!(
        r_ibp <= IDENTITY_FINEST_TOL,
        "integration-by-parts residual {r_ibp:.3e} on the exact harmonic"
    );
    pass(7, "integral-identities");
}

// ---------------------------------------------------------------- 8 ----

/// Relative tolerance for the dilation ratios of volume and surface.
const SCALING_RATIO_TOL: f64 = 1e-6;
/// Absolute tolerance for the unit-ball volume against the 1-D oracle.
const VOLUME_ORACLE_TOL: f64 = 1e-8;

/// Criterion 8: gauge balls scale like `λ^Q` in volume and `λ^(Q-1)` in
/// surface (checked at λ = 2 against a Cartesian slice oracle), and the
/// `(1, 1, 1)` unit-ball volume matches the 1-D integral
/// `∫ sqrt(1 - x^4) dx` to 1e-8.
#[test]
fn a08_scaling_laws_hold() {
    for (h, k, alpha) in [(1usize, 1usize, 1u32), (2, 1, 1), (2, 2, 1)] {
        let q = (h + (alpha as usize + 1) * k) as f64;
        let v1 = common::oracle_ball_volume(h, k, alpha, 1.0);
        let v2 = common::oracle_ball_volume(h, k, alpha, 2.0);
        let vol_ratio_defect = (v2 / v1 / 2f64.powf(q) - 1.0).abs();
        assert!(
            vol_ratio_defect <= SCALING_RATIO_TOL,
            "({h},{k},{alpha}): |B_2|/|B_1| misses 2^{q} by {vol_ratio_defect:.3e}"
        );
        let s1 = common::oracle_ball_perimeter(h, k, alpha, 1.0);
        let s2 = common::oracle_ball_perimeter(h, k, alpha, 2.0);
        let sur_ratio_defect = (s2 / s1 / 2f64.powf(q - 1.0) - 1.0).abs();
        assert!(
            sur_ratio_defect <= SCALING_RATIO_TOL,
            "({h},{k},{alpha}): surface ratio misses 2^{} by {sur_ratio_defect:.3e}",
            q - 1.0
        );

        // The library's quadrature volume and built-in checks must agree
        // with the independent slices.
        let p = params(h, k, alpha);
        let quad = build_sphere_quadrature(&p, 192).unwrap();
        let vol_quad = quad.total_plain_mass() / q;
        assert!(
            ((vol_quad - v1) / v1).abs() <= 1e-7,
            "({h},{k},{alpha}): quadrature volume {vol_quad} vs oracle {v1}"
        );
        let checks = scaling_checks(&quad).unwrap();
        assert!(checks.volume_defect <= 1e-7, "{checks:?}");
        assert!(checks.dilation_defect <= SCALING_RATIO_TOL, "{checks:?}");
        assert!(checks.surface_defect <= 1e-5, "{checks:?}");
    }

    // Scalar case against the 1-D oracle and the frozen constant.
    let one_d = common::simpson_oracle(
        &|x: f64| (1.0 - x.powi(4)).max(0.0).sqrt(),
        -1.0,
        1.0,
        1e-13,
    );
    assert!(
        (one_d - common::BALL_VOLUME_111).abs() <= 1e-10,
        "1-D oracle {one_d} vs frozen constant {}",
        common::BALL_VOLUME_111
    );
    let p = params(1, 1, 1);
    let quad = build_sphere_quadrature(&p, 256).unwrap();
    let vol = quad.total_plain_mass() / 3.0;
    assert!(
        (vol - one_d).abs() <= VOLUME_ORACLE_TOL,
        "(1,1,1) unit-ball volume {vol} vs 1-D oracle {one_d}"
    );
    pass(8, "scaling-laws");
}

// ---------------------------------------------------------------- 9 ----

/// Agreement bound for coefficients at the two largest scales.
const BETA_AGREEMENT: f64 = 5e-2;
/// Normalization bracket for the rescaled family, checked with an
/// independent finer quadrature.
const NORMALIZATION_LO: f64 = 0.995;
const NORMALIZATION_HI: f64 = 1.005;

/// Criterion 9: for the first Dirichlet eigenfunction the sup-norm
/// distance of the rescalings to the blow-up profile strictly decreases
/// over ε = 0.4, 0.2, 0.1; the coefficients at the two largest scales
/// agree within 5e-2; and each rescaling has unit weighted norm within
/// [0.995, 1.005] under a finer, independent quadrature.
#[test]
fn a09_blowup_profiles_converge() {
    let p = params(1, 1, 1);
    let g = square_grid(&p, 129);
    let (_, u) = solve_smallest_eigenpair(&g, &Potential::Zero).unwrap();
    let basis = build_spherical_basis(&p, 8, 96, 128).unwrap();
    let scales = [0.4, 0.2, 0.1];
    let report = blowup_report(&u, &basis, &scales, None).unwrap();

    // Sup-norm distance to the matched profile, from the raw rescalings.
    let sup_err: Vec<f64> = scales
        .iter()
        .map(|&e| {
            let (s, _) = rescale(&u, &basis.quadrature, e).unwrap();
            s.iter()
                .zip(&report.profile)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(
        sup_err[0] > sup_err[1] && sup_err[1] > sup_err[2],
        "sup-norm profile errors must strictly decrease, got {sup_err:?}"
    );

    // Coefficient agreement between the two largest scales.
    for (i, (b0, b1)) in report.betas[0].iter().zip(&report.betas[1]).enumerate() {
        assert!(
            (b0 - b1).abs() <= BETA_AGREEMENT,
            "coefficient {i} drifts {b0} -> {b1} between the two largest scales"
        );
    }

    // Independent normalization check: the weighted mass of the rescaling
    // under a finer quadrature, relative to the one used to normalize.
    let fine = build_sphere_quadrature(&p, 192).unwrap();
    for &e in &scales {
        let h_base = height(&u, &basis.quadrature, e).unwrap();
        let h_fine = height(&u, &fine, e).unwrap();
        let ratio = h_fine / h_base;
        assert!(
            (NORMALIZATION_LO..=NORMALIZATION_HI).contains(&ratio),
            "normalization of the rescaling at ε = {e} is {ratio} under a finer rule"
        );
    }
    pass(9, "blowup-convergence");
}

// --------------------------------------------------------------- 10 ----

/// Criterion 10: runs are byte-identical across 1, 2, and 8 workers.
#[test]
fn a10_runs_are_deterministic_across_workers() {
    let bin = env!("CARGO_BIN_EXE_grushin-lab");
    let dir = tempfile::tempdir().unwrap();

    let freq_cfg = dir.path().join("frequency.cfg");
    std::fs::write(
        &freq_cfg,
        "params.h = 1\n\
         params.k = 1\n\
         params.alpha = 1\n\
         grid.nodes = 65\n\
         quadrature.resolution = 64\n\
         boundary.kind = expr\n\
         boundary.expr = x1*y1\n\
         frequency.radii = 0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45\n\
         frequency.radial_resolution = 16\n\
         experiment.kind = frequency\n",
    )
    .unwrap();
    let spec_cfg = dir.path().join("spectrum.cfg");
    std::fs::write(
        &spec_cfg,
        "params.h = 2\n\
         params.k = 1\n\
         params.alpha = 1\n\
         grid.nodes = 33\n\
         quadrature.resolution = 64\n\
         spectrum.sectors = 0:0,1:0,2:0\n\
         spectrum.count = 4\n\
         spectrum.resolution = 64\n\
         experiment.kind = spectrum\n",
    )
    .unwrap();

    for (kind, cfg) in [("frequency", &freq_cfg), ("spectrum", &spec_cfg)] {
        let mut outputs: Vec<std::collections::BTreeMap<String, Vec<u8>>> = Vec::new();
        for threads in [1usize, 2, 8] {
            let out = dir.path().join(format!("{kind}-t{threads}"));
            let status = std::process::Command::new(bin)
                .arg(kind)
                .arg("--config")
                .arg(cfg)
                .arg("--out")
                .arg(&out)
                .arg("--threads")
                .arg(threads.to_string())
                .env("SOURCE_DATE_EPOCH", "0")
                .status()
                .unwrap();
            assert!(status.success(), "{kind} run with {threads} workers failed");
            let mut files = std::collections::BTreeMap::new();
            for entry in std::fs::read_dir(&out).unwrap() {
                let path = entry.unwrap().path();
                let name = path.file_name().unwrap().to_string_lossy().into_owned();
                files.insert(name, std::fs::read(&path).unwrap());
            }
            assert!(!files.is_empty(), "{kind} run wrote no outputs");
            outputs.push(files);
        }
        let reference = &outputs[0];
        for (i, other) in outputs.iter().enumerate().skip(1) {
            let workers = [1, 2, 8][i];
            assert_eq!(
                reference.keys().collect::<Vec<_>>(),
                other.keys().collect::<Vec<_>>(),
                "{kind}: file sets differ between 1 and {workers} workers"
            );
            for (name, bytes) in reference {
                assert_eq!(
                    bytes, &other[name],
                    "{kind}: {name} differs between 1 and {workers} workers"
                );
            }
        }
    }
    pass(10, "worker-determinism");
}
