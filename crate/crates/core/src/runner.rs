//! Experiment pipelines behind the command-line front end.
//!
//! Each experiment takes a validated [`Config`], runs its pipeline, and
//! returns human-readable summary lines.  When an output directory is
//! configured (or passed explicitly), the pipeline also writes CSV/JSON
//! outputs plus a digest manifest through [`crate::report`]; all bytes
//! written are independent of thread count and wall-clock time.

use crate::blowup::{blowup_report, BlowupReport};
use crate::config::{Config, ExperimentKind};
use crate::error::{Error, Result};
use crate::frequency::{almgren_profile, extract_degree, DegreeEstimates};
use crate::grid::{solve_dirichlet, GridSpec, ScalarField};
use crate::identities::{int_by_parts_residual, pohozaev, scaling_checks, PohozaevBreakdown};
use crate::quadrature::{build_sphere_quadrature, SphereQuadrature};
use crate::report::{csv_document, float_cell, OutputWriter};
use crate::spectrum::{
    build_spherical_basis, classify_against_formula, mu_from_degree, sl_solve, Parity,
    SectorSpec, SpectralResult,
};
use serde_json::json;
use std::path::{Path, PathBuf};

/// What a finished experiment hands back to the front end.
#[derive(Debug)]
pub struct RunOutcome {
    /// The experiment that ran.
    pub experiment: ExperimentKind,
    /// Human-readable result lines, in print order.
    pub summary_lines: Vec<String>,
    /// Path of the written manifest, when outputs were requested.
    pub manifest: Option<PathBuf>,
}

/// Runs one experiment.  `out_override` takes precedence over the
/// configured output directory; with neither, no files are written.
pub fn run_experiment(
    kind: ExperimentKind,
    config: &Config,
    out_override: Option<&Path>,
) -> Result<RunOutcome> {
    if let Some(declared) = config.experiment {
        if declared != kind {
            return Err(Error::Config(format!(
                "  the configuration declares experiment.kind = {declared}, \
                 but the {kind} subcommand was invoked"
            )));
        }
    }
    let out_dir: Option<PathBuf> = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone());

    let mut sink = match &out_dir {
        Some(dir) => Some(OutputWriter::create(dir)?),
        None => None,
    };
    let mut lines = Vec::new();

    match kind {
        ExperimentKind::Solve => run_solve(config, &mut sink, &mut lines)?,
        ExperimentKind::Frequency => run_frequency(config, &mut sink, &mut lines)?,
        ExperimentKind::Spectrum => run_spectrum(config, &mut sink, &mut lines)?,
        ExperimentKind::Blowup => run_blowup(config, &mut sink, &mut lines)?,
        ExperimentKind::Pohozaev => run_pohozaev(config, &mut sink, &mut lines)?,
        ExperimentKind::Report => run_report(config, &mut sink, &mut lines)?,
    }

    let manifest = match sink {
        Some(writer) => {
            let path = writer.finish(kind.name(), &config.resolved_entries())?;
            lines.push(format!("wrote {}", path.display()));
            Some(path)
        }
        None => None,
    };
    Ok(RunOutcome {
        experiment: kind,
        summary_lines: lines,
        manifest,
    })
}

fn build_grid(config: &Config) -> Result<GridSpec> {
    GridSpec::new(&config.params, &config.grid.extents, &config.grid.nodes)
}

fn solve_field(config: &Config) -> Result<(GridSpec, ScalarField)> {
    let spec = build_grid(config)?;
    let u = solve_dirichlet(&spec, &config.potential, config.boundary_fn(), |_| 0.0)?;
    Ok((spec, u))
}

fn build_quadrature(config: &Config) -> Result<SphereQuadrature> {
    build_sphere_quadrature(&config.params, config.quadrature_resolution)
}

fn write_json(
    sink: &mut Option<OutputWriter>,
    name: &str,
    value: &serde_json::Value,
) -> Result<()> {
    if let Some(writer) = sink {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::InvalidArgument(format!("summary serialization: {e}")))?;
        text.push('\n');
        writer.write_text(name, &text)?;
    }
    Ok(())
}

fn write_csv(
    sink: &mut Option<OutputWriter>,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    if let Some(writer) = sink {
        writer.write_text(name, &csv_document(header, rows)?)?;
    }
    Ok(())
}

fn run_solve(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let (spec, u) = solve_field(config)?;
    let norm = u.l2_norm();
    let max_abs = u.max_abs();
    lines.push(format!(
        "solved {} nodes: |u|_2 = {norm:.6e}, max |u| = {max_abs:.6e}",
        spec.num_nodes()
    ));

    if sink.is_some() {
        let names = crate::config::axis_names(&config.params);
        let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
        header.push("u");
        let rows: Vec<Vec<String>> = (0..spec.num_nodes())
            .map(|i| {
                let pt = spec.node_point(i);
                let mut row: Vec<String> =
                    pt.x.iter().chain(&pt.y).map(|c| float_cell(*c)).collect();
                row.push(float_cell(u.values[i]));
                row
            })
            .collect();
        write_csv(sink, "solution.csv", &header, &rows)?;
        write_json(
            sink,
            "solve.json",
            &json!({
                "l2_norm": norm,
                "max_abs": max_abs,
                "nodes": config.grid.nodes,
                "extents": config.grid.extents,
                "potential": config.potential.to_string(),
                "boundary": config.boundary.to_string(),
            }),
        )?;
    }
    Ok(())
}

fn degree_estimates_json(estimates: &Result<DegreeEstimates>) -> serde_json::Value {
    match estimates {
        Ok(d) => json!({
            "from_frequency": d.from_frequency,
            "from_height": d.from_height,
        }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn run_frequency(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let (_, u) = solve_field(config)?;
    let quad = build_quadrature(config)?;
    let profile = almgren_profile(
        &u,
        &config.potential,
        &quad,
        &config.frequency.radii,
        config.frequency.radial_resolution,
    )?;
    let estimates = extract_degree(&profile);

    let n = profile.radii.len();
    let max_decrease = profile
        .frequency
        .windows(2)
        .fold(0.0f64, |m, w| m.max(w[0] - w[1]));
    let max_dh = profile.dh_residual.iter().cloned().fold(0.0f64, f64::max);
    lines.push(format!(
        "frequency over {n} radii: N ranges {:.6} .. {:.6}, largest decrease {max_decrease:.3e}",
        profile.frequency[0],
        profile.frequency[n - 1]
    ));
    lines.push(format!("derivative identity residual <= {max_dh:.3e}"));
    match &estimates {
        Ok(d) => lines.push(format!(
            "vanishing order: {:.6} (frequency intercept), {:.6} (height slope)",
            d.from_frequency, d.from_height
        )),
        Err(e) => lines.push(format!("vanishing order unavailable: {e}")),
    }

    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                float_cell(profile.radii[i]),
                float_cell(profile.height[i]),
                float_cell(profile.energy[i]),
                float_cell(profile.frequency[i]),
                float_cell(profile.dh_residual[i]),
            ]
        })
        .collect();
    write_csv(sink, "frequency.csv", &["r", "H", "D", "N", "dh_residual"], &rows)?;
    write_json(
        sink,
        "frequency.json",
        &json!({
            "frequency_first": profile.frequency[0],
            "frequency_last": profile.frequency[n - 1],
            "max_decrease": max_decrease,
            "max_dh_residual": max_dh,
            "degrees": degree_estimates_json(&estimates),
        }),
    )?;
    Ok(())
}

fn parity_cell(sector: &SectorSpec) -> String {
    match sector.parity {
        None => "none".into(),
        Some(Parity::Even) => "even".into(),
        Some(Parity::Odd) => "odd".into(),
    }
}

fn run_spectrum(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let params = config.params;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut sector_summaries = Vec::new();
    let mut union: Vec<f64> = Vec::new();
    let mut conjectural = false;

    for sector in &config.spectrum.sectors {
        let result: SpectralResult = sl_solve(
            &params,
            sector,
            config.spectrum.count,
            config.spectrum.resolution,
        )?;
        let classification = classify_against_formula(&params, &result.mu);
        conjectural = classification.conjectural;
        let ortho = result.orthonormality_defect();
        let residual = result.max_eigen_residual();

        for (j, &mu) in result.mu.iter().enumerate() {
            let entry = &classification.entries[j];
            rows.push(vec![
                sector.l.to_string(),
                sector.m.to_string(),
                parity_cell(sector),
                j.to_string(),
                float_cell(mu),
                float_cell(result.orders[j]),
                entry.degree.to_string(),
                float_cell(entry.formula_mu),
                float_cell(entry.gap),
            ]);
        }
        union.extend_from_slice(&result.mu);

        let mus: Vec<String> = result.mu.iter().map(|m| format!("{m:.8}")).collect();
        lines.push(format!(
            "sector l={} m={} ({}): mu = [{}]",
            sector.l,
            sector.m,
            parity_cell(sector),
            mus.join(", ")
        ));
        sector_summaries.push(json!({
            "l": sector.l,
            "m": sector.m,
            "parity": parity_cell(sector),
            "base_mu": result.base_mu,
            "mu": result.mu,
            "orders": result.orders,
            "degree_gaps": classification.entries.iter().map(|e| e.gap).collect::<Vec<_>>(),
            "orthonormality_defect": ortho,
            "eigen_residual": residual,
        }));
    }
    union.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    if conjectural {
        lines.push(
            "note: the integer-degree law is conjectural for h = 1; gaps are reported, \
             not asserted"
                .into(),
        );
    }

    write_csv(
        sink,
        "spectrum.csv",
        &[
            "l",
            "m",
            "parity",
            "index",
            "mu",
            "order",
            "degree",
            "formula_mu",
            "gap",
        ],
        &rows,
    )?;
    write_json(
        sink,
        "spectrum.json",
        &json!({
            "sectors": sector_summaries,
            "union_mu": union,
            "conjectural": conjectural,
        }),
    )?;
    Ok(())
}

fn run_blowup(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let (_, u) = solve_field(config)?;
    let basis = build_spherical_basis(
        &config.params,
        config.blowup.basis_order,
        config.spectrum.resolution,
        config.quadrature_resolution,
    )?;
    let report: BlowupReport = blowup_report(
        &u,
        &basis,
        &config.blowup.epsilons,
        config.blowup.target_degree,
    )?;

    lines.push(format!(
        "blow-up over {} scales: matched degree {:.4}, coefficient drift {:.3e}",
        report.epsilons.len(),
        report.matched_degree,
        report.beta_drift
    ));
    lines.push(format!(
        "profile distance {:.3e} (largest scale) -> {:.3e} (smallest)",
        report.profile_error.first().unwrap(),
        report.profile_error.last().unwrap()
    ));
    if let Some(v) = &report.vanishing {
        lines.push(format!(
            "vanishing order {:.4} (weighted slope {:.4}, degenerate-weight slope {:.4})",
            v.degree, v.psi_slope, v.x_slope
        ));
    }

    let nb = basis.functions.len();
    let beta_names: Vec<String> = (0..nb).map(|i| format!("beta{i}")).collect();
    let mut header: Vec<&str> = vec![
        "epsilon",
        "height",
        "normalization",
        "parseval",
        "profile_error",
    ];
    header.extend(beta_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = (0..report.epsilons.len())
        .map(|i| {
            let mut row = vec![
                float_cell(report.epsilons[i]),
                float_cell(report.height[i]),
                float_cell(report.normalization[i]),
                float_cell(report.parseval[i]),
                float_cell(report.profile_error[i]),
            ];
            row.extend(report.betas[i].iter().map(|b| float_cell(*b)));
            row
        })
        .collect();
    write_csv(sink, "blowup.csv", &header, &rows)?;

    let basis_json: Vec<serde_json::Value> = basis
        .functions
        .iter()
        .map(|f| json!({ "mu": f.mu, "degree": f.degree, "label": f.label }))
        .collect();
    write_json(
        sink,
        "blowup.json",
        &json!({
            "matched_degree": report.matched_degree,
            "matched_indices": report.matched,
            "beta_drift": report.beta_drift,
            "matched_share": report.matched_share,
            "scale_coherence": report.scale_coherence,
            "profile_error": report.profile_error,
            "vanishing": report.vanishing.as_ref().map(|v| json!({
                "degree": v.degree,
                "psi_slope": v.psi_slope,
                "x_slope": v.x_slope,
            })),
            "basis": basis_json,
            "basis_gram_defect": basis.gram_defect(),
        }),
    )?;
    Ok(())
}

fn run_pohozaev(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let (_, u) = solve_field(config)?;
    let quad = build_quadrature(config)?;
    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    let mut max_green = 0.0f64;
    for &r in &config.frequency.radii {
        let b: PohozaevBreakdown =
            pohozaev(&u, &config.potential, &quad, r, config.frequency.radial_resolution)?;
        let green = int_by_parts_residual(&u, &u, &quad, r, config.frequency.radial_resolution)?;
        max_residual = max_residual.max(b.residual);
        max_green = max_green.max(green);
        let mut row = vec![float_cell(r)];
        row.extend(b.terms.iter().map(|t| float_cell(*t)));
        row.push(float_cell(b.residual));
        row.push(float_cell(green));
        rows.push(row);
    }
    lines.push(format!(
        "balance residuals over {} radii: Pohozaev <= {max_residual:.3e}, \
         integration by parts <= {max_green:.3e}",
        config.frequency.radii.len()
    ));

    write_csv(
        sink,
        "pohozaev.csv",
        &[
            "r",
            "generator_flux",
            "boundary_energy",
            "volume_energy",
            "boundary_potential",
            "potential_drift",
            "volume_potential",
            "residual",
            "int_by_parts_residual",
        ],
        &rows,
    )?;
    write_json(
        sink,
        "pohozaev.json",
        &json!({
            "max_residual": max_residual,
            "max_int_by_parts_residual": max_green,
            "radii": config.frequency.radii,
        }),
    )?;
    Ok(())
}

fn run_report(
    config: &Config,
    sink: &mut Option<OutputWriter>,
    lines: &mut Vec<String>,
) -> Result<()> {
    let quad = build_quadrature(config)?;
    let checks = scaling_checks(&quad)?;
    lines.push(format!(
        "gauge-ball volume {:.12} (quadrature) vs {:.12} (Cartesian oracle): \
         defect {:.3e}",
        checks.volume_quadrature, checks.volume_oracle, checks.volume_defect
    ));
    lines.push(format!(
        "dilation defect {:.3e}, perimeter defect {:.3e}, coarea order {:.2}",
        checks.dilation_defect, checks.surface_defect, checks.coarea_order
    ));

    // Integer-degree eigenvalue table (established for h >= 2).
    let mut formula_rows: Vec<Vec<String>> = Vec::new();
    let mut formula_json: Vec<serde_json::Value> = Vec::new();
    if config.params.h >= 2 {
        for degree in 0..=(config.spectrum.count as u32 + 2) {
            let mu = mu_from_degree(&config.params, degree)?;
            formula_rows.push(vec![degree.to_string(), float_cell(mu)]);
            formula_json.push(json!({ "degree": degree, "mu": mu }));
        }
        lines.push(format!(
            "degree formula tabulated for degrees 0..={}",
            config.spectrum.count + 2
        ));
    } else {
        lines.push("degree formula is conjectural for h = 1; no table emitted".into());
    }

    if !formula_rows.is_empty() {
        write_csv(sink, "formula.csv", &["degree", "mu"], &formula_rows)?;
    }
    write_json(
        sink,
        "report.json",
        &json!({
            "plain_mass": quad.total_plain_mass(),
            "psi_mass": quad.total_psi_mass(),
            "volume_quadrature": checks.volume_quadrature,
            "volume_oracle": checks.volume_oracle,
            "volume_defect": checks.volume_defect,
            "dilation_defect": checks.dilation_defect,
            "surface_defect": checks.surface_defect,
            "coarea_order": checks.coarea_order,
            "formula_conjectural": config.params.h < 2,
            "formula": formula_json,
        }),
    )?;
    Ok(())
}
