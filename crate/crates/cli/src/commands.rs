use std::path::Path;

use quadconc_core::bernstein::{
    check_bernstein, default_square_grid, default_subgaussian_grid, minimal_k, verify_mgf_square,
    verify_mgf_subgaussian, DEFAULT_P_MAX,
};
use quadconc_core::bounds::{bernstein_tail, deviation_curve, tail_curve};
use quadconc_core::grid::parse_grid;
use quadconc_core::linalg::{scaled_norm_stats, OP_NORM_TOL};
use quadconc_core::montecarlo::{
    compare_bounds, exact_mean, exact_tail_enumerate, exact_variance, global_k, sigmas_of,
    simulate_tail,
};
use quadconc_core::{
    BoundInputs, BoundKind, DistributionSpec, KChoice, MgfCheckReport, SigmaDiag, SimConfig,
    SquareMatrix,
};
use serde::Serialize;
use serde_json::json;

use crate::report::{Cell, Report, RunManifest};
use crate::{CliError, Command, KArg, Sampling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Subgaussian,
    CenteredSquare,
    Square,
}

const HW_DEFAULT_C: f64 = 1.0;
const BOUND_KINDS: [BoundKind; 3] = [
    BoundKind::GaussianChaosImplied,
    BoundKind::HansonWright,
    BoundKind::BernsteinImproved,
];

pub fn dispatch(command: Command, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(argv)?;
    let (report, output) = match command {
        Command::Certify {
            dist,
            k,
            p_max,
            output,
        } => (certify(&mut manifest, &dist, k, p_max)?, output),
        Command::MgfVerify {
            dist,
            k,
            which,
            p_max,
            output,
        } => (mgf_verify(&mut manifest, &dist, k, which, p_max)?, output),
        Command::Bounds {
            matrix,
            sigmas,
            dists,
            k,
            hw_c,
            t_grid,
            x_grid,
            output,
        } => {
            let a = load_matrix(&mut manifest, &matrix)?;
            let scales = match (sigmas, dists) {
                (Some(path), _) => Scales::Sigmas(load_sigmas(&mut manifest, &path)?),
                (None, Some(path)) => Scales::Dists(load_dists(&mut manifest, &path, a.n())?),
                (None, None) => unreachable!("clap requires --sigmas or --dists"),
            };
            let grid = match (t_grid, x_grid) {
                (Some(t), _) => GridArg::T(parse_grid(&t)?),
                (None, Some(x)) => GridArg::X(parse_grid(&x)?),
                (None, None) => unreachable!("clap requires a grid"),
            };
            (bounds(manifest, &a, scales, k, hw_c, grid)?, output)
        }
        Command::Simulate {
            matrix,
            dists,
            t_grid,
            k,
            sampling,
            output,
        } => {
            let a = load_matrix(&mut manifest, &matrix)?;
            let dists = load_dists(&mut manifest, &dists, a.n())?;
            let t_grid = parse_grid(&t_grid)?;
            (
                simulate(manifest, &a, &dists, &t_grid, k, &sampling)?,
                output,
            )
        }
        Command::Compare {
            matrix,
            dists,
            k,
            hw_c,
            x_grid,
            sampling,
            output,
        } => {
            let a = load_matrix(&mut manifest, &matrix)?;
            let dists = load_dists(&mut manifest, &dists, a.n())?;
            let x_grid = parse_grid(&x_grid)?;
            (
                compare(manifest, &a, &dists, k, hw_c, &x_grid, &sampling)?,
                output,
            )
        }
        Command::Enumerate {
            matrix,
            dists,
            t_grid,
            k,
            output,
        } => {
            let a = load_matrix(&mut manifest, &matrix)?;
            let dists = load_dists(&mut manifest, &dists, a.n())?;
            let t_grid = parse_grid(&t_grid)?;
            (enumerate(manifest, &a, &dists, &t_grid, k)?, output)
        }
    };
    report.emit(output.format, output.out.as_ref())
}

fn load_matrix(m: &mut RunManifest, path: &Path) -> Result<SquareMatrix, CliError> {
    let text = m.read_input("matrix", path)?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        SquareMatrix::from_json_str(&text)
    } else {
        SquareMatrix::from_csv_str(&text)
    };
    parsed.map_err(|e| CliError::Usage(format!("matrix file {}: {e}", path.display())))
}

fn load_sigmas(m: &mut RunManifest, path: &Path) -> Result<SigmaDiag, CliError> {
    let text = m.read_input("sigmas", path)?;
    SigmaDiag::from_json_str(&text)
        .map_err(|e| CliError::Usage(format!("sigmas file {}: {e}", path.display())))
}

fn load_dist(m: &mut RunManifest, path: &Path) -> Result<DistributionSpec, CliError> {
    let text = m.read_input("dist", path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("distribution file {}: {e}", path.display())))
}

/// One spec broadcast to every coordinate, or an array of `n` specs.
fn load_dists(
    m: &mut RunManifest,
    path: &Path,
    n: usize,
) -> Result<Vec<DistributionSpec>, CliError> {
    let text = m.read_input("dists", path)?;
    let bad = |e: String| CliError::Usage(format!("distribution file {}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if value.is_array() {
        let dists: Vec<DistributionSpec> =
            serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        if dists.len() != n {
            return Err(bad(format!(
                "has {} entries but the matrix is {n}x{n}",
                dists.len()
            )));
        }
        Ok(dists)
    } else {
        let d: DistributionSpec = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
        Ok(vec![d; n])
    }
}

/// Resolves `--K`, reporting the per-coordinate values for `auto` on stderr.
fn resolve_k(
    k: KArg,
    dists: Option<&[DistributionSpec]>,
) -> Result<(f64, Option<Vec<f64>>), CliError> {
    match k {
        KArg::Value(k) => Ok((k, None)),
        KArg::Auto => {
            let dists = dists.ok_or_else(|| {
                CliError::Usage(
                    "--K auto needs coordinate laws; pass --dists instead of --sigmas".into(),
                )
            })?;
            let (k, per) = global_k(dists, DEFAULT_P_MAX)?;
            announce_auto_k(k, &per);
            Ok((k, Some(per)))
        }
    }
}

fn announce_auto_k(k: f64, per: &[f64]) {
    for (i, ki) in per.iter().enumerate() {
        eprintln!(
            "K auto: coordinate {i}: minimal K = {}",
            quadconc_core::fmt::sig17(*ki)
        );
    }
    eprintln!("K auto: using K = {}", quadconc_core::fmt::sig17(k));
}

fn hw_constant(hw_c: Option<f64>) -> f64 {
    hw_c.unwrap_or_else(|| {
        eprintln!(
            "note: Hanson-Wright column uses c = {HW_DEFAULT_C}; the inequality only holds for \
             some unspecified absolute constant, pass --hw-c to choose it"
        );
        HW_DEFAULT_C
    })
}

fn certify(m: &mut RunManifest, dist: &Path, k: KArg, p_max: u32) -> Result<Report, CliError> {
    let d = load_dist(m, dist)?;
    let minimal = match k {
        KArg::Auto => Some(minimal_k(&d, p_max)?),
        KArg::Value(_) => None,
    };
    let k = match (&minimal, k) {
        (Some(mk), _) => mk.k,
        (None, KArg::Value(k)) => k,
        (None, KArg::Auto) => unreachable!(),
    };
    let cert = check_bernstein(&d, k, p_max)?;

    #[derive(Serialize)]
    struct Data<'a> {
        distribution: &'a DistributionSpec,
        minimal_k: Option<&'a quadconc_core::MinimalK>,
        certificate: &'a quadconc_core::BernsteinCertificate,
    }
    let data = Data {
        distribution: &d,
        minimal_k: minimal.as_ref(),
        certificate: &cert,
    };
    let mut report = Report::new(m.clone(), &data, vec!["p", "ratio"]);
    report.note("distribution", d.kind_name());
    report.note("sigma2", cert.sigma2);
    report.note("K", cert.k);
    report.note("satisfied", cert.satisfied);
    report.note("argmax_p", cert.argmax_p);
    if let Some(mk) = &minimal {
        report.note("minimal_K_lower_bound_only", mk.lower_bound_only);
    }
    if let Some(p) = cert.indeterminate_from {
        report.note("indeterminate_from", p);
    }
    for (i, r) in cert.ratios.iter().enumerate() {
        report.row(vec![(cert.p_min + i as u32).into(), (*r).into()]);
    }
    Ok(report)
}

fn mgf_verify(
    m: &mut RunManifest,
    dist: &Path,
    k: KArg,
    which: Option<Which>,
    p_max: u32,
) -> Result<Report, CliError> {
    let d = load_dist(m, dist)?;
    let k = match k {
        KArg::Value(k) => k,
        KArg::Auto => minimal_k(&d, p_max)?.k,
    };
    let selected = match which {
        Some(w) => vec![w],
        None => vec![Which::Subgaussian, Which::CenteredSquare, Which::Square],
    };
    let checks = selected
        .into_iter()
        .map(|w| match w {
            Which::Subgaussian => verify_mgf_subgaussian(&d, k, &default_subgaussian_grid(k)),
            Which::CenteredSquare => verify_mgf_square(&d, k, &default_square_grid(k), true),
            Which::Square => verify_mgf_square(&d, k, &default_square_grid(k), false),
        })
        .collect::<Result<Vec<MgfCheckReport>, _>>()?;

    let all_nonnegative = checks.iter().all(|c| c.all_nonnegative);
    let data =
        json!({ "distribution": d, "K": k, "all_nonnegative": all_nonnegative, "checks": checks });
    let mut report = Report::new(m.clone(), data, vec!["inequality", "s", "margin"]);
    report.note("distribution", d.kind_name());
    report.note("K", k);
    report.note("all_nonnegative", all_nonnegative);
    for c in &checks {
        let name = serde_json::to_value(c.inequality).expect("enum serializes");
        let name = name.as_str().unwrap_or_default();
        for (s, margin) in c.s_grid.iter().zip(&c.margins) {
            report.row(vec![name.into(), (*s).into(), (*margin).into()]);
        }
    }
    Ok(report)
}

enum Scales {
    Sigmas(SigmaDiag),
    Dists(Vec<DistributionSpec>),
}

enum GridArg {
    T(Vec<f64>),
    X(Vec<f64>),
}

fn bounds(
    m: RunManifest,
    a: &SquareMatrix,
    scales: Scales,
    k: KArg,
    hw_c: Option<f64>,
    grid: GridArg,
) -> Result<Report, CliError> {
    let (sig, dists) = match scales {
        Scales::Sigmas(s) => (s, None),
        Scales::Dists(d) => (sigmas_of(&d), Some(d)),
    };
    let (k, per_coordinate_k) = resolve_k(k, dists.as_deref())?;
    let norms = scaled_norm_stats(a, &sig, OP_NORM_TOL)?;
    let inputs = BoundInputs::new(norms, k, hw_constant(hw_c))?;

    let (grid_name, values, curves) = match grid {
        GridArg::T(t) => {
            let curves = BOUND_KINDS
                .iter()
                .map(|&w| tail_curve(&inputs, w, &t).map(|c| c.probs))
                .collect::<Result<Vec<_>, _>>()?;
            ("t", t, curves)
        }
        GridArg::X(x) => {
            let curves = BOUND_KINDS
                .iter()
                .map(|&w| deviation_curve(&inputs, w, &x).map(|c| c.deviations))
                .collect::<Result<Vec<_>, _>>()?;
            ("x", x, curves)
        }
    };
    let quantity = if grid_name == "t" {
        "tail_probability"
    } else {
        "deviation"
    };
    let data = json!({
        "K": k,
        "per_coordinate_k": per_coordinate_k,
        "hw_constant_c": inputs.hw_constant_c,
        "norms": norms,
        "quantity": quantity,
        "grid": values,
        "gaussian_chaos_implied": curves[0],
        "hanson_wright": curves[1],
        "bernstein_improved": curves[2],
    });
    let columns = vec![
        grid_name,
        "gaussian_chaos_implied",
        "hanson_wright",
        "bernstein_improved",
    ];
    let mut report = Report::new(m, data, columns);
    report.note("quantity", quantity);
    report.note("K", k);
    report.note("hw_constant_c", inputs.hw_constant_c);
    report.note("hs", norms.hs);
    report.note("op", norms.op);
    report.note("hs_right_scaled", norms.hs_right_scaled);
    report.note("hs_double_scaled", norms.hs_double_scaled);
    report.note("op_double_scaled", norms.op_double_scaled);
    for (i, v) in values.iter().enumerate() {
        report.row(vec![
            (*v).into(),
            curves[0][i].into(),
            curves[1][i].into(),
            curves[2][i].into(),
        ]);
    }
    Ok(report)
}

fn sim_config(s: &Sampling) -> Result<SimConfig, CliError> {
    let cfg = SimConfig {
        sample_count: s.n_samples,
        seed: s.seed,
        chunk_size: s.chunk_size,
        confidence: s.confidence,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `bernstein_tail` on `t_grid` when a scale was requested.
fn optional_bernstein(
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    k: Option<KArg>,
    t_grid: &[f64],
) -> Result<Option<(f64, Vec<f64>)>, CliError> {
    let Some(k) = k else { return Ok(None) };
    let (k, _) = resolve_k(k, Some(dists))?;
    let norms = scaled_norm_stats(a, &sigmas_of(dists), OP_NORM_TOL)?;
    let inputs = BoundInputs::new(norms, k, HW_DEFAULT_C)?;
    Ok(Some((
        k,
        t_grid.iter().map(|&t| bernstein_tail(&inputs, t)).collect(),
    )))
}

fn simulate(
    mut m: RunManifest,
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    t_grid: &[f64],
    k: Option<KArg>,
    sampling: &Sampling,
) -> Result<Report, CliError> {
    let cfg = sim_config(sampling)?;
    m.seed = Some(cfg.seed);
    let bern = optional_bernstein(a, dists, k, t_grid)?;
    let estimates = simulate_tail(a, dists, &cfg, t_grid)?;
    let mean = exact_mean(a, &sigmas_of(dists))?;
    let variance = exact_variance(a, dists)?;

    let data = json!({
        "config": cfg,
        "exact_mean": mean,
        "exact_variance": variance,
        "K": bern.as_ref().map(|b| b.0),
        "estimates": estimates,
        "bernstein_tail": bern.as_ref().map(|b| &b.1),
    });
    let mut columns = vec![
        "t",
        "exceed_count",
        "sample_count",
        "p_hat",
        "ci_low",
        "ci_high",
    ];
    if bern.is_some() {
        columns.push("bernstein_tail");
    }
    let mut report = Report::new(m, data, columns);
    report.note("sample_count", cfg.sample_count as u64);
    report.note("chunk_size", cfg.chunk_size as u64);
    report.note("confidence", cfg.confidence);
    report.note("exact_mean", mean);
    report.note("exact_variance", variance);
    if let Some((k, _)) = &bern {
        report.note("K", *k);
    }
    for (i, e) in estimates.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            e.t.into(),
            e.exceed_count.into(),
            e.sample_count.into(),
            e.p_hat.into(),
            e.ci_low.into(),
            e.ci_high.into(),
        ];
        if let Some((_, tail)) = &bern {
            row.push(tail[i].into());
        }
        report.row(row);
    }
    Ok(report)
}

fn compare(
    mut m: RunManifest,
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    k: KArg,
    hw_c: Option<f64>,
    x_grid: &[f64],
    sampling: &Sampling,
) -> Result<Report, CliError> {
    let cfg = sim_config(sampling)?;
    m.seed = Some(cfg.seed);
    let choice = match k {
        KArg::Value(k) => KChoice::Fixed(k),
        KArg::Auto => KChoice::Auto,
    };
    let result = compare_bounds(a, dists, &cfg, x_grid, choice, hw_constant(hw_c))?;
    if let Some(per) = &result.per_coordinate_k {
        announce_auto_k(result.k, per);
    }

    let columns = vec![
        "x",
        "level",
        "empirical_quantile",
        "quantile_upper_confidence",
        "bernstein_deviation",
        "hanson_wright_deviation",
        "gaussian_chaos_deviation",
    ];
    let data = json!({ "config": cfg, "report": result });
    let mut report = Report::new(m, data, columns);
    report.note("sample_count", cfg.sample_count as u64);
    report.note("chunk_size", cfg.chunk_size as u64);
    report.note("confidence", cfg.confidence);
    report.note("K", result.k);
    report.note("hw_constant_c", result.hw_constant_c);
    report.note("degenerate", result.degenerate);
    for r in &result.rows {
        report.row(vec![
            r.x.into(),
            r.level.into(),
            r.empirical_quantile.into(),
            r.quantile_upper_confidence.into(),
            r.bernstein_deviation.into(),
            r.hanson_wright_deviation.into(),
            r.gaussian_chaos_deviation.into(),
        ]);
    }
    Ok(report)
}

fn enumerate(
    m: RunManifest,
    a: &SquareMatrix,
    dists: &[DistributionSpec],
    t_grid: &[f64],
    k: Option<KArg>,
) -> Result<Report, CliError> {
    let bern = optional_bernstein(a, dists, k, t_grid)?;
    let tails = exact_tail_enumerate(a, dists, t_grid)?;
    let mean = exact_mean(a, &sigmas_of(dists))?;

    let data = json!({
        "exact_mean": mean,
        "t_grid": t_grid,
        "exact_tail": tails,
        "K": bern.as_ref().map(|b| b.0),
        "bernstein_tail": bern.as_ref().map(|b| &b.1),
    });
    let mut columns = vec!["t", "exact_tail"];
    if bern.is_some() {
        columns.push("bernstein_tail");
    }
    let mut report = Report::new(m, data, columns);
    report.note("exact_mean", mean);
    if let Some((k, _)) = &bern {
        report.note("K", *k);
    }
    for (i, (t, p)) in t_grid.iter().zip(&tails).enumerate() {
        let mut row: Vec<Cell> = vec![(*t).into(), (*p).into()];
        if let Some((_, tail)) = &bern {
            row.push(tail[i].into());
        }
        report.row(row);
    }
    Ok(report)
}
