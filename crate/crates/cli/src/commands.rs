use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vancal_core::calibration::{
    build_vanishing_calibration, sum_pair_calibration, verify_pair, CalibrationCheckOptions, WedgeCoordinates,
};
use vancal_core::current::{ball_pair_check, calibration_inequality_check, parse_mesh};
use vancal_core::cutoff::{admissible_log_grid, angle_threshold, make_params, verify_inequality_one, CutoffParams};
use vancal_core::exterior::{comass, comass_oracle_refined, AlternatingTensor, ComassOptions, ConstantField, FormField};
use vancal_core::fermi::{linearity_error, verify_first_order, Polynomial, SurfacePreset};
use vancal_core::numeric::GridBox;
use vancal_core::retraction::{
    homogeneity_error, idempotence_error, level_set_error, max_volume_scaling, verify_area_nonincreasing, RetractionMap,
};
use vancal_core::subspace::{intersect_and_split, OrientedSubspace};

use crate::config::PairConfig;
use crate::report::VerificationReport;

#[derive(Debug, Parser)]
#[command(name = "vancal", version, about = "Construct and verify vanishing calibrations")]
pub struct Cli {
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the cutoff inequality for one parameter or tabulate a sweep.
    Cutoff(CutoffArgs),
    /// Tabulate the intersection-angle threshold.
    Threshold(ThresholdArgs),
    /// Run the plane-pair pipeline from a configuration file.
    VerifyPair(VerifyPairArgs),
    /// Check that the retraction does not increase n-volume.
    Retraction(RetractionArgs),
    /// Check the first-order volume expansion on a test surface.
    Fermi(FermiArgs),
    /// Comass of a covector read from a file.
    Comass(ComassArgs),
    /// Pair a triangulated current with a form field.
    Integrate(IntegrateArgs),
}

#[derive(Debug, Args)]
pub struct CutoffArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
    pub a: Option<f64>,
    /// Number of log-spaced admissible values of a to tabulate (CSV output).
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Points of the t-grid.
    #[arg(long, default_value_t = 10_000)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 3)]
    pub from: usize,
    #[arg(long, default_value_t = 10)]
    pub to: usize,
}

#[derive(Debug, Args)]
pub struct VerifyPairArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Points per axis of the comass grid (overrides the config).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol_comass: f64,
    /// Smallest accepted convergence order of the closedness residual.
    #[arg(long, default_value_t = 1.8)]
    pub tol_closed: f64,
}

#[derive(Debug, Args)]
pub struct RetractionArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2.5)]
    pub a: f64,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 100)]
    pub planes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Replace gamma by 1 - c t^2 with this c, bypassing admissibility.
    #[arg(long, hide = true)]
    pub force_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SurfaceKind {
    Sphere,
    Cylinder,
    Catenoid,
    Plane,
    Graph,
}

#[derive(Debug, Args)]
pub struct FermiArgs {
    #[arg(long, value_enum)]
    pub surface: SurfaceKind,
    /// Dimension of the sphere, plane or graph.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Codimension of the plane.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Graph component in x0, x1, ..; repeat for higher codimension.
    #[arg(long)]
    pub poly: Vec<String>,
    /// Parameter point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    /// Normal direction in the normal frame, comma separated (normalized).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01,0.005,0.0025")]
    pub ys: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ComassArgs {
    /// First line `N k`, then one term per line: `coefficient i_1 .. i_k` (0-based axes).
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200_000)]
    pub oracle_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FieldKind {
    /// Constant coordinate form on the axes given by `--axes`.
    Volume,
    /// Vanishing calibration around the first n axes.
    Vanishing,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, value_enum)]
    pub field: FieldKind,
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2.5)]
    pub a: f64,
    /// Dimension of the l-block (the last axes).
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
}

/// What a command produced: a JSON report or a CSV table, and whether it passed.
#[derive(Debug)]
pub enum Output {
    Report(VerificationReport),
    Table { csv: String, pass: bool },
}

impl Output {
    pub fn passed(&self) -> bool {
        match self {
            Self::Report(r) => r.passed(),
            Self::Table { pass, .. } => *pass,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Self::Report(r) => r.to_json() + "\n",
            Self::Table { csv, .. } => csv.clone(),
        }
    }
}

pub fn run(command: &Command) -> Result<Output, String> {
    let start = std::time::Instant::now();
    let mut output = match command {
        Command::Cutoff(args) => cutoff(args),
        Command::Threshold(args) => threshold(args),
        Command::VerifyPair(args) => verify_pair_cmd(args),
        Command::Retraction(args) => retraction(args),
        Command::Fermi(args) => fermi(args),
        Command::Comass(args) => comass_cmd(args),
        Command::Integrate(args) => integrate(args),
    }?;
    if let Output::Report(r) = &mut output {
        r.wall_time_ms = start.elapsed().as_millis() as u64;
    }
    Ok(output)
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("serializable")
}

fn cutoff(args: &CutoffArgs) -> Result<Output, String> {
    if let Some(count) = args.sweep {
        let grid = admissible_log_grid(args.n, count).map_err(err)?;
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["n", "a", "c", "theta", "delta", "kappa", "lower_slack", "upper_slack", "pass"])
            .map_err(err)?;
        let mut all = true;
        for a in grid {
            let params = make_params(args.n, a).map_err(err)?;
            let report = verify_inequality_one(&params, args.grid).map_err(err)?;
            all &= report.pass;
            writer
                .write_record([
                    args.n.to_string(),
                    a.to_string(),
                    params.c.to_string(),
                    params.theta.to_string(),
                    params.delta.to_string(),
                    params.kappa.to_string(),
                    report.lower_slack.to_string(),
                    report.upper_slack.to_string(),
                    report.pass.to_string(),
                ])
                .map_err(err)?;
        }
        let csv = String::from_utf8(writer.into_inner().map_err(err)?).map_err(err)?;
        return Ok(Output::Table { csv, pass: all });
    }

    let a = args.a.expect("clap requires a without sweep");
    let mut report = VerificationReport::new("cutoff", 0);
    report.param("n", args.n).param("a", a).grid("t", args.grid);
    let params = match make_params(args.n, a) {
        Ok(p) => p,
        Err(e) => {
            report.param("error", e.to_string()).holds("admissible", false);
            return Ok(Output::Report(report));
        }
    };
    let ir = verify_inequality_one(&params, args.grid).map_err(err)?;
    report
        .holds("admissible", true)
        .push("kappa_positive", params.kappa > 0.0, params.kappa, 0.0, 0.0)
        .at_least("lower_slack", ir.lower_slack, 0.0, 1e-12)
        .at_least("upper_slack", ir.upper_slack, 0.0, 1e-12);
    if ir.axis_in_range {
        report.close_to("min_middle_equals_kappa", ir.min_middle, params.kappa, 1e-6);
    }
    report.details = json!({ "params": to_json(&params), "inequality": to_json(&ir) });
    Ok(Output::Report(report))
}

fn threshold(args: &ThresholdArgs) -> Result<Output, String> {
    if args.from > args.to {
        return Err(format!("empty range {}..{}", args.from, args.to));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["n", "threshold", "degrees", "note"]).map_err(err)?;
    let mut previous = f64::INFINITY;
    let mut decreasing = true;
    for n in args.from..=args.to {
        let value = angle_threshold(n).map_err(err)?;
        decreasing &= value < previous;
        previous = value;
        let note = if n == 4 { "pi/3" } else { "" };
        writer
            .write_record([n.to_string(), format!("{value:.12}"), format!("{:.9}", value.to_degrees()), note.to_string()])
            .map_err(err)?;
    }
    let csv = String::from_utf8(writer.into_inner().map_err(err)?).map_err(err)?;
    Ok(Output::Table { csv, pass: decreasing })
}

fn verify_pair_cmd(args: &VerifyPairArgs) -> Result<Output, String> {
    let mut cfg: PairConfig = read(&args.config)?.parse()?;
    if let Some(grid) = args.grid {
        cfg.grid = grid;
    }
    let dim = cfg.plane1[0].len();
    let mut report = VerificationReport::new("verify-pair", cfg.seed);
    report
        .param("config", args.config.display())
        .param("n", cfg.n)
        .param("a", cfg.a)
        .param("plane1", format!("{:?}", cfg.plane1))
        .param("plane2", format!("{:?}", cfg.plane2))
        .param("half_width", cfg.half_width)
        .param("tol_comass", args.tol_comass)
        .param("tol_closed", args.tol_closed)
        .param("epsilons", format!("{:?}", cfg.epsilons))
        .param("quadrature_order", cfg.quadrature_order)
        .grid("comass_per_axis", cfg.grid)
        .grid("closedness_points", cfg.closedness_points)
        .grid("value_samples", cfg.value_samples)
        .grid("spot_checks", cfg.spot_checks)
        .grid("ball_divisions", cfg.ball_divisions);

    let p1 = OrientedSubspace::from_vectors(dim, &cfg.plane1).map_err(err)?;
    let p2 = OrientedSubspace::from_vectors(dim, &cfg.plane2).map_err(err)?;
    let pair = intersect_and_split(&p1, &p2).map_err(err)?;
    report.param("intersection_dim", pair.intersection.dim());
    let params = match make_params(cfg.n, cfg.a) {
        Ok(p) => p,
        Err(e) => {
            report.param("error", e.to_string()).holds("admissible", false);
            return Ok(Output::Report(report));
        }
    };
    let angle = pair.principal_angles.first().copied().unwrap_or(0.0);
    let budget = 2.0 * params.theta;
    report.push("angle_budget", angle > budget, angle, budget, 0.0);
    let mut details = json!({ "principal_angles": pair.principal_angles, "params": to_json(&params) });
    if angle <= budget {
        report.details = details;
        return Ok(Output::Report(report));
    }

    let cal = sum_pair_calibration(&params, &pair).map_err(err)?;
    let opts = CalibrationCheckOptions {
        per_axis: cfg.grid,
        comass_tolerance: args.tol_comass,
        min_order: args.tol_closed,
        closedness_points: cfg.closedness_points,
        value_samples: cfg.value_samples,
        spot_checks: cfg.spot_checks,
        seed: cfg.seed,
        ..CalibrationCheckOptions::default()
    };
    let pr = verify_pair(&cal, &GridBox::cube(dim, cfg.half_width), &opts).map_err(err)?;
    report
        .at_most("grid_comass", pr.comass.max_comass, 1.0, args.tol_comass)
        .at_most("uncertified_grid_points", pr.comass.unchecked as f64, 0.0, 0.0)
        .at_most("wedge_overlap_points", pr.overlap_points as f64, 0.0, 0.0);
    if pr.closedness.exactly_closed {
        report.at_most("closedness_residual", *pr.closedness.residuals.last().expect("steps"), 0.0, 1e-10);
    } else {
        report.at_least("closedness_order", pr.closedness.fitted_order.unwrap_or(0.0), args.tol_closed, 0.0);
    }
    report
        .close_to("first_sheet_value", 1.0 + pr.first_value_error, 1.0, opts.value_tolerance)
        .close_to("second_sheet_value", 1.0 + pr.second_value_error, 1.0, opts.value_tolerance);
    details["pair"] = to_json(&pr);

    if cfg.ball_divisions > 0 {
        let balls = ball_pair_check(&cal, cfg.ball_divisions, cfg.quadrature_order, &cfg.epsilons).map_err(err)?;
        report.at_most("ball_pair_gap", (balls.total.mass - balls.total.pairing) / balls.total.mass, 0.0, 1e-6);
        for c in &balls.competitors {
            report
                .holds(&format!("competitor_{}_same_boundary", c.epsilon), c.same_boundary)
                .push(&format!("competitor_{}_mass_excess", c.epsilon), c.mass_excess > 0.0, c.mass_excess, 0.0, 0.0)
                .push(&format!("competitor_{}_pairing_deficit", c.epsilon), c.pairing_deficit > 0.0, c.pairing_deficit, 0.0, 0.0);
        }
        details["balls"] = to_json(&balls);
    }
    report.details = details;
    Ok(Output::Report(report))
}

fn retraction(args: &RetractionArgs) -> Result<Output, String> {
    let mut report = VerificationReport::new("retraction", args.seed);
    report
        .param("n", args.n)
        .param("a", args.a)
        .param("m", args.m)
        .param("tol", args.tol)
        .grid("samples", args.samples)
        .grid("planes_per_sample", args.planes);
    let coords = WedgeCoordinates::standard(args.n, args.m, 0);
    let map = match args.force_c {
        Some(c) => {
            report.param("force_c", c);
            let a = (args.n * (args.n - 2)) as f64 / c;
            RetractionMap::unchecked(&CutoffParams::unchecked(args.n, a), &coords).map_err(err)?
        }
        None => match make_params(args.n, args.a) {
            Ok(params) => RetractionMap::new(&params, &coords).map_err(err)?,
            Err(e) => {
                report.param("error", e.to_string()).holds("admissible", false);
                return Ok(Output::Report(report));
            }
        },
    };
    let area = verify_area_nonincreasing(&map, args.samples, args.planes, args.seed);
    let mut x0 = vec![0.5; args.n];
    x0.extend(vec![0.0; args.m]);
    let plane_scaling = max_volume_scaling(&map.differential(&x0, 1e-5).map_err(err)?, args.n);
    let homogeneity = homogeneity_error(&map, 100, args.seed);
    let idempotence = idempotence_error(&map, 100, args.seed);
    let level_set = level_set_error(&map, 64);
    report
        .at_most("plane_volume_scaling", area.max_plane_scaling, 1.0, args.tol)
        .at_most("top_volume_scaling", area.max_top_scaling, 1.0, args.tol)
        .close_to("x_plane_scaling", plane_scaling, 1.0, 1e-8)
        .at_most("homogeneity", homogeneity, 0.0, 1e-12)
        .at_most("idempotence", idempotence, 0.0, 1e-12)
        .at_most("level_sets", level_set, 0.0, 1e-10);
    report.details = json!({ "area": to_json(&area), "params": to_json(map.params()) });
    Ok(Output::Report(report))
}

fn fermi(args: &FermiArgs) -> Result<Output, String> {
    let preset = match args.surface {
        SurfaceKind::Sphere => SurfacePreset::Sphere { n: args.n, radius: args.radius },
        SurfaceKind::Cylinder => SurfacePreset::Cylinder { radius: args.radius },
        SurfaceKind::Catenoid => SurfacePreset::Catenoid { scale: args.scale },
        SurfaceKind::Plane => SurfacePreset::Plane { n: args.n, m: args.m },
        SurfaceKind::Graph => {
            let components = args.poly.iter().map(|p| p.parse::<Polynomial>()).collect::<Result<Vec<_>, _>>().map_err(err)?;
            SurfacePreset::Graph { n: args.n, components }
        }
    };
    let patch = preset.build().map_err(err)?;
    let u = args.point.clone().unwrap_or_else(|| match args.surface {
        SurfaceKind::Cylinder | SurfaceKind::Catenoid => vec![0.3, 0.2],
        _ => vec![0.1; patch.dim()],
    });
    let mut nu = args.direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; patch.codim()];
        e[0] = 1.0;
        e
    });
    let norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err("normal direction must be nonzero".into());
    }
    nu.iter_mut().for_each(|v| *v /= norm);

    let mut report = VerificationReport::new("fermi", 0);
    report
        .param("surface", patch.name())
        .param("preset", format!("{preset:?}"))
        .param("point", format!("{u:?}"))
        .param("direction", format!("{nu:?}"))
        .param("ys", format!("{:?}", args.ys))
        .grid("displacements", args.ys.len());
    let fr = verify_first_order(&patch, &u, &nu, &args.ys).map_err(err)?;
    report.push("beta_vs_mean_curvature", fr.pass, fr.beta, -2.0 * fr.mean_curvature, fr.tolerance * fr.mean_curvature.abs().max(1.0));
    match &preset {
        SurfacePreset::Sphere { n, radius } => {
            let want = -2.0 * *n as f64 / radius * nu[0];
            report.close_to("beta_sphere_closed_form", fr.beta, want, 1e-3 * want.abs());
        }
        SurfacePreset::Catenoid { .. } | SurfacePreset::Plane { .. } => {
            report.close_to("beta_minimal", fr.beta, 0.0, 1e-3);
        }
        _ => {}
    }
    let linearity = linearity_error(&patch, &u, &args.ys).map_err(err)?;
    report.at_most("linearity", linearity, 0.0, 1e-2);
    report.details = to_json(&fr);
    Ok(Output::Report(report))
}

fn parse_covector(text: &str) -> Result<AlternatingTensor, String> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or("empty covector file")?;
    let head: Vec<usize> = header.split_whitespace().map(|t| t.parse().map_err(|_| format!("line 1: bad header {header:?}"))).collect::<Result<_, _>>()?;
    let [dim, degree] = head[..] else {
        return Err("line 1: expected `N k`".into());
    };
    let mut form = AlternatingTensor::zeros(dim, degree).map_err(err)?;
    for (line, text) in lines {
        let mut parts = text.split_whitespace();
        let coef: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or(format!("line {line}: bad coefficient"))?;
        let axes: Vec<usize> = parts.map(|t| t.parse().map_err(|_| format!("line {line}: bad axis {t:?}"))).collect::<Result<_, _>>()?;
        if axes.len() != degree {
            return Err(format!("line {line}: expected {degree} axes"));
        }
        let term = AlternatingTensor::basis(dim, &axes).map_err(|e| format!("line {line}: {e}"))?;
        form.add_scaled(coef, &term).map_err(err)?;
    }
    Ok(form)
}

fn comass_cmd(args: &ComassArgs) -> Result<Output, String> {
    let form = parse_covector(&read(&args.file)?)?;
    let mut report = VerificationReport::new("comass", args.seed);
    report
        .param("file", args.file.display())
        .param("dim", form.dim())
        .param("degree", form.degree())
        .param("coefficients", format!("{:?}", form.coeffs()))
        .grid("oracle_samples", args.oracle_samples);
    let result = comass(&form, &ComassOptions { seed: args.seed, ..ComassOptions::default() }).map_err(err)?;
    let oracle = comass_oracle_refined(&form, args.oracle_samples, args.seed);
    report
        .at_most("oracle_below_optimizer", oracle, result.value, 1e-9)
        .close_to("oracle_agreement", oracle, result.value, 1e-6)
        .at_most("comass_below_norm", result.value, form.norm(), 1e-12);
    let frame: Vec<Vec<f64>> = result.frame.column_iter().map(|c| c.iter().copied().collect()).collect();
    report.details = json!({ "comass": result.value, "oracle": oracle, "frame": frame, "iterations": result.iterations });
    Ok(Output::Report(report))
}

fn integrate(args: &IntegrateArgs) -> Result<Output, String> {
    let mesh = parse_mesh(&read(&args.mesh)?).map_err(err)?;
    let dim = mesh.ambient_dim();
    let mut report = VerificationReport::new("integrate", 0);
    report
        .param("mesh", args.mesh.display())
        .param("field", format!("{:?}", args.field).to_lowercase())
        .param("order", args.order)
        .grid("simplices", mesh.len());
    let field: Box<dyn FormField> = match args.field {
        FieldKind::Volume => {
            let axes = args.axes.clone().unwrap_or_else(|| (0..mesh.degree()).collect());
            report.param("axes", format!("{axes:?}"));
            Box::new(ConstantField(AlternatingTensor::basis(dim, &axes).map_err(err)?))
        }
        FieldKind::Vanishing => {
            report.param("n", args.n).param("a", args.a).param("k", args.k);
            if args.n + args.k >= dim {
                return Err(format!("n + k = {} leaves no y-block in R^{dim}", args.n + args.k));
            }
            let params = make_params(args.n, args.a).map_err(err)?;
            let coords = WedgeCoordinates::standard(args.n, dim - args.n - args.k, args.k);
            Box::new(build_vanishing_calibration(&params, &coords).map_err(err)?)
        }
    };
    let check = calibration_inequality_check(&mesh, &field, 1.0, args.order).map_err(err)?;
    report.at_least("calibration_inequality_slack", check.slack, 0.0, 1e-8);
    report.details = to_json(&check);
    Ok(Output::Report(report))
}
